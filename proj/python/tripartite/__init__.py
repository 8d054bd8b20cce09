"""Python surface of the dual-network noisy-label training lab."""

from tripartite._core import (
    LabeledDataset,
    TransitionMatrix,
    build_noise_matrix,
    build_pairflip,
    build_symmetric,
    corrupt_dataset,
    default_config_json,
    fit_gmm_1d,
    gen_blobs,
    gen_two_moons,
    gmm_partition,
    load_dataset_csv,
    run_experiment_json,
    run_gradcheck,
    save_dataset_csv,
    small_loss_partition,
    split_dataset,
    tripartition,
)

__all__ = [
    "LabeledDataset",
    "TransitionMatrix",
    "build_noise_matrix",
    "build_pairflip",
    "build_symmetric",
    "corrupt_dataset",
    "default_config_json",
    "fit_gmm_1d",
    "gen_blobs",
    "gen_two_moons",
    "gmm_partition",
    "load_dataset_csv",
    "run_experiment_json",
    "run_gradcheck",
    "save_dataset_csv",
    "small_loss_partition",
    "split_dataset",
    "tripartition",
]
