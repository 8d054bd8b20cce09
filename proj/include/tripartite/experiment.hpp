#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tripartite/config.hpp"
#include "tripartite/dataset.hpp"
#include "tripartite/noise.hpp"
#include "tripartite/trainer.hpp"

namespace tripartite {

//! Training data with its labels corrupted per the noise config, the clean
//! test part, and the transition matrix that did the corrupting.
struct PreparedData {
  LabeledDataset train;
  LabeledDataset test;
  TransitionMatrix matrix;  // identity when the noise kind is "none"
};

//! Trains a small classifier on clean labels so its final-layer weights can
//! serve as class prototypes.
ClassifierState train_prototype_net(const LabeledDataset& clean, std::uint64_t seed,
                                    int hidden = 16, int epochs = 30, int batch_size = 64);

//! Builds the transition matrix a noise config describes. Realistic noise
//! auto-trains a prototype net on `clean_train` (true labels).
TransitionMatrix build_noise_matrix(const NoiseConfig& noise, const LabeledDataset& clean_train,
                                    std::uint64_t prototype_seed);

//! Generate, split, corrupt — deterministic in (config, config.seed).
PreparedData prepare_data(const ExperimentConfig& config);

//! Trainer assembly from a validated config and its prepared data.
TrainerSetup make_trainer_setup(const ExperimentConfig& config, const PreparedData& data);

//! In-memory end-to-end run (no files written).
TrainResult execute_run(const ExperimentConfig& config);

struct RunPaths {
  std::string trace_jsonl;
  std::string report_json;
  std::string partition_csv;
};

//! Full run with reporting under out_dir: trace.jsonl (one fixed-key-order
//! line per epoch), report.json, and the final-epoch partition CSV.
RunPaths run_experiment(const ExperimentConfig& config, const std::string& out_dir,
                        TrainResult* result_out = nullptr);

//! One trace line, exactly as run_experiment writes it.
std::string trace_line(const EpochTrace& t);

struct ComparisonPaths {
  std::string summary_csv;  // one row per criterion x strategy x seed
  std::string purity_csv;   // one row per criterion x strategy x seed x epoch
};

//! Runs every criterion x strategy combination over the listed seeds, with
//! identical data, noise, and initial networks shared within each seed.
//! Passing multiple strategies is the strategy-swap control experiment.
ComparisonPaths compare_criteria(const ExperimentConfig& config,
                                 const std::vector<Criterion>& criteria,
                                 const std::vector<NoisyStrategy>& strategies,
                                 const std::vector<std::uint64_t>& seeds,
                                 const std::string& out_dir);

enum class SweepParameter { LambdaH, LambdaN, NoiseRatio };

SweepParameter sweep_parameter_from_name(const std::string& name);
const char* sweep_parameter_name(SweepParameter p);

//! Applies `value` for `parameter` to a copy of the config (also refreshes
//! the small-loss default keep ratio when the noise ratio moves).
ExperimentConfig with_sweep_value(const ExperimentConfig& config, SweepParameter parameter,
                                  double value);

//! One run per value, shared seed; every value is validated before any run
//! starts. Writes out_dir/sweep.csv with value, final and best accuracy.
std::string run_sweep(const ExperimentConfig& config, SweepParameter parameter,
                      const std::vector<double>& values, const std::string& out_dir,
                      bool allow_ablation = false);

struct NoiseGenPaths {
  std::string matrix_csv;
  std::string dataset_csv;
  std::vector<double> row_sums;  // one per matrix row, for the verification printout
};

//! Builds the configured matrix against the configured dataset (realistic
//! noise auto-trains its prototype net), corrupts the full dataset, and
//! writes both files under out_dir.
NoiseGenPaths generate_noise(const ExperimentConfig& config, const std::string& out_dir);

}  // namespace tripartite
