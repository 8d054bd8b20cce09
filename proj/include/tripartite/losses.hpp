#pragma once

#include <vector>

#include "tripartite/augment.hpp"
#include "tripartite/net.hpp"
#include "tripartite/rng.hpp"
#include "tripartite/types.hpp"

namespace tripartite {

//! Coefficients combining the per-subset loss terms.
struct StrategyWeights {
  double lambda_h = 0.6;  // down-weights the hard-subset CE term
  double lambda_n = 1.0;  // scales the noisy-subset term

  //! Throws unless lambda_h is in (0,1) and lambda_n >= 0. With
  //! allow_ablation the lambda_h range relaxes to any positive value,
  //! which lets experiments probe what over-weighting ambiguous samples
  //! does to training.
  void validate(bool allow_ablation = false) const;
};

//! How the suspected-noisy subset contributes to training.
enum class NoisyStrategy {
  SelfSupervised,  // agreement between two augmented views, labels unused
  PseudoLabel,     // CE against model-generated labels
  Drop,            // excluded from the loss entirely
};

const char* noisy_strategy_name(NoisyStrategy s);

//! Loss value plus gradient wrt the probability matrix that produced it.
struct LossAndGrad {
  double value = 0.0;
  Matrix dprobs;  // same shape as the probs argument; zero rows for empty input
};

//! Two-view variant: gradients wrt both probability matrices.
struct PairLossAndGrad {
  double value = 0.0;
  Matrix dprobs_a;
  Matrix dprobs_b;
};

//! Mean cross-entropy of one-hot targets against probability rows.
//! Probabilities are clamped below at kProbFloor before the log; the
//! gradient is zeroed where the clamp engaged. Empty input gives value 0
//! and an empty gradient.
LossAndGrad cross_entropy(const Matrix& probs, const Matrix& targets_one_hot);

//! cross_entropy scaled by weight (used for the ambiguous subset).
LossAndGrad weighted_ce(const Matrix& probs, const Matrix& targets_one_hot, double weight);

//! Mean over samples of the summed squared per-class gap between two
//! probability rows for the same sample under different augmentations.
PairLossAndGrad consistency_mse(const Matrix& probs_a, const Matrix& probs_b);

//! Builds a one-hot row matrix from integer labels in [0, class_count).
Matrix one_hot(const std::vector<int>& labels, int class_count);

//! Row indices of a batch assigned to each of the three subsets.
struct BatchPartition {
  std::vector<int> clean_rows;
  std::vector<int> hard_rows;
  std::vector<int> noisy_rows;

  //! Throws unless every row in [0,n) appears exactly once across the
  //! three lists.
  void validate(int n) const;
};

struct StrategyOptions {
  StrategyWeights weights;
  NoisyStrategy noisy_strategy = NoisyStrategy::SelfSupervised;
  bool augment_clean_hard = false;  // optionally perturb supervised subsets too
};

//! Per-term values for one combined-loss evaluation. loss_hard already
//! includes its lambda_h weight; loss_noisy is the raw term, so
//! loss_total = loss_clean + lambda_n * loss_noisy + loss_hard.
struct LossBreakdown {
  double loss_clean = 0.0;
  double loss_hard = 0.0;
  double loss_noisy = 0.0;
  double loss_total = 0.0;
  int count_clean = 0;
  int count_hard = 0;
  int count_noisy = 0;
};

struct TotalLossResult {
  LossBreakdown breakdown;
  Gradients grads;
};

//! Evaluates the combined objective on one mini-batch and returns the
//! parameter gradients. Each term averages over its own subset; an empty
//! subset contributes zero loss and zero gradient. The self-supervised
//! noisy term draws two augmented views per sample via `rng`; pass
//! `pseudo_labels` (batch-aligned, only noisy rows read) when the noisy
//! strategy is PseudoLabel.
TotalLossResult total_loss(const Matrix& features, const std::vector<int>& given_labels,
                           const BatchPartition& partition, const ClassifierState& state,
                           const StrategyOptions& options, const Augmenter& augmenter, Rng& rng,
                           const std::vector<int>* pseudo_labels = nullptr);

}  // namespace tripartite
