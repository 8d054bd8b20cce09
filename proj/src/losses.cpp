#include "tripartite/losses.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace tripartite {

void StrategyWeights::validate(bool allow_ablation) const {
  if (!std::isfinite(lambda_h) || !std::isfinite(lambda_n))
    throw std::invalid_argument("strategy weights must be finite");
  if (lambda_n < 0.0) throw std::invalid_argument("lambda_n must be >= 0");
  if (allow_ablation) {
    if (!(lambda_h > 0.0)) throw std::invalid_argument("lambda_h must be > 0");
  } else if (!(lambda_h > 0.0 && lambda_h < 1.0)) {
    throw std::invalid_argument("lambda_h must lie in (0,1); pass allow_ablation to lift the cap");
  }
}

const char* noisy_strategy_name(NoisyStrategy s) {
  switch (s) {
    case NoisyStrategy::SelfSupervised: return "self_supervised";
    case NoisyStrategy::PseudoLabel: return "pseudo_label";
    case NoisyStrategy::Drop: return "drop";
  }
  return "unknown";
}

static void check_one_hot(const Matrix& targets) {
  for (Eigen::Index i = 0; i < targets.rows(); ++i) {
    int ones = 0;
    for (Eigen::Index c = 0; c < targets.cols(); ++c) {
      const double v = targets(i, c);
      if (v == 1.0)
        ++ones;
      else if (v != 0.0)
        throw std::invalid_argument("target row " + std::to_string(i) + " is not one-hot");
    }
    if (ones != 1)
      throw std::invalid_argument("target row " + std::to_string(i) + " is not one-hot");
  }
}

LossAndGrad cross_entropy(const Matrix& probs, const Matrix& targets_one_hot) {
  if (probs.rows() != targets_one_hot.rows() || probs.cols() != targets_one_hot.cols())
    throw std::invalid_argument("cross_entropy: probs and targets shapes differ");
  LossAndGrad out;
  out.dprobs = Matrix::Zero(probs.rows(), probs.cols());
  if (probs.rows() == 0) return out;
  check_one_hot(targets_one_hot);

  const double n = static_cast<double>(probs.rows());
  double total = 0.0;
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    for (Eigen::Index c = 0; c < probs.cols(); ++c) {
      if (targets_one_hot(i, c) != 1.0) continue;
      const double p = probs(i, c);
      const double clamped = p < kProbFloor ? kProbFloor : p;
      total -= std::log(clamped);
      // Clamped probabilities sit on the flat part of max(), so no gradient.
      if (p > kProbFloor) out.dprobs(i, c) = -1.0 / (clamped * n);
    }
  }
  out.value = total / n;
  return out;
}

LossAndGrad weighted_ce(const Matrix& probs, const Matrix& targets_one_hot, double weight) {
  if (!(weight > 0.0)) throw std::invalid_argument("weighted_ce: weight must be > 0");
  LossAndGrad out = cross_entropy(probs, targets_one_hot);
  out.value *= weight;
  out.dprobs *= weight;
  return out;
}

PairLossAndGrad consistency_mse(const Matrix& probs_a, const Matrix& probs_b) {
  if (probs_a.rows() != probs_b.rows() || probs_a.cols() != probs_b.cols())
    throw std::invalid_argument("consistency_mse: view shapes differ");
  PairLossAndGrad out;
  out.dprobs_a = Matrix::Zero(probs_a.rows(), probs_a.cols());
  out.dprobs_b = Matrix::Zero(probs_a.rows(), probs_a.cols());
  if (probs_a.rows() == 0) return out;

  const double n = static_cast<double>(probs_a.rows());
  const Matrix diff = probs_a - probs_b;
  out.value = diff.squaredNorm() / n;
  out.dprobs_a = (2.0 / n) * diff;
  out.dprobs_b = -out.dprobs_a;
  return out;
}

Matrix one_hot(const std::vector<int>& labels, int class_count) {
  if (class_count <= 0) throw std::invalid_argument("one_hot: class_count must be positive");
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(labels.size()), class_count);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= class_count)
      throw std::invalid_argument("one_hot: label " + std::to_string(labels[i]) +
                                  " outside [0," + std::to_string(class_count) + ")");
    out(static_cast<Eigen::Index>(i), labels[i]) = 1.0;
  }
  return out;
}

void BatchPartition::validate(int n) const {
  std::vector<int> seen(static_cast<std::size_t>(n), 0);
  auto mark = [&](const std::vector<int>& rows, const char* name) {
    for (int r : rows) {
      if (r < 0 || r >= n)
        throw std::invalid_argument(std::string("partition: ") + name + " row " +
                                    std::to_string(r) + " outside batch of " + std::to_string(n));
      ++seen[static_cast<std::size_t>(r)];
    }
  };
  mark(clean_rows, "clean");
  mark(hard_rows, "hard");
  mark(noisy_rows, "noisy");
  for (int r = 0; r < n; ++r) {
    if (seen[static_cast<std::size_t>(r)] == 0)
      throw std::invalid_argument("partition: row " + std::to_string(r) + " unassigned");
    if (seen[static_cast<std::size_t>(r)] > 1)
      throw std::invalid_argument("partition: row " + std::to_string(r) +
                                  " assigned to multiple subsets");
  }
}

static Matrix gather_rows(const Matrix& m, const std::vector<int>& rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i)
    out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
  return out;
}

static std::vector<int> gather_labels(const std::vector<int>& labels, const std::vector<int>& rows) {
  std::vector<int> out;
  out.reserve(rows.size());
  for (int r : rows) out.push_back(labels[static_cast<std::size_t>(r)]);
  return out;
}

TotalLossResult total_loss(const Matrix& features, const std::vector<int>& given_labels,
                           const BatchPartition& partition, const ClassifierState& state,
                           const StrategyOptions& options, const Augmenter& augmenter, Rng& rng,
                           const std::vector<int>* pseudo_labels) {
  const int n = static_cast<int>(features.rows());
  if (static_cast<int>(given_labels.size()) != n)
    throw std::invalid_argument("total_loss: label count does not match batch rows");
  partition.validate(n);
  options.weights.validate(/*allow_ablation=*/true);
  const int class_count = state.class_count();

  TotalLossResult result;
  result.breakdown.count_clean = static_cast<int>(partition.clean_rows.size());
  result.breakdown.count_hard = static_cast<int>(partition.hard_rows.size());
  result.breakdown.count_noisy = static_cast<int>(partition.noisy_rows.size());
  result.grads = Gradients::zeros_like(state);

  // Supervised terms share one forward/backward pass over the batch; rows
  // that contribute nothing keep a zero gradient row.
  Matrix supervised_input = features;
  if (options.augment_clean_hard && !augmenter.empty()) {
    for (int r : partition.clean_rows)
      supervised_input.row(r) = augmenter.augment(features.row(r).transpose(), features, rng).transpose();
    for (int r : partition.hard_rows)
      supervised_input.row(r) = augmenter.augment(features.row(r).transpose(), features, rng).transpose();
  }
  const Matrix probs = forward(state, supervised_input);
  Matrix dprobs = Matrix::Zero(n, class_count);
  bool any_supervised = false;

  if (!partition.clean_rows.empty()) {
    const Matrix sub = gather_rows(probs, partition.clean_rows);
    const Matrix targets = one_hot(gather_labels(given_labels, partition.clean_rows), class_count);
    const LossAndGrad ce = cross_entropy(sub, targets);
    result.breakdown.loss_clean = ce.value;
    for (std::size_t i = 0; i < partition.clean_rows.size(); ++i)
      dprobs.row(partition.clean_rows[i]) += ce.dprobs.row(static_cast<Eigen::Index>(i));
    any_supervised = true;
  }

  if (!partition.hard_rows.empty()) {
    const Matrix sub = gather_rows(probs, partition.hard_rows);
    const Matrix targets = one_hot(gather_labels(given_labels, partition.hard_rows), class_count);
    const LossAndGrad ce = weighted_ce(sub, targets, options.weights.lambda_h);
    result.breakdown.loss_hard = ce.value;
    for (std::size_t i = 0; i < partition.hard_rows.size(); ++i)
      dprobs.row(partition.hard_rows[i]) += ce.dprobs.row(static_cast<Eigen::Index>(i));
    any_supervised = true;
  }

  if (!partition.noisy_rows.empty()) {
    switch (options.noisy_strategy) {
      case NoisyStrategy::Drop:
        break;
      case NoisyStrategy::PseudoLabel: {
        if (pseudo_labels == nullptr)
          throw std::invalid_argument("total_loss: pseudo-label strategy needs pseudo labels");
        if (static_cast<int>(pseudo_labels->size()) != n)
          throw std::invalid_argument("total_loss: pseudo label count does not match batch rows");
        const Matrix sub = gather_rows(probs, partition.noisy_rows);
        const Matrix targets =
            one_hot(gather_labels(*pseudo_labels, partition.noisy_rows), class_count);
        const LossAndGrad ce = cross_entropy(sub, targets);
        result.breakdown.loss_noisy = ce.value;
        for (std::size_t i = 0; i < partition.noisy_rows.size(); ++i)
          dprobs.row(partition.noisy_rows[i]) +=
              options.weights.lambda_n * ce.dprobs.row(static_cast<Eigen::Index>(i));
        any_supervised = true;
        break;
      }
      case NoisyStrategy::SelfSupervised: {
        const Matrix noisy_feats = gather_rows(features, partition.noisy_rows);
        const Matrix view_a = augmenter.augment_rows(noisy_feats, rng);
        const Matrix view_b = augmenter.augment_rows(noisy_feats, rng);
        const Matrix probs_a = forward(state, view_a);
        const Matrix probs_b = forward(state, view_b);
        const PairLossAndGrad mse = consistency_mse(probs_a, probs_b);
        result.breakdown.loss_noisy = mse.value;
        const double ln = options.weights.lambda_n;
        if (ln != 0.0) {
          Gradients ga = backward(state, view_a, ln * mse.dprobs_a);
          Gradients gb = backward(state, view_b, ln * mse.dprobs_b);
          result.grads.add(ga);
          result.grads.add(gb);
        }
        break;
      }
    }
  }

  if (any_supervised) {
    Gradients gs = backward(state, supervised_input, dprobs);
    result.grads.add(gs);
  }

  result.breakdown.loss_total = result.breakdown.loss_clean +
                                options.weights.lambda_n * result.breakdown.loss_noisy +
                                result.breakdown.loss_hard;
  return result;
}

}  // namespace tripartite
