#include "tripartite/gradcheck.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "tripartite/rng.hpp"

namespace tripartite {

namespace {

constexpr double kStep = 1e-5;
constexpr double kViewJitterSigma = 0.05;
constexpr double kKinkMargin = 1e-3;

Matrix jittered(const Matrix& base, double sigma, Rng& rng) {
  Matrix out = base;
  for (Eigen::Index i = 0; i < out.rows(); ++i)
    for (Eigen::Index j = 0; j < out.cols(); ++j) out(i, j) += rng.normal(0.0, sigma);
  return out;
}

Matrix take_rows(const Matrix& m, const std::vector<int>& rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i)
    out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
  return out;
}

//! Everything an evaluation reads besides the parameters, frozen up front so
//! repeated probes hit the exact same objective.
struct FixedInputs {
  Matrix targets;           // one-hot rows aligned with the batch (CE kinds)
  Matrix view_a, view_b;    // consistency views
  std::vector<int> clean_rows, hard_rows, noisy_rows;  // Combined only
};

FixedInputs build_inputs(const ClassifierState& state, const Matrix& batch,
                         const std::vector<int>& labels, LossKind kind) {
  FixedInputs fi;
  Rng rng(state.rng_seed ^ 0x5EEDF00DULL);
  const int class_count = state.class_count();
  switch (kind) {
    case LossKind::CrossEntropy:
    case LossKind::WeightedCrossEntropy:
      fi.targets = one_hot(labels, class_count);
      break;
    case LossKind::Consistency:
      fi.view_a = jittered(batch, kViewJitterSigma, rng);
      fi.view_b = jittered(batch, kViewJitterSigma, rng);
      break;
    case LossKind::Combined: {
      fi.targets = one_hot(labels, class_count);
      for (int i = 0; i < static_cast<int>(batch.rows()); ++i) {
        if (i % 3 == 0)
          fi.clean_rows.push_back(i);
        else if (i % 3 == 1)
          fi.hard_rows.push_back(i);
        else
          fi.noisy_rows.push_back(i);
      }
      const Matrix noisy_feats = take_rows(batch, fi.noisy_rows);
      fi.view_a = jittered(noisy_feats, kViewJitterSigma, rng);
      fi.view_b = jittered(noisy_feats, kViewJitterSigma, rng);
      break;
    }
  }
  return fi;
}

double evaluate(const ClassifierState& state, const Matrix& batch, const FixedInputs& fi,
                LossKind kind, const StrategyWeights& weights, Gradients* grads_out) {
  switch (kind) {
    case LossKind::CrossEntropy: {
      const LossAndGrad ce = cross_entropy(forward(state, batch), fi.targets);
      if (grads_out) *grads_out = backward(state, batch, ce.dprobs);
      return ce.value;
    }
    case LossKind::WeightedCrossEntropy: {
      const LossAndGrad ce = weighted_ce(forward(state, batch), fi.targets, weights.lambda_h);
      if (grads_out) *grads_out = backward(state, batch, ce.dprobs);
      return ce.value;
    }
    case LossKind::Consistency: {
      const PairLossAndGrad mse =
          consistency_mse(forward(state, fi.view_a), forward(state, fi.view_b));
      if (grads_out) {
        *grads_out = backward(state, fi.view_a, mse.dprobs_a);
        grads_out->add(backward(state, fi.view_b, mse.dprobs_b));
      }
      return mse.value;
    }
    case LossKind::Combined: {
      const Matrix probs = forward(state, batch);
      Matrix dprobs = Matrix::Zero(probs.rows(), probs.cols());
      double total = 0.0;

      const LossAndGrad clean =
          cross_entropy(take_rows(probs, fi.clean_rows), take_rows(fi.targets, fi.clean_rows));
      total += clean.value;
      for (std::size_t i = 0; i < fi.clean_rows.size(); ++i)
        dprobs.row(fi.clean_rows[i]) += clean.dprobs.row(static_cast<Eigen::Index>(i));

      const LossAndGrad hard = weighted_ce(take_rows(probs, fi.hard_rows),
                                           take_rows(fi.targets, fi.hard_rows), weights.lambda_h);
      total += hard.value;
      for (std::size_t i = 0; i < fi.hard_rows.size(); ++i)
        dprobs.row(fi.hard_rows[i]) += hard.dprobs.row(static_cast<Eigen::Index>(i));

      const PairLossAndGrad mse =
          consistency_mse(forward(state, fi.view_a), forward(state, fi.view_b));
      total += weights.lambda_n * mse.value;

      if (grads_out) {
        *grads_out = backward(state, batch, dprobs);
        grads_out->add(backward(state, fi.view_a, weights.lambda_n * mse.dprobs_a));
        grads_out->add(backward(state, fi.view_b, weights.lambda_n * mse.dprobs_b));
      }
      return total;
    }
  }
  throw std::logic_error("evaluate: unknown loss kind");
}

//! Smallest |pre-activation| across hidden layers for the given inputs.
double min_hidden_margin(const ClassifierState& state, const Matrix& batch) {
  double margin = std::numeric_limits<double>::infinity();
  Matrix a = batch;
  const std::size_t layers = state.weights.size();
  for (std::size_t l = 0; l + 1 < layers; ++l) {
    Matrix z = a * state.weights[l];
    z.rowwise() += state.biases[l].transpose();
    margin = std::min(margin, z.cwiseAbs().minCoeff());
    a = z.cwiseMax(0.0);
  }
  return margin;
}

double case_margin(const ClassifierState& state, const Matrix& batch,
                   const std::vector<int>& labels, LossKind kind) {
  const FixedInputs fi = build_inputs(state, batch, labels, kind);
  double margin = std::numeric_limits<double>::infinity();
  switch (kind) {
    case LossKind::CrossEntropy:
    case LossKind::WeightedCrossEntropy:
      margin = min_hidden_margin(state, batch);
      break;
    case LossKind::Consistency:
      margin = std::min(min_hidden_margin(state, fi.view_a), min_hidden_margin(state, fi.view_b));
      break;
    case LossKind::Combined:
      margin = min_hidden_margin(state, batch);
      margin = std::min(margin, min_hidden_margin(state, fi.view_a));
      margin = std::min(margin, min_hidden_margin(state, fi.view_b));
      break;
  }
  return margin;
}

}  // namespace

const char* loss_kind_name(LossKind k) {
  switch (k) {
    case LossKind::CrossEntropy: return "cross_entropy";
    case LossKind::WeightedCrossEntropy: return "weighted_cross_entropy";
    case LossKind::Consistency: return "consistency";
    case LossKind::Combined: return "combined";
  }
  return "unknown";
}

GradCheckResult finite_diff_check(const ClassifierState& state, const Matrix& batch,
                                  const std::vector<int>& labels, LossKind kind,
                                  const StrategyWeights& weights, double tolerance) {
  if (state.parameter_count() > 500)
    throw std::invalid_argument("finite_diff_check: net too large (limit 500 parameters)");
  if (batch.rows() != static_cast<Eigen::Index>(labels.size()))
    throw std::invalid_argument("finite_diff_check: label count does not match batch rows");

  const FixedInputs fi = build_inputs(state, batch, labels, kind);

  Gradients analytic = Gradients::zeros_like(state);
  evaluate(state, batch, fi, kind, weights, &analytic);

  ClassifierState work = state;
  GradCheckResult result;
  result.param_count = state.parameter_count();
  result.analytic_max_abs = analytic.max_abs();

  auto probe = [&](double& slot, double analytic_value) {
    const double orig = slot;
    slot = orig + kStep;
    const double up = evaluate(work, batch, fi, kind, weights, nullptr);
    slot = orig - kStep;
    const double down = evaluate(work, batch, fi, kind, weights, nullptr);
    slot = orig;
    const double numeric = (up - down) / (2.0 * kStep);
    const double rel =
        std::abs(analytic_value - numeric) / std::max(1e-8, std::abs(numeric));
    result.max_rel_error = std::max(result.max_rel_error, rel);
  };

  for (std::size_t l = 0; l < work.weights.size(); ++l) {
    for (Eigen::Index i = 0; i < work.weights[l].rows(); ++i)
      for (Eigen::Index j = 0; j < work.weights[l].cols(); ++j)
        probe(work.weights[l](i, j), analytic.weights[l](i, j));
    for (Eigen::Index i = 0; i < work.biases[l].size(); ++i)
      probe(work.biases[l](i), analytic.biases[l](i));
  }

  result.passed = result.max_rel_error < tolerance;
  return result;
}

GradCheckCase make_gradcheck_case(int input_dim, int hidden, int class_count, int batch_size,
                                  Activation activation, LossKind kind, std::uint64_t seed) {
  if (batch_size < 3) throw std::invalid_argument("make_gradcheck_case: need at least 3 rows");
  Rng rng(seed);
  for (int attempt = 0; attempt < 500; ++attempt) {
    GradCheckCase c;
    c.state = init_classifier({input_dim, hidden, class_count}, activation, rng.next_u64());
    c.batch = Matrix(batch_size, input_dim);
    for (Eigen::Index i = 0; i < c.batch.rows(); ++i)
      for (Eigen::Index j = 0; j < c.batch.cols(); ++j) c.batch(i, j) = rng.normal();
    c.labels.clear();
    for (int i = 0; i < batch_size; ++i) c.labels.push_back(rng.uniform_int(class_count));

    // tanh is smooth everywhere; ReLU nets must keep all probe inputs away
    // from the activation kink or finite differences straddle it.
    if (activation != Activation::ReLU || case_margin(c.state, c.batch, c.labels, kind) > kKinkMargin)
      return c;
  }
  throw std::runtime_error("make_gradcheck_case: no kink-free sample after 500 attempts");
}

GradCheckReport run_gradcheck_suite(int num_nets, std::uint64_t seed) {
  if (num_nets <= 0) throw std::invalid_argument("run_gradcheck_suite: num_nets must be positive");
  static constexpr LossKind kKinds[] = {LossKind::CrossEntropy, LossKind::WeightedCrossEntropy,
                                        LossKind::Consistency, LossKind::Combined};
  GradCheckReport report;
  Rng rng(seed);
  for (int net = 0; net < num_nets; ++net) {
    const Activation act = (net % 2 == 0) ? Activation::ReLU : Activation::Tanh;
    const int input_dim = 2 + rng.uniform_int(3);    // 2..4
    const int hidden = 4 + rng.uniform_int(5);       // 4..8
    const int class_count = 3 + rng.uniform_int(3);  // 3..5
    const int batch_size = 6 + rng.uniform_int(7);   // 6..12
    for (LossKind kind : kKinds) {
      const GradCheckCase c = make_gradcheck_case(input_dim, hidden, class_count, batch_size,
                                                  act, kind, rng.next_u64());
      StrategyWeights weights;
      weights.lambda_h = 0.6;
      weights.lambda_n = 1.0;
      const GradCheckResult r = finite_diff_check(c.state, c.batch, c.labels, kind, weights);
      ++report.cases_run;
      report.worst_rel_error = std::max(report.worst_rel_error, r.max_rel_error);
      if (r.passed) {
        ++report.cases_passed;
      } else {
        report.failures.push_back(std::string(loss_kind_name(kind)) + " net " +
                                  std::to_string(net) + ": max rel error " +
                                  std::to_string(r.max_rel_error));
      }
    }
  }
  return report;
}

}  // namespace tripartite
