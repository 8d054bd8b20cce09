#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tripartite/losses.hpp"
#include "tripartite/net.hpp"
#include "tripartite/types.hpp"

namespace tripartite {

//! Which objective a finite-difference check exercises.
enum class LossKind { CrossEntropy, WeightedCrossEntropy, Consistency, Combined };

const char* loss_kind_name(LossKind k);

struct GradCheckResult {
  double max_rel_error = 0.0;
  double analytic_max_abs = 0.0;
  std::size_t param_count = 0;
  bool passed = false;
};

//! Compares the analytic parameter gradient against central finite
//! differences with step 1e-5, parameter by parameter. The per-parameter
//! relative error is |analytic - numeric| / max(1e-8, |numeric|) and the
//! check passes when the max stays below `tolerance`. Only small nets are
//! accepted (<= 500 parameters) so the sweep stays exact and fast.
//!
//! Consistency and Combined evaluate fixed augmented views derived from
//! state.rng_seed, so every probe sees the same inputs.
GradCheckResult finite_diff_check(const ClassifierState& state, const Matrix& batch,
                                  const std::vector<int>& labels, LossKind kind,
                                  const StrategyWeights& weights = {},
                                  double tolerance = 1e-4);

//! A ready-to-check small net plus batch. For ReLU nets the batch and any
//! fixed views are re-sampled until every hidden pre-activation clears a
//! margin, keeping the objective smooth around the probe points.
struct GradCheckCase {
  ClassifierState state;
  Matrix batch;
  std::vector<int> labels;
};

GradCheckCase make_gradcheck_case(int input_dim, int hidden, int class_count, int batch_size,
                                  Activation activation, LossKind kind, std::uint64_t seed);

struct GradCheckReport {
  int cases_run = 0;
  int cases_passed = 0;
  double worst_rel_error = 0.0;
  std::vector<std::string> failures;

  bool all_passed() const { return cases_run > 0 && cases_passed == cases_run; }
};

//! Sweeps `num_nets` random small nets (alternating ReLU/tanh) across all
//! four loss kinds.
GradCheckReport run_gradcheck_suite(int num_nets, std::uint64_t seed);

}  // namespace tripartite
