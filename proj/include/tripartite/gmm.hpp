#pragma once

#include <cstdint>
#include <vector>

namespace tripartite {

struct GmmOptions {
  int max_iters = 200;
  double tol = 1e-8;        // stop when log-likelihood improves by less
  double var_floor = 1e-6;  // applied after every M-step
  int max_restarts = 5;     // jittered re-inits after a degenerate fit
  std::uint64_t seed = 0;   // drives the restart jitter only
};

//! A two-component 1-D Gaussian mixture, components ordered by mean.
struct GmmFit {
  double mean_low = 0.0, mean_high = 0.0;
  double var_low = 0.0, var_high = 0.0;
  double weight_low = 0.0, weight_high = 0.0;
  std::vector<double> log_likelihoods;  // one per EM iteration, non-decreasing
  int iterations = 0;
  int restarts_used = 0;

  //! Posterior probability that x came from the lower-mean component.
  double posterior_low(double x) const;
};

//! EM fit initialized at the 25th/75th percentiles. A collapse (component
//! variance vanishing or weight going to zero) triggers a jittered restart;
//! running out of restarts throws std::runtime_error. Needs >= 2 values.
GmmFit fit_gmm_1d(const std::vector<double>& values, const GmmOptions& options = {});

}  // namespace tripartite
