#include "tripartite/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "tripartite/rng.hpp"

namespace tripartite {

namespace {

constexpr double kDegenerateVar = 1e-12;
constexpr double kDegenerateWeight = 1e-10;

double log_normal_pdf(double x, double mean, double var) {
  const double d = x - mean;
  return -0.5 * (std::log(2.0 * std::numbers::pi * var) + d * d / var);
}

double percentile(std::vector<double> sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

struct EmState {
  double mean[2], var[2], weight[2];
};

//! One full EM run from the given init. Returns false on collapse.
bool run_em(const std::vector<double>& values, const GmmOptions& opt, EmState& s, GmmFit& fit) {
  const auto n = values.size();
  std::vector<double> resp(n);  // responsibility of component 0
  fit.log_likelihoods.clear();

  double prev_ll = -std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < opt.max_iters; ++iter) {
    // E-step in log space.
    double ll = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double l0 = std::log(s.weight[0]) + log_normal_pdf(values[i], s.mean[0], s.var[0]);
      const double l1 = std::log(s.weight[1]) + log_normal_pdf(values[i], s.mean[1], s.var[1]);
      const double m = std::max(l0, l1);
      const double z = m + std::log(std::exp(l0 - m) + std::exp(l1 - m));
      resp[i] = std::exp(l0 - z);
      ll += z;
    }
    if (!std::isfinite(ll)) return false;
    fit.log_likelihoods.push_back(ll);
    fit.iterations = iter + 1;

    // M-step.
    double r0 = 0.0;
    for (double r : resp) r0 += r;
    const double r1 = static_cast<double>(n) - r0;
    if (r0 < kDegenerateWeight * static_cast<double>(n) ||
        r1 < kDegenerateWeight * static_cast<double>(n))
      return false;

    double m0 = 0.0, m1 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      m0 += resp[i] * values[i];
      m1 += (1.0 - resp[i]) * values[i];
    }
    m0 /= r0;
    m1 /= r1;
    double v0 = 0.0, v1 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d0 = values[i] - m0;
      const double d1 = values[i] - m1;
      v0 += resp[i] * d0 * d0;
      v1 += (1.0 - resp[i]) * d1 * d1;
    }
    v0 /= r0;
    v1 /= r1;
    if (v0 < kDegenerateVar || v1 < kDegenerateVar) return false;  // pre-floor collapse

    s.mean[0] = m0;
    s.mean[1] = m1;
    s.var[0] = std::max(v0, opt.var_floor);
    s.var[1] = std::max(v1, opt.var_floor);
    s.weight[0] = r0 / static_cast<double>(n);
    s.weight[1] = r1 / static_cast<double>(n);

    if (ll - prev_ll < opt.tol && iter > 0) break;
    prev_ll = ll;
  }
  return true;
}

}  // namespace

double GmmFit::posterior_low(double x) const {
  const double l0 = std::log(weight_low) + log_normal_pdf(x, mean_low, var_low);
  const double l1 = std::log(weight_high) + log_normal_pdf(x, mean_high, var_high);
  const double m = std::max(l0, l1);
  const double z = m + std::log(std::exp(l0 - m) + std::exp(l1 - m));
  return std::exp(l0 - z);
}

GmmFit fit_gmm_1d(const std::vector<double>& values, const GmmOptions& options) {
  if (options.max_iters < 1) throw std::invalid_argument("fit_gmm_1d: max_iters must be >= 1");
  if (options.tol < 0.0 || !std::isfinite(options.tol))
    throw std::invalid_argument("fit_gmm_1d: tol must be >= 0");
  if (options.var_floor <= 0.0) throw std::invalid_argument("fit_gmm_1d: var_floor must be > 0");
  if (options.max_restarts < 0) throw std::invalid_argument("fit_gmm_1d: max_restarts must be >= 0");
  if (values.size() < 2)
    throw std::invalid_argument("fit_gmm_1d: need at least 2 values");
  for (double v : values)
    if (!std::isfinite(v)) throw std::invalid_argument("fit_gmm_1d: non-finite value");

  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  const double p25 = percentile(sorted, 0.25);
  const double p75 = percentile(sorted, 0.75);
  const double spread = std::max(sorted.back() - sorted.front(), 1e-3);

  double mean_acc = 0.0;
  for (double v : values) mean_acc += v;
  mean_acc /= static_cast<double>(values.size());
  double var_acc = 0.0;
  for (double v : values) var_acc += (v - mean_acc) * (v - mean_acc);
  var_acc = std::max(var_acc / static_cast<double>(values.size()), options.var_floor);

  Rng rng(options.seed);
  for (int restart = 0; restart <= options.max_restarts; ++restart) {
    EmState s;
    if (restart == 0) {
      s.mean[0] = p25;
      s.mean[1] = p75;
    } else {
      s.mean[0] = p25 + 0.2 * spread * rng.normal();
      s.mean[1] = p75 + 0.2 * spread * rng.normal();
    }
    s.var[0] = s.var[1] = var_acc;
    s.weight[0] = s.weight[1] = 0.5;

    GmmFit fit;
    fit.restarts_used = restart;
    if (!run_em(values, options, s, fit)) continue;

    const int low = s.mean[0] <= s.mean[1] ? 0 : 1;
    const int high = 1 - low;
    fit.mean_low = s.mean[low];
    fit.mean_high = s.mean[high];
    fit.var_low = s.var[low];
    fit.var_high = s.var[high];
    fit.weight_low = s.weight[low];
    fit.weight_high = s.weight[high];
    return fit;
  }
  throw std::runtime_error("fit_gmm_1d: every restart collapsed; the values may be (nearly) "
                           "constant or otherwise unfit for a two-component mixture");
}

}  // namespace tripartite
