#include "tripartite/augment.hpp"

#include <stdexcept>

namespace tripartite {

AugmentationSpec AugmentationSpec::gaussian_jitter(double sigma) {
  AugmentationSpec s;
  s.kind = Kind::GaussianJitter;
  s.sigma = sigma;
  s.validate();
  return s;
}

AugmentationSpec AugmentationSpec::feature_dropout(double rate) {
  AugmentationSpec s;
  s.kind = Kind::FeatureDropout;
  s.rate = rate;
  s.validate();
  return s;
}

AugmentationSpec AugmentationSpec::scale(double lo, double hi) {
  AugmentationSpec s;
  s.kind = Kind::Scale;
  s.scale_lo = lo;
  s.scale_hi = hi;
  s.validate();
  return s;
}

AugmentationSpec AugmentationSpec::mixup(double alpha) {
  AugmentationSpec s;
  s.kind = Kind::Mixup;
  s.alpha = alpha;
  s.validate();
  return s;
}

void AugmentationSpec::validate() const {
  switch (kind) {
    case Kind::GaussianJitter:
      if (sigma < 0.0) throw std::invalid_argument("GaussianJitter: sigma must be >= 0");
      break;
    case Kind::FeatureDropout:
      if (rate < 0.0 || rate >= 1.0)
        throw std::invalid_argument("FeatureDropout: rate must be in [0,1)");
      break;
    case Kind::Scale:
      if (!(scale_lo > 0.0) || !(scale_hi >= scale_lo))
        throw std::invalid_argument("Scale: need 0 < lo <= hi");
      break;
    case Kind::Mixup:
      if (!(alpha > 0.0)) throw std::invalid_argument("Mixup: alpha must be > 0");
      break;
  }
}

std::string AugmentationSpec::kind_name() const {
  switch (kind) {
    case Kind::GaussianJitter: return "gaussian_jitter";
    case Kind::FeatureDropout: return "feature_dropout";
    case Kind::Scale: return "scale";
    case Kind::Mixup: return "mixup";
  }
  return "unknown";
}

Augmenter::Augmenter(std::vector<AugmentationSpec> specs) : specs_(std::move(specs)) {
  for (const auto& s : specs_) s.validate();
}

Vector Augmenter::augment(const Vector& x, const Matrix& partner_pool, Rng& rng) const {
  Vector out = x;
  for (const auto& spec : specs_) {
    switch (spec.kind) {
      case AugmentationSpec::Kind::GaussianJitter:
        for (Eigen::Index d = 0; d < out.size(); ++d) out(d) += rng.normal(0.0, spec.sigma);
        break;
      case AugmentationSpec::Kind::FeatureDropout:
        for (Eigen::Index d = 0; d < out.size(); ++d)
          if (rng.uniform() < spec.rate) out(d) = 0.0;
        break;
      case AugmentationSpec::Kind::Scale:
        out *= rng.uniform(spec.scale_lo, spec.scale_hi);
        break;
      case AugmentationSpec::Kind::Mixup: {
        if (partner_pool.rows() == 0) break;  // nothing to mix with
        const int partner = rng.uniform_int(static_cast<int>(partner_pool.rows()));
        const double lambda = rng.beta(spec.alpha, spec.alpha);
        out = lambda * out + (1.0 - lambda) * partner_pool.row(partner).transpose();
        break;
      }
    }
  }
  return out;
}

Matrix Augmenter::augment_rows(const Matrix& rows, Rng& rng) const {
  Matrix out(rows.rows(), rows.cols());
  for (Eigen::Index i = 0; i < rows.rows(); ++i)
    out.row(i) = augment(rows.row(i).transpose(), rows, rng).transpose();
  return out;
}

}  // namespace tripartite
