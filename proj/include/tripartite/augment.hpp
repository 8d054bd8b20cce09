#pragma once

#include <string>
#include <vector>

#include "tripartite/rng.hpp"
#include "tripartite/types.hpp"

namespace tripartite {

//! One feature-space augmentation. The registry covers additive jitter,
//! dropout, multiplicative scaling and mixup; all preserve the feature
//! dimension.
struct AugmentationSpec {
  enum class Kind { GaussianJitter, FeatureDropout, Scale, Mixup };

  Kind kind = Kind::GaussianJitter;
  double sigma = 0.0;      // GaussianJitter; 0 degenerates to the identity
  double rate = 0.0;       // FeatureDropout, in [0, 1)
  double scale_lo = 1.0;   // Scale, 0 < lo <= hi
  double scale_hi = 1.0;
  double alpha = 1.0;      // Mixup Beta(alpha, alpha), alpha > 0

  static AugmentationSpec gaussian_jitter(double sigma);
  static AugmentationSpec feature_dropout(double rate);
  static AugmentationSpec scale(double lo, double hi);
  static AugmentationSpec mixup(double alpha);

  void validate() const;  // throws std::invalid_argument
  std::string kind_name() const;
};

//! Applies a list of AugmentationSpec in order. Mixup partners are drawn
//! uniformly from the supplied pool (the noisy rows of the current batch),
//! which keeps the whole pipeline independent of any label.
class Augmenter {
 public:
  Augmenter() = default;
  explicit Augmenter(std::vector<AugmentationSpec> specs);

  //! Augment a single feature row. `partner_pool` rows are mixup candidates.
  Vector augment(const Vector& x, const Matrix& partner_pool, Rng& rng) const;

  //! Augment every row, using the rows themselves as the mixup pool.
  Matrix augment_rows(const Matrix& rows, Rng& rng) const;

  bool empty() const { return specs_.empty(); }
  const std::vector<AugmentationSpec>& specs() const { return specs_; }

 private:
  std::vector<AugmentationSpec> specs_;
};

}  // namespace tripartite
