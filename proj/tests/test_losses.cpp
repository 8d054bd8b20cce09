#include <doctest.h>

#include <cmath>
#include <vector>

#include "tripartite/losses.hpp"
#include "tripartite/net.hpp"
#include "tripartite/rng.hpp"

using namespace tripartite;

namespace {

Matrix uniform_probs(int n, int c) {
  return Matrix::Constant(n, c, 1.0 / c);
}

struct TotalLossFixture {
  ClassifierState state = init_classifier({2, 4, 3}, Activation::Tanh, 21);
  Matrix features;
  std::vector<int> labels;
  std::vector<int> pseudo;
  BatchPartition partition;
  Augmenter augmenter{std::vector<AugmentationSpec>{AugmentationSpec::gaussian_jitter(0.05)}};

  TotalLossFixture() {
    const int n = 9;
    features = Matrix(n, 2);
    Rng rng(77);
    for (int i = 0; i < n; ++i) {
      features(i, 0) = rng.normal(0.0, 2.0);
      features(i, 1) = rng.normal(0.0, 2.0);
      labels.push_back(rng.uniform_int(3));
      pseudo.push_back(rng.uniform_int(3));
      if (i % 3 == 0) partition.clean_rows.push_back(i);
      if (i % 3 == 1) partition.hard_rows.push_back(i);
      if (i % 3 == 2) partition.noisy_rows.push_back(i);
    }
  }

  TotalLossResult run(const StrategyOptions& options, std::uint64_t rng_seed = 5) const {
    Rng rng(rng_seed);
    return total_loss(features, labels, partition, state, options, augmenter, rng, &pseudo);
  }
};

}  // namespace

TEST_CASE("cross entropy of uniform predictions is ln C") {
  const int c = 4;
  const Matrix probs = uniform_probs(3, c);
  std::vector<int> labels = {0, 2, 3};
  const LossAndGrad out = cross_entropy(probs, one_hot(labels, c));
  CHECK(out.value == doctest::Approx(std::log(4.0)).epsilon(1e-12));
}

TEST_CASE("cross entropy gradient only touches target entries") {
  Matrix probs(2, 3);
  probs << 0.5, 0.25, 0.25,
           0.1, 0.6, 0.3;
  std::vector<int> labels = {0, 1};
  const LossAndGrad out = cross_entropy(probs, one_hot(labels, 3));
  CHECK(out.value == doctest::Approx(0.5 * (-std::log(0.5) - std::log(0.6))).epsilon(1e-12));
  CHECK(out.dprobs(0, 0) == doctest::Approx(-1.0 / (0.5 * 2)).epsilon(1e-12));
  CHECK(out.dprobs(1, 1) == doctest::Approx(-1.0 / (0.6 * 2)).epsilon(1e-12));
  CHECK(out.dprobs(0, 1) == 0.0);
  CHECK(out.dprobs(0, 2) == 0.0);
  CHECK(out.dprobs(1, 0) == 0.0);
}

TEST_CASE("a zero probability at the target is floored and its gradient muted") {
  Matrix probs(1, 2);
  probs << 0.0, 1.0;
  std::vector<int> labels = {0};
  const LossAndGrad out = cross_entropy(probs, one_hot(labels, 2));
  CHECK(out.value == doctest::Approx(-std::log(kProbFloor)).epsilon(1e-9));
  CHECK(out.dprobs(0, 0) == 0.0);  // clamp engaged -> no gradient through it
  CHECK(std::isfinite(out.value));
}

TEST_CASE("weighted cross entropy scales value and gradient exactly") {
  Matrix probs(2, 3);
  probs << 0.2, 0.5, 0.3,
           0.7, 0.1, 0.2;
  std::vector<int> labels = {1, 0};
  const LossAndGrad plain = cross_entropy(probs, one_hot(labels, 3));
  const LossAndGrad scaled = weighted_ce(probs, one_hot(labels, 3), 0.6);
  CHECK(scaled.value == 0.6 * plain.value);
  CHECK((scaled.dprobs - 0.6 * plain.dprobs).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(weighted_ce(probs, one_hot(labels, 3), 0.0), std::invalid_argument);
}

TEST_CASE("consistency loss of opposite one-hot rows is 2") {
  Matrix a(1, 2), b(1, 2);
  a << 1.0, 0.0;
  b << 0.0, 1.0;
  const PairLossAndGrad out = consistency_mse(a, b);
  CHECK(out.value == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(out.dprobs_a(0, 0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(out.dprobs_b(0, 0) == doctest::Approx(-2.0).epsilon(1e-15));
}

TEST_CASE("consistency loss averages over samples with symmetric gradients") {
  Matrix a(2, 2), b(2, 2);
  a << 0.6, 0.4, 0.8, 0.2;
  b << 0.5, 0.5, 0.5, 0.5;
  const PairLossAndGrad out = consistency_mse(a, b);
  const double expect = ((0.1 * 0.1 + 0.1 * 0.1) + (0.3 * 0.3 + 0.3 * 0.3)) / 2.0;
  CHECK(out.value == doctest::Approx(expect).epsilon(1e-12));
  CHECK((out.dprobs_a + out.dprobs_b).cwiseAbs().maxCoeff() == 0.0);
  CHECK(out.dprobs_a(0, 0) == doctest::Approx(2.0 / 2.0 * 0.1).epsilon(1e-12));
}

TEST_CASE("identical views cost nothing and push no gradient") {
  Matrix a(3, 4);
  a.setRandom();
  a = a.cwiseAbs();
  const PairLossAndGrad out = consistency_mse(a, a);
  CHECK(out.value == 0.0);
  CHECK(out.dprobs_a.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("the worked combined-loss example adds up to 3.2") {
  // clean CE 1.0: single sample with p(target) = e^-1
  Matrix cp(1, 2);
  cp << std::exp(-1.0), 1.0 - std::exp(-1.0);
  const double loss_c = cross_entropy(cp, one_hot({0}, 2)).value;
  // noisy consistency 0.1: two samples with squared gaps 0.02 and 0.18
  Matrix va(2, 2), vb(2, 2);
  va << 0.6, 0.4, 0.8, 0.2;
  vb << 0.5, 0.5, 0.5, 0.5;
  const double loss_n = consistency_mse(va, vb).value;
  // hard CE raw 2.0 with weight 0.6: p(target) = e^-2
  Matrix hp(1, 2);
  hp << std::exp(-2.0), 1.0 - std::exp(-2.0);
  const double loss_h = weighted_ce(hp, one_hot({0}, 2), 0.6).value;

  const double lambda_n = 10.0;
  CHECK(loss_c == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(loss_n == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(loss_h == doctest::Approx(1.2).epsilon(1e-12));
  CHECK(loss_c + lambda_n * loss_n + loss_h == doctest::Approx(3.2).epsilon(1e-12));
}

TEST_CASE("one-hot construction and validation") {
  const Matrix t = one_hot({2, 0}, 3);
  CHECK(t(0, 2) == 1.0);
  CHECK(t(0, 0) == 0.0);
  CHECK(t(1, 0) == 1.0);
  CHECK_THROWS_AS(one_hot({3}, 3), std::invalid_argument);
  CHECK_THROWS_AS(one_hot({-1}, 3), std::invalid_argument);

  Matrix bad(1, 2);
  bad << 0.5, 0.5;
  CHECK_THROWS_AS(cross_entropy(uniform_probs(1, 2), bad), std::invalid_argument);
}

TEST_CASE("batch partitions must cover every row exactly once") {
  BatchPartition p;
  p.clean_rows = {0, 1};
  p.hard_rows = {2};
  p.noisy_rows = {3};
  CHECK_NOTHROW(p.validate(4));
  CHECK_THROWS_AS(p.validate(5), std::invalid_argument);  // row 4 unassigned
  p.noisy_rows.push_back(1);
  CHECK_THROWS_AS(p.validate(4), std::invalid_argument);  // row 1 duplicated
}

TEST_CASE("total loss composes the three subset terms exactly") {
  TotalLossFixture fx;
  StrategyOptions options;
  options.weights.lambda_h = 0.6;
  options.weights.lambda_n = 10.0;
  const TotalLossResult out = fx.run(options);
  CHECK(out.breakdown.count_clean == 3);
  CHECK(out.breakdown.count_hard == 3);
  CHECK(out.breakdown.count_noisy == 3);
  CHECK(out.breakdown.loss_total ==
        doctest::Approx(out.breakdown.loss_clean + 10.0 * out.breakdown.loss_noisy +
                        out.breakdown.loss_hard)
            .epsilon(1e-12));
  CHECK(out.breakdown.loss_clean > 0.0);
  CHECK(out.breakdown.loss_hard > 0.0);
}

TEST_CASE("hard term carries its weight inside the breakdown") {
  TotalLossFixture fx;
  fx.partition.clean_rows.clear();
  fx.partition.noisy_rows.clear();
  fx.partition.hard_rows.clear();
  for (int i = 0; i < 9; ++i) fx.partition.hard_rows.push_back(i);

  StrategyOptions options;
  options.weights.lambda_h = 0.6;
  const TotalLossResult out = fx.run(options);

  const Matrix probs = forward(fx.state, fx.features);
  const double raw = cross_entropy(probs, one_hot(fx.labels, 3)).value;
  CHECK(out.breakdown.loss_hard == doctest::Approx(0.6 * raw).epsilon(1e-12));
  CHECK(out.breakdown.loss_total == doctest::Approx(out.breakdown.loss_hard).epsilon(1e-12));
  CHECK(out.breakdown.loss_clean == 0.0);
  CHECK(out.breakdown.loss_noisy == 0.0);
}

TEST_CASE("empty subsets contribute neither loss nor gradient") {
  TotalLossFixture fx;
  fx.partition.clean_rows.clear();
  fx.partition.hard_rows.clear();
  fx.partition.noisy_rows.clear();
  for (int i = 0; i < 9; ++i) fx.partition.noisy_rows.push_back(i);

  StrategyOptions options;
  options.noisy_strategy = NoisyStrategy::Drop;
  const TotalLossResult out = fx.run(options);
  CHECK(out.breakdown.loss_total == 0.0);
  CHECK(out.grads.max_abs() == 0.0);
}

TEST_CASE("a zero noisy weight silences the consistency gradient") {
  TotalLossFixture fx;
  StrategyOptions with;
  with.weights.lambda_n = 1.0;
  StrategyOptions without;
  without.weights.lambda_n = 0.0;

  const TotalLossResult g1 = fx.run(with);
  const TotalLossResult g0 = fx.run(without);
  CHECK(g0.breakdown.loss_noisy == doctest::Approx(g1.breakdown.loss_noisy).epsilon(1e-12));
  CHECK(g0.breakdown.loss_total ==
        doctest::Approx(g0.breakdown.loss_clean + g0.breakdown.loss_hard).epsilon(1e-12));

  // with lambda_n = 0 the noisy rows must leave no trace in the gradient:
  // permuting their labels changes nothing
  TotalLossFixture permuted = fx;
  std::swap(permuted.labels[2], permuted.labels[5]);
  const TotalLossResult g0p = permuted.run(without);
  CHECK((g0.grads.weights[0] - g0p.grads.weights[0]).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("noisy-subset given labels never reach the self-supervised loss") {
  TotalLossFixture fx;
  StrategyOptions options;
  options.weights.lambda_n = 5.0;

  TotalLossFixture permuted = fx;
  // rows 2, 5, 8 are noisy; rotate their given labels
  const int tmp = permuted.labels[2];
  permuted.labels[2] = permuted.labels[5];
  permuted.labels[5] = permuted.labels[8];
  permuted.labels[8] = tmp;

  const TotalLossResult a = fx.run(options);
  const TotalLossResult b = permuted.run(options);
  CHECK(a.breakdown.loss_total == b.breakdown.loss_total);
  for (std::size_t l = 0; l < a.grads.weights.size(); ++l) {
    CHECK((a.grads.weights[l] - b.grads.weights[l]).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.grads.biases[l] - b.grads.biases[l]).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("pseudo-label strategy trains noisy rows against model consensus labels") {
  TotalLossFixture fx;
  fx.partition.clean_rows.clear();
  fx.partition.hard_rows.clear();
  fx.partition.noisy_rows.clear();
  for (int i = 0; i < 9; ++i) fx.partition.noisy_rows.push_back(i);

  StrategyOptions options;
  options.noisy_strategy = NoisyStrategy::PseudoLabel;
  options.weights.lambda_n = 2.0;
  const TotalLossResult out = fx.run(options);

  const Matrix probs = forward(fx.state, fx.features);
  const LossAndGrad ce = cross_entropy(probs, one_hot(fx.pseudo, 3));
  CHECK(out.breakdown.loss_noisy == doctest::Approx(ce.value).epsilon(1e-12));
  CHECK(out.breakdown.loss_total == doctest::Approx(2.0 * ce.value).epsilon(1e-12));

  Matrix scaled = ce.dprobs * 2.0;
  const Gradients expect = backward(fx.state, fx.features, scaled);
  for (std::size_t l = 0; l < expect.weights.size(); ++l)
    CHECK((out.grads.weights[l] - expect.weights[l]).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("pseudo-label strategy demands pseudo labels") {
  TotalLossFixture fx;
  StrategyOptions options;
  options.noisy_strategy = NoisyStrategy::PseudoLabel;
  Rng rng(5);
  CHECK_THROWS_AS(
      total_loss(fx.features, fx.labels, fx.partition, fx.state, options, fx.augmenter, rng,
                 nullptr),
      std::invalid_argument);
}

TEST_CASE("total loss gradient agrees with finite differences through the rng replay") {
  TotalLossFixture fx;
  StrategyOptions options;
  options.weights.lambda_h = 0.6;
  options.weights.lambda_n = 1.5;

  const TotalLossResult analytic = fx.run(options, /*rng_seed=*/13);

  const double h = 1e-6;
  double worst = 0.0;
  for (std::size_t l = 0; l < fx.state.weights.size(); ++l) {
    for (int r = 0; r < fx.state.weights[l].rows(); ++r) {
      for (int c = 0; c < fx.state.weights[l].cols(); ++c) {
        TotalLossFixture plus = fx;
        plus.state.weights[l](r, c) += h;
        TotalLossFixture minus = fx;
        minus.state.weights[l](r, c) -= h;
        const double numeric = (plus.run(options, 13).breakdown.loss_total -
                                minus.run(options, 13).breakdown.loss_total) /
                               (2 * h);
        const double analytic_v = analytic.grads.weights[l](r, c);
        const double rel =
            std::abs(analytic_v - numeric) / std::max(1e-8, std::abs(numeric));
        worst = std::max(worst, rel);
      }
    }
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("strategy weight validation enforces the hard-weight range") {
  StrategyWeights w;
  w.lambda_h = 0.6;
  CHECK_NOTHROW(w.validate());
  w.lambda_h = 1.0;
  CHECK_THROWS_AS(w.validate(), std::invalid_argument);
  CHECK_NOTHROW(w.validate(/*allow_ablation=*/true));
  w.lambda_h = 2.0;
  CHECK_THROWS_AS(w.validate(), std::invalid_argument);
  CHECK_NOTHROW(w.validate(/*allow_ablation=*/true));
  w.lambda_h = 0.0;
  CHECK_THROWS_AS(w.validate(true), std::invalid_argument);
  w.lambda_h = 0.5;
  w.lambda_n = -0.1;
  CHECK_THROWS_AS(w.validate(), std::invalid_argument);
}
