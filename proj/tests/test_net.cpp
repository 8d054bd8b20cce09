#include <doctest.h>

#include <cmath>
#include <vector>

#include "tripartite/losses.hpp"
#include "tripartite/net.hpp"

using namespace tripartite;

namespace {

// a 2-2-2 ReLU net with hand-picked weights used by the forward oracle
ClassifierState tiny_fixed_net() {
  ClassifierState s = init_classifier({2, 2, 2}, Activation::ReLU, 0);
  s.weights[0] << 1.0, -1.0,
                  0.5,  2.0;
  s.biases[0] << 0.1, -0.2;
  s.weights[1] << 2.0, 0.0,
                 -1.0, 1.0;
  s.biases[1] << 0.0, 0.3;
  return s;
}

}  // namespace

TEST_CASE("forward matches a hand-computed softmax MLP") {
  const ClassifierState s = tiny_fixed_net();
  Matrix x(1, 2);
  x << 1.0, 2.0;
  // hidden pre-act: (1*1 + 2*0.5 + 0.1, 1*(-1) + 2*2 - 0.2) = (2.1, 2.8); ReLU keeps both
  // logits: (2.1*2 + 2.8*(-1), 2.1*0 + 2.8*1 + 0.3) = (1.4, 3.1)
  const double z0 = 1.4, z1 = 3.1;
  const double e0 = std::exp(z0 - z1), e1 = 1.0;
  const Matrix p = forward(s, x);
  CHECK(p(0, 0) == doctest::Approx(e0 / (e0 + e1)).epsilon(1e-12));
  CHECK(p(0, 1) == doctest::Approx(e1 / (e0 + e1)).epsilon(1e-12));
  CHECK(p.row(0).sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("negative pre-activations are clipped by ReLU but pass through tanh") {
  ClassifierState s = tiny_fixed_net();
  Matrix x(1, 2);
  x << -1.0, -1.0;
  // hidden pre-act: (-1.4, -1.2) -> ReLU zeroes both -> logits (0, 0.3)
  const Matrix p_relu = forward(s, x);
  const double e = std::exp(-0.3);
  CHECK(p_relu(0, 0) == doctest::Approx(e / (e + 1.0)).epsilon(1e-12));

  s.activation = Activation::Tanh;
  const double h0 = std::tanh(-1.4), h1 = std::tanh(-1.2);
  const double z0 = 2.0 * h0 - h1, z1 = h1 + 0.3;
  const Matrix p_tanh = forward(s, x);
  const double d = std::exp(z0) + std::exp(z1);
  CHECK(p_tanh(0, 0) == doctest::Approx(std::exp(z0) / d).epsilon(1e-12));
}

TEST_CASE("rows stay a probability simplex for random nets") {
  const ClassifierState s = init_classifier({3, 8, 5}, Activation::Tanh, 42);
  Matrix x(7, 3);
  Rng rng(1);
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 3; ++j) x(i, j) = rng.normal(0.0, 3.0);
  const Matrix p = forward(s, x);
  for (int i = 0; i < 7; ++i) {
    CHECK(p.row(i).sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(p.row(i).minCoeff() >= 0.0);
  }
}

TEST_CASE("softmax is shift-invariant even for huge logits") {
  ClassifierState s = init_classifier({1, 2}, Activation::ReLU, 0);
  s.weights[0] << 1000.0, 999.0;
  s.biases[0] << 0.0, 0.0;
  Matrix x(1, 1);
  x << 1.0;
  const Matrix p = forward(s, x);
  const double expect = 1.0 / (1.0 + std::exp(-1.0));
  CHECK(std::isfinite(p(0, 0)));
  CHECK(p(0, 0) == doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("zero weights give uniform rows and argmax breaks ties low") {
  ClassifierState s = init_classifier({2, 3}, Activation::ReLU, 0);
  s.weights[0].setZero();
  s.biases[0].setZero();
  Matrix x(2, 2);
  x << 1.0, -1.0, 0.5, 2.0;
  const Matrix p = forward(s, x);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 3; ++j) CHECK(p(i, j) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  const std::vector<int> labels = predict_labels(s, x);
  CHECK(labels == std::vector<int>{0, 0});
}

TEST_CASE("initialization is seed-deterministic, seed-sensitive, and bounded") {
  const ClassifierState a = init_classifier({4, 6, 3}, Activation::ReLU, 11);
  const ClassifierState b = init_classifier({4, 6, 3}, Activation::ReLU, 11);
  const ClassifierState c = init_classifier({4, 6, 3}, Activation::ReLU, 12);
  CHECK((a.weights[0] - b.weights[0]).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.weights[1] - b.weights[1]).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.weights[0] - c.weights[0]).cwiseAbs().maxCoeff() > 0.0);

  const double bound0 = std::sqrt(6.0 / (4 + 6));
  const double bound1 = std::sqrt(6.0 / (6 + 3));
  CHECK(a.weights[0].cwiseAbs().maxCoeff() <= bound0);
  CHECK(a.weights[1].cwiseAbs().maxCoeff() <= bound1);
  CHECK(a.biases[0].cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.parameter_count() == 4 * 6 + 6 + 6 * 3 + 3);
}

TEST_CASE("a lone layer size is rejected") {
  CHECK_THROWS_AS(init_classifier({5}, Activation::ReLU, 0), std::invalid_argument);
  CHECK_THROWS_AS(init_classifier({3, 0, 2}, Activation::ReLU, 0), std::invalid_argument);
}

TEST_CASE("sgd_step follows the momentum recurrence with coupled weight decay") {
  ClassifierState s = init_classifier({1, 1}, Activation::ReLU, 0);
  s.weights[0](0, 0) = 2.0;
  s.biases[0](0) = 0.0;

  Gradients g = Gradients::zeros_like(s);
  g.weights[0](0, 0) = 1.0;

  OptimizerSpec opt;
  opt.learning_rate = 0.1;
  opt.momentum = 0.9;
  opt.weight_decay = 0.01;

  // step 1: m = 1 + 0.01*2 = 1.02; w = 2 - 0.1*1.02 = 1.898
  sgd_step(s, g, opt, 0);
  CHECK(s.weights[0](0, 0) == doctest::Approx(1.898).epsilon(1e-12));
  CHECK(s.weight_momentum[0](0, 0) == doctest::Approx(1.02).epsilon(1e-12));

  // step 2: m = 0.9*1.02 + 1 + 0.01*1.898 = 1.93698; w = 1.898 - 0.1*m
  sgd_step(s, g, opt, 0);
  CHECK(s.weight_momentum[0](0, 0) == doctest::Approx(1.93698).epsilon(1e-12));
  CHECK(s.weights[0](0, 0) == doctest::Approx(1.898 - 0.193698).epsilon(1e-12));
}

TEST_CASE("learning-rate schedule multiplies every triggered stage") {
  OptimizerSpec opt;
  opt.learning_rate = 0.02;
  opt.lr_schedule = {{40, 0.1}, {50, 0.1}};
  opt.validate();
  CHECK(opt.lr_at(0) == doctest::Approx(0.02));
  CHECK(opt.lr_at(39) == doctest::Approx(0.02));
  CHECK(opt.lr_at(40) == doctest::Approx(0.002));
  CHECK(opt.lr_at(49) == doctest::Approx(0.002));
  CHECK(opt.lr_at(50) == doctest::Approx(0.0002));
  CHECK(opt.lr_at(1000) == doctest::Approx(0.0002));
}

TEST_CASE("optimizer validation rejects broken settings") {
  OptimizerSpec opt;
  opt.learning_rate = 0.0;
  CHECK_THROWS_AS(opt.validate(), std::invalid_argument);
  opt.learning_rate = 0.1;
  opt.momentum = 1.0;
  CHECK_THROWS_AS(opt.validate(), std::invalid_argument);
  opt.momentum = 0.5;
  opt.weight_decay = -1e-9;
  CHECK_THROWS_AS(opt.validate(), std::invalid_argument);
  opt.weight_decay = 0.0;
  opt.lr_schedule = {{10, 0.1}, {10, 0.1}};
  CHECK_THROWS_AS(opt.validate(), std::invalid_argument);
  opt.lr_schedule = {{10, 0.0}};
  CHECK_THROWS_AS(opt.validate(), std::invalid_argument);
  opt.lr_schedule = {{10, 0.1}, {20, 0.5}};
  CHECK_NOTHROW(opt.validate());
}

TEST_CASE("backward rejects a mis-shaped upstream gradient") {
  const ClassifierState s = init_classifier({2, 3}, Activation::ReLU, 3);
  Matrix x(2, 2);
  x.setZero();
  Matrix bad(2, 2);  // should be 2x3
  bad.setZero();
  CHECK_THROWS_AS(backward(s, x, bad), std::invalid_argument);
}

TEST_CASE("gradients accumulate and scale layer-wise") {
  const ClassifierState s = init_classifier({2, 3, 2}, Activation::ReLU, 5);
  Gradients a = Gradients::zeros_like(s);
  Gradients b = Gradients::zeros_like(s);
  a.weights[0](0, 0) = 1.0;
  b.weights[0](0, 0) = 2.0;
  b.biases[1](1) = -4.0;
  a.add(b);
  CHECK(a.weights[0](0, 0) == doctest::Approx(3.0));
  CHECK(a.biases[1](1) == doctest::Approx(-4.0));
  a.scale(0.5);
  CHECK(a.weights[0](0, 0) == doctest::Approx(1.5));
  CHECK(a.max_abs() == doctest::Approx(2.0));
}
