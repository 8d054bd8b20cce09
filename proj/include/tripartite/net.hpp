#pragma once

#include <cstdint>
#include <vector>

#include "tripartite/types.hpp"

namespace tripartite {

enum class Activation { ReLU, Tanh };

//! Probabilities below this floor are clamped before any log().
inline constexpr double kProbFloor = 1e-12;

//! Parameters, momentum buffers and seed of one micro feed-forward softmax
//! classifier. Weights are stored fan_in x fan_out, one matrix per layer.
struct ClassifierState {
  std::vector<Matrix> weights;
  std::vector<Vector> biases;
  std::vector<Matrix> weight_momentum;
  std::vector<Vector> bias_momentum;
  Activation activation = Activation::ReLU;
  std::uint64_t rng_seed = 0;

  int input_dim() const { return static_cast<int>(weights.front().rows()); }
  int class_count() const { return static_cast<int>(weights.back().cols()); }
  std::size_t parameter_count() const;
};

//! Gradient tensors, shape-identical to the classifier parameters.
struct Gradients {
  std::vector<Matrix> weights;
  std::vector<Vector> biases;

  static Gradients zeros_like(const ClassifierState& state);
  void add(const Gradients& other);
  void scale(double factor);
  double max_abs() const;
};

struct OptimizerSpec {
  double learning_rate = 0.02;
  double momentum = 0.9;
  double weight_decay = 0.0005;
  //! (epoch, multiplier) pairs; every multiplier whose trigger epoch is
  //! <= the current epoch applies.
  std::vector<std::pair<int, double>> lr_schedule;

  double lr_at(int epoch) const;
  void validate() const;
};

//! Scaled-uniform init (+-sqrt(6/(fan_in+fan_out))), deterministic in seed.
//! `layer_sizes` = {input_dim, hidden..., class_count}, at least two entries.
ClassifierState init_classifier(const std::vector<int>& layer_sizes,
                                Activation activation, std::uint64_t seed);

//! Softmax probabilities for a batch (rows = samples). Deterministic.
Matrix forward(const ClassifierState& state, const Matrix& batch);

//! Argmax of forward() per row; ties broken toward the lowest class index.
std::vector<int> predict_labels(const ClassifierState& state, const Matrix& batch);

//! Backpropagation of a loss gradient taken w.r.t. the output probabilities.
Gradients backward(const ClassifierState& state, const Matrix& batch,
                   const Matrix& dloss_dprobs);

//! SGD with momentum and coupled weight decay:
//!   m <- momentum*m + g + weight_decay*theta;  theta <- theta - lr(epoch)*m
void sgd_step(ClassifierState& state, const Gradients& grads,
              const OptimizerSpec& spec, int epoch);

}  // namespace tripartite
