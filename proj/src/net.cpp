#include "tripartite/net.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "tripartite/rng.hpp"

namespace tripartite {

namespace {

Matrix activate(const Matrix& z, Activation act) {
  if (act == Activation::ReLU) return z.cwiseMax(0.0);
  return z.array().tanh().matrix();
}

// Derivative as a function of the pre-activation z.
Matrix activate_grad(const Matrix& z, Activation act) {
  if (act == Activation::ReLU)
    return (z.array() > 0.0).cast<double>().matrix();
  const Matrix t = z.array().tanh().matrix();
  return (1.0 - t.array().square()).matrix();
}

Matrix softmax_rows(const Matrix& logits) {
  Matrix probs(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double m = logits.row(i).maxCoeff();
    Eigen::RowVectorXd e = (logits.row(i).array() - m).exp();
    probs.row(i) = e / e.sum();
  }
  return probs;
}

void check_batch(const ClassifierState& state, const Matrix& batch) {
  if (batch.cols() != state.input_dim())
    throw std::invalid_argument(
        "batch has " + std::to_string(batch.cols()) + " features, network expects " +
        std::to_string(state.input_dim()));
}

}  // namespace

std::size_t ClassifierState::parameter_count() const {
  std::size_t n = 0;
  for (const auto& w : weights) n += static_cast<std::size_t>(w.size());
  for (const auto& b : biases) n += static_cast<std::size_t>(b.size());
  return n;
}

Gradients Gradients::zeros_like(const ClassifierState& state) {
  Gradients g;
  g.weights.reserve(state.weights.size());
  g.biases.reserve(state.biases.size());
  for (const auto& w : state.weights) g.weights.push_back(Matrix::Zero(w.rows(), w.cols()));
  for (const auto& b : state.biases) g.biases.push_back(Vector::Zero(b.size()));
  return g;
}

void Gradients::add(const Gradients& other) {
  for (std::size_t l = 0; l < weights.size(); ++l) {
    weights[l] += other.weights[l];
    biases[l] += other.biases[l];
  }
}

void Gradients::scale(double factor) {
  for (std::size_t l = 0; l < weights.size(); ++l) {
    weights[l] *= factor;
    biases[l] *= factor;
  }
}

double Gradients::max_abs() const {
  double m = 0.0;
  for (const auto& w : weights) m = std::max(m, w.cwiseAbs().maxCoeff());
  for (const auto& b : biases) m = std::max(m, b.cwiseAbs().maxCoeff());
  return m;
}

double OptimizerSpec::lr_at(int epoch) const {
  double lr = learning_rate;
  for (const auto& [trigger, multiplier] : lr_schedule)
    if (trigger <= epoch) lr *= multiplier;
  return lr;
}

void OptimizerSpec::validate() const {
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be positive");
  if (momentum < 0.0 || momentum >= 1.0) throw std::invalid_argument("momentum must be in [0,1)");
  if (weight_decay < 0.0) throw std::invalid_argument("weight_decay must be nonnegative");
  int prev = -1;
  for (const auto& [epoch, multiplier] : lr_schedule) {
    if (epoch <= prev) throw std::invalid_argument("lr_schedule epochs must be strictly increasing");
    if (!(multiplier > 0.0)) throw std::invalid_argument("lr_schedule multipliers must be positive");
    prev = epoch;
  }
}

ClassifierState init_classifier(const std::vector<int>& layer_sizes,
                                Activation activation, std::uint64_t seed) {
  if (layer_sizes.size() < 2)
    throw std::invalid_argument("init_classifier: need at least an input and an output layer");
  for (int s : layer_sizes)
    if (s <= 0) throw std::invalid_argument("init_classifier: zero-sized layer");

  ClassifierState state;
  state.activation = activation;
  state.rng_seed = seed;
  Rng rng(seed);
  for (std::size_t l = 0; l + 1 < layer_sizes.size(); ++l) {
    const int fan_in = layer_sizes[l];
    const int fan_out = layer_sizes[l + 1];
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    Matrix w(fan_in, fan_out);
    for (int i = 0; i < fan_in; ++i)
      for (int j = 0; j < fan_out; ++j) w(i, j) = rng.uniform(-bound, bound);
    state.weights.push_back(std::move(w));
    state.biases.push_back(Vector::Zero(fan_out));
    state.weight_momentum.push_back(Matrix::Zero(fan_in, fan_out));
    state.bias_momentum.push_back(Vector::Zero(fan_out));
  }
  return state;
}

Matrix forward(const ClassifierState& state, const Matrix& batch) {
  check_batch(state, batch);
  Matrix a = batch;
  const std::size_t layers = state.weights.size();
  for (std::size_t l = 0; l < layers; ++l) {
    Matrix z = a * state.weights[l];
    z.rowwise() += state.biases[l].transpose();
    a = (l + 1 < layers) ? activate(z, state.activation) : softmax_rows(z);
  }
  return a;
}

std::vector<int> predict_labels(const ClassifierState& state, const Matrix& batch) {
  const Matrix probs = forward(state, batch);
  std::vector<int> labels(static_cast<std::size_t>(probs.rows()));
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    int best = 0;
    for (Eigen::Index j = 1; j < probs.cols(); ++j)
      if (probs(i, j) > probs(i, best)) best = static_cast<int>(j);
    labels[static_cast<std::size_t>(i)] = best;
  }
  return labels;
}

Gradients backward(const ClassifierState& state, const Matrix& batch,
                   const Matrix& dloss_dprobs) {
  check_batch(state, batch);
  const std::size_t layers = state.weights.size();

  // Forward pass keeping pre-activations and layer inputs.
  std::vector<Matrix> inputs;   // input to layer l
  std::vector<Matrix> preacts;  // z of layer l
  inputs.reserve(layers);
  preacts.reserve(layers);
  Matrix a = batch;
  for (std::size_t l = 0; l < layers; ++l) {
    inputs.push_back(a);
    Matrix z = a * state.weights[l];
    z.rowwise() += state.biases[l].transpose();
    preacts.push_back(z);
    a = (l + 1 < layers) ? activate(z, state.activation) : softmax_rows(z);
  }
  const Matrix& probs = a;
  if (dloss_dprobs.rows() != probs.rows() || dloss_dprobs.cols() != probs.cols())
    throw std::invalid_argument("backward: upstream gradient shape mismatch");

  // Through the softmax: dz_j = p_j * (g_j - sum_k g_k p_k) per row.
  Matrix dz(probs.rows(), probs.cols());
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    const double dot = dloss_dprobs.row(i).dot(probs.row(i));
    dz.row(i) = probs.row(i).cwiseProduct((dloss_dprobs.row(i).array() - dot).matrix());
  }

  Gradients grads = Gradients::zeros_like(state);
  for (std::size_t l = layers; l-- > 0;) {
    grads.weights[l] = inputs[l].transpose() * dz;
    grads.biases[l] = dz.colwise().sum().transpose();
    if (l > 0) {
      const Matrix da = dz * state.weights[l].transpose();
      dz = da.cwiseProduct(activate_grad(preacts[l - 1], state.activation));
    }
  }
  return grads;
}

void sgd_step(ClassifierState& state, const Gradients& grads,
              const OptimizerSpec& spec, int epoch) {
  if (grads.weights.size() != state.weights.size())
    throw std::invalid_argument("sgd_step: gradient layer count mismatch");
  const double lr = spec.lr_at(epoch);
  for (std::size_t l = 0; l < state.weights.size(); ++l) {
    if (grads.weights[l].rows() != state.weights[l].rows() ||
        grads.weights[l].cols() != state.weights[l].cols() ||
        grads.biases[l].size() != state.biases[l].size())
      throw std::invalid_argument("sgd_step: gradient shape mismatch");
    state.weight_momentum[l] = spec.momentum * state.weight_momentum[l] + grads.weights[l] +
                               spec.weight_decay * state.weights[l];
    state.bias_momentum[l] = spec.momentum * state.bias_momentum[l] + grads.biases[l] +
                             spec.weight_decay * state.biases[l];
    state.weights[l] -= lr * state.weight_momentum[l];
    state.biases[l] -= lr * state.bias_momentum[l];
  }
}

}  // namespace tripartite
