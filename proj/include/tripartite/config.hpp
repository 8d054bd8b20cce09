#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "tripartite/augment.hpp"
#include "tripartite/dataset.hpp"
#include "tripartite/losses.hpp"
#include "tripartite/net.hpp"
#include "tripartite/noise.hpp"
#include "tripartite/trainer.hpp"

namespace tripartite {

//! Configuration problem tied to a specific field path (e.g.
//! "train.weights.lambda_h").
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct DataConfig {
  std::string source = "blobs";  // blobs | two_moons | csv
  BlobSpec blobs;
  int moons_n = 1000;
  double moons_noise = 0.1;
  std::string csv_path;
  double test_fraction = 0.25;
};

struct NoiseConfig {
  std::string kind = "realistic";  // none | symmetric | pairflip | realistic | matrix_csv
  double ratio = 0.3;
  int top_k = 6;  // covers every pair of the default 4-class dataset
  std::vector<double> tier_weights = {0.9, 0.8, 0.7};
  std::vector<int> pairflip_partner;  // empty: cyclic default
  std::string matrix_csv_path;
};

struct ModelConfig {
  std::vector<int> hidden = {32};
  std::string activation = "relu";  // relu | tanh
};

struct TrainConfig {
  OptimizerSpec optimizer;
  TrainSchedule schedule;
  StrategyWeights weights;  // lambda_h has no default in config files
  std::string noisy_strategy = "self_supervised";
  bool augment_clean_hard = false;
  std::vector<AugmentationSpec> augmentations;
  std::string criterion = "tripartite";
  double small_loss_keep = -1.0;  // negative: 1 - noise ratio
  double gmm_tau = 0.5;
};

struct ExperimentConfig {
  int schema_version = 1;
  std::string name = "experiment";
  std::uint64_t seed = 0;
  DataConfig data;
  NoiseConfig noise;
  ModelConfig model;
  TrainConfig train;

  //! Throws ConfigError naming the offending field. lambda_h outside (0,1)
  //! is rejected unless allow_ablation is set.
  void validate(bool allow_ablation = false) const;
};

//! Strict JSON parsing: unknown keys and missing required fields (notably
//! train.weights.lambda_h) raise ConfigError with the field path.
ExperimentConfig config_from_json(const std::string& json_text);
std::string config_to_json(const ExperimentConfig& config);  // stable key order

ExperimentConfig load_config(const std::string& path);
void save_config(const ExperimentConfig& config, const std::string& path);

Activation activation_from_name(const std::string& name);
const char* activation_name(Activation a);
NoisyStrategy noisy_strategy_from_name(const std::string& name);

}  // namespace tripartite
