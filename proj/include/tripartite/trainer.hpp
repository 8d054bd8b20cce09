#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tripartite/augment.hpp"
#include "tripartite/dataset.hpp"
#include "tripartite/gmm.hpp"
#include "tripartite/losses.hpp"
#include "tripartite/net.hpp"
#include "tripartite/partition.hpp"

namespace tripartite {

//! Which rule splits the training set each epoch.
enum class Criterion { Tripartite, SmallLoss, Gmm };

const char* criterion_name(Criterion c);
Criterion criterion_from_name(const std::string& name);

struct TrainSchedule {
  int max_epochs = 60;
  int warmup_epochs = 6;  // plain-CE epochs before any partitioning
  int batch_size = 64;

  int iterations_per_epoch(int n) const;  // ceil(n / batch_size)
  void validate() const;                  // 0 <= warmup < max, batch >= 1
};

struct PartitionSettings {
  Criterion criterion = Criterion::Tripartite;
  double small_loss_keep = -1.0;  // negative: default to 1 - noise_ratio_hint
  double gmm_tau = 0.5;
  GmmOptions gmm;
};

//! One epoch of the run, as written to the trace file.
struct EpochTrace {
  int epoch = 0;
  bool warmup = false;
  double loss_clean = 0.0;  // epoch means of network 1's batch breakdowns
  double loss_hard = 0.0;
  double loss_noisy = 0.0;
  double loss_total = 0.0;
  int count_clean = 0;  // partition populations (training set size total)
  int count_hard = 0;
  int count_noisy = 0;
  PartitionQuality quality;  // zeroed during warm-up
  double test_acc_net1 = 0.0;
  double test_acc_net2 = 0.0;
  double lr = 0.0;
};

struct TrainResult {
  ClassifierState net1;
  ClassifierState net2;
  std::vector<EpochTrace> traces;
  PartitionResult final_partition;
  PartitionQuality final_quality;
  double final_test_accuracy = 0.0;  // mean of the two networks' accuracies
  double best_test_accuracy = 0.0;
  int best_epoch = 0;
};

struct TrainerSetup {
  LabeledDataset train;
  LabeledDataset test;
  std::vector<int> hidden_sizes = {32};
  Activation activation = Activation::ReLU;
  OptimizerSpec optimizer;
  TrainSchedule schedule;
  StrategyOptions strategy;
  PartitionSettings partition;
  Augmenter augmenter;
  double noise_ratio_hint = 0.0;  // feeds the small-loss default keep ratio
  std::uint64_t master_seed = 0;
};

//! Per-sample cross-entropy of the given labels under one classifier.
std::vector<double> per_sample_ce(const ClassifierState& state, const Matrix& features,
                                  const std::vector<int>& labels);

double accuracy(const ClassifierState& net, const Matrix& features,
                const std::vector<int>& labels);

//! Dual-network training: warm-up with plain cross-entropy, then one
//! partition per epoch (fixed for that epoch) and sequential mini-batch
//! updates of network 1 then network 2 under the combined objective.
//! Fully deterministic in (setup, master_seed).
class CoTrainer {
 public:
  explicit CoTrainer(TrainerSetup setup);

  TrainResult train();

  //! The configured criterion applied to the full training set given the
  //! current networks; predictions run on un-augmented inputs.
  PartitionResult compute_partition(const ClassifierState& net1, const ClassifierState& net2,
                                    int epoch) const;

 private:
  EpochTrace warmup_epoch(ClassifierState& net1, ClassifierState& net2, int epoch) const;
  EpochTrace partitioned_epoch(ClassifierState& net1, ClassifierState& net2, int epoch) const;
  std::vector<PredictionRecord> full_set_records(const ClassifierState& net1,
                                                 const ClassifierState& net2,
                                                 std::vector<int>* pseudo_labels) const;
  PartitionResult partition_records(const std::vector<PredictionRecord>& records,
                                    int epoch) const;
  Rng stream(std::uint64_t tag, int epoch, int k) const;

  TrainerSetup setup_;
  std::vector<int> layer_sizes_;
};

}  // namespace tripartite
