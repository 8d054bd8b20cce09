#pragma once

#include <string>
#include <utility>
#include <vector>

#include "tripartite/gmm.hpp"

namespace tripartite {

//! One sample as the partition step sees it: both networks' predictions,
//! the given label, and the sample's cross-entropy loss under the
//! designated network (network 1 by convention).
struct PredictionRecord {
  int sample_id = 0;
  int given_label = 0;
  int pred_net1 = 0;
  int pred_net2 = 0;
  double loss = 0.0;
};

//! Sample ids assigned to the three subsets, plus the per-sample losses the
//! partition step recorded (used downstream for loss statistics).
struct PartitionResult {
  std::vector<int> clean_ids;
  std::vector<int> hard_ids;
  std::vector<int> noisy_ids;
  int epoch = -1;
  std::vector<std::pair<int, double>> loss_by_id;

  int total() const {
    return static_cast<int>(clean_ids.size() + hard_ids.size() + noisy_ids.size());
  }
};

//! Agreement criterion: a sample is clean when both networks reproduce its
//! given label, hard when exactly one does, noisy when neither does.
//! Duplicate sample ids are rejected.
PartitionResult tripartition(const std::vector<PredictionRecord>& records);

//! Keeps the floor(keep_ratio * n) lowest-loss samples as clean and sends
//! the rest to noisy (no hard subset). Ties break toward the smaller
//! sample id. keep_ratio must be in (0,1]; records must be non-empty.
PartitionResult small_loss_partition(const std::vector<PredictionRecord>& records,
                                     double keep_ratio);

//! Min-max normalizes the losses, fits a two-component mixture, and keeps
//! samples whose posterior under the lower-mean component reaches tau as
//! clean; the rest go to noisy (no hard subset). Needs >= 10 samples.
PartitionResult gmm_partition(const std::vector<PredictionRecord>& records, double tau,
                              const GmmOptions& gmm_options = {});

//! (x - min) / (max - min); a constant vector maps to all zeros. Needs n >= 2.
std::vector<double> normalize_losses(const std::vector<double>& losses);

//! Purity and per-subset statistics of min-max-normalized losses. Loss
//! stats of an empty subset are zero, as is the purity of an empty subset.
struct SubsetLossStats {
  double mean = 0.0;
  double variance = 0.0;
  double min = 0.0;
  double max = 0.0;
};

struct PartitionQuality {
  double clean_purity = 0.0;  // share of clean subset whose given label is true
  double noisy_purity = 0.0;  // share of noisy subset actually mislabeled
  int count_clean = 0;
  int count_hard = 0;
  int count_noisy = 0;
  SubsetLossStats loss_clean;
  SubsetLossStats loss_hard;
  SubsetLossStats loss_noisy;
};

//! `sample_ids`, `given_labels` and `true_labels` are aligned vectors
//! describing the dataset the partition refers to. Loss statistics come
//! from the partition's recorded losses (skipped when absent).
PartitionQuality score_partition(const PartitionResult& partition,
                                 const std::vector<int>& sample_ids,
                                 const std::vector<int>& given_labels,
                                 const std::vector<int>& true_labels);

//! CSV with header sample_id,subset; rows ascend by id; subset is one of
//! clean|hard|noisy.
void save_partition_csv(const PartitionResult& partition, const std::string& path);

}  // namespace tripartite
