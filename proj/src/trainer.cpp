#include "tripartite/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

namespace tripartite {

namespace {

// Substream tags; all trainer randomness hangs off (master_seed, tag, epoch, k).
constexpr std::uint64_t kTagNetInit = 1;
constexpr std::uint64_t kTagShuffle = 2;
constexpr std::uint64_t kTagAugment = 3;
constexpr std::uint64_t kTagGmm = 4;

int argmax_row(const Matrix& m, Eigen::Index i) {
  int best = 0;
  for (Eigen::Index j = 1; j < m.cols(); ++j)
    if (m(i, j) > m(i, best)) best = static_cast<int>(j);
  return best;
}

}  // namespace

const char* criterion_name(Criterion c) {
  switch (c) {
    case Criterion::Tripartite: return "tripartite";
    case Criterion::SmallLoss: return "small_loss";
    case Criterion::Gmm: return "gmm";
  }
  return "unknown";
}

Criterion criterion_from_name(const std::string& name) {
  if (name == "tripartite") return Criterion::Tripartite;
  if (name == "small_loss") return Criterion::SmallLoss;
  if (name == "gmm") return Criterion::Gmm;
  throw std::invalid_argument("unknown criterion '" + name +
                              "' (expected tripartite|small_loss|gmm)");
}

int TrainSchedule::iterations_per_epoch(int n) const {
  return (n + batch_size - 1) / batch_size;
}

void TrainSchedule::validate() const {
  if (max_epochs < 1) throw std::invalid_argument("schedule: max_epochs must be >= 1");
  if (warmup_epochs < 0 || warmup_epochs >= max_epochs)
    throw std::invalid_argument("schedule: need 0 <= warmup_epochs < max_epochs");
  if (batch_size < 1) throw std::invalid_argument("schedule: batch_size must be >= 1");
}

std::vector<double> per_sample_ce(const ClassifierState& state, const Matrix& features,
                                  const std::vector<int>& labels) {
  if (features.rows() != static_cast<Eigen::Index>(labels.size()))
    throw std::invalid_argument("per_sample_ce: label count does not match rows");
  const Matrix probs = forward(state, features);
  std::vector<double> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int y = labels[i];
    if (y < 0 || y >= state.class_count())
      throw std::invalid_argument("per_sample_ce: label out of range");
    out[i] = -std::log(std::max(probs(static_cast<Eigen::Index>(i), y), kProbFloor));
  }
  return out;
}

double accuracy(const ClassifierState& net, const Matrix& features,
                const std::vector<int>& labels) {
  if (features.rows() == 0) throw std::invalid_argument("accuracy: empty batch");
  const std::vector<int> preds = predict_labels(net, features);
  int hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (preds[i] == labels[i]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(labels.size());
}

CoTrainer::CoTrainer(TrainerSetup setup) : setup_(std::move(setup)) {
  setup_.train.validate();
  setup_.test.validate();
  if (setup_.train.feature_dim() != setup_.test.feature_dim())
    throw std::invalid_argument("trainer: train/test feature dims differ");
  if (setup_.train.class_count != setup_.test.class_count)
    throw std::invalid_argument("trainer: train/test class counts differ");
  if (setup_.hidden_sizes.empty())
    throw std::invalid_argument("trainer: need at least one hidden layer");
  for (int h : setup_.hidden_sizes)
    if (h < 1) throw std::invalid_argument("trainer: hidden sizes must be positive");
  setup_.optimizer.validate();
  setup_.schedule.validate();
  setup_.strategy.weights.validate(/*allow_ablation=*/true);
  if (setup_.partition.small_loss_keep > 1.0 || setup_.partition.small_loss_keep == 0.0)
    throw std::invalid_argument("trainer: small_loss_keep must be in (0,1] or negative");
  if (setup_.partition.gmm_tau < 0.0 || setup_.partition.gmm_tau > 1.0)
    throw std::invalid_argument("trainer: gmm_tau must be in [0,1]");
  if (setup_.noise_ratio_hint < 0.0 || setup_.noise_ratio_hint >= 1.0)
    throw std::invalid_argument("trainer: noise_ratio_hint must be in [0,1)");

  layer_sizes_.push_back(setup_.train.feature_dim());
  for (int h : setup_.hidden_sizes) layer_sizes_.push_back(h);
  layer_sizes_.push_back(setup_.train.class_count);
}

Rng CoTrainer::stream(std::uint64_t tag, int epoch, int k) const {
  return Rng(setup_.master_seed)
      .derive(tag)
      .derive(static_cast<std::uint64_t>(epoch))
      .derive(static_cast<std::uint64_t>(k));
}

std::vector<PredictionRecord> CoTrainer::full_set_records(const ClassifierState& net1,
                                                          const ClassifierState& net2,
                                                          std::vector<int>* pseudo_labels) const {
  const Matrix probs1 = forward(net1, setup_.train.features);
  const Matrix probs2 = forward(net2, setup_.train.features);
  const int n = setup_.train.size();
  std::vector<PredictionRecord> records(static_cast<std::size_t>(n));
  if (pseudo_labels) pseudo_labels->assign(static_cast<std::size_t>(n), 0);
  for (int i = 0; i < n; ++i) {
    auto& rec = records[static_cast<std::size_t>(i)];
    rec.sample_id = setup_.train.sample_ids[static_cast<std::size_t>(i)];
    rec.given_label = setup_.train.given_labels[static_cast<std::size_t>(i)];
    rec.pred_net1 = argmax_row(probs1, i);
    rec.pred_net2 = argmax_row(probs2, i);
    rec.loss = -std::log(std::max(probs1(i, rec.given_label), kProbFloor));
    if (pseudo_labels) {
      const Matrix mean_row = 0.5 * (probs1.row(i) + probs2.row(i));
      (*pseudo_labels)[static_cast<std::size_t>(i)] = argmax_row(mean_row, 0);
    }
  }
  return records;
}

PartitionResult CoTrainer::partition_records(const std::vector<PredictionRecord>& records,
                                             int epoch) const {
  PartitionResult part;
  switch (setup_.partition.criterion) {
    case Criterion::Tripartite:
      part = tripartition(records);
      break;
    case Criterion::SmallLoss: {
      const double keep = setup_.partition.small_loss_keep > 0.0
                              ? setup_.partition.small_loss_keep
                              : 1.0 - setup_.noise_ratio_hint;
      part = small_loss_partition(records, keep);
      break;
    }
    case Criterion::Gmm: {
      GmmOptions options = setup_.partition.gmm;
      options.seed = stream(kTagGmm, epoch, 0).seed();
      part = gmm_partition(records, setup_.partition.gmm_tau, options);
      break;
    }
  }
  part.epoch = epoch;
  return part;
}

PartitionResult CoTrainer::compute_partition(const ClassifierState& net1,
                                             const ClassifierState& net2, int epoch) const {
  return partition_records(full_set_records(net1, net2, nullptr), epoch);
}

EpochTrace CoTrainer::warmup_epoch(ClassifierState& net1, ClassifierState& net2,
                                   int epoch) const {
  const int n = setup_.train.size();
  const int d = setup_.train.feature_dim();
  EpochTrace trace;
  trace.epoch = epoch;
  trace.warmup = true;
  trace.count_clean = n;  // the whole set trains as if clean during warm-up

  double ce_sum = 0.0;
  int batches = 0;
  for (int k = 1; k <= 2; ++k) {
    ClassifierState& net = k == 1 ? net1 : net2;
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle_rng = stream(kTagShuffle, epoch, k);
    shuffle_rng.shuffle(order);

    for (int start = 0; start < n; start += setup_.schedule.batch_size) {
      const int b = std::min(setup_.schedule.batch_size, n - start);
      Matrix bf(b, d);
      std::vector<int> bl(static_cast<std::size_t>(b));
      for (int j = 0; j < b; ++j) {
        const int row = order[static_cast<std::size_t>(start + j)];
        bf.row(j) = setup_.train.features.row(row);
        bl[static_cast<std::size_t>(j)] = setup_.train.given_labels[static_cast<std::size_t>(row)];
      }
      const Matrix probs = forward(net, bf);
      const LossAndGrad ce = cross_entropy(probs, one_hot(bl, setup_.train.class_count));
      const Gradients grads = backward(net, bf, ce.dprobs);
      sgd_step(net, grads, setup_.optimizer, epoch);
      if (k == 1) {
        ce_sum += ce.value;
        ++batches;
      }
    }
  }
  trace.loss_clean = ce_sum / batches;
  trace.loss_total = trace.loss_clean;
  return trace;
}

EpochTrace CoTrainer::partitioned_epoch(ClassifierState& net1, ClassifierState& net2,
                                        int epoch) const {
  const int n = setup_.train.size();
  const int d = setup_.train.feature_dim();

  std::vector<int> pseudo_labels;
  const bool needs_pseudo = setup_.strategy.noisy_strategy == NoisyStrategy::PseudoLabel;
  const std::vector<PredictionRecord> records =
      full_set_records(net1, net2, needs_pseudo ? &pseudo_labels : nullptr);
  const PartitionResult part = partition_records(records, epoch);

  // The partition is pinned for the whole epoch; both networks see the same
  // subset assignment for every sample.
  std::unordered_map<int, int> subset_of;  // sample id -> 0 clean, 1 hard, 2 noisy
  for (int id : part.clean_ids) subset_of[id] = 0;
  for (int id : part.hard_ids) subset_of[id] = 1;
  for (int id : part.noisy_ids) subset_of[id] = 2;

  EpochTrace trace;
  trace.epoch = epoch;
  trace.count_clean = static_cast<int>(part.clean_ids.size());
  trace.count_hard = static_cast<int>(part.hard_ids.size());
  trace.count_noisy = static_cast<int>(part.noisy_ids.size());
  trace.quality = score_partition(part, setup_.train.sample_ids, setup_.train.given_labels,
                                  setup_.train.true_labels);

  double sum_clean = 0.0, sum_hard = 0.0, sum_noisy = 0.0, sum_total = 0.0;
  int batches = 0;
  for (int k = 1; k <= 2; ++k) {
    ClassifierState& net = k == 1 ? net1 : net2;
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle_rng = stream(kTagShuffle, epoch, k);
    shuffle_rng.shuffle(order);
    Rng aug_rng = stream(kTagAugment, epoch, k);

    for (int start = 0; start < n; start += setup_.schedule.batch_size) {
      const int b = std::min(setup_.schedule.batch_size, n - start);
      Matrix bf(b, d);
      std::vector<int> bl(static_cast<std::size_t>(b));
      std::vector<int> bpseudo(needs_pseudo ? static_cast<std::size_t>(b) : 0);
      BatchPartition bp;
      for (int j = 0; j < b; ++j) {
        const int row = order[static_cast<std::size_t>(start + j)];
        bf.row(j) = setup_.train.features.row(row);
        bl[static_cast<std::size_t>(j)] = setup_.train.given_labels[static_cast<std::size_t>(row)];
        if (needs_pseudo)
          bpseudo[static_cast<std::size_t>(j)] = pseudo_labels[static_cast<std::size_t>(row)];
        switch (subset_of.at(setup_.train.sample_ids[static_cast<std::size_t>(row)])) {
          case 0: bp.clean_rows.push_back(j); break;
          case 1: bp.hard_rows.push_back(j); break;
          default: bp.noisy_rows.push_back(j); break;
        }
      }
      const TotalLossResult res =
          total_loss(bf, bl, bp, net, setup_.strategy, setup_.augmenter, aug_rng,
                     needs_pseudo ? &bpseudo : nullptr);
      sgd_step(net, res.grads, setup_.optimizer, epoch);
      if (k == 1) {
        sum_clean += res.breakdown.loss_clean;
        sum_hard += res.breakdown.loss_hard;
        sum_noisy += res.breakdown.loss_noisy;
        sum_total += res.breakdown.loss_total;
        ++batches;
      }
    }
  }
  trace.loss_clean = sum_clean / batches;
  trace.loss_hard = sum_hard / batches;
  trace.loss_noisy = sum_noisy / batches;
  trace.loss_total = sum_total / batches;
  return trace;
}

TrainResult CoTrainer::train() {
  TrainResult result;
  result.net1 = init_classifier(layer_sizes_, setup_.activation, stream(kTagNetInit, 0, 1).seed());
  result.net2 = init_classifier(layer_sizes_, setup_.activation, stream(kTagNetInit, 0, 2).seed());

  for (int epoch = 0; epoch < setup_.schedule.max_epochs; ++epoch) {
    EpochTrace trace = epoch < setup_.schedule.warmup_epochs
                           ? warmup_epoch(result.net1, result.net2, epoch)
                           : partitioned_epoch(result.net1, result.net2, epoch);
    trace.test_acc_net1 = accuracy(result.net1, setup_.test.features, setup_.test.true_labels);
    trace.test_acc_net2 = accuracy(result.net2, setup_.test.features, setup_.test.true_labels);
    trace.lr = setup_.optimizer.lr_at(epoch);
    result.traces.push_back(trace);
  }

  result.final_partition =
      compute_partition(result.net1, result.net2, setup_.schedule.max_epochs);
  result.final_quality =
      score_partition(result.final_partition, setup_.train.sample_ids,
                      setup_.train.given_labels, setup_.train.true_labels);
  const EpochTrace& last = result.traces.back();
  result.final_test_accuracy = 0.5 * (last.test_acc_net1 + last.test_acc_net2);
  for (std::size_t i = 0; i < result.traces.size(); ++i) {
    const double acc = 0.5 * (result.traces[i].test_acc_net1 + result.traces[i].test_acc_net2);
    if (acc > result.best_test_accuracy) {
      result.best_test_accuracy = acc;
      result.best_epoch = static_cast<int>(i);
    }
  }
  return result;
}

}  // namespace tripartite
