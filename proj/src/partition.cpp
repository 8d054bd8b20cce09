#include "tripartite/partition.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

namespace tripartite {

namespace {

void check_records(const std::vector<PredictionRecord>& records) {
  std::unordered_set<int> seen;
  for (const auto& rec : records) {
    if (!seen.insert(rec.sample_id).second)
      throw std::invalid_argument("partition: duplicate sample id " +
                                  std::to_string(rec.sample_id));
    if (!std::isfinite(rec.loss) || rec.loss < 0.0)
      throw std::invalid_argument("partition: bad loss for sample id " +
                                  std::to_string(rec.sample_id));
  }
}

std::vector<std::pair<int, double>> losses_of(const std::vector<PredictionRecord>& records) {
  std::vector<std::pair<int, double>> out;
  out.reserve(records.size());
  for (const auto& rec : records) out.emplace_back(rec.sample_id, rec.loss);
  return out;
}

}  // namespace

PartitionResult tripartition(const std::vector<PredictionRecord>& records) {
  check_records(records);
  PartitionResult out;
  out.loss_by_id = losses_of(records);
  for (const auto& rec : records) {
    const bool agree1 = rec.pred_net1 == rec.given_label;
    const bool agree2 = rec.pred_net2 == rec.given_label;
    if (agree1 && agree2)
      out.clean_ids.push_back(rec.sample_id);
    else if (agree1 || agree2)
      out.hard_ids.push_back(rec.sample_id);
    else
      out.noisy_ids.push_back(rec.sample_id);
  }
  return out;
}

PartitionResult small_loss_partition(const std::vector<PredictionRecord>& records,
                                     double keep_ratio) {
  if (records.empty()) throw std::invalid_argument("small_loss_partition: no records");
  if (!(keep_ratio > 0.0 && keep_ratio <= 1.0))
    throw std::invalid_argument("small_loss_partition: keep_ratio must be in (0,1]");
  check_records(records);

  std::vector<std::pair<int, double>> sorted = losses_of(records);
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second < b.second;
    return a.first < b.first;
  });

  // The epsilon soaks up cases like 0.7*1500 landing a hair under the
  // intended integer before the floor.
  const auto keep = static_cast<std::size_t>(
      std::floor(keep_ratio * static_cast<double>(sorted.size()) + 1e-9));

  PartitionResult out;
  out.loss_by_id = losses_of(records);
  for (std::size_t i = 0; i < sorted.size(); ++i)
    (i < keep ? out.clean_ids : out.noisy_ids).push_back(sorted[i].first);
  return out;
}

std::vector<double> normalize_losses(const std::vector<double>& losses) {
  if (losses.size() < 2)
    throw std::invalid_argument("normalize_losses: need at least 2 values");
  double lo = losses.front(), hi = losses.front();
  for (double v : losses) {
    if (!std::isfinite(v)) throw std::invalid_argument("normalize_losses: non-finite value");
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  std::vector<double> out(losses.size(), 0.0);
  if (hi > lo)
    for (std::size_t i = 0; i < losses.size(); ++i) out[i] = (losses[i] - lo) / (hi - lo);
  return out;
}

PartitionResult gmm_partition(const std::vector<PredictionRecord>& records, double tau,
                              const GmmOptions& gmm_options) {
  if (records.size() < 10)
    throw std::invalid_argument("gmm_partition: need at least 10 samples");
  if (tau < 0.0 || tau > 1.0)
    throw std::invalid_argument("gmm_partition: tau must be in [0,1]");
  check_records(records);

  std::vector<double> raw(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) raw[i] = records[i].loss;
  const std::vector<double> normalized = normalize_losses(raw);
  const GmmFit fit = fit_gmm_1d(normalized, gmm_options);

  PartitionResult out;
  out.loss_by_id = losses_of(records);
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (fit.posterior_low(normalized[i]) >= tau)
      out.clean_ids.push_back(records[i].sample_id);
    else
      out.noisy_ids.push_back(records[i].sample_id);
  }
  return out;
}

PartitionQuality score_partition(const PartitionResult& partition,
                                 const std::vector<int>& sample_ids,
                                 const std::vector<int>& given_labels,
                                 const std::vector<int>& true_labels) {
  if (sample_ids.size() != given_labels.size() || sample_ids.size() != true_labels.size())
    throw std::invalid_argument("score_partition: dataset vectors not aligned");
  std::unordered_map<int, bool> mislabeled;  // id -> given differs from truth
  for (std::size_t i = 0; i < sample_ids.size(); ++i)
    if (!mislabeled.emplace(sample_ids[i], given_labels[i] != true_labels[i]).second)
      throw std::invalid_argument("score_partition: duplicate sample id " +
                                  std::to_string(sample_ids[i]));
  auto is_mislabeled = [&](int id) {
    const auto it = mislabeled.find(id);
    if (it == mislabeled.end())
      throw std::invalid_argument("score_partition: partition id " + std::to_string(id) +
                                  " not in dataset");
    return it->second;
  };

  PartitionQuality q;
  q.count_clean = static_cast<int>(partition.clean_ids.size());
  q.count_hard = static_cast<int>(partition.hard_ids.size());
  q.count_noisy = static_cast<int>(partition.noisy_ids.size());
  if (partition.total() == 0) throw std::invalid_argument("score_partition: empty partition");

  int clean_ok = 0;
  for (int id : partition.clean_ids)
    if (!is_mislabeled(id)) ++clean_ok;
  int noisy_ok = 0;
  for (int id : partition.noisy_ids)
    if (is_mislabeled(id)) ++noisy_ok;
  for (int id : partition.hard_ids) is_mislabeled(id);  // id membership check only

  q.clean_purity = q.count_clean == 0
                       ? 0.0
                       : static_cast<double>(clean_ok) / static_cast<double>(q.count_clean);
  q.noisy_purity = q.count_noisy == 0
                       ? 0.0
                       : static_cast<double>(noisy_ok) / static_cast<double>(q.count_noisy);

  // Loss statistics over min-max-normalized losses, per subset.
  if (partition.loss_by_id.size() >= 2) {
    std::vector<double> raw(partition.loss_by_id.size());
    for (std::size_t i = 0; i < raw.size(); ++i) raw[i] = partition.loss_by_id[i].second;
    const std::vector<double> norm = normalize_losses(raw);
    std::unordered_map<int, double> norm_by_id;
    for (std::size_t i = 0; i < raw.size(); ++i)
      norm_by_id[partition.loss_by_id[i].first] = norm[i];

    auto stats_for = [&](const std::vector<int>& ids) {
      SubsetLossStats s;
      if (ids.empty()) return s;
      s.min = std::numeric_limits<double>::infinity();
      s.max = -std::numeric_limits<double>::infinity();
      double sum = 0.0;
      for (int id : ids) {
        const auto it = norm_by_id.find(id);
        if (it == norm_by_id.end())
          throw std::invalid_argument("score_partition: no loss recorded for id " +
                                      std::to_string(id));
        sum += it->second;
        s.min = std::min(s.min, it->second);
        s.max = std::max(s.max, it->second);
      }
      s.mean = sum / static_cast<double>(ids.size());
      double ss = 0.0;
      for (int id : ids) {
        const double d = norm_by_id[id] - s.mean;
        ss += d * d;
      }
      s.variance = ss / static_cast<double>(ids.size());
      return s;
    };
    q.loss_clean = stats_for(partition.clean_ids);
    q.loss_hard = stats_for(partition.hard_ids);
    q.loss_noisy = stats_for(partition.noisy_ids);
  }
  return q;
}

void save_partition_csv(const PartitionResult& partition, const std::string& path) {
  std::vector<std::pair<int, const char*>> rows;
  rows.reserve(static_cast<std::size_t>(partition.total()));
  for (int id : partition.clean_ids) rows.emplace_back(id, "clean");
  for (int id : partition.hard_ids) rows.emplace_back(id, "hard");
  for (int id : partition.noisy_ids) rows.emplace_back(id, "noisy");
  std::sort(rows.begin(), rows.end());

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "sample_id,subset\n";
  for (const auto& [id, subset] : rows) out << id << ',' << subset << "\n";
  if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace tripartite
