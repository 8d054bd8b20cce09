#include "tripartite/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace tripartite {

void LabeledDataset::validate() const {
  const std::size_t n = static_cast<std::size_t>(features.rows());
  if (given_labels.size() != n || true_labels.size() != n || sample_ids.size() != n)
    throw std::invalid_argument("dataset: label/id counts do not match feature rows");
  if (class_count <= 0) throw std::invalid_argument("dataset: class_count must be positive");
  std::unordered_set<int> ids;
  for (std::size_t i = 0; i < n; ++i) {
    if (given_labels[i] < 0 || given_labels[i] >= class_count ||
        true_labels[i] < 0 || true_labels[i] >= class_count)
      throw std::invalid_argument("dataset: label outside [0,class_count) at row " +
                                  std::to_string(i));
    if (!ids.insert(sample_ids[i]).second)
      throw std::invalid_argument("dataset: duplicate sample id " +
                                  std::to_string(sample_ids[i]));
  }
}

void BlobSpec::validate() const {
  if (class_count < 2) throw std::invalid_argument("blobs: need at least 2 classes");
  if (per_class < 1) throw std::invalid_argument("blobs: per_class must be positive");
  if (feature_dim < 2) throw std::invalid_argument("blobs: need at least 2 feature dims");
  if (!(radius > 0.0)) throw std::invalid_argument("blobs: radius must be positive");
  if (stddev < 0.0) throw std::invalid_argument("blobs: stddev must be nonnegative");
  for (const auto& ov : overlaps) {
    if (ov.class_a < 0 || ov.class_a >= class_count || ov.class_b < 0 ||
        ov.class_b >= class_count || ov.class_a == ov.class_b)
      throw std::invalid_argument("blobs: overlap pair classes invalid");
    if (ov.degree < 0.0 || ov.degree > 1.0)
      throw std::invalid_argument("blobs: overlap degree must be in [0,1]");
  }
}

LabeledDataset gen_blobs(const BlobSpec& spec, std::uint64_t seed) {
  spec.validate();
  const int c = spec.class_count;
  const int d = spec.feature_dim;

  Matrix means = Matrix::Zero(c, d);
  for (int k = 0; k < c; ++k) {
    const double angle = 2.0 * std::numbers::pi * k / c;
    means(k, 0) = spec.radius * std::cos(angle);
    means(k, 1) = spec.radius * std::sin(angle);
  }
  for (const auto& ov : spec.overlaps) {
    const Vector a = means.row(ov.class_a);
    const Vector b = means.row(ov.class_b);
    means.row(ov.class_a) = a + 0.5 * ov.degree * (b - a);
    means.row(ov.class_b) = b + 0.5 * ov.degree * (a - b);
  }

  LabeledDataset ds;
  ds.class_count = c;
  const int n = c * spec.per_class;
  ds.features = Matrix(n, d);
  Rng rng(seed);
  int row = 0;
  for (int k = 0; k < c; ++k) {
    for (int s = 0; s < spec.per_class; ++s, ++row) {
      for (int j = 0; j < d; ++j)
        ds.features(row, j) = means(k, j) + rng.normal(0.0, spec.stddev);
      ds.given_labels.push_back(k);
      ds.true_labels.push_back(k);
      ds.sample_ids.push_back(row);
    }
  }
  return ds;
}

LabeledDataset gen_two_moons(int n, double noise_stddev, std::uint64_t seed) {
  if (n < 2 || n % 2 != 0) throw std::invalid_argument("two_moons: n must be even and >= 2");
  if (noise_stddev < 0.0) throw std::invalid_argument("two_moons: noise must be nonnegative");
  const int per_class = n / 2;

  LabeledDataset ds;
  ds.class_count = 2;
  ds.features = Matrix(n, 2);
  Rng rng(seed);
  int row = 0;
  for (int k = 0; k < 2; ++k) {
    for (int s = 0; s < per_class; ++s, ++row) {
      const double t = rng.uniform(0.0, std::numbers::pi);
      double x, y;
      if (k == 0) {
        x = std::cos(t);
        y = std::sin(t);
      } else {
        x = 1.0 - std::cos(t);
        y = 0.5 - std::sin(t);
      }
      ds.features(row, 0) = x + rng.normal(0.0, noise_stddev);
      ds.features(row, 1) = y + rng.normal(0.0, noise_stddev);
      ds.given_labels.push_back(k);
      ds.true_labels.push_back(k);
      ds.sample_ids.push_back(row);
    }
  }
  return ds;
}

void save_dataset_csv(const LabeledDataset& ds, const std::string& path) {
  ds.validate();
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "id,given_label,true_label";
  for (int j = 0; j < ds.feature_dim(); ++j) out << ",f" << j;
  out << "\n";
  char buf[64];
  for (int i = 0; i < ds.size(); ++i) {
    out << ds.sample_ids[i] << ',' << ds.given_labels[i] << ',' << ds.true_labels[i];
    for (int j = 0; j < ds.feature_dim(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", ds.features(i, j));
      out << ',' << buf;
    }
    out << "\n";
  }
  if (!out) throw std::runtime_error("write failed for " + path);
}

LabeledDataset load_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
  if (line.rfind("id,given_label,true_label", 0) != 0)
    throw std::runtime_error(path + ": unexpected header '" + line + "'");

  std::vector<std::vector<double>> rows;
  LabeledDataset ds;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> values;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(cell, &used));
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw std::runtime_error(path + ":" + std::to_string(line_no) + ": bad number '" +
                                 cell + "'");
      }
    }
    if (values.size() < 4)
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": too few columns");
    if (!rows.empty() && values.size() != rows.front().size())
      throw std::runtime_error(path + ":" + std::to_string(line_no) + ": ragged row");
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw std::runtime_error(path + ": no data rows");

  const int n = static_cast<int>(rows.size());
  const int d = static_cast<int>(rows.front().size()) - 3;
  ds.features = Matrix(n, d);
  int max_label = -1;
  for (int i = 0; i < n; ++i) {
    ds.sample_ids.push_back(static_cast<int>(rows[i][0]));
    ds.given_labels.push_back(static_cast<int>(rows[i][1]));
    ds.true_labels.push_back(static_cast<int>(rows[i][2]));
    max_label = std::max({max_label, ds.given_labels.back(), ds.true_labels.back()});
    for (int j = 0; j < d; ++j) ds.features(i, j) = rows[i][static_cast<std::size_t>(j) + 3];
  }
  ds.class_count = max_label + 1;
  ds.validate();
  return ds;
}

LabeledDataset take_dataset_rows(const LabeledDataset& ds, const std::vector<int>& rows) {
  LabeledDataset out;
  out.class_count = ds.class_count;
  out.features = Matrix(static_cast<Eigen::Index>(rows.size()), ds.feature_dim());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const int r = rows[i];
    if (r < 0 || r >= ds.size())
      throw std::invalid_argument("take_dataset_rows: row " + std::to_string(r) + " out of range");
    out.features.row(static_cast<Eigen::Index>(i)) = ds.features.row(r);
    out.given_labels.push_back(ds.given_labels[static_cast<std::size_t>(r)]);
    out.true_labels.push_back(ds.true_labels[static_cast<std::size_t>(r)]);
    out.sample_ids.push_back(ds.sample_ids[static_cast<std::size_t>(r)]);
  }
  return out;
}

std::pair<LabeledDataset, LabeledDataset> split_dataset(const LabeledDataset& ds,
                                                        double test_fraction,
                                                        std::uint64_t seed) {
  ds.validate();
  if (!(test_fraction > 0.0 && test_fraction < 1.0))
    throw std::invalid_argument("split_dataset: fraction must be in (0,1)");

  std::vector<std::vector<int>> by_class(static_cast<std::size_t>(ds.class_count));
  for (int i = 0; i < ds.size(); ++i)
    by_class[static_cast<std::size_t>(ds.true_labels[static_cast<std::size_t>(i)])].push_back(i);

  Rng rng(seed);
  std::vector<int> train_rows, test_rows;
  for (auto& group : by_class) {
    rng.shuffle(group);
    const auto take =
        static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(group.size())));
    for (std::size_t i = 0; i < group.size(); ++i)
      (i < take ? test_rows : train_rows).push_back(group[i]);
  }
  auto by_id = [&](int a, int b) {
    return ds.sample_ids[static_cast<std::size_t>(a)] < ds.sample_ids[static_cast<std::size_t>(b)];
  };
  std::sort(train_rows.begin(), train_rows.end(), by_id);
  std::sort(test_rows.begin(), test_rows.end(), by_id);
  return {take_dataset_rows(ds, train_rows), take_dataset_rows(ds, test_rows)};
}

}  // namespace tripartite
