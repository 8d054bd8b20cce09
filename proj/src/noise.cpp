#include "tripartite/noise.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace tripartite {

void TransitionMatrix::validate() const {
  if (t.rows() != t.cols() || t.rows() < 2)
    throw std::invalid_argument("transition matrix must be square with >= 2 classes");
  for (Eigen::Index i = 0; i < t.rows(); ++i) {
    double row_sum = 0.0;
    for (Eigen::Index j = 0; j < t.cols(); ++j) {
      const double v = t(i, j);
      if (!(v >= 0.0 && v <= 1.0))
        throw std::invalid_argument("transition entry (" + std::to_string(i) + "," +
                                    std::to_string(j) + ") outside [0,1]");
      row_sum += v;
    }
    if (std::abs(row_sum - 1.0) > 1e-9)
      throw std::invalid_argument("transition row " + std::to_string(i) +
                                  " sums to " + std::to_string(row_sum));
  }
  if (noise_ratio < 0.0 || noise_ratio >= 1.0)
    throw std::invalid_argument("noise ratio must be in [0,1)");
}

ClassPrototypes extract_prototypes(const ClassifierState& net) {
  ClassPrototypes p;
  p.vectors = net.weights.back().transpose();  // one row per class
  for (Eigen::Index k = 0; k < p.vectors.rows(); ++k) {
    if (!p.vectors.row(k).allFinite())
      throw std::invalid_argument("extract_prototypes: non-finite prototype for class " +
                                  std::to_string(k));
    if (p.vectors.row(k).norm() == 0.0)
      throw std::invalid_argument("extract_prototypes: zero-norm prototype for class " +
                                  std::to_string(k));
  }
  return p;
}

SimilarityRanking rank_pairs(const ClassPrototypes& protos) {
  const int c = protos.class_count();
  if (c < 2) throw std::invalid_argument("rank_pairs: need at least 2 prototypes");
  SimilarityRanking ranking;
  ranking.class_count = c;
  for (int a = 0; a < c; ++a) {
    for (int b = a + 1; b < c; ++b) {
      const Vector va = protos.vectors.row(a).transpose();
      const Vector vb = protos.vectors.row(b).transpose();
      const double na = va.norm();
      const double nb = vb.norm();
      if (na == 0.0 || nb == 0.0)
        throw std::invalid_argument("rank_pairs: zero-length prototype for class " +
                                    std::to_string(na == 0.0 ? a : b));
      ranking.pairs.push_back({a, b, va.dot(vb) / (na * nb)});
    }
  }
  std::sort(ranking.pairs.begin(), ranking.pairs.end(),
            [](const SimilarityRanking::Pair& x, const SimilarityRanking::Pair& y) {
              if (x.cosine != y.cosine) return x.cosine > y.cosine;
              if (x.a != y.a) return x.a < y.a;
              return x.b < y.b;
            });
  return ranking;
}

void RealisticNoiseSpec::validate() const {
  if (top_k < 1) throw std::invalid_argument("realistic noise: top_k must be >= 1");
  if (tier_weights.size() != 3)
    throw std::invalid_argument("realistic noise: exactly 3 tier weights required");
  for (double w : tier_weights)
    if (!(w > 0.0 && w <= 1.0))
      throw std::invalid_argument("realistic noise: tier weights must lie in (0,1]");
  if (!(tier_weights[0] > tier_weights[1] && tier_weights[1] > tier_weights[2]))
    throw std::invalid_argument("realistic noise: tier weights must strictly descend");
  if (noise_ratio < 0.0 || noise_ratio >= 1.0)
    throw std::invalid_argument("realistic noise: ratio must be in [0,1)");
}

RealisticNoiseSpec realistic_preset_small() {
  RealisticNoiseSpec s;
  s.top_k = 10;
  s.tier_weights = {0.9, 0.8, 0.7};
  return s;
}

RealisticNoiseSpec realistic_preset_large() {
  RealisticNoiseSpec s;
  s.top_k = 60;
  s.tier_weights = {0.9, 0.6, 0.3};
  return s;
}

TransitionMatrix build_realistic(const SimilarityRanking& ranking,
                                 const RealisticNoiseSpec& spec) {
  spec.validate();
  const int c = ranking.class_count;
  if (c < 2) throw std::invalid_argument("build_realistic: need at least 2 classes");
  if (spec.top_k > static_cast<int>(ranking.pairs.size()))
    throw std::invalid_argument("build_realistic: top_k " + std::to_string(spec.top_k) +
                                " exceeds the " + std::to_string(ranking.pairs.size()) +
                                " available pairs");

  // Tier sizes: ceil(K/3), ceil(K/3), remainder.
  const int k = spec.top_k;
  const int tier1 = (k + 2) / 3;
  const int tier2 = std::min(tier1, k - tier1);

  Matrix raw = Matrix::Zero(c, c);
  for (int p = 0; p < k; ++p) {
    const auto& pair = ranking.pairs[static_cast<std::size_t>(p)];
    const double w = p < tier1 ? spec.tier_weights[0]
                   : p < tier1 + tier2 ? spec.tier_weights[1]
                                       : spec.tier_weights[2];
    raw(pair.a, pair.b) = w;
    raw(pair.b, pair.a) = w;
  }

  TransitionMatrix tm;
  tm.noise_ratio = spec.noise_ratio;
  tm.t = Matrix::Zero(c, c);
  const double r = spec.noise_ratio;
  for (int i = 0; i < c; ++i) {
    const double off_mass = raw.row(i).sum();  // diagonal of raw is zero
    if (off_mass > 0.0) {
      for (int j = 0; j < c; ++j)
        if (j != i) tm.t(i, j) = r * raw(i, j) / off_mass;
      tm.t(i, i) = 1.0 - r;
    } else {
      tm.t(i, i) = 1.0;  // class untouched by any selected pair
    }
  }
  tm.validate();
  return tm;
}

TransitionMatrix build_symmetric(int class_count, double r) {
  if (class_count < 2) throw std::invalid_argument("build_symmetric: need >= 2 classes");
  if (r < 0.0 || r >= 1.0) throw std::invalid_argument("build_symmetric: r must be in [0,1)");
  TransitionMatrix tm;
  tm.noise_ratio = r;
  tm.t = Matrix::Constant(class_count, class_count, r / (class_count - 1));
  for (int i = 0; i < class_count; ++i) tm.t(i, i) = 1.0 - r;
  tm.validate();
  return tm;
}

TransitionMatrix build_pairflip(int class_count, double r, const std::vector<int>& partner) {
  if (class_count < 2) throw std::invalid_argument("build_pairflip: need >= 2 classes");
  if (r < 0.0 || r >= 0.5)
    throw std::invalid_argument("build_pairflip: r must be in [0,0.5) so the true class stays "
                                "the row majority");
  if (static_cast<int>(partner.size()) != class_count)
    throw std::invalid_argument("build_pairflip: partner map size mismatch");
  std::vector<int> seen(static_cast<std::size_t>(class_count), 0);
  for (int i = 0; i < class_count; ++i) {
    const int p = partner[static_cast<std::size_t>(i)];
    if (p < 0 || p >= class_count)
      throw std::invalid_argument("build_pairflip: partner out of range");
    if (p == i) throw std::invalid_argument("build_pairflip: class " + std::to_string(i) +
                                            " maps to itself");
    ++seen[static_cast<std::size_t>(p)];
  }
  for (int i = 0; i < class_count; ++i)
    if (seen[static_cast<std::size_t>(i)] != 1)
      throw std::invalid_argument("build_pairflip: partner map is not a permutation");

  TransitionMatrix tm;
  tm.noise_ratio = r;
  tm.t = Matrix::Zero(class_count, class_count);
  for (int i = 0; i < class_count; ++i) {
    tm.t(i, i) = 1.0 - r;
    tm.t(i, partner[static_cast<std::size_t>(i)]) = r;
  }
  tm.validate();
  return tm;
}

std::vector<int> default_pairflip_partner(int class_count) {
  if (class_count < 2) throw std::invalid_argument("pairflip: need >= 2 classes");
  std::vector<int> partner(static_cast<std::size_t>(class_count));
  for (int i = 0; i < class_count; ++i) partner[static_cast<std::size_t>(i)] = (i + 1) % class_count;
  return partner;
}

std::vector<int> corrupt_labels(const std::vector<int>& true_labels, const TransitionMatrix& tm,
                                Rng& rng) {
  tm.validate();
  const int c = tm.class_count();
  std::vector<int> out;
  out.reserve(true_labels.size());
  for (int y : true_labels) {
    if (y < 0 || y >= c)
      throw std::invalid_argument("corrupt_labels: label " + std::to_string(y) +
                                  " outside matrix of " + std::to_string(c) + " classes");
    const double u = rng.uniform();
    double cum = 0.0;
    int drawn = c - 1;  // rounding refuge: row sums to 1 up to fp error
    for (int j = 0; j < c; ++j) {
      cum += tm.t(y, j);
      if (u < cum) {
        drawn = j;
        break;
      }
    }
    out.push_back(drawn);
  }
  return out;
}

LabeledDataset corrupt_dataset(const LabeledDataset& ds, const TransitionMatrix& tm,
                               std::uint64_t seed) {
  ds.validate();
  if (ds.class_count != tm.class_count())
    throw std::invalid_argument("corrupt_dataset: dataset has " +
                                std::to_string(ds.class_count) + " classes, matrix has " +
                                std::to_string(tm.class_count()));
  LabeledDataset out = ds;
  Rng rng(seed);
  out.given_labels = corrupt_labels(ds.true_labels, tm, rng);
  return out;
}

void save_matrix_csv(const TransitionMatrix& tm, const std::string& path) {
  tm.validate();
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  char buf[64];
  for (Eigen::Index i = 0; i < tm.t.rows(); ++i) {
    for (Eigen::Index j = 0; j < tm.t.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", tm.t(i, j));
      if (j) out << ',';
      out << buf;
    }
    out << "\n";
  }
  if (!out) throw std::runtime_error("write failed for " + path);
}

TransitionMatrix load_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
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
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw std::runtime_error(path + ": empty matrix");
  const auto c = rows.size();
  TransitionMatrix tm;
  tm.t = Matrix(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(c));
  for (std::size_t i = 0; i < c; ++i) {
    if (rows[i].size() != c)
      throw std::runtime_error(path + ": row " + std::to_string(i + 1) + " has " +
                               std::to_string(rows[i].size()) + " columns, expected " +
                               std::to_string(c));
    for (std::size_t j = 0; j < c; ++j)
      tm.t(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  }
  tm.noise_ratio = 1.0 - tm.t.diagonal().minCoeff();
  tm.validate();
  return tm;
}

}  // namespace tripartite
