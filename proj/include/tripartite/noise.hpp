#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tripartite/dataset.hpp"
#include "tripartite/net.hpp"
#include "tripartite/rng.hpp"
#include "tripartite/types.hpp"

namespace tripartite {

//! Row-stochastic label transition matrix: t(i,j) is the probability that a
//! sample whose true class is i receives label j.
struct TransitionMatrix {
  Matrix t;
  double noise_ratio = 0.0;  // the r used to build it (diag of touched rows = 1-r)

  int class_count() const { return static_cast<int>(t.rows()); }
  void validate() const;  // square, entries in [0,1], rows sum to 1
};

//! Class prototype vectors, one row per class.
struct ClassPrototypes {
  Matrix vectors;  // class_count x dim

  int class_count() const { return static_cast<int>(vectors.rows()); }
};

//! Final-layer weight columns of a trained classifier (column k serves as
//! the prototype of class k), transposed into per-class rows.
ClassPrototypes extract_prototypes(const ClassifierState& net);

//! All unordered class pairs ranked by cosine similarity, most similar
//! first; exact ties fall back to lexicographic (a,b) order.
struct SimilarityRanking {
  struct Pair {
    int a = 0, b = 0;   // a < b
    double cosine = 0;
  };
  int class_count = 0;
  std::vector<Pair> pairs;
};

SimilarityRanking rank_pairs(const ClassPrototypes& protos);

//! Recipe for confusion concentrated on the most similar class pairs. The
//! top_k ranked pairs split into three contiguous tiers (sizes ceil(K/3),
//! ceil(K/3), remainder) with strictly descending tier weights in (0,1].
struct RealisticNoiseSpec {
  int top_k = 10;
  std::vector<double> tier_weights = {0.9, 0.8, 0.7};
  double noise_ratio = 0.3;

  void validate() const;
};

RealisticNoiseSpec realistic_preset_small();  // 10 pairs, weights .9/.8/.7
RealisticNoiseSpec realistic_preset_large();  // 60 pairs, weights .9/.6/.3

//! Builds the transition matrix: tier weights are placed symmetrically at
//! the selected pairs, each touched row is normalized over its off-diagonal
//! mass and scaled by r with 1-r on the diagonal; untouched rows stay
//! identity.
TransitionMatrix build_realistic(const SimilarityRanking& ranking,
                                 const RealisticNoiseSpec& spec);

//! Uniform confusion: diagonal 1-r, every off-diagonal r/(C-1).
TransitionMatrix build_symmetric(int class_count, double r);

//! Each class flips only to its partner with probability r (r < 0.5).
//! `partner` must be a permutation of 0..C-1 without fixed points.
TransitionMatrix build_pairflip(int class_count, double r, const std::vector<int>& partner);

//! Cyclic shift i -> (i+1) mod C, the conventional pairflip layout.
std::vector<int> default_pairflip_partner(int class_count);

//! Draws a corrupted label per sample by inverse CDF over the sample's
//! transition row (one uniform per sample, classes scanned ascending).
std::vector<int> corrupt_labels(const std::vector<int>& true_labels, const TransitionMatrix& tm,
                                Rng& rng);

//! Dataset-level corruption: replaces the given labels by draws from each
//! sample's true-label row. Features, true labels, and ids are untouched.
LabeledDataset corrupt_dataset(const LabeledDataset& ds, const TransitionMatrix& tm,
                               std::uint64_t seed);

//! Headerless CSV of matrix rows; loading infers the noise ratio as one
//! minus the smallest diagonal entry.
void save_matrix_csv(const TransitionMatrix& tm, const std::string& path);
TransitionMatrix load_matrix_csv(const std::string& path);

}  // namespace tripartite
