#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "tripartite/rng.hpp"
#include "tripartite/types.hpp"

namespace tripartite {

//! Feature rows plus two label tracks: the labels handed to the learner
//! (possibly corrupted) and the generating ground truth.
struct LabeledDataset {
  Matrix features;                // n x d
  std::vector<int> given_labels;  // what training sees
  std::vector<int> true_labels;   // ground truth, for evaluation only
  std::vector<int> sample_ids;    // unique, stable through corruption/splits
  int class_count = 0;

  int size() const { return static_cast<int>(features.rows()); }
  int feature_dim() const { return static_cast<int>(features.cols()); }
  void validate() const;  // throws on inconsistent sizes/labels/duplicate ids
};

//! Pulls the means of two classes toward each other: each moves toward the
//! midpoint by `degree`/2 of the gap, so degree 1 makes them coincide.
struct OverlapPair {
  int class_a = 0;
  int class_b = 1;
  double degree = 0.5;  // in [0, 1]
};

//! Isotropic Gaussian blobs whose means sit on a circle (first two feature
//! dimensions; any further dimensions carry pure noise around zero).
struct BlobSpec {
  int class_count = 4;
  int per_class = 500;
  int feature_dim = 2;
  double radius = 4.0;
  double stddev = 1.0;
  std::vector<OverlapPair> overlaps;

  void validate() const;
};

LabeledDataset gen_blobs(const BlobSpec& spec, std::uint64_t seed);

//! Two interleaved half-circle arcs (classes 0 and 1) with Gaussian noise.
//! `n` is the total sample count and must be even.
LabeledDataset gen_two_moons(int n, double noise_stddev, std::uint64_t seed);

//! CSV with header id,given_label,true_label,f0,...,f{d-1}. Floats are
//! written with enough digits to round-trip exactly.
void save_dataset_csv(const LabeledDataset& ds, const std::string& path);
LabeledDataset load_dataset_csv(const std::string& path);

//! Stratified train/test split by true label: per class, a shuffled
//! `test_fraction` share (rounded to nearest) goes to the test part. Both
//! parts keep ascending-id order. Returns (train, test).
std::pair<LabeledDataset, LabeledDataset> split_dataset(const LabeledDataset& ds,
                                                        double test_fraction,
                                                        std::uint64_t seed);

//! Rows of `ds` selected by position, in the order given.
LabeledDataset take_dataset_rows(const LabeledDataset& ds, const std::vector<int>& rows);

}  // namespace tripartite
