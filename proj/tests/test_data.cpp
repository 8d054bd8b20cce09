#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "tripartite/dataset.hpp"
#include "tripartite/experiment.hpp"
#include "tripartite/trainer.hpp"

using namespace tripartite;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

double one_nn_accuracy(const LabeledDataset& ds) {
  int correct = 0;
  for (int i = 0; i < ds.size(); ++i) {
    double best = 1e300;
    int best_label = -1;
    for (int j = 0; j < ds.size(); ++j) {
      if (j == i) continue;
      const double d = (ds.features.row(i) - ds.features.row(j)).squaredNorm();
      if (d < best) {
        best = d;
        best_label = ds.true_labels[j];
      }
    }
    correct += best_label == ds.true_labels[i];
  }
  return static_cast<double>(correct) / ds.size();
}

Vector class_mean(const LabeledDataset& ds, int cls) {
  Vector mean = Vector::Zero(ds.feature_dim());
  int count = 0;
  for (int i = 0; i < ds.size(); ++i) {
    if (ds.true_labels[i] != cls) continue;
    mean += ds.features.row(i).transpose();
    ++count;
  }
  return mean / count;
}

}  // namespace

TEST_CASE("blobs are deterministic, class-major, and start uncorrupted") {
  BlobSpec spec;
  spec.class_count = 3;
  spec.per_class = 50;
  const LabeledDataset a = gen_blobs(spec, 42);
  const LabeledDataset b = gen_blobs(spec, 42);
  const LabeledDataset c = gen_blobs(spec, 43);
  CHECK(a.size() == 150);
  CHECK((a.features - b.features).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.features - c.features).cwiseAbs().maxCoeff() > 0.0);
  CHECK(a.given_labels == a.true_labels);
  for (int i = 0; i < a.size(); ++i) {
    CHECK(a.sample_ids[i] == i);
    CHECK(a.true_labels[i] == i / 50);
  }
  CHECK_NOTHROW(a.validate());
}

TEST_CASE("well-separated blobs are almost perfectly classifiable") {
  BlobSpec spec;
  spec.class_count = 4;
  spec.per_class = 100;
  spec.radius = 6.0;
  spec.stddev = 0.5;
  const LabeledDataset ds = gen_blobs(spec, 7);
  const ClassifierState probe = train_prototype_net(ds, 11);
  CHECK(accuracy(probe, ds.features, ds.true_labels) > 0.99);
}

TEST_CASE("full overlap collapses two classes onto one mean") {
  BlobSpec spec;
  spec.class_count = 4;
  spec.per_class = 400;
  spec.overlaps = {{0, 1, 1.0}};
  const LabeledDataset ds = gen_blobs(spec, 3);
  const Vector m0 = class_mean(ds, 0);
  const Vector m1 = class_mean(ds, 1);
  // sample means of coinciding distributions: difference ~ N(0, 2/400)
  CHECK((m0 - m1).norm() < 0.25);
  // the untouched classes keep their distance
  CHECK((class_mean(ds, 2) - class_mean(ds, 3)).norm() > 3.0);
}

TEST_CASE("partial overlap shrinks the gap proportionally") {
  BlobSpec base;
  base.class_count = 4;
  base.per_class = 500;
  const LabeledDataset plain = gen_blobs(base, 5);
  BlobSpec moved = base;
  moved.overlaps = {{0, 1, 0.75}};
  const LabeledDataset shifted = gen_blobs(moved, 5);

  const double gap_before = (class_mean(plain, 0) - class_mean(plain, 1)).norm();
  const double gap_after = (class_mean(shifted, 0) - class_mean(shifted, 1)).norm();
  CHECK(gap_after == doctest::Approx(0.25 * gap_before).epsilon(0.15));
}

TEST_CASE("blob spec validation") {
  BlobSpec spec;
  spec.class_count = 1;
  CHECK_THROWS_AS(gen_blobs(spec, 0), std::invalid_argument);
  spec.class_count = 3;
  spec.overlaps = {{0, 0, 0.5}};
  CHECK_THROWS_AS(gen_blobs(spec, 0), std::invalid_argument);
  spec.overlaps = {{0, 1, 1.5}};
  CHECK_THROWS_AS(gen_blobs(spec, 0), std::invalid_argument);
  spec.overlaps = {{0, 2, 0.5}};
  spec.stddev = -1.0;
  CHECK_THROWS_AS(gen_blobs(spec, 0), std::invalid_argument);
}

TEST_CASE("noise-free moons sit exactly on their arcs") {
  const LabeledDataset ds = gen_two_moons(200, 0.0, 9);
  CHECK(ds.size() == 200);
  CHECK(ds.class_count == 2);
  int per_class[2] = {0, 0};
  for (int i = 0; i < ds.size(); ++i) {
    const double x = ds.features(i, 0), y = ds.features(i, 1);
    if (ds.true_labels[i] == 0) {
      CHECK(std::abs(x * x + y * y - 1.0) < 1e-9);
      CHECK(y >= 0.0);
    } else {
      const double dx = 1.0 - x, dy = 0.5 - y;
      CHECK(std::abs(dx * dx + dy * dy - 1.0) < 1e-9);
    }
    ++per_class[ds.true_labels[i]];
  }
  CHECK(per_class[0] == 100);
  CHECK(per_class[1] == 100);
}

TEST_CASE("slightly noisy moons stay nearest-neighbor separable") {
  const LabeledDataset ds = gen_two_moons(400, 0.05, 11);
  CHECK(one_nn_accuracy(ds) > 0.95);
}

TEST_CASE("odd or tiny moon sizes are rejected") {
  CHECK_THROWS_AS(gen_two_moons(201, 0.1, 0), std::invalid_argument);
  CHECK_THROWS_AS(gen_two_moons(0, 0.1, 0), std::invalid_argument);
  CHECK_THROWS_AS(gen_two_moons(100, -0.1, 0), std::invalid_argument);
}

TEST_CASE("dataset CSV round-trips bit-exactly") {
  BlobSpec spec;
  spec.class_count = 3;
  spec.per_class = 20;
  spec.feature_dim = 3;
  LabeledDataset ds = gen_blobs(spec, 17);
  ds.given_labels[4] = 2;  // make given != true somewhere

  const std::string path = temp_path("roundtrip_test.csv");
  save_dataset_csv(ds, path);
  const LabeledDataset back = load_dataset_csv(path);
  std::filesystem::remove(path);

  CHECK(back.class_count == 3);
  CHECK(back.sample_ids == ds.sample_ids);
  CHECK(back.given_labels == ds.given_labels);
  CHECK(back.true_labels == ds.true_labels);
  REQUIRE(back.features.rows() == ds.features.rows());
  CHECK((back.features - ds.features).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("malformed CSV rows are reported with their location") {
  const std::string path = temp_path("malformed_test.csv");
  {
    std::ofstream out(path);
    out << "id,given_label,true_label,f0\n";
    out << "0,0,0,1.5\n";
    out << "1,zero,0,2.5\n";
  }
  CHECK_THROWS_WITH_AS(load_dataset_csv(path), doctest::Contains(":3: bad number"),
                       std::runtime_error);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_dataset_csv(temp_path("missing_file_xyz.csv")), std::runtime_error);
}

TEST_CASE("negative labels in a CSV are rejected") {
  const std::string path = temp_path("neglabel_test.csv");
  {
    std::ofstream out(path);
    out << "id,given_label,true_label,f0\n";
    out << "0,-1,0,1.5\n";
  }
  CHECK_THROWS(load_dataset_csv(path));
  std::filesystem::remove(path);
}

TEST_CASE("splits are stratified, disjoint, and exhaustive") {
  BlobSpec spec;
  spec.class_count = 4;
  spec.per_class = 100;
  const LabeledDataset ds = gen_blobs(spec, 23);
  const auto [train, test] = split_dataset(ds, 0.2, 99);

  CHECK(train.size() == 320);
  CHECK(test.size() == 80);
  std::vector<int> test_per_class(4, 0), train_per_class(4, 0);
  for (int i = 0; i < test.size(); ++i) ++test_per_class[test.true_labels[i]];
  for (int i = 0; i < train.size(); ++i) ++train_per_class[train.true_labels[i]];
  for (int k = 0; k < 4; ++k) {
    CHECK(test_per_class[k] == 20);
    CHECK(train_per_class[k] == 80);
  }

  std::vector<int> all_ids = train.sample_ids;
  all_ids.insert(all_ids.end(), test.sample_ids.begin(), test.sample_ids.end());
  std::sort(all_ids.begin(), all_ids.end());
  CHECK(all_ids == ds.sample_ids);  // blob ids are 0..n-1 ascending

  CHECK(std::is_sorted(train.sample_ids.begin(), train.sample_ids.end()));
  CHECK(std::is_sorted(test.sample_ids.begin(), test.sample_ids.end()));
}

TEST_CASE("stratification rounds per class within one sample") {
  BlobSpec spec;
  spec.class_count = 3;
  spec.per_class = 33;
  const LabeledDataset ds = gen_blobs(spec, 29);
  const auto [train, test] = split_dataset(ds, 0.25, 1);
  std::vector<int> per_class(3, 0);
  for (int i = 0; i < test.size(); ++i) ++per_class[test.true_labels[i]];
  for (int k = 0; k < 3; ++k) {
    CHECK(per_class[k] >= 7);  // llround(0.25 * 33) = 8, allow the floor side
    CHECK(per_class[k] <= 9);
  }
  CHECK(train.size() + test.size() == 99);
}

TEST_CASE("split rejects degenerate fractions") {
  BlobSpec spec;
  spec.class_count = 2;
  spec.per_class = 10;
  const LabeledDataset ds = gen_blobs(spec, 1);
  CHECK_THROWS_AS(split_dataset(ds, 0.0, 0), std::invalid_argument);
  CHECK_THROWS_AS(split_dataset(ds, 1.0, 0), std::invalid_argument);
}

TEST_CASE("row selection keeps the requested order") {
  BlobSpec spec;
  spec.class_count = 2;
  spec.per_class = 5;
  const LabeledDataset ds = gen_blobs(spec, 2);
  const LabeledDataset picked = take_dataset_rows(ds, {7, 0, 3});
  CHECK(picked.size() == 3);
  CHECK(picked.sample_ids == std::vector<int>{7, 0, 3});
  CHECK((picked.features.row(0) - ds.features.row(7)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((picked.features.row(2) - ds.features.row(3)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("dataset validation catches structural damage") {
  BlobSpec spec;
  spec.class_count = 2;
  spec.per_class = 5;
  LabeledDataset ds = gen_blobs(spec, 3);
  ds.sample_ids[1] = ds.sample_ids[0];
  CHECK_THROWS_AS(ds.validate(), std::invalid_argument);
  ds = gen_blobs(spec, 3);
  ds.given_labels[0] = 2;
  CHECK_THROWS_AS(ds.validate(), std::invalid_argument);
  ds = gen_blobs(spec, 3);
  ds.true_labels.pop_back();
  CHECK_THROWS_AS(ds.validate(), std::invalid_argument);
}
