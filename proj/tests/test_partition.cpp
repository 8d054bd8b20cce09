#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <vector>

#include "tripartite/partition.hpp"
#include "tripartite/rng.hpp"

using namespace tripartite;

namespace {

enum class Subset { Clean, Hard, Noisy };

//! Independent statement of the agreement rule.
Subset oracle_subset(int given, int p1, int p2) {
  const int agreements = (p1 == given ? 1 : 0) + (p2 == given ? 1 : 0);
  if (agreements == 2) return Subset::Clean;
  if (agreements == 1) return Subset::Hard;
  return Subset::Noisy;
}

Subset find_subset(const PartitionResult& part, int id) {
  auto has = [&](const std::vector<int>& v) {
    return std::find(v.begin(), v.end(), id) != v.end();
  };
  const bool in_clean = has(part.clean_ids);
  const bool in_hard = has(part.hard_ids);
  const bool in_noisy = has(part.noisy_ids);
  REQUIRE(static_cast<int>(in_clean) + static_cast<int>(in_hard) +
              static_cast<int>(in_noisy) ==
          1);
  if (in_clean) return Subset::Clean;
  if (in_hard) return Subset::Hard;
  return Subset::Noisy;
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("agreement rule matches the exhaustive three-class truth table") {
  // All 27 combinations of (given, pred1, pred2) over three classes.
  for (int given = 0; given < 3; ++given)
    for (int p1 = 0; p1 < 3; ++p1)
      for (int p2 = 0; p2 < 3; ++p2) {
        PredictionRecord rec;
        rec.sample_id = 0;
        rec.given_label = given;
        rec.pred_net1 = p1;
        rec.pred_net2 = p2;
        const PartitionResult part = tripartition({rec});
        CAPTURE(given);
        CAPTURE(p1);
        CAPTURE(p2);
        CHECK(find_subset(part, 0) == oracle_subset(given, p1, p2));
      }
}

TEST_CASE("the three subsets are disjoint and cover every sample") {
  Rng rng(99);
  std::vector<PredictionRecord> records(10000);
  for (int i = 0; i < 10000; ++i) {
    records[i].sample_id = i;
    records[i].given_label = rng.uniform_int(5);
    records[i].pred_net1 = rng.uniform_int(5);
    records[i].pred_net2 = rng.uniform_int(5);
    records[i].loss = rng.uniform(0.0, 3.0);
  }
  const PartitionResult part = tripartition(records);
  CHECK(part.total() == 10000);
  std::set<int> seen;
  for (const auto* ids : {&part.clean_ids, &part.hard_ids, &part.noisy_ids})
    for (int id : *ids) {
      CHECK(seen.insert(id).second);  // never twice
      CHECK(id >= 0);
      CHECK(id < 10000);
    }
  CHECK(seen.size() == 10000);
  // every member obeys the rule, checked in bulk via lookup table
  std::vector<Subset> expected(10000);
  for (const auto& r : records)
    expected[r.sample_id] = oracle_subset(r.given_label, r.pred_net1, r.pred_net2);
  for (int id : part.clean_ids) CHECK(expected[id] == Subset::Clean);
  for (int id : part.hard_ids) CHECK(expected[id] == Subset::Hard);
  for (int id : part.noisy_ids) CHECK(expected[id] == Subset::Noisy);
}

TEST_CASE("swapping the two networks' predictions never changes the subsets") {
  Rng rng(7);
  std::vector<PredictionRecord> records(500), swapped(500);
  for (int i = 0; i < 500; ++i) {
    records[i].sample_id = i;
    records[i].given_label = rng.uniform_int(4);
    records[i].pred_net1 = rng.uniform_int(4);
    records[i].pred_net2 = rng.uniform_int(4);
    swapped[i] = records[i];
    std::swap(swapped[i].pred_net1, swapped[i].pred_net2);
  }
  const PartitionResult a = tripartition(records);
  const PartitionResult b = tripartition(swapped);
  CHECK(a.clean_ids == b.clean_ids);
  CHECK(a.hard_ids == b.hard_ids);
  CHECK(a.noisy_ids == b.noisy_ids);
}

TEST_CASE("duplicate sample ids are rejected") {
  std::vector<PredictionRecord> records(2);
  records[0].sample_id = 3;
  records[1].sample_id = 3;
  CHECK_THROWS_AS(tripartition(records), std::invalid_argument);
}

TEST_CASE("low-loss selection keeps exactly the cheapest floor(R*n) samples") {
  Rng rng(21);
  std::vector<PredictionRecord> records(237);
  for (int i = 0; i < 237; ++i) {
    records[i].sample_id = i;
    records[i].loss = rng.uniform(0.0, 5.0);
  }
  const double keep = 0.7;
  const PartitionResult part = small_loss_partition(records, keep);
  const int expect_kept = static_cast<int>(std::floor(keep * 237 + 1e-9));
  CHECK(static_cast<int>(part.clean_ids.size()) == expect_kept);
  CHECK(part.hard_ids.empty());
  CHECK(static_cast<int>(part.noisy_ids.size()) == 237 - expect_kept);

  // oracle: sort (loss, id) ascending, cut at expect_kept
  std::vector<std::pair<double, int>> order;
  for (const auto& r : records) order.emplace_back(r.loss, r.sample_id);
  std::sort(order.begin(), order.end());
  std::set<int> expect_clean;
  for (int i = 0; i < expect_kept; ++i) expect_clean.insert(order[i].second);
  for (int id : part.clean_ids) CHECK(expect_clean.count(id) == 1);
}

TEST_CASE("loss ties break toward the smaller sample id") {
  std::vector<PredictionRecord> records(4);
  for (int i = 0; i < 4; ++i) {
    records[i].sample_id = i;
    records[i].loss = 1.0;  // all tied
  }
  const PartitionResult part = small_loss_partition(records, 0.5);
  REQUIRE(part.clean_ids.size() == 2);
  CHECK(std::find(part.clean_ids.begin(), part.clean_ids.end(), 0) != part.clean_ids.end());
  CHECK(std::find(part.clean_ids.begin(), part.clean_ids.end(), 1) != part.clean_ids.end());
}

TEST_CASE("keep ratio boundaries") {
  std::vector<PredictionRecord> records(10);
  for (int i = 0; i < 10; ++i) {
    records[i].sample_id = i;
    records[i].loss = i;
  }
  CHECK(small_loss_partition(records, 1.0).clean_ids.size() == 10);
  // floor(0.1 * 10) with the epsilon guard is exactly 1, not 0
  CHECK(small_loss_partition(records, 0.1).clean_ids.size() == 1);
  CHECK_THROWS_AS(small_loss_partition(records, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(small_loss_partition(records, 1.5), std::invalid_argument);
  CHECK_THROWS_AS(small_loss_partition({}, 0.5), std::invalid_argument);
}

TEST_CASE("min-max normalization") {
  CHECK(normalize_losses({2.0, 4.0, 6.0}) == std::vector<double>{0.0, 0.5, 1.0});
  CHECK(normalize_losses({3.0, 3.0, 3.0}) == std::vector<double>{0.0, 0.0, 0.0});
  CHECK_THROWS_AS(normalize_losses({1.0}), std::invalid_argument);
}

TEST_CASE("mixture-based bipartition separates a bimodal loss profile") {
  Rng rng(5);
  std::vector<PredictionRecord> records(600);
  for (int i = 0; i < 600; ++i) {
    records[i].sample_id = i;
    records[i].loss = (i < 400) ? rng.normal(0.1, 0.02) : rng.normal(1.2, 0.05);
  }
  const PartitionResult part = gmm_partition(records, 0.5);
  CHECK(part.hard_ids.empty());
  CHECK(part.total() == 600);
  // oracle: each sample goes to the nearer mode
  int misassigned = 0;
  for (int id : part.clean_ids)
    if (id >= 400) ++misassigned;
  for (int id : part.noisy_ids)
    if (id < 400) ++misassigned;
  CHECK(misassigned == 0);
  CHECK_THROWS_AS(gmm_partition(records, -0.1), std::invalid_argument);
  std::vector<PredictionRecord> tiny(records.begin(), records.begin() + 5);
  CHECK_THROWS_AS(gmm_partition(tiny, 0.5), std::invalid_argument);
}

TEST_CASE("a stricter threshold keeps fewer samples") {
  Rng rng(17);
  std::vector<PredictionRecord> records(500);
  for (int i = 0; i < 500; ++i) {
    records[i].sample_id = i;
    // clamped at zero: losses are nonnegative by contract
    records[i].loss = std::max(0.0, (i < 250) ? rng.normal(0.2, 0.1) : rng.normal(0.9, 0.1));
  }
  const auto loose = gmm_partition(records, 0.3);
  const auto strict = gmm_partition(records, 0.95);
  CHECK(strict.clean_ids.size() <= loose.clean_ids.size());
}

TEST_CASE("purity scoring against a hand-built partition") {
  // ids 0..5; true labels all 0; given labels flip ids 4 and 5 to class 1
  const std::vector<int> ids = {0, 1, 2, 3, 4, 5};
  const std::vector<int> given = {0, 0, 0, 0, 1, 1};
  const std::vector<int> truth = {0, 0, 0, 0, 0, 0};

  PartitionResult part;
  part.clean_ids = {0, 1, 4};  // one mislabeled sample slipped in
  part.hard_ids = {2};
  part.noisy_ids = {3, 5};  // one correctly-labeled sample swept up
  const PartitionQuality q = score_partition(part, ids, given, truth);
  CHECK(q.count_clean == 3);
  CHECK(q.count_hard == 1);
  CHECK(q.count_noisy == 2);
  CHECK(q.clean_purity == doctest::Approx(2.0 / 3.0));
  CHECK(q.noisy_purity == doctest::Approx(1.0 / 2.0));
}

TEST_CASE("a perfect partition scores unit purity and empty subsets score zero") {
  const std::vector<int> ids = {0, 1, 2, 3};
  const std::vector<int> given = {0, 0, 1, 1};
  const std::vector<int> truth = {0, 0, 0, 0};
  PartitionResult part;
  part.clean_ids = {0, 1};
  part.noisy_ids = {2, 3};
  const PartitionQuality q = score_partition(part, ids, given, truth);
  CHECK(q.clean_purity == 1.0);
  CHECK(q.noisy_purity == 1.0);
  CHECK(q.count_hard == 0);

  PartitionResult empty_clean;
  empty_clean.noisy_ids = {0, 1, 2, 3};
  const PartitionQuality qe = score_partition(empty_clean, ids, given, truth);
  CHECK(qe.clean_purity == 0.0);
  CHECK(qe.count_clean == 0);
}

TEST_CASE("loss statistics use normalized losses and zero out empty subsets") {
  std::vector<PredictionRecord> records(4);
  const double losses[] = {2.0, 4.0, 6.0, 6.0};
  for (int i = 0; i < 4; ++i) {
    records[i].sample_id = i;
    records[i].given_label = 0;
    records[i].pred_net1 = 0;  // everything agrees: all clean
    records[i].pred_net2 = 0;
    records[i].loss = losses[i];
  }
  const PartitionResult part = tripartition(records);
  REQUIRE(part.clean_ids.size() == 4);
  const std::vector<int> ids = {0, 1, 2, 3};
  const std::vector<int> labels = {0, 0, 0, 0};
  const PartitionQuality q = score_partition(part, ids, labels, labels);
  // normalized losses: 0, 0.5, 1, 1
  CHECK(q.loss_clean.mean == doctest::Approx(0.625));
  CHECK(q.loss_clean.min == 0.0);
  CHECK(q.loss_clean.max == 1.0);
  CHECK(q.loss_hard.mean == 0.0);
  CHECK(q.loss_hard.max == 0.0);
  CHECK(q.loss_noisy.mean == 0.0);
}

TEST_CASE("partition CSV lists every sample ascending with its subset") {
  PartitionResult part;
  part.clean_ids = {2, 0};
  part.hard_ids = {3};
  part.noisy_ids = {1};
  const std::string path = temp_path("partition_out.csv");
  save_partition_csv(part, path);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "sample_id,subset");
  std::vector<std::string> rows;
  while (std::getline(in, line))
    if (!line.empty()) rows.push_back(line);
  in.close();
  std::filesystem::remove(path);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0] == "0,clean");
  CHECK(rows[1] == "1,noisy");
  CHECK(rows[2] == "2,clean");
  CHECK(rows[3] == "3,hard");
}
