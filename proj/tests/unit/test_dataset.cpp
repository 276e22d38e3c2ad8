#include <cmath>
#include <doctest.h>
#include <filesystem>
#include <set>

#include "p4l/dataset.hpp"

using namespace p4l;

TEST_CASE("iid partition balances classes within three sigma") {
  SeededRng rng(1);
  Dataset d = make_blobs(50000, 4, 10, 3.0, 1.0, rng);
  auto shards = partition_data(d, 1000, {PartitionMode::iid, 6, 2.0}, rng);
  CHECK(shards.size() == 1000);
  for (const auto& s : shards) CHECK(s.size() == 50);

  // pooled class frequency per shard position ~ Binomial(50, 0.1)
  double p = 0.1, n = 50;
  double sigma = std::sqrt(p * (1 - p) / n);
  size_t outliers = 0;
  for (const auto& s : shards) {
    auto h = s.class_histogram();
    for (const auto& [cls, cnt] : h) {
      double freq = static_cast<double>(cnt) / s.size();
      if (std::fabs(freq - p) > 3 * sigma) ++outliers;
    }
  }
  // 10,000 (shard, class) cells, ~0.3% expected outside 3 sigma
  CHECK(outliers < 100);
}

TEST_CASE("label-skew shards hold at most the configured class count") {
  SeededRng rng(2);
  Dataset d = make_blobs(20000, 4, 10, 3.0, 1.0, rng);
  auto shards = partition_data(d, 200, {PartitionMode::label_skew, 6, 2.0}, rng);
  for (const auto& s : shards) {
    auto h = s.class_histogram();
    CHECK(h.size() <= 6);
  }
  // every sample lands somewhere
  size_t total = 0;
  for (const auto& s : shards) total += s.size();
  CHECK(total == d.size());
}

TEST_CASE("size-skew shard sizes follow the power-law draws and allow empties") {
  SeededRng rng(3);
  Dataset d = make_blobs(20000, 4, 10, 3.0, 1.0, rng);
  auto shards = partition_data(d, 500, {PartitionMode::size_skew, 6, 2.0}, rng);
  size_t total = 0;
  size_t small = 0;
  for (const auto& s : shards) {
    total += s.size();
    if (s.size() < 10) ++small;
  }
  CHECK(total <= d.size());
  CHECK(small > 0); // the skew produces some nearly-empty shards
}

TEST_CASE("single-peer partition returns the full dataset") {
  SeededRng rng(4);
  Dataset d = make_blobs(100, 4, 10, 3.0, 1.0, rng);
  auto shards = partition_data(d, 1, {PartitionMode::iid, 6, 2.0}, rng);
  REQUIRE(shards.size() == 1);
  CHECK(shards[0].size() == 100);
}

TEST_CASE("partition precondition failures") {
  SeededRng rng(5);
  Dataset d = make_blobs(10, 4, 10, 3.0, 1.0, rng);
  CHECK_THROWS_AS(partition_data(d, 20, {PartitionMode::iid, 6, 2.0}, rng),
                  std::invalid_argument);
  CHECK_THROWS_AS(partition_data(d, 2, {PartitionMode::label_skew, 11, 2.0}, rng),
                  std::invalid_argument);
}

TEST_CASE("imbalanced task has the requested positive fraction") {
  SeededRng rng(6);
  Dataset d = make_imbalanced_binary(50000, 16, 0.10, 1.8, rng);
  auto h = d.class_histogram();
  double frac = static_cast<double>(h[1]) / d.size();
  CHECK(frac == doctest::Approx(0.10).epsilon(0.1));
}

TEST_CASE("csv round trip preserves samples") {
  SeededRng rng(7);
  Dataset d = make_blobs(50, 3, 4, 2.0, 1.0, rng);
  auto path = std::filesystem::temp_directory_path() / "p4l_test_shard.csv";
  save_csv(d, path.string());
  Dataset back = load_csv(path.string(), 4);
  REQUIRE(back.size() == d.size());
  CHECK(back.dim == d.dim);
  CHECK(back.labels == d.labels);
  for (size_t i = 0; i < d.size(); ++i)
    for (uint32_t j = 0; j < d.dim; ++j)
      CHECK(back.row(i)[j] == doctest::Approx(d.row(i)[j]).epsilon(1e-15));
  std::filesystem::remove(path);
}
