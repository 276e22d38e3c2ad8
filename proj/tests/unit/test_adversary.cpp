#include <cmath>
#include <doctest.h>
#include <map>

#include "../common/stats.hpp"
#include "p4l/adversary.hpp"

using namespace p4l;

namespace {

Dataset ten_class_shard(size_t n, SeededRng& rng) {
  Dataset d = make_blobs(n, 4, 10, 3.0, 1.0, rng);
  return d;
}

} // namespace

TEST_CASE("fixed label flip swaps exactly the two classes") {
  SeededRng rng(1);
  Dataset d = ten_class_shard(2000, rng);
  auto before = d.class_histogram();
  Dataset flipped = flip_labels_fixed(d, 0, 5);
  auto after = flipped.class_histogram();
  CHECK(after[0] == before[5]);
  CHECK(after[5] == before[0]);
  for (int c = 1; c < 10; ++c)
    if (c != 5) CHECK(after[c] == before[c]);
  CHECK(flipped.features == d.features); // features untouched
  for (size_t i = 0; i < d.size(); ++i) {
    int y = d.labels[i];
    int expect = y == 0 ? 5 : y == 5 ? 0 : y;
    CHECK(flipped.labels[i] == expect);
  }
}

TEST_CASE("binary flip of classes 0 and 1 is full label inversion") {
  SeededRng rng(2);
  Dataset d = make_imbalanced_binary(500, 4, 0.2, 1.5, rng);
  Dataset flipped = flip_labels_fixed(d, 0, 1);
  for (size_t i = 0; i < d.size(); ++i) CHECK(flipped.labels[i] == 1 - d.labels[i]);
}

TEST_CASE("flip of classes absent from the shard leaves it unchanged") {
  Dataset d;
  d.dim = 1;
  d.num_classes = 10;
  double x = 0;
  d.push(&x, 2);
  d.push(&x, 3);
  Dataset flipped = flip_labels_fixed(d, 0, 5);
  CHECK(flipped.labels == d.labels);
  CHECK_THROWS_AS(flip_labels_fixed(d, 0, 99), std::invalid_argument);
}

TEST_CASE("random flip swaps exactly one class pair and is seed-reproducible") {
  SeededRng rng(3);
  Dataset d = ten_class_shard(2000, rng);
  SeededRng a1(42), a2(42);
  Dataset f1 = flip_labels_random(d, a1);
  Dataset f2 = flip_labels_random(d, a2);
  CHECK(f1.labels == f2.labels);

  // exactly one unordered pair may differ from the identity mapping
  std::map<int, int> mapping;
  for (size_t i = 0; i < d.size(); ++i) mapping[d.labels[i]] = f1.labels[i];
  int moved = 0;
  for (const auto& [from, to] : mapping) moved += from != to;
  CHECK(moved == 2);
}

TEST_CASE("random flip pair frequencies are uniform over all 45 pairs") {
  SeededRng data_rng(4);
  Dataset d = ten_class_shard(300, data_rng);
  REQUIRE(d.class_histogram().size() == 10);
  std::map<std::pair<int, int>, double> counts;
  SeededRng rng(5);
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) {
    Dataset f = flip_labels_random(d, rng);
    int a = -1, b = -1;
    for (size_t k = 0; k < d.size(); ++k)
      if (f.labels[k] != d.labels[k]) {
        int lo = std::min(d.labels[k], f.labels[k]);
        int hi = std::max(d.labels[k], f.labels[k]);
        a = lo;
        b = hi;
        break;
      }
    REQUIRE(a >= 0);
    counts[{a, b}] += 1;
  }
  CHECK(counts.size() == 45);
  std::vector<double> observed, expected;
  for (const auto& [pair, c] : counts) {
    observed.push_back(c);
    expected.push_back(draws / 45.0);
  }
  double chi2 = teststats::chi2_statistic(observed, expected);
  CHECK(chi2 < teststats::chi2_critical_001(44));
}

TEST_CASE("random flip on a single-class shard is a no-op") {
  Dataset d;
  d.dim = 1;
  d.num_classes = 10;
  double x = 0;
  d.push(&x, 7);
  d.push(&x, 7);
  SeededRng rng(6);
  CHECK(flip_labels_random(d, rng).labels == d.labels);
}

TEST_CASE("label shuffle preserves the histogram and mostly changes labels") {
  SeededRng data_rng(7);
  Dataset d = ten_class_shard(5000, data_rng);
  SeededRng rng(8);
  Dataset s = shuffle_labels(d, rng);
  CHECK(s.class_histogram() == d.class_histogram());
  size_t changed = 0;
  for (size_t i = 0; i < d.size(); ++i) changed += s.labels[i] != d.labels[i];
  // balanced 10-class data: ~90% expected to change; derangement-rate floor
  CHECK(static_cast<double>(changed) / d.size() > 1.0 - 1.0 / std::exp(1.0) - 0.05);
}

TEST_CASE("shuffling a single sample changes nothing") {
  Dataset d;
  d.dim = 1;
  d.num_classes = 2;
  double x = 0;
  d.push(&x, 1);
  SeededRng rng(9);
  CHECK(shuffle_labels(d, rng).labels == d.labels);
}

TEST_CASE("kde density matches closed-form Gaussian values") {
  WeightKde kde;
  kde.support = {0.0};
  kde.sigma = 1.0;
  CHECK(kde.density(0.0) == doctest::Approx(0.3989422804014327).epsilon(1e-12));
  CHECK(kde.density(15.0) < 1e-20);

  WeightKde two;
  two.support = {-1.0, 1.0};
  two.sigma = 1.0;
  // 2 * G(1; 1)
  CHECK(two.density(0.0) == doctest::Approx(0.48394144903828673).epsilon(1e-12));
  WeightKde degenerate;
  degenerate.support = {0.0};
  degenerate.sigma = 0.0;
  CHECK_THROWS_AS(degenerate.density(0.0), std::invalid_argument);
}

TEST_CASE("kde sampling with sigma zero resamples the support exactly") {
  WeightKde kde;
  kde.support = {1.5, -2.5, 3.25};
  kde.sigma = 0.0;
  SeededRng rng(10);
  for (double v : kde.sample(200, rng))
    CHECK((v == 1.5 || v == -2.5 || v == 3.25));
}

TEST_CASE("kde sample mean approaches the support mean") {
  WeightKde kde;
  kde.support = {0.0, 2.0, 4.0};
  kde.sigma = 0.5;
  SeededRng rng(11);
  const size_t count = 100000;
  auto samples = kde.sample(count, rng);
  double mean = 0;
  for (double v : samples) mean += v;
  mean /= count;
  // support mean 2.0; sd of the mixture ~ sqrt(var(support)+sigma^2) ~ 1.7
  CHECK(std::fabs(mean - 2.0) < 3 * 1.7 / std::sqrt(static_cast<double>(count)));
}

TEST_CASE("kde samples pass a KS test against the mixture cdf") {
  WeightKde kde;
  kde.support = {-1.0, 0.5, 2.0, 2.5};
  kde.sigma = 0.7;
  SeededRng rng(12);
  auto samples = kde.sample(100000, rng);
  double d = teststats::ks_statistic(samples, [&](double x) { return kde.cdf(x); });
  CHECK(d < teststats::ks_critical_001(samples.size()));
}

TEST_CASE("noisy weights keep the honest weights' distribution") {
  SeededRng rng(13);
  ModelParams honest;
  honest.arch = {ArchKind::logistic, 50, 0, 2};
  honest.weights.resize(51);
  for (double& w : honest.weights) w = rng.normal() * 0.3;
  auto noisy = make_noisy_weights(honest, 0.0, rng); // Silverman bandwidth
  CHECK(noisy.size() == honest.weights.size());
  CHECK(noisy != honest.weights);
  // stealthy in distribution: KS between noisy weights and the KDE built
  // from the honest ones
  WeightKde kde;
  kde.support = honest.weights;
  kde.sigma = silverman_bandwidth(honest.weights);
  double d = teststats::ks_statistic(noisy, [&](double x) { return kde.cdf(x); });
  // 51 samples: generous critical value at alpha=0.01
  CHECK(d < 1.62762 / std::sqrt(51.0));
}

TEST_CASE("byzantine population size follows the fraction") {
  SeededRng rng(14);
  CHECK(make_byzantine_population(200, 0.3, rng).size() == 60);
  CHECK(make_byzantine_population(1000, 0.1, rng).size() == 100);
  CHECK(make_byzantine_population(100, 0.0, rng).empty());
  CHECK_THROWS_AS(make_byzantine_population(5, 0.01, rng), std::invalid_argument);
  CHECK_THROWS_AS(make_byzantine_population(10, 1.5, rng), std::invalid_argument);
}

TEST_CASE("attack kind strings round trip") {
  for (auto k : {AttackKind::none, AttackKind::flip_fixed, AttackKind::flip_random,
                 AttackKind::shuffle_all, AttackKind::noisy_weights})
    CHECK(attack_kind_from_string(to_string(k)) == k);
  CHECK_THROWS_AS(attack_kind_from_string("bogus"), std::invalid_argument);
}
