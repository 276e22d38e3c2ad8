#include <cmath>
#include <doctest.h>
#include <numeric>

#include "p4l/model.hpp"

using namespace p4l;

namespace {

// central finite differences, the independent gradient oracle
std::vector<double> numeric_gradient(const ModelParams& model, const Dataset& data,
                                     const std::vector<size_t>& idx, double h = 1e-6) {
  std::vector<double> g(model.weights.size());
  std::vector<double> scratch;
  for (size_t j = 0; j < g.size(); ++j) {
    ModelParams plus = model, minus = model;
    plus.weights[j] += h;
    minus.weights[j] -= h;
    double lp = loss_and_grad(plus, data, idx, scratch);
    double lm = loss_and_grad(minus, data, idx, scratch);
    g[j] = (lp - lm) / (2 * h);
  }
  return g;
}

double max_rel_err(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0;
  for (size_t i = 0; i < a.size(); ++i) {
    double scale = std::max({std::fabs(a[i]), std::fabs(b[i]), 1e-8});
    worst = std::max(worst, std::fabs(a[i] - b[i]) / scale);
  }
  return worst;
}

Dataset random_dataset(uint32_t dim, uint32_t classes, size_t n, SeededRng& rng) {
  Dataset d;
  d.dim = dim;
  d.num_classes = classes;
  std::vector<double> x(dim);
  for (size_t i = 0; i < n; ++i) {
    for (double& v : x) v = rng.normal();
    d.push(x.data(), static_cast<int>(rng.index(classes)));
  }
  return d;
}

// brute-force pairwise concordance, the AUC oracle
double concordance_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  double num = 0;
  size_t pairs = 0;
  for (size_t i = 0; i < scores.size(); ++i)
    for (size_t j = 0; j < scores.size(); ++j) {
      if (labels[i] != 1 || labels[j] != 0) continue;
      ++pairs;
      if (scores[i] > scores[j])
        num += 1.0;
      else if (scores[i] == scores[j])
        num += 0.5;
    }
  return num / pairs;
}

} // namespace

TEST_CASE("logistic gradient matches finite differences") {
  SeededRng rng(1);
  Architecture arch{ArchKind::logistic, 6, 0, 2};
  Dataset d = random_dataset(6, 2, 12, rng);
  ModelParams m = init_model(arch, "t", rng);
  for (double& w : m.weights) w = rng.uniform(-0.5, 0.5);
  std::vector<size_t> idx(d.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<double> g;
  loss_and_grad(m, d, idx, g);
  CHECK(max_rel_err(g, numeric_gradient(m, d, idx)) < 1e-5);
}

TEST_CASE("mlp gradient matches finite differences") {
  SeededRng rng(2);
  Architecture arch{ArchKind::mlp, 5, 7, 4};
  Dataset d = random_dataset(5, 4, 9, rng);
  ModelParams m = init_model(arch, "t", rng);
  std::vector<size_t> idx(d.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<double> g;
  loss_and_grad(m, d, idx, g);
  CHECK(max_rel_err(g, numeric_gradient(m, d, idx)) < 1e-5);
}

TEST_CASE("architecture weight counts") {
  CHECK(Architecture{ArchKind::logistic, 16, 0, 2}.weight_count() == 17);
  CHECK(Architecture{ArchKind::mlp, 16, 16, 10}.weight_count() ==
        16 * 16 + 16 + 10 * 16 + 10);
}

TEST_CASE("perfect scores give accuracy and auc of one") {
  Architecture arch{ArchKind::logistic, 1, 0, 2};
  ModelParams m;
  m.arch = arch;
  m.weights = {10.0, 0.0};
  Dataset d;
  d.dim = 1;
  d.num_classes = 2;
  for (int i = 0; i < 10; ++i) {
    double x = i < 5 ? 1.0 : -1.0;
    d.push(&x, i < 5 ? 1 : 0);
  }
  EvalMetrics e = evaluate(m, d);
  CHECK(e.accuracy == 1.0);
  REQUIRE(e.auc.has_value());
  CHECK(*e.auc == 1.0);
}

TEST_CASE("random scores give auc near one half") {
  SeededRng rng(3);
  std::vector<double> scores(10000);
  std::vector<int> labels(10000);
  for (size_t i = 0; i < scores.size(); ++i) {
    scores[i] = rng.uniform();
    labels[i] = static_cast<int>(rng.index(2));
  }
  auto auc = binary_auc(scores, labels);
  REQUIRE(auc.has_value());
  CHECK(*auc == doctest::Approx(0.5).epsilon(0.04));
}

TEST_CASE("hand-computed four-sample ranking gives auc 0.75") {
  // positives at 0.9 and 0.4, negatives at 0.6 and 0.2:
  // concordant pairs (0.9,0.6),(0.9,0.2),(0.4,0.2) of 4 -> 0.75
  auto auc = binary_auc({0.9, 0.6, 0.4, 0.2}, {1, 0, 1, 0});
  REQUIRE(auc.has_value());
  CHECK(*auc == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("rank-based auc equals brute-force concordance including ties") {
  SeededRng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    size_t n = 5 + rng.index(195);
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    bool has_pos = false, has_neg = false;
    for (size_t i = 0; i < n; ++i) {
      scores[i] = std::round(rng.uniform() * 10) / 10; // coarse grid forces ties
      labels[i] = static_cast<int>(rng.index(2));
      (labels[i] == 1 ? has_pos : has_neg) = true;
    }
    if (!has_pos || !has_neg) continue;
    auto fast = binary_auc(scores, labels);
    REQUIRE(fast.has_value());
    CHECK(*fast == doctest::Approx(concordance_auc(scores, labels)).epsilon(1e-12));
  }
}

TEST_CASE("single-class data reports auc as absent, not zero") {
  Architecture arch{ArchKind::logistic, 1, 0, 2};
  ModelParams m;
  m.arch = arch;
  m.weights = {1.0, 0.0};
  Dataset d;
  d.dim = 1;
  d.num_classes = 2;
  double x = 1.0;
  d.push(&x, 1);
  d.push(&x, 1);
  EvalMetrics e = evaluate(m, d);
  CHECK_FALSE(e.auc.has_value());
}

TEST_CASE("evaluate rejects an empty dataset") {
  ModelParams m;
  m.arch = {ArchKind::logistic, 1, 0, 2};
  m.weights = {0.0, 0.0};
  Dataset d;
  d.dim = 1;
  CHECK_THROWS_AS(evaluate(m, d), std::invalid_argument);
}

TEST_CASE("multiclass macro auc averages one-vs-rest") {
  SeededRng rng(5);
  Architecture arch{ArchKind::mlp, 3, 4, 3};
  ModelParams m = init_model(arch, "t", rng);
  Dataset d = random_dataset(3, 3, 60, rng);
  EvalMetrics e = evaluate(m, d);
  REQUIRE(e.auc.has_value());
  CHECK(*e.auc >= 0.0);
  CHECK(*e.auc <= 1.0);
}

TEST_CASE("weight clipping caps magnitudes and counts clips") {
  std::vector<double> w = {5.0, -2000.0, 900.0, 1500.0};
  CHECK(clip_weights(w) == 2);
  CHECK(w[1] == -1000.0);
  CHECK(w[3] == 1000.0);
  CHECK(w[0] == 5.0);
}
