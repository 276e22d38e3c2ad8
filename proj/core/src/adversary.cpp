#include "p4l/adversary.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace p4l {

AttackKind attack_kind_from_string(const std::string& s) {
  if (s == "none") return AttackKind::none;
  if (s == "flip_fixed") return AttackKind::flip_fixed;
  if (s == "flip_random") return AttackKind::flip_random;
  if (s == "shuffle_all") return AttackKind::shuffle_all;
  if (s == "noisy_weights") return AttackKind::noisy_weights;
  throw std::invalid_argument("unknown attack kind: " + s);
}

std::string to_string(AttackKind k) {
  switch (k) {
    case AttackKind::none: return "none";
    case AttackKind::flip_fixed: return "flip_fixed";
    case AttackKind::flip_random: return "flip_random";
    case AttackKind::shuffle_all: return "shuffle_all";
    case AttackKind::noisy_weights: return "noisy_weights";
  }
  return "unknown";
}

Dataset flip_labels_fixed(const Dataset& data, int class_a, int class_b) {
  if (class_a < 0 || class_a >= static_cast<int>(data.num_classes) || class_b < 0 ||
      class_b >= static_cast<int>(data.num_classes))
    throw std::invalid_argument("flip_labels_fixed: unknown class id");
  Dataset out = data;
  for (int& y : out.labels) {
    if (y == class_a)
      y = class_b;
    else if (y == class_b)
      y = class_a;
  }
  return out;
}

Dataset flip_labels_random(const Dataset& data, SeededRng& rng) {
  std::vector<int> present;
  for (const auto& [label, count] : data.class_histogram()) present.push_back(label);
  if (present.size() < 2) return data; // single-class shard: nothing to flip
  size_t a = rng.index(present.size());
  size_t b = rng.index(present.size() - 1);
  if (b >= a) ++b;
  return flip_labels_fixed(data, present[a], present[b]);
}

Dataset shuffle_labels(const Dataset& data, SeededRng& rng) {
  Dataset out = data;
  rng.shuffle(out.labels);
  return out;
}

double WeightKde::density(double x) const {
  if (sigma <= 0) throw std::invalid_argument("kde density requires sigma > 0");
  const double norm = 1.0 / (std::sqrt(2.0 * M_PI) * sigma);
  double sum = 0;
  for (double w : support) {
    double d = (x - w) / sigma;
    sum += norm * std::exp(-0.5 * d * d);
  }
  return sum;
}

double WeightKde::cdf(double x) const {
  if (sigma <= 0) throw std::invalid_argument("kde cdf requires sigma > 0");
  double sum = 0;
  for (double w : support) sum += 0.5 * std::erfc(-(x - w) / (sigma * std::sqrt(2.0)));
  return sum / static_cast<double>(support.size());
}

std::vector<double> WeightKde::sample(size_t count, SeededRng& rng) const {
  if (support.empty()) throw std::invalid_argument("kde sample requires nonempty support");
  std::vector<double> out(count);
  for (double& v : out) {
    double w = support[rng.index(support.size())];
    v = sigma > 0 ? w + sigma * rng.normal() : w;
  }
  return out;
}

double silverman_bandwidth(const std::vector<double>& values) {
  size_t n = values.size();
  if (n < 2) return 1e-3;
  double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double var = 0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= (n - 1);
  double sd = std::sqrt(var);
  if (sd <= 0) return 1e-3;
  return 1.06 * sd * std::pow(static_cast<double>(n), -0.2);
}

std::pair<size_t, size_t> noisy_attack_range(const Architecture& arch) {
  if (arch.kind == ArchKind::logistic) return {0, arch.weight_count()};
  // mlp: both dense layers are the "last two"; the whole flat vector is the
  // two-layer stack
  return {0, arch.weight_count()};
}

std::vector<double> make_noisy_weights(const ModelParams& honest, double sigma,
                                       SeededRng& rng) {
  auto [first, last] = noisy_attack_range(honest.arch);
  std::vector<double> out = honest.weights;
  WeightKde kde;
  kde.support.assign(honest.weights.begin() + first, honest.weights.begin() + last);
  kde.sigma = sigma > 0 ? sigma : silverman_bandwidth(kde.support);
  auto samples = kde.sample(last - first, rng);
  std::copy(samples.begin(), samples.end(), out.begin() + first);
  return out;
}

std::set<size_t> make_byzantine_population(size_t num_peers, double fraction, SeededRng& rng) {
  if (fraction < 0 || fraction > 1) throw std::invalid_argument("fraction outside [0,1]");
  size_t count = static_cast<size_t>(std::llround(fraction * static_cast<double>(num_peers)));
  if (fraction > 0 && count == 0)
    throw std::invalid_argument("byzantine fraction too small for population");
  std::vector<size_t> order(num_peers);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  return {order.begin(), order.begin() + count};
}

} // namespace p4l
