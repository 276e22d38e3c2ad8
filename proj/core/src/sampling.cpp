#include "p4l/sampling.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace p4l {

double power_law_inverse_cdf(double u, double a) {
  if (a <= 0) throw std::invalid_argument("power law exponent must be positive");
  return std::pow(u, 1.0 / a);
}

double power_law_sample(SeededRng& rng, double a) {
  return power_law_inverse_cdf(rng.uniform(), a);
}

WeightedSampler::WeightedSampler(size_t n) : weights_(n, 1.0) {}

WeightedSampler::WeightedSampler(std::vector<double> weights) : weights_(std::move(weights)) {
  for (double w : weights_)
    if (!(w >= 0)) throw std::invalid_argument("sampling weights must be non-negative");
}

std::vector<size_t> WeightedSampler::sample_without_replacement(size_t k, SeededRng& rng) const {
  size_t n = weights_.size();
  k = std::min(k, n);
  std::vector<double> w = weights_;
  double total = std::accumulate(w.begin(), w.end(), 0.0);
  std::vector<size_t> out;
  out.reserve(k);
  for (size_t draw = 0; draw < k; ++draw) {
    if (total <= 0) break;
    double target = rng.uniform() * total;
    double acc = 0;
    size_t pick = n;
    for (size_t i = 0; i < n; ++i) {
      if (w[i] <= 0) continue;
      acc += w[i];
      if (target < acc) {
        pick = i;
        break;
      }
    }
    if (pick == n) { // numeric edge: fall back to last positive weight
      for (size_t i = n; i-- > 0;)
        if (w[i] > 0) {
          pick = i;
          break;
        }
      if (pick == n) break;
    }
    out.push_back(pick);
    total -= w[pick];
    w[pick] = 0;
  }
  return out;
}

} // namespace p4l
