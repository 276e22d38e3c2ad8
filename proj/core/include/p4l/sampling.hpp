#pragma once

#include <cstddef>
#include <vector>

#include "p4l/rng.hpp"

namespace p4l {

/// Inverse CDF of the power-law density f(x, a) = a x^(a-1) on [0, 1]:
/// x = u^(1/a).
double power_law_inverse_cdf(double u, double a);

/// Draws from f(x, a) = a x^(a-1) on [0, 1]. a = 1 is uniform.
double power_law_sample(SeededRng& rng, double a);

/// Weighted sampling without replacement over fixed per-item weights
/// (weights drawn once per experiment for the power-law peer selection mode).
class WeightedSampler {
public:
  /// Uniform weights.
  explicit WeightedSampler(size_t n);
  explicit WeightedSampler(std::vector<double> weights);

  /// k distinct indices; k is clamped to the population size.
  std::vector<size_t> sample_without_replacement(size_t k, SeededRng& rng) const;
  const std::vector<double>& weights() const { return weights_; }

private:
  std::vector<double> weights_;
};

} // namespace p4l
