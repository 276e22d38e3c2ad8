#pragma once

#include <cstdint>
#include <gmpxx.h>
#include <random>
#include <string>
#include <vector>

namespace p4l {

/// Derives an independent substream seed: splitmix64 over (base, tag).
/// Used to give every peer/purpose its own RNG so experiment cells never
/// share randomness.
uint64_t derive_seed(uint64_t base, uint64_t tag);
uint64_t derive_seed(uint64_t base, const std::string& tag);

/// Deterministic randomness source shared by crypto and simulation code.
/// Same seed, same call sequence -> same outputs (the golden-trace and
/// metrics-reproducibility tests rely on this).
class SeededRng {
public:
  explicit SeededRng(uint64_t seed);

  /// Uniform integer in [0, bound), bound > 0.
  mpz_class below(const mpz_class& bound);
  /// Uniform integer with exactly `bits` random bits (may have leading zeros).
  mpz_class bits(unsigned bit_count);
  /// Uniform in [0,1). 53 random bits.
  double uniform();
  double uniform(double lo, double hi);
  /// Standard normal via std::normal_distribution.
  double normal();
  uint64_t next_u64();
  /// Uniform integer in [0, n).
  size_t index(size_t n);
  void fill(uint8_t* out, size_t n);

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[index(i)]);
  }

  uint64_t seed() const { return seed_; }

private:
  uint64_t seed_;
  gmp_randclass gmp_;
  std::mt19937_64 std_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

} // namespace p4l
