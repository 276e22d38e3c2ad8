#include "p4l/rng.hpp"

#include <stdexcept>

namespace p4l {

static uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

uint64_t derive_seed(uint64_t base, uint64_t tag) {
  return splitmix64(splitmix64(base) ^ tag);
}

uint64_t derive_seed(uint64_t base, const std::string& tag) {
  uint64_t h = 1469598103934665603ull; // FNV-1a
  for (unsigned char c : tag) h = (h ^ c) * 1099511628211ull;
  return derive_seed(base, h);
}

SeededRng::SeededRng(uint64_t seed)
    : seed_(seed), gmp_(gmp_randinit_mt), std_(derive_seed(seed, uint64_t{1})) {
  gmp_.seed(static_cast<unsigned long>(seed));
}

mpz_class SeededRng::below(const mpz_class& bound) {
  if (bound <= 0) throw std::invalid_argument("SeededRng::below: bound must be positive");
  return gmp_.get_z_range(bound);
}

mpz_class SeededRng::bits(unsigned bit_count) { return gmp_.get_z_bits(bit_count); }

double SeededRng::uniform() {
  return (next_u64() >> 11) * 0x1.0p-53;
}

double SeededRng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double SeededRng::normal() { return normal_(std_); }

uint64_t SeededRng::next_u64() { return std_(); }

size_t SeededRng::index(size_t n) {
  if (n == 0) throw std::invalid_argument("SeededRng::index: empty range");
  // rejection sampling keeps the distribution exactly uniform
  uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  uint64_t v;
  do {
    v = next_u64();
  } while (v >= limit);
  return static_cast<size_t>(v % n);
}

void SeededRng::fill(uint8_t* out, size_t n) {
  size_t i = 0;
  while (i < n) {
    uint64_t v = next_u64();
    for (int b = 0; b < 8 && i < n; ++b, ++i) out[i] = static_cast<uint8_t>(v >> (8 * b));
  }
}

} // namespace p4l
