#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace p4l {

struct BenchRow {
  size_t param_count = 0;
  double encrypt_ms = 0;
  double add_ms = 0;
  double decrypt_ms = 0;
};

struct LinearFit {
  double slope = 0;
  double intercept = 0;
  double r_squared = 0;
};

struct BenchResult {
  std::vector<BenchRow> rows;
  LinearFit encrypt_fit;
  LinearFit add_fit;
  LinearFit decrypt_fit;
  unsigned key_bits = 0;
};

LinearFit least_squares_fit(const std::vector<double>& x, const std::vector<double>& y);

/// Times encrypt, one homomorphic add, and decrypt for each parameter count
/// and fits wall time against count. param_counts must be ascending, all > 0.
BenchResult bench_he(const std::vector<size_t>& param_counts, unsigned key_bits,
                     uint64_t seed = 1);

std::string format_bench_table(const BenchResult& r);

} // namespace p4l
