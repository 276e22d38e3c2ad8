#include "p4l/bench.hpp"

#include <chrono>
#include <cstdio>
#include <stdexcept>

#include "p4l/packed.hpp"

namespace p4l {

LinearFit least_squares_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("fit needs at least two points");
  size_t n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  LinearFit f;
  double denom = n * sxx - sx * sx;
  f.slope = (n * sxy - sx * sy) / denom;
  f.intercept = (sy - f.slope * sx) / n;
  double ss_res = 0, ss_tot = 0, mean_y = sy / n;
  for (size_t i = 0; i < n; ++i) {
    double pred = f.intercept + f.slope * x[i];
    ss_res += (y[i] - pred) * (y[i] - pred);
    ss_tot += (y[i] - mean_y) * (y[i] - mean_y);
  }
  f.r_squared = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
  return f;
}

BenchResult bench_he(const std::vector<size_t>& param_counts, unsigned key_bits,
                     uint64_t seed) {
  if (param_counts.empty()) throw std::invalid_argument("no parameter counts");
  for (size_t i = 0; i < param_counts.size(); ++i) {
    if (param_counts[i] == 0) throw std::invalid_argument("parameter count must be positive");
    if (i > 0 && param_counts[i] <= param_counts[i - 1])
      throw std::invalid_argument("parameter counts must be strictly ascending");
  }

  using clock = std::chrono::steady_clock;
  auto ms_since = [](clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(clock::now() - t0).count();
  };

  BenchResult res;
  res.key_bits = key_bits;
  SeededRng rng(seed);
  PaillierKeyPair keys = paillier_keygen(key_bits, rng, /*allow_unsafe=*/true);
  FixedPointCodec codec;

  for (size_t count : param_counts) {
    std::vector<double> weights(count);
    for (double& w : weights) w = rng.uniform(-1.0, 1.0);
    auto values = encode_weights(weights, codec, keys.pub.n);

    BenchRow row;
    row.param_count = count;
    auto t0 = clock::now();
    PackedCiphertext a = encrypt_packed(keys.pub, values, codec, rng);
    row.encrypt_ms = ms_since(t0);

    PackedCiphertext b = encrypt_packed(keys.pub, values, codec, rng);
    t0 = clock::now();
    PackedCiphertext sum = homomorphic_add(keys.pub, a, b);
    row.add_ms = ms_since(t0);

    t0 = clock::now();
    auto plain = decrypt_packed(keys.pub, keys.sec, sum);
    row.decrypt_ms = ms_since(t0);
    if (plain.size() != count) throw std::runtime_error("bench decrypt size mismatch");
    res.rows.push_back(row);
  }

  std::vector<double> x, enc, add, dec;
  for (const BenchRow& r : res.rows) {
    x.push_back(static_cast<double>(r.param_count));
    enc.push_back(r.encrypt_ms);
    add.push_back(r.add_ms);
    dec.push_back(r.decrypt_ms);
  }
  res.encrypt_fit = least_squares_fit(x, enc);
  res.add_fit = least_squares_fit(x, add);
  res.decrypt_fit = least_squares_fit(x, dec);
  return res;
}

std::string format_bench_table(const BenchResult& r) {
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof buf, "# paillier %u-bit, packed slots\n", r.key_bits);
  out += buf;
  out += "param_count,encrypt_ms,add_ms,decrypt_ms\n";
  for (const BenchRow& row : r.rows) {
    std::snprintf(buf, sizeof buf, "%zu,%.3f,%.3f,%.3f\n", row.param_count, row.encrypt_ms,
                  row.add_ms, row.decrypt_ms);
    out += buf;
  }
  std::snprintf(buf, sizeof buf,
                "# fit encrypt: %.6g ms/param + %.4g, R^2=%.4f\n"
                "# fit add:     %.6g ms/param + %.4g, R^2=%.4f\n"
                "# fit decrypt: %.6g ms/param + %.4g, R^2=%.4f\n",
                r.encrypt_fit.slope, r.encrypt_fit.intercept, r.encrypt_fit.r_squared,
                r.add_fit.slope, r.add_fit.intercept, r.add_fit.r_squared,
                r.decrypt_fit.slope, r.decrypt_fit.intercept, r.decrypt_fit.r_squared);
  out += buf;
  return out;
}

} // namespace p4l
