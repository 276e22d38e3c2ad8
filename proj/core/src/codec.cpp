#include "p4l/codec.hpp"

#include <cmath>

namespace p4l {

mpz_class FixedPointCodec::scale() const {
  mpz_class s;
  mpz_ui_pow_ui(s.get_mpz_t(), 10, static_cast<unsigned long>(scale_exp));
  return s;
}

unsigned FixedPointCodec::headroom_bits() const {
  unsigned bits = 0;
  while ((1u << bits) < max_summands) ++bits;
  return bits;
}

mpz_class FixedPointCodec::value_bound() const {
  mpz_class b = 1;
  b <<= (slot_bits - headroom_bits() - 1);
  return b;
}

unsigned FixedPointCodec::slots_per_ciphertext(unsigned modulus_bits) const {
  if (modulus_bits < static_cast<unsigned>(slot_bits) + 2)
    throw CryptoError("modulus too small for one slot");
  return (modulus_bits - 2) / slot_bits;
}

size_t ciphertext_count(size_t weight_count, unsigned slots_per_ct) {
  return (weight_count + slots_per_ct - 1) / slots_per_ct;
}

mpz_class signed_lift(const mpz_class& x, const mpz_class& n) {
  if (2 * x > n) return x - n;
  return x;
}

mpz_class mod_n_rep(const mpz_class& v, const mpz_class& n) {
  mpz_class r = v % n;
  if (r < 0) r += n;
  return r;
}

std::vector<mpz_class> encode_weights(const std::vector<double>& weights,
                                      const FixedPointCodec& codec, const mpz_class& n) {
  const mpz_class bound = codec.value_bound();
  const double scale_d = std::pow(10.0, static_cast<double>(codec.scale_exp));
  std::vector<mpz_class> out;
  out.reserve(weights.size());
  for (double w : weights) {
    if (!std::isfinite(w)) throw CryptoError("non-finite weight");
    double scaled = w * scale_d;
    mpz_class v;
    if (std::fabs(scaled) < 0x1p53) {
      v = mpz_class(static_cast<long>(std::llround(scaled)));
    } else {
      // beyond 2^53 the scaled double is already integral
      mpz_set_d(v.get_mpz_t(), scaled);
    }
    if (v >= bound || -v >= bound) throw CryptoError("weight exceeds slot capacity");
    out.push_back(mod_n_rep(v, n));
  }
  return out;
}

std::vector<double> decode_weights(const std::vector<mpz_class>& values,
                                   const FixedPointCodec& codec, uint64_t divisor,
                                   const mpz_class& n) {
  if (divisor < 1) throw CryptoError("divisor must be >= 1");
  mpz_class denom = codec.scale() * mpz_class(static_cast<unsigned long>(divisor));
  std::vector<double> out;
  out.reserve(values.size());
  for (const mpz_class& x : values) {
    mpz_class v = signed_lift(x, n);
    mpz_class q, r;
    mpz_fdiv_qr(q.get_mpz_t(), r.get_mpz_t(), v.get_mpz_t(), denom.get_mpz_t());
    out.push_back(q.get_d() + r.get_d() / denom.get_d());
  }
  return out;
}

mpz_class pack_slots(const std::vector<mpz_class>& values, size_t first, size_t count,
                     const FixedPointCodec& codec, const mpz_class& n, uint32_t summands) {
  if (summands < 1 || summands > codec.max_summands)
    throw CryptoError("summand count outside codec range");
  const mpz_class bound = codec.value_bound() * summands;
  const mpz_class bias = codec.slot_bias() * summands;
  mpz_class packed = 0;
  for (size_t i = 0; i < count; ++i) {
    mpz_class v = signed_lift(values[first + i], n);
    if (v >= bound || -v >= bound) throw CryptoError("slot value exceeds capacity");
    mpz_class u = v + bias;
    packed += u << (static_cast<unsigned long>(codec.slot_bits) * i);
  }
  return packed;
}

std::vector<mpz_class> unpack_slots(const mpz_class& plaintext, size_t count,
                                    const FixedPointCodec& codec, const mpz_class& n,
                                    uint32_t summands) {
  const mpz_class bias = codec.slot_bias() * summands;
  mpz_class mask = (mpz_class(1) << codec.slot_bits) - 1;
  std::vector<mpz_class> out;
  out.reserve(count);
  mpz_class rest = plaintext;
  for (size_t i = 0; i < count; ++i) {
    mpz_class u = rest & mask;
    rest >>= codec.slot_bits;
    out.push_back(mod_n_rep(u - bias, n));
  }
  return out;
}

} // namespace p4l
