#pragma once

#include <cstdint>
#include <gmpxx.h>
#include <vector>

#include "p4l/paillier.hpp"

namespace p4l {

/// Fixed-point codec: weights are scaled by 10^scale_exp and rounded to
/// integers before encryption; after decryption the sum is divided by
/// scale * N to recover the federated average.
///
/// Per-weight values live in Z_n with the signed lower/upper-half convention
/// ([0, n/2) non-negative, (n/2, n) negative). Inside a packed ciphertext a
/// slot stores value + bias, where bias = 2^(slot_bits - headroom - 1) and
/// headroom = ceil(log2(max_summands)); sums of up to max_summands slots then
/// never carry across slot boundaries.
struct FixedPointCodec {
  uint64_t scale_exp = 10;   // scale = 10^scale_exp
  uint16_t slot_bits = 96;
  uint16_t max_summands = 10; // maximum synergy size whose sums must stay exact

  mpz_class scale() const;
  unsigned headroom_bits() const;
  /// Largest magnitude a single encoded value may take: 2^(slot_bits - headroom - 1).
  mpz_class value_bound() const;
  mpz_class slot_bias() const { return value_bound(); }
  /// Slots per ciphertext for a given Paillier modulus size (packed plaintext
  /// must stay below n).
  unsigned slots_per_ciphertext(unsigned modulus_bits) const;

  bool operator==(const FixedPointCodec& o) const {
    return scale_exp == o.scale_exp && slot_bits == o.slot_bits && max_summands == o.max_summands;
  }
};

/// Number of ciphertexts needed for weight_count weights.
size_t ciphertext_count(size_t weight_count, unsigned slots_per_ct);

/// Signed lower/upper-half interpretation of x in Z_n.
mpz_class signed_lift(const mpz_class& x, const mpz_class& n);
/// Inverse: represent a (possibly negative) integer in Z_n.
mpz_class mod_n_rep(const mpz_class& v, const mpz_class& n);

/// round(w * scale) represented mod n. Throws CryptoError when a weight
/// exceeds the slot capacity.
std::vector<mpz_class> encode_weights(const std::vector<double>& weights,
                                      const FixedPointCodec& codec, const mpz_class& n);

/// Signed interpretation divided by scale * divisor (divisor = N when decoding
/// a federated average).
std::vector<double> decode_weights(const std::vector<mpz_class>& values,
                                   const FixedPointCodec& codec, uint64_t divisor,
                                   const mpz_class& n);

/// Packs per-weight values (mod n) into one plaintext integer per ciphertext
/// group; each occupied slot is biased. summands says how many contributions
/// the values already accumulate (bias is added once per contribution).
mpz_class pack_slots(const std::vector<mpz_class>& values, size_t first, size_t count,
                     const FixedPointCodec& codec, const mpz_class& n, uint32_t summands = 1);

/// Inverse of pack_slots for a plaintext that accumulates `summands`
/// contributions: strips summands * bias from every occupied slot.
std::vector<mpz_class> unpack_slots(const mpz_class& plaintext, size_t count,
                                    const FixedPointCodec& codec, const mpz_class& n,
                                    uint32_t summands);

} // namespace p4l
