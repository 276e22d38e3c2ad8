#pragma once

#include <vector>

#include "p4l/bytes.hpp"
#include "p4l/codec.hpp"
#include "p4l/paillier.hpp"

namespace p4l {

/// A vector of model weights encrypted into Paillier ciphertexts with
/// several fixed-point slots per ciphertext.
///
/// summand_count tracks how many encrypted contributions the value
/// accumulates. It is bookkeeping, not part of the wire format: on the wire
/// it is always implied by the envelope's participant list, so parsing
/// resets it to 1 and the envelope layer restores it.
struct PackedCiphertext {
  std::vector<mpz_class> ciphertexts;
  uint32_t weight_count = 0;
  uint16_t slots_per_ciphertext = 0;
  FixedPointCodec codec;
  uint32_t summand_count = 1;

  size_t slots_in_ciphertext(size_t ct_index) const;
};

struct DecryptionProof {
  // recovered encryption randomness, one value per ciphertext
  std::vector<mpz_class> per_ciphertext_randomness;
};

PackedCiphertext encrypt_packed(const PaillierPublicKey& pk,
                                const std::vector<mpz_class>& values,
                                const FixedPointCodec& codec, SeededRng& rng);

/// Exact per-weight plaintext slot values (mod n, signed convention).
std::vector<mpz_class> decrypt_packed(const PaillierPublicKey& pk, const PaillierSecretKey& sk,
                                      const PackedCiphertext& c);

/// Raw Paillier plaintexts, one per ciphertext (slots still packed and
/// biased). This is the level decryption proofs speak about.
std::vector<mpz_class> decrypt_packed_raw(const PaillierPublicKey& pk,
                                          const PaillierSecretKey& sk,
                                          const PackedCiphertext& c);

/// Unpack raw plaintexts (as produced by decrypt_packed_raw) into per-weight
/// values mod n.
std::vector<mpz_class> unpack_raw_plaintexts(const std::vector<mpz_class>& raw,
                                             const PackedCiphertext& c, const mpz_class& n);

PackedCiphertext homomorphic_add(const PaillierPublicKey& pk, const PackedCiphertext& a,
                                 const PackedCiphertext& b);

/// Proof of correct decryption by randomness recovery. Throws if
/// claimed_plaintexts is not the true decryption of c.
DecryptionProof prove_decryption(const PaillierPublicKey& pk, const PaillierSecretKey& sk,
                                 const PackedCiphertext& c,
                                 const std::vector<mpz_class>& claimed_plaintexts);

/// True iff re-encrypting every claimed plaintext with the proof randomness
/// reproduces the ciphertext bit-exactly. Returns false on malformed input.
bool verify_decryption(const PaillierPublicKey& pk, const PackedCiphertext& c,
                       const std::vector<mpz_class>& claimed_plaintexts,
                       const DecryptionProof& proof);

/// Wire format: weight_count u32, slots_per_ciphertext u16, slot_bits u16,
/// scale exponent u64, then ceil(weight_count / slots) length-prefixed
/// big-endian ciphertexts.
void packed_to_bytes(ByteWriter& w, const PackedCiphertext& c);
PackedCiphertext packed_from_bytes(ByteReader& r);

} // namespace p4l
