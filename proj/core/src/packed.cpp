#include "p4l/packed.hpp"

namespace p4l {

size_t PackedCiphertext::slots_in_ciphertext(size_t ct_index) const {
  size_t start = ct_index * slots_per_ciphertext;
  size_t end = std::min<size_t>(start + slots_per_ciphertext, weight_count);
  return end - start;
}

PackedCiphertext encrypt_packed(const PaillierPublicKey& pk,
                                const std::vector<mpz_class>& values,
                                const FixedPointCodec& codec, SeededRng& rng) {
  if (values.empty()) throw CryptoError("nothing to encrypt");
  PackedCiphertext out;
  out.weight_count = static_cast<uint32_t>(values.size());
  out.slots_per_ciphertext = static_cast<uint16_t>(codec.slots_per_ciphertext(pk.modulus_bits));
  out.codec = codec;
  out.summand_count = 1;
  size_t ct_count = ciphertext_count(values.size(), out.slots_per_ciphertext);
  out.ciphertexts.reserve(ct_count);
  for (size_t i = 0; i < ct_count; ++i) {
    size_t first = i * out.slots_per_ciphertext;
    mpz_class plain = pack_slots(values, first, out.slots_in_ciphertext(i), codec, pk.n);
    out.ciphertexts.push_back(paillier_encrypt(pk, plain, rng));
  }
  return out;
}

std::vector<mpz_class> decrypt_packed_raw(const PaillierPublicKey& pk,
                                          const PaillierSecretKey& sk,
                                          const PackedCiphertext& c) {
  std::vector<mpz_class> raw;
  raw.reserve(c.ciphertexts.size());
  for (const mpz_class& ct : c.ciphertexts) raw.push_back(paillier_decrypt(pk, sk, ct));
  return raw;
}

std::vector<mpz_class> unpack_raw_plaintexts(const std::vector<mpz_class>& raw,
                                             const PackedCiphertext& c, const mpz_class& n) {
  if (raw.size() != c.ciphertexts.size()) throw CryptoError("raw plaintext count mismatch");
  std::vector<mpz_class> values;
  values.reserve(c.weight_count);
  for (size_t i = 0; i < raw.size(); ++i) {
    auto slots = unpack_slots(raw[i], c.slots_in_ciphertext(i), c.codec, n, c.summand_count);
    values.insert(values.end(), slots.begin(), slots.end());
  }
  return values;
}

std::vector<mpz_class> decrypt_packed(const PaillierPublicKey& pk, const PaillierSecretKey& sk,
                                      const PackedCiphertext& c) {
  auto raw = decrypt_packed_raw(pk, sk, c);
  std::vector<mpz_class> values;
  values.reserve(c.weight_count);
  for (size_t i = 0; i < raw.size(); ++i) {
    auto slots = unpack_slots(raw[i], c.slots_in_ciphertext(i), c.codec, pk.n, c.summand_count);
    values.insert(values.end(), slots.begin(), slots.end());
  }
  return values;
}

PackedCiphertext homomorphic_add(const PaillierPublicKey& pk, const PackedCiphertext& a,
                                 const PackedCiphertext& b) {
  if (!(a.codec == b.codec)) throw CryptoError("codec mismatch");
  if (a.weight_count != b.weight_count || a.slots_per_ciphertext != b.slots_per_ciphertext)
    throw CryptoError("shape mismatch");
  if (a.ciphertexts.size() != b.ciphertexts.size()) throw CryptoError("ciphertext count mismatch");
  if (a.summand_count + b.summand_count > a.codec.max_summands)
    throw CryptoError("too many summands for codec headroom");
  PackedCiphertext out;
  out.weight_count = a.weight_count;
  out.slots_per_ciphertext = a.slots_per_ciphertext;
  out.codec = a.codec;
  out.summand_count = a.summand_count + b.summand_count;
  out.ciphertexts.reserve(a.ciphertexts.size());
  for (size_t i = 0; i < a.ciphertexts.size(); ++i)
    out.ciphertexts.push_back(paillier_add(pk, a.ciphertexts[i], b.ciphertexts[i]));
  return out;
}

DecryptionProof prove_decryption(const PaillierPublicKey& pk, const PaillierSecretKey& sk,
                                 const PackedCiphertext& c,
                                 const std::vector<mpz_class>& claimed_plaintexts) {
  if (claimed_plaintexts.size() != c.ciphertexts.size())
    throw CryptoError("claimed plaintext count mismatch");
  DecryptionProof proof;
  proof.per_ciphertext_randomness.reserve(c.ciphertexts.size());
  for (size_t i = 0; i < c.ciphertexts.size(); ++i)
    proof.per_ciphertext_randomness.push_back(
        paillier_recover_randomness(pk, sk, c.ciphertexts[i], claimed_plaintexts[i]));
  return proof;
}

bool verify_decryption(const PaillierPublicKey& pk, const PackedCiphertext& c,
                       const std::vector<mpz_class>& claimed_plaintexts,
                       const DecryptionProof& proof) {
  if (claimed_plaintexts.size() != c.ciphertexts.size()) return false;
  if (proof.per_ciphertext_randomness.size() != c.ciphertexts.size()) return false;
  for (size_t i = 0; i < c.ciphertexts.size(); ++i) {
    const mpz_class& m = claimed_plaintexts[i];
    const mpz_class& r = proof.per_ciphertext_randomness[i];
    if (m < 0 || m >= pk.n || r < 1 || r >= pk.n) return false;
    if (paillier_encrypt_with_r(pk, m, r) != c.ciphertexts[i]) return false;
  }
  return true;
}

void packed_to_bytes(ByteWriter& w, const PackedCiphertext& c) {
  w.put_u32(c.weight_count);
  w.put_u16(c.slots_per_ciphertext);
  w.put_u16(c.codec.slot_bits);
  w.put_u64(c.codec.scale_exp);
  for (const mpz_class& ct : c.ciphertexts) w.put_mpz(ct);
}

PackedCiphertext packed_from_bytes(ByteReader& r) {
  PackedCiphertext c;
  c.weight_count = r.get_u32();
  c.slots_per_ciphertext = r.get_u16();
  c.codec.slot_bits = r.get_u16();
  c.codec.scale_exp = r.get_u64();
  if (c.weight_count == 0 || c.slots_per_ciphertext == 0)
    throw ParseError("empty packed ciphertext");
  size_t ct_count = ciphertext_count(c.weight_count, c.slots_per_ciphertext);
  c.ciphertexts.reserve(ct_count);
  for (size_t i = 0; i < ct_count; ++i) c.ciphertexts.push_back(r.get_mpz());
  c.summand_count = 1;
  return c;
}

} // namespace p4l
