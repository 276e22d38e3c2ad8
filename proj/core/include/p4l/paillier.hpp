#pragma once

#include <cstdint>
#include <gmpxx.h>
#include <stdexcept>

#include "p4l/rng.hpp"

namespace p4l {

struct CryptoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Classic Paillier with g = n + 1. Encryption is c = (1 + m*n) * r^n mod n^2,
/// which is additively homomorphic: c1 * c2 mod n^2 decrypts to m1 + m2 mod n.
struct PaillierPublicKey {
  mpz_class n;
  mpz_class n_squared;
  unsigned modulus_bits = 0;

  bool operator==(const PaillierPublicKey& o) const { return n == o.n; }
};

struct PaillierSecretKey {
  mpz_class p, q;
  mpz_class lambda;           // lcm(p-1, q-1)
  mpz_class mu;               // lambda^-1 mod n (valid since g = n+1)
  mpz_class n_inv_mod_lambda; // for randomness recovery
};

struct PaillierKeyPair {
  PaillierPublicKey pub;
  PaillierSecretKey sec;
};

/// bits must be 2048 or 3072 unless allow_unsafe, which lowers the floor
/// to 512 for fast tests. Deterministic given the rng state.
PaillierKeyPair paillier_keygen(unsigned modulus_bits, SeededRng& rng,
                                bool allow_unsafe = false);

/// Fresh randomness drawn from rng.
mpz_class paillier_encrypt(const PaillierPublicKey& pk, const mpz_class& m, SeededRng& rng);

/// Encryption with caller-supplied randomness r in [1, n), gcd(r, n) = 1.
/// This is the re-encryption primitive decryption-proof verification uses.
mpz_class paillier_encrypt_with_r(const PaillierPublicKey& pk, const mpz_class& m,
                                  const mpz_class& r);

mpz_class paillier_decrypt(const PaillierPublicKey& pk, const PaillierSecretKey& sk,
                           const mpz_class& c);

/// Homomorphic addition: ciphertext product mod n^2.
mpz_class paillier_add(const PaillierPublicKey& pk, const mpz_class& a, const mpz_class& b);

/// Recovers the encryption randomness r from a ciphertext whose plaintext is
/// known: r = (c * g^-m)^(n^-1 mod lambda) mod n. Throws if m is not the true
/// plaintext of c.
mpz_class paillier_recover_randomness(const PaillierPublicKey& pk, const PaillierSecretKey& sk,
                                      const mpz_class& c, const mpz_class& m);

bool paillier_ciphertext_valid(const PaillierPublicKey& pk, const mpz_class& c);

} // namespace p4l
