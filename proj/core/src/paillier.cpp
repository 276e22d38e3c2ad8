#include "p4l/paillier.hpp"

namespace p4l {

namespace {

constexpr int kPrimeReps = 40; // Miller-Rabin rounds, error < 4^-40
constexpr int kKeygenAttempts = 128;

// Random prime with the top two bits set so p*q has exactly 2*half_bits bits.
mpz_class random_prime(unsigned half_bits, SeededRng& rng) {
  for (int attempt = 0; attempt < kKeygenAttempts; ++attempt) {
    mpz_class cand = rng.bits(half_bits);
    mpz_setbit(cand.get_mpz_t(), half_bits - 1);
    mpz_setbit(cand.get_mpz_t(), half_bits - 2);
    mpz_setbit(cand.get_mpz_t(), 0);
    mpz_class p;
    mpz_nextprime(p.get_mpz_t(), cand.get_mpz_t());
    if (mpz_sizeinbase(p.get_mpz_t(), 2) == half_bits &&
        mpz_probab_prime_p(p.get_mpz_t(), kPrimeReps))
      return p;
  }
  throw CryptoError("prime generation failed after bounded retries");
}

} // namespace

PaillierKeyPair paillier_keygen(unsigned modulus_bits, SeededRng& rng, bool allow_unsafe) {
  if (modulus_bits < 512) throw CryptoError("modulus too small (minimum 512 bits)");
  if (!allow_unsafe && modulus_bits != 2048 && modulus_bits != 3072)
    throw CryptoError("modulus_bits must be 2048 or 3072 (pass unsafe flag for smaller test keys)");

  unsigned half = modulus_bits / 2;
  for (int attempt = 0; attempt < kKeygenAttempts; ++attempt) {
    mpz_class p = random_prime(half, rng);
    mpz_class q = random_prime(half, rng);
    if (p == q) continue;
    mpz_class n = p * q;
    if (mpz_sizeinbase(n.get_mpz_t(), 2) != modulus_bits) continue;
    mpz_class totient = (p - 1) * (q - 1);
    mpz_class g;
    mpz_gcd(g.get_mpz_t(), n.get_mpz_t(), totient.get_mpz_t());
    if (g != 1) continue;

    PaillierKeyPair kp;
    kp.pub.n = n;
    kp.pub.n_squared = n * n;
    kp.pub.modulus_bits = modulus_bits;
    kp.sec.p = p;
    kp.sec.q = q;
    mpz_lcm(kp.sec.lambda.get_mpz_t(), mpz_class(p - 1).get_mpz_t(),
            mpz_class(q - 1).get_mpz_t());
    // g = n+1 makes L(g^lambda mod n^2) = lambda mod n, so mu = lambda^-1 mod n
    if (mpz_invert(kp.sec.mu.get_mpz_t(), kp.sec.lambda.get_mpz_t(), n.get_mpz_t()) == 0)
      continue;
    if (mpz_invert(kp.sec.n_inv_mod_lambda.get_mpz_t(), n.get_mpz_t(),
                   kp.sec.lambda.get_mpz_t()) == 0)
      continue;
    return kp;
  }
  throw CryptoError("key generation failed after bounded retries");
}

mpz_class paillier_encrypt(const PaillierPublicKey& pk, const mpz_class& m, SeededRng& rng) {
  mpz_class r, g;
  do {
    r = rng.below(pk.n - 1) + 1;
    mpz_gcd(g.get_mpz_t(), r.get_mpz_t(), pk.n.get_mpz_t());
  } while (g != 1);
  return paillier_encrypt_with_r(pk, m, r);
}

mpz_class paillier_encrypt_with_r(const PaillierPublicKey& pk, const mpz_class& m,
                                  const mpz_class& r) {
  if (m < 0 || m >= pk.n) throw CryptoError("plaintext out of range [0, n)");
  if (r < 1 || r >= pk.n) throw CryptoError("encryption randomness out of range [1, n)");
  // g^m = (1+n)^m = 1 + m*n mod n^2
  mpz_class gm = (1 + m * pk.n) % pk.n_squared;
  mpz_class rn;
  mpz_powm(rn.get_mpz_t(), r.get_mpz_t(), pk.n.get_mpz_t(), pk.n_squared.get_mpz_t());
  return gm * rn % pk.n_squared;
}

bool paillier_ciphertext_valid(const PaillierPublicKey& pk, const mpz_class& c) {
  if (c < 1 || c >= pk.n_squared) return false;
  mpz_class g;
  mpz_gcd(g.get_mpz_t(), c.get_mpz_t(), pk.n.get_mpz_t());
  return g == 1;
}

mpz_class paillier_decrypt(const PaillierPublicKey& pk, const PaillierSecretKey& sk,
                           const mpz_class& c) {
  if (!paillier_ciphertext_valid(pk, c)) throw CryptoError("ciphertext not in Z*_{n^2}");
  mpz_class u;
  mpz_powm(u.get_mpz_t(), c.get_mpz_t(), sk.lambda.get_mpz_t(), pk.n_squared.get_mpz_t());
  mpz_class l = (u - 1) / pk.n;
  return l * sk.mu % pk.n;
}

mpz_class paillier_add(const PaillierPublicKey& pk, const mpz_class& a, const mpz_class& b) {
  return a * b % pk.n_squared;
}

mpz_class paillier_recover_randomness(const PaillierPublicKey& pk, const PaillierSecretKey& sk,
                                      const mpz_class& c, const mpz_class& m) {
  if (m < 0 || m >= pk.n) throw CryptoError("claimed plaintext out of range");
  // c * g^-m = r^n mod n^2; reduce mod n and raise to n^-1 mod lambda
  mpz_class gm = (1 + m * pk.n) % pk.n_squared;
  mpz_class gm_inv;
  if (mpz_invert(gm_inv.get_mpz_t(), gm.get_mpz_t(), pk.n_squared.get_mpz_t()) == 0)
    throw CryptoError("claimed plaintext not invertible");
  mpz_class u = c * gm_inv % pk.n_squared % pk.n;
  mpz_class r;
  mpz_powm(r.get_mpz_t(), u.get_mpz_t(), sk.n_inv_mod_lambda.get_mpz_t(), pk.n.get_mpz_t());
  if (paillier_encrypt_with_r(pk, m, r) != c)
    throw CryptoError("claimed plaintext is not the true decryption");
  return r;
}

} // namespace p4l
