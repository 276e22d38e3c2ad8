#include <doctest.h>

#include "p4l/paillier.hpp"

using namespace p4l;

namespace {

PaillierKeyPair test_keys(uint64_t seed = 42, unsigned bits = 512) {
  SeededRng rng(seed);
  return paillier_keygen(bits, rng, true);
}

} // namespace

TEST_CASE("keygen produces a modulus of the requested bit length") {
  PaillierKeyPair kp = test_keys();
  CHECK(kp.pub.modulus_bits == 512);
  CHECK(mpz_sizeinbase(kp.pub.n.get_mpz_t(), 2) == 512);
  CHECK(kp.sec.p != kp.sec.q);
  mpz_class totient = (kp.sec.p - 1) * (kp.sec.q - 1);
  mpz_class g;
  mpz_gcd(g.get_mpz_t(), kp.pub.n.get_mpz_t(), totient.get_mpz_t());
  CHECK(g == 1);
}

TEST_CASE("keygen rejects a modulus below 512 bits") {
  SeededRng rng(1);
  CHECK_THROWS_WITH_AS(paillier_keygen(256, rng, true), doctest::Contains("modulus too small"),
                       CryptoError);
}

TEST_CASE("keygen requires the unsafe flag for non-production sizes") {
  SeededRng rng(1);
  CHECK_THROWS_AS(paillier_keygen(512, rng, false), CryptoError);
  CHECK_THROWS_AS(paillier_keygen(1024, rng, false), CryptoError);
  CHECK_NOTHROW(paillier_keygen(512, rng, true));
}

TEST_CASE("keygen at 2048 bits satisfies the production contract") {
  SeededRng rng(7);
  PaillierKeyPair kp = paillier_keygen(2048, rng, false);
  CHECK(mpz_sizeinbase(kp.pub.n.get_mpz_t(), 2) == 2048);
  SeededRng enc_rng(8);
  mpz_class m = 1234567890;
  CHECK(paillier_decrypt(kp.pub, kp.sec, paillier_encrypt(kp.pub, m, enc_rng)) == m);
}

TEST_CASE("keygen is deterministic under a fixed seed") {
  PaillierKeyPair a = test_keys(99);
  PaillierKeyPair b = test_keys(99);
  CHECK(a.pub.n == b.pub.n);
  CHECK(a.sec.p == b.sec.p);
  SeededRng r1(5), r2(5);
  CHECK(paillier_encrypt(a.pub, 42, r1) == paillier_encrypt(b.pub, 42, r2));
}

TEST_CASE("decrypt inverts encrypt across the plaintext space") {
  PaillierKeyPair kp = test_keys();
  SeededRng rng(3);
  for (int i = 0; i < 50; ++i) {
    mpz_class m = rng.below(kp.pub.n);
    mpz_class c = paillier_encrypt(kp.pub, m, rng);
    CHECK(paillier_decrypt(kp.pub, kp.sec, c) == m);
  }
}

TEST_CASE("encryption is probabilistic") {
  PaillierKeyPair kp = test_keys();
  SeededRng rng(3);
  CHECK(paillier_encrypt(kp.pub, 7, rng) != paillier_encrypt(kp.pub, 7, rng));
}

TEST_CASE("ciphertext product decrypts to plaintext sum") {
  PaillierKeyPair kp = test_keys();
  SeededRng rng(4);
  for (int i = 0; i < 50; ++i) {
    mpz_class a = rng.below(kp.pub.n);
    mpz_class b = rng.below(kp.pub.n);
    mpz_class sum = paillier_add(kp.pub, paillier_encrypt(kp.pub, a, rng),
                                 paillier_encrypt(kp.pub, b, rng));
    CHECK(paillier_decrypt(kp.pub, kp.sec, sum) == (a + b) % kp.pub.n);
  }
}

TEST_CASE("ten encryptions of one sum to ten") {
  PaillierKeyPair kp = test_keys();
  SeededRng rng(5);
  mpz_class acc = paillier_encrypt(kp.pub, 1, rng);
  for (int i = 0; i < 9; ++i)
    acc = paillier_add(kp.pub, acc, paillier_encrypt(kp.pub, 1, rng));
  CHECK(paillier_decrypt(kp.pub, kp.sec, acc) == 10);
}

TEST_CASE("decrypting with the wrong key yields garbage that the proof flags") {
  PaillierKeyPair kp = test_keys(1);
  PaillierKeyPair other = test_keys(2);
  SeededRng rng(6);
  mpz_class m = 123456;
  mpz_class c = paillier_encrypt(kp.pub, m, rng);
  // wrong key: either a hard error or a wrong plaintext
  try {
    mpz_class wrong = paillier_decrypt(other.pub, other.sec, c % other.pub.n_squared);
    CHECK(wrong != m);
  } catch (const CryptoError&) {
    // acceptable: ciphertext not in the other key's group
  }
}

TEST_CASE("randomness recovery reproduces the encryption exactly") {
  PaillierKeyPair kp = test_keys();
  SeededRng rng(8);
  mpz_class m = rng.below(kp.pub.n);
  mpz_class r = rng.below(kp.pub.n - 1) + 1;
  mpz_class g;
  mpz_gcd(g.get_mpz_t(), r.get_mpz_t(), kp.pub.n.get_mpz_t());
  REQUIRE(g == 1);
  mpz_class c = paillier_encrypt_with_r(kp.pub, m, r);
  CHECK(paillier_recover_randomness(kp.pub, kp.sec, c, m) == r);
}

TEST_CASE("randomness recovery rejects a false plaintext claim") {
  PaillierKeyPair kp = test_keys();
  SeededRng rng(9);
  mpz_class m = rng.below(kp.pub.n - 1);
  mpz_class c = paillier_encrypt(kp.pub, m, rng);
  CHECK_THROWS_AS(paillier_recover_randomness(kp.pub, kp.sec, c, m + 1), CryptoError);
}

TEST_CASE("ciphertext validity checks") {
  PaillierKeyPair kp = test_keys();
  SeededRng rng(10);
  mpz_class c = paillier_encrypt(kp.pub, 5, rng);
  CHECK(paillier_ciphertext_valid(kp.pub, c));
  CHECK_FALSE(paillier_ciphertext_valid(kp.pub, 0));
  CHECK_FALSE(paillier_ciphertext_valid(kp.pub, kp.pub.n_squared));
  CHECK_FALSE(paillier_ciphertext_valid(kp.pub, kp.sec.p)); // shares a factor with n
  CHECK_THROWS_AS(paillier_decrypt(kp.pub, kp.sec, kp.sec.p), CryptoError);
}
