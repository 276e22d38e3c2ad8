#include "p4l/selftest.hpp"

#include <cmath>

#include "p4l/envelope.hpp"

namespace p4l {

SelftestResult crypto_selftest(unsigned key_bits, uint64_t seed) {
  SelftestResult res;
  auto check = [&](bool ok, const std::string& what) {
    res.lines.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
    res.ok = res.ok && ok;
  };

  try {
    SeededRng rng(seed);
    PaillierKeyPair keys = paillier_keygen(key_bits, rng, true);
    check(keys.pub.modulus_bits == key_bits, "keygen modulus bit length");

    mpz_class m = rng.below(keys.pub.n);
    mpz_class c = paillier_encrypt(keys.pub, m, rng);
    check(paillier_decrypt(keys.pub, keys.sec, c) == m, "encrypt/decrypt round trip");

    mpz_class m2 = rng.below(keys.pub.n);
    mpz_class c2 = paillier_encrypt(keys.pub, m2, rng);
    check(paillier_decrypt(keys.pub, keys.sec, paillier_add(keys.pub, c, c2)) ==
              (m + m2) % keys.pub.n,
          "additive homomorphism");

    FixedPointCodec codec;
    std::vector<double> w = {0.5, -1.25, 0.0, 3.75};
    auto enc = encode_weights(w, codec, keys.pub.n);
    auto dec = decode_weights(enc, codec, 1, keys.pub.n);
    bool codec_ok = true;
    for (size_t i = 0; i < w.size(); ++i) codec_ok = codec_ok && std::fabs(dec[i] - w[i]) < 1e-9;
    check(codec_ok, "fixed-point codec round trip");

    PackedCiphertext pc = encrypt_packed(keys.pub, enc, codec, rng);
    auto claimed = decrypt_packed_raw(keys.pub, keys.sec, pc);
    DecryptionProof proof = prove_decryption(keys.pub, keys.sec, pc, claimed);
    check(verify_decryption(keys.pub, pc, claimed, proof), "decryption proof verifies");

    auto tampered = claimed;
    tampered[0] += 1;
    check(!verify_decryption(keys.pub, pc, tampered, proof), "tampered plaintext rejected");

    SigningKey sk = SigningKey::generate(rng);
    Bytes msg = {1, 2, 3, 4};
    Signature sig = sk.sign(msg);
    check(verify_signature(sk.verify_key(), msg, sig), "signature round trip");
    Bytes flipped = msg;
    flipped[0] ^= 1;
    check(!verify_signature(sk.verify_key(), flipped, sig), "flipped message rejected");
  } catch (const std::exception& e) {
    res.lines.push_back(std::string("FAIL exception: ") + e.what());
    res.ok = false;
  }
  return res;
}

} // namespace p4l
