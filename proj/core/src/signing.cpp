#include "p4l/signing.hpp"

#include <mutex>
#include <sodium.h>
#include <stdexcept>

namespace p4l {

void ensure_crypto_init() {
  static std::once_flag once;
  std::call_once(once, [] {
    if (sodium_init() < 0) throw std::runtime_error("libsodium init failed");
  });
}

SigningKey SigningKey::generate(SeededRng& rng) {
  ensure_crypto_init();
  SigningKey k;
  std::array<uint8_t, crypto_sign_SEEDBYTES> seed{};
  rng.fill(seed.data(), seed.size());
  crypto_sign_seed_keypair(k.verify_key_.data(), k.secret_.data(), seed.data());
  return k;
}

Signature SigningKey::sign(const Bytes& message) const {
  ensure_crypto_init();
  Signature sig{};
  crypto_sign_detached(sig.data(), nullptr, message.data(), message.size(), secret_.data());
  return sig;
}

bool verify_signature(const VerifyKey& key, const Bytes& message, const Signature& sig) {
  ensure_crypto_init();
  return crypto_sign_verify_detached(sig.data(), message.data(), message.size(), key.data()) == 0;
}

} // namespace p4l
