#pragma once

#include <array>

#include "p4l/bytes.hpp"
#include "p4l/rng.hpp"

namespace p4l {

// Ed25519 over the canonical envelope bytes. Deterministic signatures,
// 64-byte output, 32-byte verify keys; there is no PKI, verify keys travel
// in-band (trust-on-first-use).

constexpr size_t kVerifyKeyBytes = 32;
constexpr size_t kSignatureBytes = 64;

using VerifyKey = std::array<uint8_t, kVerifyKeyBytes>;
using Signature = std::array<uint8_t, kSignatureBytes>;

class SigningKey {
public:
  /// Deterministic keypair from the rng stream.
  static SigningKey generate(SeededRng& rng);

  Signature sign(const Bytes& message) const;
  const VerifyKey& verify_key() const { return verify_key_; }

private:
  std::array<uint8_t, 64> secret_{};
  VerifyKey verify_key_{};
};

bool verify_signature(const VerifyKey& key, const Bytes& message, const Signature& sig);

/// Process-wide libsodium init; cheap to call repeatedly.
void ensure_crypto_init();

} // namespace p4l
