#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "p4l/packed.hpp"
#include "p4l/signing.hpp"

namespace p4l {

struct ProtocolError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Minimum number of peers in a completed synergy (initiator included).
constexpr uint32_t kMinSynergySize = 3;

struct PeerAddress {
  std::array<uint8_t, 16> bytes{};

  static PeerAddress from_u64(uint64_t id);
  std::string hex() const;
  auto operator<=>(const PeerAddress&) const = default;
};

struct SynergyId {
  std::array<uint8_t, 16> bytes{};

  std::string hex() const;
  auto operator<=>(const SynergyId&) const = default;
};

/// Accumulated model weights riding in an envelope. Encrypted mode carries
/// the homomorphic sum; plain mode (encryption disabled for the
/// loss-due-to-encryption experiments) carries running double sums.
struct AccumulatedPayload {
  enum class Kind : uint8_t { encrypted = 0, plain = 1 };
  Kind kind = Kind::encrypted;
  PackedCiphertext ct;
  std::vector<double> plain;

  uint32_t weight_count() const {
    return kind == Kind::encrypted ? ct.weight_count : static_cast<uint32_t>(plain.size());
  }
};

/// The synergy message. In-progress envelopes carry the initiator public key
/// and the remaining-slots counter; terminal envelopes (routed back to the
/// initiator) drop both from the signed payload.
struct SynergyEnvelope {
  enum class Kind : uint8_t { in_progress = 0, terminal = 1 };

  Kind kind = Kind::in_progress;
  SynergyId synergy_id;
  PaillierPublicKey initiator_pk; // in_progress only (on the wire)
  AccumulatedPayload accumulated;
  uint32_t remaining = 0; // S; in_progress only
  std::vector<PeerAddress> participants;
  int64_t timestamp_ms = 0;
  VerifyKey sender_verify_key{};
  Signature signature{};

  const PeerAddress& initiator() const { return participants.front(); }
  bool has_participant(const PeerAddress& a) const;
};

/// Whether the envelope must be routed to participants[0] instead of being
/// forwarded (the countdown reached zero or churn forced an early return).
bool is_terminal(const SynergyEnvelope& e);

/// Decrypted aggregate broadcast by the initiator: the averaged weights plus
/// everything a participant needs to verify the decryption (final ciphertext
/// travels alongside; claimed raw plaintexts and recovered randomness form
/// the proof).
struct FinalAggregateMessage {
  SynergyId synergy_id;
  AccumulatedPayload::Kind payload_kind = AccumulatedPayload::Kind::encrypted;
  PaillierPublicKey initiator_pk;
  PackedCiphertext final_ciphertext;           // encrypted mode
  std::vector<mpz_class> claimed_plaintexts;   // raw packed plaintexts (Res)
  DecryptionProof proof;
  std::vector<double> plain_aggregate;         // plain mode: already averaged
  std::vector<PeerAddress> participants;
  int64_t timestamp_ms = 0;
  VerifyKey initiator_verify_key{};
  Signature signature{};

  uint32_t participant_count() const { return static_cast<uint32_t>(participants.size()); }
};

SynergyId make_synergy_id(const PaillierPublicKey& pk, int64_t created_ms);

/// Canonical byte encodings: deterministic, injective, signature field
/// excluded. Signatures are computed over exactly these bytes.
Bytes canonical_bytes(const SynergyEnvelope& e);
Bytes canonical_bytes(const FinalAggregateMessage& m);

/// Full wire encodings (canonical bytes + signature).
Bytes envelope_to_bytes(const SynergyEnvelope& e);
SynergyEnvelope envelope_from_bytes(const Bytes& b);
Bytes final_message_to_bytes(const FinalAggregateMessage& m);
FinalAggregateMessage final_message_from_bytes(const Bytes& b);

bool envelope_signature_valid(const SynergyEnvelope& e);
bool final_signature_valid(const FinalAggregateMessage& m);

/// Step 1: the initiator encrypts its weights and opens a synergy with
/// budget S more participants. Requires S >= 2 so a full synergy has >= 3 peers.
SynergyEnvelope create_initial_envelope(const PaillierKeyPair& keys,
                                        const SigningKey& signing_key,
                                        const PeerAddress& self,
                                        const std::vector<double>& weights,
                                        const FixedPointCodec& codec, uint32_t budget,
                                        int64_t now_ms, SeededRng& rng,
                                        bool encrypted = true);

/// Steps 2-3: homomorphically add my weights, decrement S, append my address,
/// refresh the timestamp and re-sign. Produces a terminal envelope when the
/// countdown reaches zero.
SynergyEnvelope accumulate_and_forward(const SynergyEnvelope& env,
                                       const std::vector<double>& my_weights,
                                       const PeerAddress& my_address,
                                       const SigningKey& my_signing_key, int64_t now_ms,
                                       SeededRng& rng);

/// Refresh timestamp + re-sign (used when re-forwarding after a beacon
/// timeout).
SynergyEnvelope reseal(const SynergyEnvelope& env, const SigningKey& signing_key,
                       int64_t now_ms);

/// Churn fallback: convert a retained in-progress envelope to terminal form
/// for the early return to the initiator.
SynergyEnvelope to_terminal(const SynergyEnvelope& env, const SigningKey& signing_key,
                            int64_t now_ms);

/// Steps 4-5: decrypt, divide by N, prove correct decryption, sign.
FinalAggregateMessage finalize_aggregate(const SynergyEnvelope& terminal_env,
                                         const PaillierKeyPair& keys,
                                         const SigningKey& signing_key,
                                         const PeerAddress& self, int64_t now_ms);

/// The averaged weights carried by a final message (decoded from the claimed
/// plaintexts in encrypted mode).
std::vector<double> final_aggregate_values(const FinalAggregateMessage& m);

/// Signature plus decryption-proof check (proof is vacuous in plain mode).
bool verify_final_message(const FinalAggregateMessage& m);

} // namespace p4l
