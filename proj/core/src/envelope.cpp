#include "p4l/envelope.hpp"

#include <algorithm>

namespace p4l {

namespace {

constexpr uint8_t kWireVersion = 1;
constexpr uint8_t kKindEnvelope = 0;   // in-progress
constexpr uint8_t kKindTerminal = 1;
constexpr uint8_t kKindFinal = 2;

void write_payload(ByteWriter& w, const AccumulatedPayload& p) {
  w.put_u8(static_cast<uint8_t>(p.kind));
  if (p.kind == AccumulatedPayload::Kind::encrypted) {
    packed_to_bytes(w, p.ct);
  } else {
    w.put_u32(static_cast<uint32_t>(p.plain.size()));
    for (double v : p.plain) w.put_f64(v);
  }
}

AccumulatedPayload read_payload(ByteReader& r) {
  AccumulatedPayload p;
  uint8_t k = r.get_u8();
  if (k > 1) throw ParseError("unknown payload kind");
  p.kind = static_cast<AccumulatedPayload::Kind>(k);
  if (p.kind == AccumulatedPayload::Kind::encrypted) {
    p.ct = packed_from_bytes(r);
  } else {
    uint32_t count = r.get_u32();
    p.plain.resize(count);
    for (uint32_t i = 0; i < count; ++i) p.plain[i] = r.get_f64();
  }
  return p;
}

void write_participants(ByteWriter& w, const std::vector<PeerAddress>& l) {
  w.put_u16(static_cast<uint16_t>(l.size()));
  for (const PeerAddress& a : l) w.put_raw(a.bytes.data(), a.bytes.size());
}

std::vector<PeerAddress> read_participants(ByteReader& r) {
  uint16_t count = r.get_u16();
  std::vector<PeerAddress> l(count);
  for (auto& a : l) r.get_raw(a.bytes.data(), a.bytes.size());
  return l;
}

PaillierPublicKey read_pk(ByteReader& r) {
  PaillierPublicKey pk;
  pk.n = r.get_mpz();
  if (pk.n > 0) {
    pk.n_squared = pk.n * pk.n;
    pk.modulus_bits = static_cast<unsigned>(mpz_sizeinbase(pk.n.get_mpz_t(), 2));
  }
  return pk;
}

} // namespace

PeerAddress PeerAddress::from_u64(uint64_t id) {
  PeerAddress a;
  for (int i = 0; i < 8; ++i) a.bytes[15 - i] = static_cast<uint8_t>(id >> (8 * i));
  return a;
}

std::string PeerAddress::hex() const { return to_hex(bytes.data(), bytes.size()); }

std::string SynergyId::hex() const { return to_hex(bytes.data(), bytes.size()); }

bool SynergyEnvelope::has_participant(const PeerAddress& a) const {
  return std::find(participants.begin(), participants.end(), a) != participants.end();
}

bool is_terminal(const SynergyEnvelope& e) { return e.kind == SynergyEnvelope::Kind::terminal; }

SynergyId make_synergy_id(const PaillierPublicKey& pk, int64_t created_ms) {
  ByteWriter w;
  w.put_mpz(pk.n);
  w.put_i64(created_ms);
  SynergyId id;
  id.bytes = hash128(w.bytes());
  return id;
}

Bytes canonical_bytes(const SynergyEnvelope& e) {
  ByteWriter w;
  w.put_u8(kWireVersion);
  w.put_u8(e.kind == SynergyEnvelope::Kind::terminal ? kKindTerminal : kKindEnvelope);
  w.put_raw(e.synergy_id.bytes.data(), e.synergy_id.bytes.size());
  if (e.kind == SynergyEnvelope::Kind::in_progress) {
    w.put_mpz(e.initiator_pk.n);
    w.put_u32(e.remaining);
  }
  write_payload(w, e.accumulated);
  write_participants(w, e.participants);
  w.put_i64(e.timestamp_ms);
  w.put_raw(e.sender_verify_key.data(), e.sender_verify_key.size());
  return w.take();
}

Bytes canonical_bytes(const FinalAggregateMessage& m) {
  ByteWriter w;
  w.put_u8(kWireVersion);
  w.put_u8(kKindFinal);
  w.put_raw(m.synergy_id.bytes.data(), m.synergy_id.bytes.size());
  w.put_u8(static_cast<uint8_t>(m.payload_kind));
  if (m.payload_kind == AccumulatedPayload::Kind::encrypted) {
    w.put_mpz(m.initiator_pk.n);
    packed_to_bytes(w, m.final_ciphertext);
    w.put_u32(static_cast<uint32_t>(m.claimed_plaintexts.size()));
    for (const auto& p : m.claimed_plaintexts) w.put_mpz(p);
    w.put_u32(static_cast<uint32_t>(m.proof.per_ciphertext_randomness.size()));
    for (const auto& r : m.proof.per_ciphertext_randomness) w.put_mpz(r);
  } else {
    w.put_u32(static_cast<uint32_t>(m.plain_aggregate.size()));
    for (double v : m.plain_aggregate) w.put_f64(v);
  }
  write_participants(w, m.participants);
  w.put_i64(m.timestamp_ms);
  w.put_raw(m.initiator_verify_key.data(), m.initiator_verify_key.size());
  return w.take();
}

Bytes envelope_to_bytes(const SynergyEnvelope& e) {
  Bytes b = canonical_bytes(e);
  b.insert(b.end(), e.signature.begin(), e.signature.end());
  return b;
}

SynergyEnvelope envelope_from_bytes(const Bytes& b) {
  ByteReader r(b);
  SynergyEnvelope e;
  if (r.get_u8() != kWireVersion) throw ParseError("unsupported wire version");
  uint8_t kind = r.get_u8();
  if (kind != kKindEnvelope && kind != kKindTerminal) throw ParseError("not an envelope");
  e.kind = kind == kKindTerminal ? SynergyEnvelope::Kind::terminal
                                 : SynergyEnvelope::Kind::in_progress;
  r.get_raw(e.synergy_id.bytes.data(), e.synergy_id.bytes.size());
  if (e.kind == SynergyEnvelope::Kind::in_progress) {
    e.initiator_pk = read_pk(r);
    e.remaining = r.get_u32();
  }
  e.accumulated = read_payload(r);
  e.participants = read_participants(r);
  e.timestamp_ms = r.get_i64();
  r.get_raw(e.sender_verify_key.data(), e.sender_verify_key.size());
  r.get_raw(e.signature.data(), e.signature.size());
  if (!r.exhausted()) throw ParseError("trailing bytes after envelope");
  if (e.accumulated.kind == AccumulatedPayload::Kind::encrypted)
    e.accumulated.ct.summand_count = static_cast<uint32_t>(e.participants.size());
  return e;
}

Bytes final_message_to_bytes(const FinalAggregateMessage& m) {
  Bytes b = canonical_bytes(m);
  b.insert(b.end(), m.signature.begin(), m.signature.end());
  return b;
}

FinalAggregateMessage final_message_from_bytes(const Bytes& b) {
  ByteReader r(b);
  FinalAggregateMessage m;
  if (r.get_u8() != kWireVersion) throw ParseError("unsupported wire version");
  if (r.get_u8() != kKindFinal) throw ParseError("not a final aggregate message");
  r.get_raw(m.synergy_id.bytes.data(), m.synergy_id.bytes.size());
  uint8_t pk_kind = r.get_u8();
  if (pk_kind > 1) throw ParseError("unknown payload kind");
  m.payload_kind = static_cast<AccumulatedPayload::Kind>(pk_kind);
  if (m.payload_kind == AccumulatedPayload::Kind::encrypted) {
    m.initiator_pk = read_pk(r);
    m.final_ciphertext = packed_from_bytes(r);
    uint32_t np = r.get_u32();
    m.claimed_plaintexts.reserve(np);
    for (uint32_t i = 0; i < np; ++i) m.claimed_plaintexts.push_back(r.get_mpz());
    uint32_t nr = r.get_u32();
    m.proof.per_ciphertext_randomness.reserve(nr);
    for (uint32_t i = 0; i < nr; ++i) m.proof.per_ciphertext_randomness.push_back(r.get_mpz());
  } else {
    uint32_t count = r.get_u32();
    m.plain_aggregate.resize(count);
    for (uint32_t i = 0; i < count; ++i) m.plain_aggregate[i] = r.get_f64();
  }
  m.participants = read_participants(r);
  m.timestamp_ms = r.get_i64();
  r.get_raw(m.initiator_verify_key.data(), m.initiator_verify_key.size());
  r.get_raw(m.signature.data(), m.signature.size());
  if (!r.exhausted()) throw ParseError("trailing bytes after final message");
  if (m.payload_kind == AccumulatedPayload::Kind::encrypted)
    m.final_ciphertext.summand_count = static_cast<uint32_t>(m.participants.size());
  return m;
}

bool envelope_signature_valid(const SynergyEnvelope& e) {
  return verify_signature(e.sender_verify_key, canonical_bytes(e), e.signature);
}

bool final_signature_valid(const FinalAggregateMessage& m) {
  return verify_signature(m.initiator_verify_key, canonical_bytes(m), m.signature);
}

SynergyEnvelope create_initial_envelope(const PaillierKeyPair& keys,
                                        const SigningKey& signing_key,
                                        const PeerAddress& self,
                                        const std::vector<double>& weights,
                                        const FixedPointCodec& codec, uint32_t budget,
                                        int64_t now_ms, SeededRng& rng, bool encrypted) {
  if (budget < kMinSynergySize - 1) throw ProtocolError("synergy too small (budget must be >= 2)");
  if (budget + 1 > codec.max_summands)
    throw ProtocolError("synergy budget exceeds codec headroom");
  if (weights.empty()) throw ProtocolError("no weights to share");

  SynergyEnvelope e;
  e.kind = SynergyEnvelope::Kind::in_progress;
  e.synergy_id = make_synergy_id(keys.pub, now_ms);
  e.initiator_pk = keys.pub;
  e.remaining = budget;
  e.participants = {self};
  e.timestamp_ms = now_ms;
  if (encrypted) {
    e.accumulated.kind = AccumulatedPayload::Kind::encrypted;
    e.accumulated.ct = encrypt_packed(keys.pub, encode_weights(weights, codec, keys.pub.n),
                                      codec, rng);
  } else {
    e.accumulated.kind = AccumulatedPayload::Kind::plain;
    e.accumulated.plain = weights;
  }
  e.sender_verify_key = signing_key.verify_key();
  e.signature = signing_key.sign(canonical_bytes(e));
  return e;
}

SynergyEnvelope accumulate_and_forward(const SynergyEnvelope& env,
                                       const std::vector<double>& my_weights,
                                       const PeerAddress& my_address,
                                       const SigningKey& my_signing_key, int64_t now_ms,
                                       SeededRng& rng) {
  if (!envelope_signature_valid(env)) throw ProtocolError("envelope signature invalid");
  if (env.kind != SynergyEnvelope::Kind::in_progress)
    throw ProtocolError("cannot accumulate into a terminal envelope");
  if (env.remaining < 1) throw ProtocolError("no remaining synergy slots");
  if (env.has_participant(my_address)) throw ProtocolError("peer already participates");
  if (my_weights.size() != env.accumulated.weight_count())
    throw ProtocolError("weight count mismatch");

  SynergyEnvelope out = env;
  if (env.accumulated.kind == AccumulatedPayload::Kind::encrypted) {
    auto mine = encrypt_packed(env.initiator_pk,
                               encode_weights(my_weights, env.accumulated.ct.codec,
                                              env.initiator_pk.n),
                               env.accumulated.ct.codec, rng);
    out.accumulated.ct = homomorphic_add(env.initiator_pk, env.accumulated.ct, mine);
  } else {
    for (size_t i = 0; i < my_weights.size(); ++i) out.accumulated.plain[i] += my_weights[i];
  }
  out.remaining = env.remaining - 1;
  out.participants.push_back(my_address);
  out.timestamp_ms = now_ms;
  if (out.remaining == 0) {
    out.kind = SynergyEnvelope::Kind::terminal;
    out.remaining = 0;
  }
  out.sender_verify_key = my_signing_key.verify_key();
  out.signature = my_signing_key.sign(canonical_bytes(out));
  return out;
}

SynergyEnvelope reseal(const SynergyEnvelope& env, const SigningKey& signing_key,
                       int64_t now_ms) {
  SynergyEnvelope out = env;
  out.timestamp_ms = now_ms;
  out.sender_verify_key = signing_key.verify_key();
  out.signature = signing_key.sign(canonical_bytes(out));
  return out;
}

SynergyEnvelope to_terminal(const SynergyEnvelope& env, const SigningKey& signing_key,
                            int64_t now_ms) {
  SynergyEnvelope out = env;
  out.kind = SynergyEnvelope::Kind::terminal;
  out.remaining = 0;
  out.timestamp_ms = now_ms;
  out.sender_verify_key = signing_key.verify_key();
  out.signature = signing_key.sign(canonical_bytes(out));
  return out;
}

FinalAggregateMessage finalize_aggregate(const SynergyEnvelope& terminal_env,
                                         const PaillierKeyPair& keys,
                                         const SigningKey& signing_key,
                                         const PeerAddress& self, int64_t now_ms) {
  if (!envelope_signature_valid(terminal_env)) throw ProtocolError("envelope signature invalid");
  if (terminal_env.participants.empty() || terminal_env.participants.front() != self)
    throw ProtocolError("only the initiator finalizes a synergy");
  uint32_t n = static_cast<uint32_t>(terminal_env.participants.size());
  if (n < kMinSynergySize) throw ProtocolError("synergy below minimum size");

  FinalAggregateMessage m;
  m.synergy_id = terminal_env.synergy_id;
  m.payload_kind = terminal_env.accumulated.kind;
  m.participants = terminal_env.participants;
  m.timestamp_ms = now_ms;
  if (m.payload_kind == AccumulatedPayload::Kind::encrypted) {
    PackedCiphertext ct = terminal_env.accumulated.ct;
    ct.summand_count = n;
    m.initiator_pk = keys.pub;
    m.final_ciphertext = ct;
    m.claimed_plaintexts = decrypt_packed_raw(keys.pub, keys.sec, ct);
    m.proof = prove_decryption(keys.pub, keys.sec, ct, m.claimed_plaintexts);
  } else {
    m.plain_aggregate.resize(terminal_env.accumulated.plain.size());
    for (size_t i = 0; i < m.plain_aggregate.size(); ++i)
      m.plain_aggregate[i] = terminal_env.accumulated.plain[i] / n;
  }
  m.initiator_verify_key = signing_key.verify_key();
  m.signature = signing_key.sign(canonical_bytes(m));
  return m;
}

std::vector<double> final_aggregate_values(const FinalAggregateMessage& m) {
  if (m.payload_kind == AccumulatedPayload::Kind::plain) return m.plain_aggregate;
  PackedCiphertext ct = m.final_ciphertext;
  ct.summand_count = m.participant_count();
  auto values = unpack_raw_plaintexts(m.claimed_plaintexts, ct, m.initiator_pk.n);
  return decode_weights(values, ct.codec, m.participant_count(), m.initiator_pk.n);
}

bool verify_final_message(const FinalAggregateMessage& m) {
  if (m.participants.empty() || m.participant_count() < kMinSynergySize) return false;
  if (!final_signature_valid(m)) return false;
  if (m.payload_kind == AccumulatedPayload::Kind::plain) return true;
  return verify_decryption(m.initiator_pk, m.final_ciphertext, m.claimed_plaintexts, m.proof);
}

} // namespace p4l
