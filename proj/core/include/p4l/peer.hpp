#pragma once

#include <map>
#include <optional>
#include <set>

#include "p4l/adversary.hpp"
#include "p4l/envelope.hpp"
#include "p4l/train.hpp"
#include "p4l/trace.hpp"

namespace p4l {

struct ProtocolConfig {
  int64_t hop_timeout_tp_ms = 2000;    // t_p: window for a hop to be acknowledged
  uint32_t max_retries = 3;            // R
  int64_t freshness_window_ms = 60000; // envelopes older than this are replays
  uint32_t min_synergy_size = kMinSynergySize;
};

/// Messages a peer wants delivered; routing is the network's job.
struct OutboundMessage {
  enum class Kind : uint8_t { envelope, beacon, final_aggregate };
  Kind kind = Kind::envelope;
  PeerAddress to;
  SynergyEnvelope envelope;         // kind == envelope
  SynergyId synergy_id;             // kind == beacon
  FinalAggregateMessage final_msg;  // kind == final_aggregate
};

struct SynergyBookkeeping {
  bool is_initiator = false;
  uint32_t budget = 0;       // original S (initiator only)
  std::optional<SynergyEnvelope> retained; // my accumulated envelope, kept for retries
  std::optional<PeerAddress> forwarded_to;
  int64_t beacon_deadline = -1;    // -1 = unarmed
  int64_t initiator_deadline = -1; // start + t_p * (S - 1)
  uint32_t retries_used = 0;
  std::vector<PeerAddress> tried;  // neighbours tried for this hop
};

/// Host callbacks: the simulator records shadow sums, synergy outcomes and
/// participation counts through these.
class PeerListener {
public:
  virtual ~PeerListener() = default;
  virtual void on_trace(const TraceEvent&) {}
  /// A peer's weights entered a synergy chain (shadow accounting).
  virtual void on_contribution(const PeerAddress&, const SynergyId&,
                               const std::vector<double>&) {}
  /// Terminal-state accounting lives with the host (the host also has to fail
  /// synergies whose initiator vanished), so peers report outcomes here and
  /// the host emits the synergy_complete / synergy_fail trace rows exactly
  /// once per synergy.
  virtual void on_synergy_complete(const SynergyId&, const std::vector<PeerAddress>& l,
                                   const std::vector<double>& aggregate, int64_t now) {}
  virtual void on_synergy_failed(const SynergyId&, const std::string& reason, int64_t now) {}
  /// A valid final aggregate was processed (accepted or discarded).
  virtual void on_participation(const PeerAddress&, const SynergyId&, bool accepted) {}
  virtual void on_bad_proof(const PeerAddress& reporter, const SynergyId&,
                            const PeerAddress& suspect_initiator) {}
};

struct PeerSetup {
  PeerAddress address;
  PaillierKeyPair he_keys;
  SigningKey signing_key;
  ProtocolConfig protocol;
  FixedPointCodec codec;
  ModelParams model;
  Dataset shard;
  TrainConfig train;
  bool train_on_contribution = true;
  bool accept_rule_uses_auc = false; // imbalanced tasks judge aggregates by AUC
  bool encrypted = true;
  bool byzantine_noisy = false;      // substitute KDE-resampled weights
  double noisy_sigma = 0.0;          // 0 = Silverman bandwidth
  uint64_t rng_seed = 0;
};

/// One peer's protocol state machine. Consumes an ordered event stream
/// (envelope / beacon / timer / final aggregate) and emits outbound messages;
/// never shares state with other peers.
class Peer {
public:
  Peer(PeerSetup setup, PeerListener* listener);

  /// The host binds itself here (peer construction usually precedes it).
  void set_listener(PeerListener* listener) { listener_ = listener; }

  const PeerAddress& address() const { return setup_.address; }
  const ModelParams& model() const { return setup_.model; }
  ModelParams& mutable_model() { return setup_.model; }
  const Dataset& shard() const { return setup_.shard; }
  const PaillierPublicKey& public_key() const { return setup_.he_keys.pub; }
  bool is_byzantine() const { return setup_.byzantine_noisy; }

  /// Train once on the local shard (peers start with a trained model).
  void train_local();

  /// Protocol step 1: open a synergy with budget S (drawn by the caller from
  /// the configured synergy-size law) towards one discovered neighbour.
  /// No-op when no neighbours are in range.
  std::vector<OutboundMessage> initiate(const std::vector<PeerAddress>& neighbors,
                                        uint32_t budget, int64_t now);

  /// Protocol steps 2-4 entry point.
  std::vector<OutboundMessage> on_envelope(const SynergyEnvelope& env,
                                           const PeerAddress& sender,
                                           const std::vector<PeerAddress>& neighbors,
                                           int64_t now);

  void on_beacon(const SynergyId& id, int64_t now);

  /// Fires expired beacon deadlines (re-forward / churn fallback) and the
  /// initiator failure deadline.
  std::vector<OutboundMessage> on_timer(int64_t now,
                                        const std::vector<PeerAddress>& neighbors);

  /// Protocol step 5 receive side: verify, tentatively apply, keep the
  /// aggregate only if the local metric did not decrease.
  void on_final_aggregate(const FinalAggregateMessage& msg, int64_t now);

  /// Earliest armed deadline, or -1 when idle (for timer scheduling).
  int64_t next_deadline() const;

  size_t active_synergies() const { return book_.size(); }
  const std::map<SynergyId, SynergyBookkeeping>& bookkeeping() const { return book_; }

  /// Departing peers lose all in-flight synergy state (the device left; its
  /// deadlines die with it). The model and dataset survive.
  void clear_protocol_state() { book_.clear(); }

  /// Local-shard metric the acceptance rule uses (accuracy or AUC).
  double acceptance_metric(const ModelParams& m) const;

private:
  std::vector<double> contribution_weights();
  std::optional<PeerAddress> pick_neighbor(const std::vector<PeerAddress>& neighbors,
                                           const std::vector<PeerAddress>& exclude_list,
                                           const std::vector<PeerAddress>& tried);
  void trace(int64_t t, const std::string& event, const SynergyId& id,
             std::map<std::string, int64_t> nums = {},
             std::map<std::string, std::string> strs = {});
  std::vector<OutboundMessage> hop_fallback(const SynergyId& id, SynergyBookkeeping& b,
                                            int64_t now, const char* why);

  PeerSetup setup_;
  PeerListener* listener_;
  // independent streams so an encryption-off run draws the same protocol and
  // training randomness as its encrypted twin
  SeededRng rng_protocol_;
  SeededRng rng_train_;
  SeededRng rng_crypto_;
  std::map<SynergyId, SynergyBookkeeping> book_;
  std::set<SynergyId> finals_seen_;
};

} // namespace p4l
