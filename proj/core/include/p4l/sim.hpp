#pragma once

#include <memory>
#include <queue>

#include "p4l/peer.hpp"
#include "p4l/sampling.hpp"

namespace p4l {

struct LatencySpec {
  int64_t lo_ms = 20;
  int64_t hi_ms = 80; // lo == hi gives fixed latency
};

enum class PeerSamplingMode : uint8_t { uniform, power_law };
enum class SynergySizeLaw : uint8_t { fixed, power_law };

struct ChurnConfig {
  double departure_prob_per_round = 0.0; // per online peer per round
  int64_t departure_min_ms = 2000;
  int64_t departure_max_ms = 8000;
};

struct ScriptedDeparture {
  size_t peer = 0;
  int64_t at_ms = 0;
  int64_t duration_ms = 0;
};

struct SimConfig {
  size_t num_peers = 0; // U
  uint64_t seed = 0;
  double per_hop_drop_prob = 0.0;
  LatencySpec latency;
  PeerSamplingMode peer_sampling = PeerSamplingMode::uniform;
  double peer_sampling_exponent = 2.0; // a, weights drawn once per experiment
  SynergySizeLaw size_law = SynergySizeLaw::power_law;
  uint32_t fixed_size = 5;  // sz (total synergy size incl. initiator)
  uint32_t size_min = 3;
  uint32_t size_max = 10;
  uint32_t rounds = 200;  // round budget
  uint32_t mrt = 50;      // minimum participation rounds per peer
  double mrr = 0.5;       // fraction of peers that must reach mrt to stop
  size_t initiations_per_round = 0; // 0 -> max(1, num_peers / 10)
  int64_t round_interval_ms = 1000;
  size_t max_synergies = 0; // 0 = unlimited; stop initiating once reached
  ChurnConfig churn;
  std::vector<ScriptedDeparture> scripted_departures;
};

struct ParticipationSnapshot {
  uint32_t n = 0; // the peer's n-th participation
  double loss = 0;
  double accuracy = 0;
  std::optional<double> auc;
  bool accepted = false;
};

struct SimResult {
  std::vector<std::vector<ParticipationSnapshot>> per_peer;
  size_t initiated = 0;
  size_t completed = 0;
  size_t failed = 0;
  size_t accepts = 0;
  size_t rejects = 0;
  size_t bad_proofs = 0;
  size_t messages_sent = 0;
  size_t messages_dropped = 0;
  double max_shadow_deviation = 0; // encrypted aggregate vs plaintext mean
  bool stopped_by_mrr = false;
  uint32_t rounds_run = 0;
  int64_t end_time_ms = 0;
};

/// Deterministic discrete-event network: co-location discovery, delivery with
/// drops and latency, churn, and the round scheduler. Single-threaded over
/// the event queue; the full event trace is a pure function of (seed, config).
class Simulator : public PeerListener {
public:
  /// eval_set: held-out data for participation snapshots (may be empty to
  /// skip evaluation). trace may be null.
  Simulator(SimConfig config, std::vector<std::unique_ptr<Peer>> peers, Dataset eval_set,
            TraceWriter* trace);

  SimResult run();

  // PeerListener
  void on_trace(const TraceEvent& ev) override;
  void on_contribution(const PeerAddress&, const SynergyId&,
                       const std::vector<double>&) override;
  void on_synergy_complete(const SynergyId&, const std::vector<PeerAddress>& l,
                           const std::vector<double>& aggregate, int64_t now) override;
  void on_synergy_failed(const SynergyId&, const std::string& reason, int64_t now) override;
  void on_participation(const PeerAddress&, const SynergyId&, bool accepted) override;
  void on_bad_proof(const PeerAddress&, const SynergyId&, const PeerAddress&) override;

  Peer& peer(size_t i) { return *peers_[i]; }
  size_t num_peers() const { return peers_.size(); }

private:
  enum class EventKind : uint8_t { deliver, timer, round, depart, peer_return, registry_check };

  struct Event {
    int64_t t = 0;
    uint64_t seq = 0;
    EventKind kind = EventKind::round;
    size_t target = 0;
    uint32_t round = 0;
    int64_t duration = 0; // depart
    PeerAddress from;
    OutboundMessage msg;
    SynergyId synergy;
  };
  struct EventOrder {
    bool operator()(const Event& a, const Event& b) const {
      return a.t != b.t ? a.t > b.t : a.seq > b.seq;
    }
  };

  struct RegistryEntry {
    enum class State : uint8_t { in_flight, completed, failed } state = State::in_flight;
    int64_t deadline = 0;
  };

  void push(Event ev);
  void route(size_t from, std::vector<OutboundMessage> msgs, int64_t now);
  void schedule_timer(size_t peer_index);
  std::vector<PeerAddress> online_neighbors() const;
  void start_round(uint32_t round, int64_t now);
  void depart_peer(size_t i, int64_t duration, int64_t now);
  void sim_trace(int64_t t, const std::string& event, const std::string& peer,
                 const std::string& synergy, std::map<std::string, int64_t> nums = {},
                 std::map<std::string, std::string> strs = {});
  void handle_deliver(const Event& ev);
  double shadow_check(const SynergyId& id, const std::vector<PeerAddress>& l,
                      const std::vector<double>& aggregate);

  SimConfig cfg_;
  std::vector<std::unique_ptr<Peer>> peers_;
  Dataset eval_set_;
  TraceWriter* trace_;
  SeededRng rng_;
  std::priority_queue<Event, std::vector<Event>, EventOrder> queue_;
  uint64_t seq_ = 0;
  int64_t now_ = 0;
  std::vector<bool> departed_;
  std::map<PeerAddress, size_t> index_of_;
  std::vector<double> sampling_weights_;
  std::map<SynergyId, RegistryEntry> registry_;
  std::map<SynergyId, std::map<PeerAddress, std::vector<double>>> shadow_;
  std::vector<uint32_t> participations_;
  size_t peers_at_mrt_ = 0;
  bool stop_initiations_ = false;
  SimResult result_;
};

} // namespace p4l
