#include "p4l/peer.hpp"

#include <algorithm>

namespace p4l {

Peer::Peer(PeerSetup setup, PeerListener* listener)
    : setup_(std::move(setup)), listener_(listener),
      rng_protocol_(derive_seed(setup_.rng_seed, "protocol")),
      rng_train_(derive_seed(setup_.rng_seed, "train")),
      rng_crypto_(derive_seed(setup_.rng_seed, "crypto")) {}

void Peer::train_local() {
  setup_.model = local_train(setup_.model, setup_.shard, setup_.train, rng_train_);
}

double Peer::acceptance_metric(const ModelParams& m) const {
  if (setup_.shard.empty()) return 0.0;
  EvalMetrics e = evaluate(m, setup_.shard);
  if (setup_.accept_rule_uses_auc && e.auc) return *e.auc;
  return e.accuracy; // AUC undefined on single-class shards: fall back
}

std::vector<double> Peer::contribution_weights() {
  if (setup_.train_on_contribution) train_local();
  if (setup_.byzantine_noisy) {
    // the noisy-peers attack replaces the model itself before sharing
    setup_.model.weights = make_noisy_weights(setup_.model, setup_.noisy_sigma, rng_train_);
  }
  std::vector<double> w = setup_.model.weights;
  clip_weights(w);
  return w;
}

std::optional<PeerAddress> Peer::pick_neighbor(const std::vector<PeerAddress>& neighbors,
                                               const std::vector<PeerAddress>& exclude_list,
                                               const std::vector<PeerAddress>& tried) {
  std::vector<PeerAddress> eligible;
  for (const PeerAddress& a : neighbors) {
    if (a == setup_.address) continue;
    if (std::find(exclude_list.begin(), exclude_list.end(), a) != exclude_list.end()) continue;
    if (std::find(tried.begin(), tried.end(), a) != tried.end()) continue;
    eligible.push_back(a);
  }
  if (eligible.empty()) return std::nullopt;
  return eligible[rng_protocol_.index(eligible.size())];
}

void Peer::trace(int64_t t, const std::string& event, const SynergyId& id,
                 std::map<std::string, int64_t> nums,
                 std::map<std::string, std::string> strs) {
  if (!listener_) return;
  TraceEvent ev;
  ev.t = t;
  ev.peer = setup_.address.hex();
  ev.event = event;
  ev.synergy = id.hex();
  ev.nums = std::move(nums);
  ev.strs = std::move(strs);
  listener_->on_trace(ev);
}

std::vector<OutboundMessage> Peer::initiate(const std::vector<PeerAddress>& neighbors,
                                            uint32_t budget, int64_t now) {
  std::vector<OutboundMessage> out;
  auto first = pick_neighbor(neighbors, {setup_.address}, {});
  if (!first) return out; // nobody in range

  std::vector<double> w = contribution_weights();
  SynergyEnvelope env = create_initial_envelope(setup_.he_keys, setup_.signing_key,
                                                setup_.address, w, setup_.codec, budget, now,
                                                rng_crypto_, setup_.encrypted);
  SynergyBookkeeping b;
  b.is_initiator = true;
  b.budget = budget;
  b.retained = env;
  b.forwarded_to = *first;
  b.tried = {*first};
  b.beacon_deadline = now + setup_.protocol.hop_timeout_tp_ms;
  b.initiator_deadline = now + setup_.protocol.hop_timeout_tp_ms * (budget - 1);
  book_[env.synergy_id] = b;

  if (listener_) listener_->on_contribution(setup_.address, env.synergy_id, w);
  trace(now, "initiate", env.synergy_id,
        {{"s", budget}, {"deadline", b.initiator_deadline}});
  trace(now, "forward", env.synergy_id, {{"attempt", 0}}, {{"to", first->hex()}});
  out.push_back({OutboundMessage::Kind::envelope, *first, env, env.synergy_id, {}});
  return out;
}

std::vector<OutboundMessage> Peer::on_envelope(const SynergyEnvelope& env,
                                               const PeerAddress& sender,
                                               const std::vector<PeerAddress>& neighbors,
                                               int64_t now) {
  std::vector<OutboundMessage> out;
  if (env.participants.empty() || !envelope_signature_valid(env)) {
    trace(now, "drop", env.synergy_id, {}, {{"reason", "bad_signature"}});
    return out;
  }
  if (now - env.timestamp_ms > setup_.protocol.freshness_window_ms) {
    trace(now, "drop", env.synergy_id, {}, {{"reason", "stale_timestamp"}});
    return out;
  }

  if (is_terminal(env)) {
    if (env.initiator() != setup_.address) {
      trace(now, "drop", env.synergy_id, {}, {{"reason", "misrouted_terminal"}});
      return out;
    }
    auto it = book_.find(env.synergy_id);
    if (it == book_.end() || !it->second.is_initiator) {
      trace(now, "drop", env.synergy_id, {}, {{"reason", "late_terminal"}});
      return out;
    }
    uint32_t n = static_cast<uint32_t>(env.participants.size());
    if (n < setup_.protocol.min_synergy_size) {
      if (listener_) listener_->on_synergy_failed(env.synergy_id, "below_min_size", now);
      book_.erase(it);
      return out;
    }
    FinalAggregateMessage msg;
    try {
      msg = finalize_aggregate(env, setup_.he_keys, setup_.signing_key, setup_.address, now);
    } catch (const std::exception& e) {
      if (listener_) listener_->on_synergy_failed(env.synergy_id, e.what(), now);
      book_.erase(it);
      return out;
    }
    std::string l_addrs;
    for (const PeerAddress& a : env.participants) {
      if (!l_addrs.empty()) l_addrs += ',';
      l_addrs += a.hex();
    }
    trace(now, "finalize", env.synergy_id, {{"n", n}}, {{"l_addrs", l_addrs}});
    std::vector<double> aggregate = final_aggregate_values(msg);
    if (listener_)
      listener_->on_synergy_complete(env.synergy_id, env.participants, aggregate, now);
    book_.erase(it);

    // the initiator is a participant too: apply the acceptance rule locally
    on_final_aggregate(msg, now);
    uint32_t recipients = 0;
    for (const PeerAddress& a : env.participants) {
      if (a == setup_.address) continue;
      out.push_back({OutboundMessage::Kind::final_aggregate, a, {}, env.synergy_id, msg});
      ++recipients;
    }
    trace(now, "final_broadcast", env.synergy_id, {{"recipients", recipients}});
    return out;
  }

  // in-progress envelope
  if (env.has_participant(setup_.address)) {
    trace(now, "drop", env.synergy_id, {}, {{"reason", "duplicate_participation"}});
    return out;
  }
  if (book_.count(env.synergy_id)) {
    trace(now, "drop", env.synergy_id, {}, {{"reason", "hop_already_active"}});
    return out;
  }
  if (env.remaining < 1) {
    trace(now, "drop", env.synergy_id, {}, {{"reason", "no_remaining_slots"}});
    return out;
  }
  if (setup_.model.weights.size() != env.accumulated.weight_count()) {
    trace(now, "drop", env.synergy_id, {}, {{"reason", "weight_count_mismatch"}});
    return out;
  }
  std::vector<double> w = contribution_weights();

  SynergyEnvelope acc;
  try {
    acc = accumulate_and_forward(env, w, setup_.address, setup_.signing_key, now,
                                 rng_crypto_);
  } catch (const std::exception& e) {
    trace(now, "drop", env.synergy_id, {}, {{"reason", e.what()}});
    return out;
  }
  if (listener_) listener_->on_contribution(setup_.address, env.synergy_id, w);
  trace(now, "accumulate", env.synergy_id,
        {{"l", static_cast<int64_t>(acc.participants.size())}});

  auto beacon_to_sender = [&] {
    out.push_back({OutboundMessage::Kind::beacon, sender, {}, env.synergy_id, {}});
    trace(now, "beacon_sent", env.synergy_id, {}, {{"to", sender.hex()}});
  };

  if (is_terminal(acc)) {
    // countdown hit zero: route to the initiator, fire-and-forget
    out.push_back({OutboundMessage::Kind::envelope, acc.initiator(), acc, acc.synergy_id, {}});
    trace(now, "terminal_sent", acc.synergy_id,
          {{"l", static_cast<int64_t>(acc.participants.size())}},
          {{"to", acc.initiator().hex()}});
    beacon_to_sender();
    return out;
  }

  auto next = pick_neighbor(neighbors, acc.participants, {sender});
  if (next) {
    SynergyBookkeeping b;
    b.retained = acc;
    b.forwarded_to = *next;
    b.tried = {*next};
    b.beacon_deadline = now + setup_.protocol.hop_timeout_tp_ms;
    book_[acc.synergy_id] = b;
    out.push_back({OutboundMessage::Kind::envelope, *next, acc, acc.synergy_id, {}});
    trace(now, "forward", acc.synergy_id, {{"attempt", 0}}, {{"to", next->hex()}});
    beacon_to_sender();
    return out;
  }

  // nobody to forward to
  if (acc.participants.size() > 2) {
    SynergyEnvelope term = to_terminal(acc, setup_.signing_key, now);
    out.push_back({OutboundMessage::Kind::envelope, term.initiator(), term, term.synergy_id, {}});
    trace(now, "early_return", term.synergy_id,
          {{"l", static_cast<int64_t>(term.participants.size())}},
          {{"reason", "no_neighbors"}});
    beacon_to_sender();
    return out;
  }
  // second participant with nowhere to go: abandon the hop silently so the
  // sender's timeout can route around us
  trace(now, "hop_abandoned", acc.synergy_id, {}, {{"reason", "no_neighbors"}});
  return out;
}

void Peer::on_beacon(const SynergyId& id, int64_t now) {
  auto it = book_.find(id);
  if (it == book_.end() || it->second.beacon_deadline < 0) {
    trace(now, "beacon_ignored", id);
    return;
  }
  SynergyBookkeeping& b = it->second;
  b.beacon_deadline = -1;
  b.forwarded_to.reset();
  trace(now, "beacon_recv", id);
  if (!b.is_initiator) {
    book_.erase(it); // hop responsibility discharged
  } else {
    b.retained.reset(); // initiator still tracks its failure deadline
  }
}

std::vector<OutboundMessage> Peer::hop_fallback(const SynergyId& id, SynergyBookkeeping& b,
                                                int64_t now, const char* why) {
  std::vector<OutboundMessage> out;
  if (b.is_initiator) {
    // first hop never handed off: nobody holds the synergy but us
    if (listener_) listener_->on_synergy_failed(id, std::string("first_hop_") + why, now);
    book_.erase(id);
    return out;
  }
  const SynergyEnvelope& retained = *b.retained;
  if (retained.participants.size() > 2) {
    SynergyEnvelope term = to_terminal(retained, setup_.signing_key, now);
    out.push_back({OutboundMessage::Kind::envelope, term.initiator(), term, id, {}});
    trace(now, "early_return", id,
          {{"l", static_cast<int64_t>(term.participants.size())}}, {{"reason", why}});
  } else {
    // I was the second participant: returning would leave N = 2 < 3
    trace(now, "local_fail", id, {}, {{"reason", why}});
  }
  book_.erase(id);
  return out;
}

std::vector<OutboundMessage> Peer::on_timer(int64_t now,
                                            const std::vector<PeerAddress>& neighbors) {
  std::vector<OutboundMessage> out;
  std::vector<SynergyId> ids;
  ids.reserve(book_.size());
  for (const auto& [id, b] : book_) ids.push_back(id);

  for (const SynergyId& id : ids) {
    auto it = book_.find(id);
    if (it == book_.end()) continue;
    SynergyBookkeeping& b = it->second;

    if (b.is_initiator && b.initiator_deadline >= 0 && b.initiator_deadline <= now) {
      if (listener_) listener_->on_synergy_failed(id, "initiator_deadline", now);
      book_.erase(it);
      continue;
    }
    if (b.beacon_deadline < 0 || b.beacon_deadline > now) continue;

    // successor went silent within t_p
    if (b.retries_used < setup_.protocol.max_retries && b.retained) {
      std::vector<PeerAddress> exclude = b.retained->participants;
      auto next = pick_neighbor(neighbors, exclude, b.tried);
      if (next) {
        b.retries_used += 1;
        b.tried.push_back(*next);
        SynergyEnvelope env = reseal(*b.retained, setup_.signing_key, now);
        b.retained = env;
        b.forwarded_to = *next;
        b.beacon_deadline = now + setup_.protocol.hop_timeout_tp_ms;
        out.push_back({OutboundMessage::Kind::envelope, *next, env, id, {}});
        trace(now, "forward", id, {{"attempt", b.retries_used}}, {{"to", next->hex()}});
        continue;
      }
      auto fb = hop_fallback(id, b, now, "no_more_neighbors");
      out.insert(out.end(), fb.begin(), fb.end());
      continue;
    }
    auto fb = hop_fallback(id, b, now, "retries_exhausted");
    out.insert(out.end(), fb.begin(), fb.end());
  }
  return out;
}

void Peer::on_final_aggregate(const FinalAggregateMessage& msg, int64_t now) {
  if (finals_seen_.count(msg.synergy_id)) return; // duplicate delivery
  bool in_l = std::find(msg.participants.begin(), msg.participants.end(), setup_.address) !=
              msg.participants.end();
  if (!in_l) {
    trace(now, "drop", msg.synergy_id, {}, {{"reason", "not_a_participant"}});
    return;
  }
  if (!verify_final_message(msg)) {
    trace(now, "proof_invalid", msg.synergy_id, {},
          {{"suspect", msg.participants.front().hex()}});
    if (listener_)
      listener_->on_bad_proof(setup_.address, msg.synergy_id, msg.participants.front());
    return;
  }
  finals_seen_.insert(msg.synergy_id);

  std::vector<double> aggregate = final_aggregate_values(msg);
  if (aggregate.size() != setup_.model.weights.size()) {
    trace(now, "drop", msg.synergy_id, {}, {{"reason", "aggregate_shape_mismatch"}});
    return;
  }

  bool accepted;
  double before = 0, after = 0;
  if (setup_.shard.empty()) {
    accepted = true; // no local evidence to judge by
    setup_.model.weights = aggregate;
  } else {
    before = acceptance_metric(setup_.model);
    ModelParams candidate = setup_.model;
    candidate.weights = aggregate;
    after = acceptance_metric(candidate);
    accepted = after >= before;
    if (accepted) setup_.model = std::move(candidate);
  }
  trace(now, "aggregate_applied", msg.synergy_id,
        {{"accepted", accepted ? 1 : 0},
         {"before_milli", static_cast<int64_t>(before * 1000)},
         {"after_milli", static_cast<int64_t>(after * 1000)}});
  if (listener_) listener_->on_participation(setup_.address, msg.synergy_id, accepted);
}

int64_t Peer::next_deadline() const {
  int64_t best = -1;
  for (const auto& [id, b] : book_) {
    for (int64_t d : {b.beacon_deadline, b.initiator_deadline})
      if (d >= 0 && (best < 0 || d < best)) best = d;
  }
  return best;
}

} // namespace p4l
