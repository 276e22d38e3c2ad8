#include "p4l/sim.hpp"

#include <cmath>
#include <limits>

namespace p4l {

Simulator::Simulator(SimConfig config, std::vector<std::unique_ptr<Peer>> peers,
                     Dataset eval_set, TraceWriter* trace)
    : cfg_(std::move(config)), peers_(std::move(peers)), eval_set_(std::move(eval_set)),
      trace_(trace), rng_(derive_seed(cfg_.seed, "sim")) {
  if (peers_.size() != cfg_.num_peers)
    throw std::invalid_argument("peer count does not match config");
  if (cfg_.num_peers < kMinSynergySize)
    throw std::invalid_argument("need at least 3 peers for any synergy");
  if (cfg_.size_min < kMinSynergySize || cfg_.size_max < cfg_.size_min)
    throw std::invalid_argument("invalid synergy size range");
  if (cfg_.initiations_per_round == 0)
    cfg_.initiations_per_round = std::max<size_t>(1, cfg_.num_peers / 10);
  departed_.assign(peers_.size(), false);
  participations_.assign(peers_.size(), 0);
  result_.per_peer.resize(peers_.size());
  for (size_t i = 0; i < peers_.size(); ++i) {
    peers_[i]->set_listener(this);
    index_of_[peers_[i]->address()] = i;
  }

  sampling_weights_.resize(peers_.size());
  for (double& w : sampling_weights_)
    w = cfg_.peer_sampling == PeerSamplingMode::power_law
            ? power_law_sample(rng_, cfg_.peer_sampling_exponent)
            : 1.0;
}

void Simulator::push(Event ev) {
  ev.seq = seq_++;
  queue_.push(std::move(ev));
}

void Simulator::sim_trace(int64_t t, const std::string& event, const std::string& peer,
                          const std::string& synergy, std::map<std::string, int64_t> nums,
                          std::map<std::string, std::string> strs) {
  if (!trace_) return;
  TraceEvent ev;
  ev.t = t;
  ev.peer = peer;
  ev.event = event;
  ev.synergy = synergy;
  ev.nums = std::move(nums);
  ev.strs = std::move(strs);
  trace_->emit(std::move(ev));
}

void Simulator::on_trace(const TraceEvent& ev) {
  if (trace_) trace_->emit(ev);
}

void Simulator::on_contribution(const PeerAddress& addr, const SynergyId& id,
                                const std::vector<double>& w) {
  shadow_[id][addr] = w;
}

double Simulator::shadow_check(const SynergyId& id, const std::vector<PeerAddress>& l,
                               const std::vector<double>& aggregate) {
  auto it = shadow_.find(id);
  if (it == shadow_.end()) return 0.0;
  std::vector<double> mean(aggregate.size(), 0.0);
  for (const PeerAddress& a : l) {
    auto c = it->second.find(a);
    if (c == it->second.end()) return std::numeric_limits<double>::infinity();
    for (size_t j = 0; j < mean.size(); ++j) mean[j] += c->second[j];
  }
  double dev = 0;
  for (size_t j = 0; j < mean.size(); ++j)
    dev = std::max(dev, std::fabs(mean[j] / static_cast<double>(l.size()) - aggregate[j]));
  return dev;
}

void Simulator::on_synergy_complete(const SynergyId& id, const std::vector<PeerAddress>& l,
                                    const std::vector<double>& aggregate, int64_t now) {
  auto it = registry_.find(id);
  if (it == registry_.end() || it->second.state != RegistryEntry::State::in_flight) return;
  it->second.state = RegistryEntry::State::completed;
  ++result_.completed;
  double dev = shadow_check(id, l, aggregate);
  result_.max_shadow_deviation = std::max(result_.max_shadow_deviation, dev);
  sim_trace(now, "synergy_complete", "-", id.hex(),
            {{"n", static_cast<int64_t>(l.size())},
             {"shadow_dev_e12", static_cast<int64_t>(dev * 1e12)}});
  shadow_.erase(id);
}

void Simulator::on_synergy_failed(const SynergyId& id, const std::string& reason, int64_t now) {
  auto it = registry_.find(id);
  if (it == registry_.end() || it->second.state != RegistryEntry::State::in_flight) return;
  it->second.state = RegistryEntry::State::failed;
  ++result_.failed;
  sim_trace(now, "synergy_fail", "-", id.hex(), {}, {{"reason", reason}});
  shadow_.erase(id);
}

void Simulator::on_participation(const PeerAddress& addr, const SynergyId&, bool accepted) {
  auto idx = index_of_.find(addr);
  if (idx == index_of_.end()) return;
  size_t i = idx->second;
  uint32_t n = ++participations_[i];
  (accepted ? result_.accepts : result_.rejects)++;

  ParticipationSnapshot snap;
  snap.n = n;
  snap.accepted = accepted;
  if (!eval_set_.empty()) {
    EvalMetrics m = evaluate(peers_[i]->model(), eval_set_);
    snap.loss = m.loss;
    snap.accuracy = m.accuracy;
    snap.auc = m.auc;
  }
  result_.per_peer[i].push_back(snap);

  if (n == cfg_.mrt) {
    ++peers_at_mrt_;
    if (static_cast<double>(peers_at_mrt_) >=
        cfg_.mrr * static_cast<double>(cfg_.num_peers)) {
      if (!stop_initiations_) result_.stopped_by_mrr = true;
      stop_initiations_ = true;
    }
  }
}

void Simulator::on_bad_proof(const PeerAddress&, const SynergyId&, const PeerAddress&) {
  ++result_.bad_proofs;
}

std::vector<PeerAddress> Simulator::online_neighbors() const {
  std::vector<PeerAddress> out;
  out.reserve(peers_.size());
  for (size_t i = 0; i < peers_.size(); ++i)
    if (!departed_[i]) out.push_back(peers_[i]->address());
  return out;
}

void Simulator::route(size_t from, std::vector<OutboundMessage> msgs, int64_t now) {
  for (OutboundMessage& m : msgs) {
    ++result_.messages_sent;
    auto it = index_of_.find(m.to);
    if (it == index_of_.end()) continue;
    if (cfg_.per_hop_drop_prob > 0 && rng_.uniform() < cfg_.per_hop_drop_prob) {
      ++result_.messages_dropped;
      sim_trace(now, "net_drop", "-", "-",
                {{"kind", static_cast<int64_t>(m.kind)}},
                {{"to", m.to.hex()}, {"reason", "radio_loss"}});
      continue;
    }
    int64_t latency = cfg_.latency.lo_ms == cfg_.latency.hi_ms
                          ? cfg_.latency.lo_ms
                          : cfg_.latency.lo_ms +
                                static_cast<int64_t>(rng_.index(static_cast<size_t>(
                                    cfg_.latency.hi_ms - cfg_.latency.lo_ms + 1)));
    Event ev;
    ev.t = now + latency;
    ev.kind = EventKind::deliver;
    ev.target = it->second;
    ev.from = peers_[from]->address();
    ev.msg = std::move(m);
    push(std::move(ev));
  }
}

void Simulator::schedule_timer(size_t peer_index) {
  int64_t d = peers_[peer_index]->next_deadline();
  if (d < 0) return;
  Event ev;
  ev.t = d;
  ev.kind = EventKind::timer;
  ev.target = peer_index;
  push(std::move(ev));
}

void Simulator::start_round(uint32_t round, int64_t now) {
  result_.rounds_run = round + 1;
  // churn first: departures strike before this round's initiations
  if (cfg_.churn.departure_prob_per_round > 0) {
    for (size_t i = 0; i < peers_.size(); ++i) {
      if (departed_[i]) continue;
      if (rng_.uniform() < cfg_.churn.departure_prob_per_round) {
        int64_t dur = cfg_.churn.departure_min_ms +
                      static_cast<int64_t>(rng_.index(static_cast<size_t>(
                          cfg_.churn.departure_max_ms - cfg_.churn.departure_min_ms + 1)));
        depart_peer(i, dur, now);
      }
    }
  }

  if (!stop_initiations_ &&
      (cfg_.max_synergies == 0 || result_.initiated < cfg_.max_synergies)) {
    std::vector<size_t> online;
    std::vector<double> w;
    for (size_t i = 0; i < peers_.size(); ++i) {
      if (departed_[i]) continue;
      online.push_back(i);
      w.push_back(sampling_weights_[i]);
    }
    WeightedSampler sampler(std::move(w));
    size_t want = cfg_.initiations_per_round;
    if (cfg_.max_synergies > 0)
      want = std::min(want, cfg_.max_synergies - result_.initiated);
    auto picks = sampler.sample_without_replacement(want, rng_);
    auto neighbors = online_neighbors();
    for (size_t pick : picks) {
      size_t i = online[pick];
      uint32_t sz = cfg_.fixed_size;
      if (cfg_.size_law == SynergySizeLaw::power_law) {
        double x = power_law_sample(rng_, 2.0);
        uint32_t span = cfg_.size_max - cfg_.size_min + 1;
        sz = cfg_.size_min + std::min<uint32_t>(
                                 span - 1, static_cast<uint32_t>(x * span));
      }
      uint32_t budget = sz - 1; // S excludes the initiator
      auto msgs = peers_[i]->initiate(neighbors, budget, now);
      if (msgs.empty()) continue;
      SynergyId id = msgs.front().envelope.synergy_id;
      ++result_.initiated;
      RegistryEntry entry;
      auto bk = peers_[i]->bookkeeping().find(id);
      entry.deadline = bk != peers_[i]->bookkeeping().end()
                           ? bk->second.initiator_deadline
                           : now;
      registry_[id] = entry;
      Event check;
      check.t = entry.deadline;
      check.kind = EventKind::registry_check;
      check.synergy = id;
      push(std::move(check));
      route(i, std::move(msgs), now);
      schedule_timer(i);
    }
  }

  if (round + 1 < cfg_.rounds && !stop_initiations_) {
    Event next;
    next.t = now + cfg_.round_interval_ms;
    next.kind = EventKind::round;
    next.round = round + 1;
    push(std::move(next));
  }
}

void Simulator::depart_peer(size_t i, int64_t duration, int64_t now) {
  departed_[i] = true;
  peers_[i]->clear_protocol_state();
  sim_trace(now, "depart", peers_[i]->address().hex(), "-", {{"for_ms", duration}});
  Event back;
  back.t = now + duration;
  back.kind = EventKind::peer_return;
  back.target = i;
  push(std::move(back));
}

void Simulator::handle_deliver(const Event& ev) {
  size_t i = ev.target;
  if (departed_[i]) {
    ++result_.messages_dropped;
    sim_trace(now_, "net_drop", "-", "-", {}, {{"to", peers_[i]->address().hex()},
                                               {"reason", "peer_departed"}});
    return;
  }
  switch (ev.msg.kind) {
    case OutboundMessage::Kind::envelope: {
      auto out = peers_[i]->on_envelope(ev.msg.envelope, ev.from, online_neighbors(), now_);
      route(i, std::move(out), now_);
      schedule_timer(i);
      break;
    }
    case OutboundMessage::Kind::beacon:
      peers_[i]->on_beacon(ev.msg.synergy_id, now_);
      break;
    case OutboundMessage::Kind::final_aggregate:
      peers_[i]->on_final_aggregate(ev.msg.final_msg, now_);
      break;
  }
}

SimResult Simulator::run() {
  for (const ScriptedDeparture& d : cfg_.scripted_departures) {
    Event ev;
    ev.t = d.at_ms;
    ev.kind = EventKind::depart;
    ev.target = d.peer;
    ev.duration = d.duration_ms;
    push(std::move(ev));
  }
  Event first;
  first.t = 0;
  first.kind = EventKind::round;
  first.round = 0;
  push(std::move(first));

  while (!queue_.empty()) {
    Event ev = queue_.top();
    queue_.pop();
    now_ = ev.t;
    switch (ev.kind) {
      case EventKind::round:
        start_round(ev.round, now_);
        break;
      case EventKind::deliver:
        handle_deliver(ev);
        break;
      case EventKind::timer: {
        if (departed_[ev.target]) break;
        auto out = peers_[ev.target]->on_timer(now_, online_neighbors());
        route(ev.target, std::move(out), now_);
        schedule_timer(ev.target);
        break;
      }
      case EventKind::depart:
        if (!departed_[ev.target]) depart_peer(ev.target, ev.duration, now_);
        break;
      case EventKind::peer_return:
        departed_[ev.target] = false;
        sim_trace(now_, "return", peers_[ev.target]->address().hex(), "-");
        break;
      case EventKind::registry_check: {
        auto it = registry_.find(ev.synergy);
        if (it != registry_.end() && it->second.state == RegistryEntry::State::in_flight)
          on_synergy_failed(ev.synergy, "initiator_unresponsive", now_);
        break;
      }
    }
  }
  result_.end_time_ms = now_;
  if (trace_) trace_->flush();
  return result_;
}

} // namespace p4l
