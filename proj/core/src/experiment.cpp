#include "p4l/experiment.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "p4l/bytes.hpp"

namespace p4l {

namespace fs = std::filesystem;
using nlohmann::json;

TaskSpec make_task(const std::string& id, size_t num_peers, uint64_t seed) {
  TaskSpec t;
  t.id = id;
  SeededRng rng(derive_seed(seed, "task:" + id));
  size_t pool_size = num_peers * 40;
  size_t heldout_size = 2000;
  if (id == "imbalanced2") {
    t.arch = {ArchKind::logistic, 16, 0, 2};
    Dataset all = make_imbalanced_binary(pool_size + heldout_size, 16, 0.10, 1.8, rng);
    t.pool.dim = all.dim;
    t.pool.num_classes = 2;
    t.heldout = t.pool;
    for (size_t i = 0; i < all.size(); ++i)
      (i < pool_size ? t.pool : t.heldout).push(all.row(i), all.labels[i]);
    t.auc_acceptance = true;
    t.default_partition = {PartitionMode::size_skew, 6, 2.0};
  } else if (id == "blobs10") {
    t.arch = {ArchKind::mlp, 16, 16, 10};
    Dataset all = make_blobs(pool_size + heldout_size, 16, 10, 3.0, 1.0, rng);
    t.pool.dim = all.dim;
    t.pool.num_classes = 10;
    t.heldout = t.pool;
    for (size_t i = 0; i < all.size(); ++i)
      (i < pool_size ? t.pool : t.heldout).push(all.row(i), all.labels[i]);
    t.auc_acceptance = false;
    t.default_partition = {PartitionMode::label_skew, 6, 2.0};
  } else {
    throw ConfigError("unknown task id: " + id);
  }
  return t;
}

namespace {

// --- json helpers -----------------------------------------------------------

void expect_keys(const json& j, const std::set<std::string>& allowed,
                 const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      throw ConfigError("unknown config key '" + it.key() + "' in " + where);
}

template <typename T>
T get_or(const json& j, const std::string& key, T dflt) {
  if (!j.contains(key)) return dflt;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("bad value for '" + key + "': " + e.what());
  }
}

SimConfig sim_from_json(const json& j) {
  expect_keys(j,
              {"num_peers", "per_hop_drop_prob", "latency_lo_ms", "latency_hi_ms",
               "peer_sampling", "peer_sampling_exponent", "size_law", "fixed_size",
               "size_min", "size_max", "rounds", "mrt", "mrr", "initiations_per_round",
               "round_interval_ms", "max_synergies", "churn"},
              "sim");
  SimConfig s;
  s.num_peers = get_or<size_t>(j, "num_peers", 0);
  s.per_hop_drop_prob = get_or<double>(j, "per_hop_drop_prob", 0.0);
  s.latency.lo_ms = get_or<int64_t>(j, "latency_lo_ms", 20);
  s.latency.hi_ms = get_or<int64_t>(j, "latency_hi_ms", 80);
  std::string ps = get_or<std::string>(j, "peer_sampling", "uniform");
  if (ps == "uniform")
    s.peer_sampling = PeerSamplingMode::uniform;
  else if (ps == "power_law")
    s.peer_sampling = PeerSamplingMode::power_law;
  else
    throw ConfigError("peer_sampling must be uniform|power_law");
  s.peer_sampling_exponent = get_or<double>(j, "peer_sampling_exponent", 2.0);
  std::string law = get_or<std::string>(j, "size_law", "power_law");
  if (law == "fixed")
    s.size_law = SynergySizeLaw::fixed;
  else if (law == "power_law")
    s.size_law = SynergySizeLaw::power_law;
  else
    throw ConfigError("size_law must be fixed|power_law");
  s.fixed_size = get_or<uint32_t>(j, "fixed_size", 5);
  s.size_min = get_or<uint32_t>(j, "size_min", 3);
  s.size_max = get_or<uint32_t>(j, "size_max", 10);
  s.rounds = get_or<uint32_t>(j, "rounds", 200);
  s.mrt = get_or<uint32_t>(j, "mrt", 50);
  s.mrr = get_or<double>(j, "mrr", 0.5);
  s.initiations_per_round = get_or<size_t>(j, "initiations_per_round", 0);
  s.round_interval_ms = get_or<int64_t>(j, "round_interval_ms", 1000);
  s.max_synergies = get_or<size_t>(j, "max_synergies", 0);
  if (j.contains("churn")) {
    const json& c = j.at("churn");
    expect_keys(c, {"departure_prob_per_round", "departure_min_ms", "departure_max_ms"},
                "sim.churn");
    s.churn.departure_prob_per_round = get_or<double>(c, "departure_prob_per_round", 0.0);
    s.churn.departure_min_ms = get_or<int64_t>(c, "departure_min_ms", 2000);
    s.churn.departure_max_ms = get_or<int64_t>(c, "departure_max_ms", 8000);
  }
  return s;
}

json sim_to_json(const SimConfig& s) {
  json j;
  j["num_peers"] = s.num_peers;
  j["per_hop_drop_prob"] = s.per_hop_drop_prob;
  j["latency_lo_ms"] = s.latency.lo_ms;
  j["latency_hi_ms"] = s.latency.hi_ms;
  j["peer_sampling"] = s.peer_sampling == PeerSamplingMode::uniform ? "uniform" : "power_law";
  j["peer_sampling_exponent"] = s.peer_sampling_exponent;
  j["size_law"] = s.size_law == SynergySizeLaw::fixed ? "fixed" : "power_law";
  j["fixed_size"] = s.fixed_size;
  j["size_min"] = s.size_min;
  j["size_max"] = s.size_max;
  j["rounds"] = s.rounds;
  j["mrt"] = s.mrt;
  j["mrr"] = s.mrr;
  j["initiations_per_round"] = s.initiations_per_round;
  j["round_interval_ms"] = s.round_interval_ms;
  j["max_synergies"] = s.max_synergies;
  j["churn"] = {{"departure_prob_per_round", s.churn.departure_prob_per_round},
                {"departure_min_ms", s.churn.departure_min_ms},
                {"departure_max_ms", s.churn.departure_max_ms}};
  return j;
}

} // namespace

ExperimentConfig experiment_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  expect_keys(j,
              {"task", "sim", "train", "protocol", "partition", "partition_overridden",
               "attack",
               "attack_allow_out_of_range", "encryption_enabled", "key_bits", "unsafe_keys",
               "baselines", "fl_rounds", "fl_participants_per_round", "centralized", "seeds",
               "out_dir", "write_trace", "eval_subset", "fixed_size_sweep"},
              "config");
  ExperimentConfig c;
  c.task = get_or<std::string>(j, "task", c.task);
  if (j.contains("sim")) c.sim = sim_from_json(j.at("sim"));
  if (j.contains("train")) {
    const json& t = j.at("train");
    expect_keys(t, {"batch_size", "epochs", "learning_rate", "l1", "l2"}, "train");
    c.train.batch_size = get_or<uint32_t>(t, "batch_size", c.train.batch_size);
    c.train.epochs = get_or<uint32_t>(t, "epochs", c.train.epochs);
    c.train.learning_rate = get_or<double>(t, "learning_rate", c.train.learning_rate);
    c.train.l1 = get_or<double>(t, "l1", c.train.l1);
    c.train.l2 = get_or<double>(t, "l2", c.train.l2);
  }
  if (j.contains("protocol")) {
    const json& p = j.at("protocol");
    expect_keys(p, {"hop_timeout_tp_ms", "max_retries", "freshness_window_ms"}, "protocol");
    c.protocol.hop_timeout_tp_ms =
        get_or<int64_t>(p, "hop_timeout_tp_ms", c.protocol.hop_timeout_tp_ms);
    c.protocol.max_retries = get_or<uint32_t>(p, "max_retries", c.protocol.max_retries);
    c.protocol.freshness_window_ms =
        get_or<int64_t>(p, "freshness_window_ms", c.protocol.freshness_window_ms);
  }
  if (j.contains("partition")) {
    const json& p = j.at("partition");
    expect_keys(p, {"mode", "classes_per_peer", "size_skew_exponent"}, "partition");
    std::string mode = get_or<std::string>(p, "mode", "iid");
    if (mode == "iid")
      c.partition.mode = PartitionMode::iid;
    else if (mode == "label_skew")
      c.partition.mode = PartitionMode::label_skew;
    else if (mode == "size_skew")
      c.partition.mode = PartitionMode::size_skew;
    else
      throw ConfigError("partition.mode must be iid|label_skew|size_skew");
    c.partition.classes_per_peer = get_or<uint32_t>(p, "classes_per_peer", 6);
    c.partition.size_skew_exponent = get_or<double>(p, "size_skew_exponent", 2.0);
    c.partition_overridden = true;
  }
  if (j.contains("partition_overridden"))
    c.partition_overridden = j.at("partition_overridden").get<bool>();
  if (j.contains("attack")) {
    const json& a = j.at("attack");
    expect_keys(a, {"kind", "byzantine_fraction", "class_a", "class_b", "sigma"}, "attack");
    c.attack.kind = attack_kind_from_string(get_or<std::string>(a, "kind", "none"));
    c.attack.byzantine_fraction = get_or<double>(a, "byzantine_fraction", 0.0);
    c.attack.class_a = get_or<int>(a, "class_a", 0);
    c.attack.class_b = get_or<int>(a, "class_b", 5);
    c.attack.sigma = get_or<double>(a, "sigma", 0.0);
  }
  c.attack_allow_out_of_range = get_or<bool>(j, "attack_allow_out_of_range", false);
  c.encryption_enabled = get_or<bool>(j, "encryption_enabled", true);
  c.key_bits = get_or<unsigned>(j, "key_bits", 512);
  c.unsafe_keys = get_or<bool>(j, "unsafe_keys", true);
  if (j.contains("baselines")) {
    const json& b = j.at("baselines");
    expect_keys(b, {"centralized", "fl", "local_only"}, "baselines");
    c.baselines.centralized = get_or<bool>(b, "centralized", false);
    c.baselines.fl = get_or<bool>(b, "fl", false);
    c.baselines.local_only = get_or<bool>(b, "local_only", true);
  }
  c.fl_rounds = get_or<uint32_t>(j, "fl_rounds", 50);
  c.fl_participants_per_round = get_or<size_t>(j, "fl_participants_per_round", 100);
  if (j.contains("centralized")) {
    const json& z = j.at("centralized");
    expect_keys(z, {"epochs", "patience", "min_delta"}, "centralized");
    c.centralized.train.epochs = get_or<uint32_t>(z, "epochs", 300);
    c.centralized.patience = get_or<uint32_t>(z, "patience", 10);
    c.centralized.min_delta = get_or<double>(z, "min_delta", 0.001);
  }
  c.seeds = get_or<std::vector<uint64_t>>(j, "seeds", c.seeds);
  c.out_dir = get_or<std::string>(j, "out_dir", c.out_dir);
  c.write_trace = get_or<bool>(j, "write_trace", false);
  c.eval_subset = get_or<size_t>(j, "eval_subset", 1024);
  c.fixed_size_sweep = get_or<std::vector<uint32_t>>(j, "fixed_size_sweep", {});

  // validation
  make_task(c.task, 3, 0); // rejects unknown task ids early
  if (c.sim.num_peers < 3) throw ConfigError("sim.num_peers must be >= 3");
  if (c.sim.mrr <= 0 || c.sim.mrr > 1) throw ConfigError("sim.mrr must be in (0, 1]");
  if (c.sim.per_hop_drop_prob < 0 || c.sim.per_hop_drop_prob > 1)
    throw ConfigError("sim.per_hop_drop_prob must be in [0, 1]");
  if (c.sim.size_min < 3 || c.sim.size_max < c.sim.size_min)
    throw ConfigError("synergy sizes must satisfy 3 <= size_min <= size_max");
  if (static_cast<size_t>(c.sim.size_max) > c.sim.num_peers)
    throw ConfigError("minimum synergy size exceeds peer count");
  if (c.attack.byzantine_fraction < 0 ||
      (c.attack.byzantine_fraction > 0.3 && !c.attack_allow_out_of_range))
    throw ConfigError(
        "attack.byzantine_fraction outside the studied range [0, 0.3]; set "
        "attack_allow_out_of_range to run anyway");
  if (c.seeds.empty()) throw ConfigError("seeds must not be empty");
  return c;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return experiment_from_json_text(ss.str());
}

std::string experiment_to_json(const ExperimentConfig& c) {
  json j;
  j["task"] = c.task;
  j["sim"] = sim_to_json(c.sim);
  j["train"] = {{"batch_size", c.train.batch_size},
                {"epochs", c.train.epochs},
                {"learning_rate", c.train.learning_rate},
                {"l1", c.train.l1},
                {"l2", c.train.l2}};
  j["protocol"] = {{"hop_timeout_tp_ms", c.protocol.hop_timeout_tp_ms},
                   {"max_retries", c.protocol.max_retries},
                   {"freshness_window_ms", c.protocol.freshness_window_ms}};
  const char* pmode = c.partition.mode == PartitionMode::iid
                          ? "iid"
                          : c.partition.mode == PartitionMode::label_skew ? "label_skew"
                                                                          : "size_skew";
  j["partition"] = {{"mode", pmode},
                    {"classes_per_peer", c.partition.classes_per_peer},
                    {"size_skew_exponent", c.partition.size_skew_exponent}};
  j["partition_overridden"] = c.partition_overridden;
  j["attack"] = {{"kind", to_string(c.attack.kind)},
                 {"byzantine_fraction", c.attack.byzantine_fraction},
                 {"class_a", c.attack.class_a},
                 {"class_b", c.attack.class_b},
                 {"sigma", c.attack.sigma}};
  j["encryption_enabled"] = c.encryption_enabled;
  j["key_bits"] = c.key_bits;
  j["unsafe_keys"] = c.unsafe_keys;
  j["baselines"] = {{"centralized", c.baselines.centralized},
                    {"fl", c.baselines.fl},
                    {"local_only", c.baselines.local_only}};
  j["fl_rounds"] = c.fl_rounds;
  j["fl_participants_per_round"] = c.fl_participants_per_round;
  j["centralized"] = {{"epochs", c.centralized.train.epochs},
                      {"patience", c.centralized.patience},
                      {"min_delta", c.centralized.min_delta}};
  j["seeds"] = c.seeds;
  j["eval_subset"] = c.eval_subset;
  return j.dump();
}

std::string config_hash(const ExperimentConfig& c) {
  std::string canon = experiment_to_json(c);
  auto h = hash128(Bytes(canon.begin(), canon.end()));
  return to_hex(h.data(), h.size());
}

void write_metrics_csv(const std::vector<MetricsRow>& rows, const std::string& hash,
                       const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("cannot open " + path);
  std::fprintf(f, "round,metric_name,mean,std,n_peers,config_hash\n");
  for (const MetricsRow& r : rows)
    std::fprintf(f, "%u,%s,%.12g,%.12g,%zu,%s\n", r.round, r.metric_name.c_str(), r.mean,
                 r.stddev, r.n_peers, hash.c_str());
  std::fclose(f);
}

std::vector<MetricsRow> read_metrics_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<MetricsRow> rows;
  std::string line;
  std::getline(in, line); // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    MetricsRow r;
    std::getline(ss, cell, ',');
    r.round = static_cast<uint32_t>(std::stoul(cell));
    std::getline(ss, r.metric_name, ',');
    std::getline(ss, cell, ',');
    r.mean = std::stod(cell);
    std::getline(ss, cell, ',');
    r.stddev = std::stod(cell);
    std::getline(ss, cell, ',');
    r.n_peers = std::stoul(cell);
    rows.push_back(r);
  }
  return rows;
}

namespace {

Dataset head_subset(const Dataset& d, size_t k) {
  if (k == 0 || k >= d.size()) return d;
  Dataset out;
  out.dim = d.dim;
  out.num_classes = d.num_classes;
  for (size_t i = 0; i < k; ++i) out.push(d.row(i), d.labels[i]);
  return out;
}

struct MeanStd {
  double mean = 0, stddev = 0;
  size_t n = 0;
};

MeanStd mean_std(const std::vector<double>& v) {
  MeanStd m;
  m.n = v.size();
  if (v.empty()) return m;
  for (double x : v) m.mean += x;
  m.mean /= v.size();
  if (v.size() > 1) {
    double s = 0;
    for (double x : v) s += (x - m.mean) * (x - m.mean);
    m.stddev = std::sqrt(s / (v.size() - 1));
  }
  return m;
}

void append_stat_row(std::vector<MetricsRow>& rows, uint32_t round, const std::string& name,
                     const std::vector<double>& values) {
  if (values.empty()) return;
  MeanStd m = mean_std(values);
  rows.push_back({round, name, m.mean, m.stddev, m.n});
}

void append_metric_rows(std::vector<MetricsRow>& rows, uint32_t round, const std::string& prefix,
                        const std::vector<EvalMetrics>& ms) {
  std::vector<double> loss, acc, auc;
  for (const EvalMetrics& m : ms) {
    loss.push_back(m.loss);
    acc.push_back(m.accuracy);
    if (m.auc) auc.push_back(*m.auc);
  }
  append_stat_row(rows, round, prefix + "_loss", loss);
  append_stat_row(rows, round, prefix + "_accuracy", acc);
  append_stat_row(rows, round, prefix + "_auc", auc);
}

} // namespace

CellOutcome run_cell(const ExperimentConfig& cfg, uint64_t seed, const std::string& out_dir) {
  CellOutcome cell;
  cell.seed = seed;

  TaskSpec task = make_task(cfg.task, cfg.sim.num_peers, derive_seed(seed, "task"));
  PartitionConfig partition = cfg.partition_overridden ? cfg.partition : task.default_partition;
  SeededRng part_rng(derive_seed(seed, "partition"));
  std::vector<Dataset> shards = partition_data(task.pool, cfg.sim.num_peers, partition, part_rng);
  SeededRng init_rng(derive_seed(seed, "init"));
  ModelParams init = init_model(task.arch, task.id, init_rng);
  Dataset eval_set = head_subset(task.heldout, cfg.eval_subset);

  // Byzantine bindings: label attacks poison shards once before training
  std::set<size_t> byz;
  if (cfg.attack.kind != AttackKind::none && cfg.attack.byzantine_fraction > 0) {
    SeededRng attack_rng(derive_seed(seed, "attack"));
    byz = make_byzantine_population(cfg.sim.num_peers, cfg.attack.byzantine_fraction,
                                    attack_rng);
    for (size_t i : byz) {
      switch (cfg.attack.kind) {
        case AttackKind::flip_fixed:
          shards[i] = flip_labels_fixed(shards[i], cfg.attack.class_a, cfg.attack.class_b);
          break;
        case AttackKind::flip_random:
          shards[i] = flip_labels_random(shards[i], attack_rng);
          break;
        case AttackKind::shuffle_all:
          shards[i] = shuffle_labels(shards[i], attack_rng);
          break;
        default:
          break; // noisy_weights binds at contribution time
      }
    }
  }

  FixedPointCodec codec;
  codec.max_summands = std::max<uint16_t>(10, static_cast<uint16_t>(cfg.sim.size_max));

  std::vector<std::unique_ptr<Peer>> peers;
  peers.reserve(cfg.sim.num_peers);
  for (size_t i = 0; i < cfg.sim.num_peers; ++i) {
    PeerSetup s;
    s.address = PeerAddress::from_u64(i);
    SeededRng key_rng(derive_seed(seed, "keys:" + std::to_string(i)));
    s.he_keys = paillier_keygen(cfg.key_bits, key_rng, cfg.unsafe_keys);
    s.signing_key = SigningKey::generate(key_rng);
    s.protocol = cfg.protocol;
    s.codec = codec;
    s.model = init;
    s.shard = shards[i];
    s.train = cfg.train;
    s.accept_rule_uses_auc = task.auc_acceptance;
    s.encrypted = cfg.encryption_enabled;
    s.byzantine_noisy = cfg.attack.kind == AttackKind::noisy_weights && byz.count(i) > 0;
    s.noisy_sigma = cfg.attack.sigma;
    s.rng_seed = derive_seed(seed, "peer:" + std::to_string(i));
    peers.push_back(std::make_unique<Peer>(std::move(s), nullptr));
  }

  std::unique_ptr<TraceWriter> trace;
  if (!out_dir.empty() && cfg.write_trace) {
    cell.trace_path = out_dir + "/trace_seed" + std::to_string(seed) + ".jsonl";
    trace = std::make_unique<TraceWriter>(cell.trace_path);
  } else if (cfg.write_trace) {
    trace = std::make_unique<TraceWriter>();
  }

  SimConfig sim_cfg = cfg.sim;
  sim_cfg.seed = seed;
  Simulator sim(sim_cfg, std::move(peers), eval_set, trace.get());
  for (size_t i = 0; i < sim.num_peers(); ++i) sim.peer(i).train_local();
  cell.sim = sim.run();

  // final model metrics across peers
  {
    std::vector<EvalMetrics> finals;
    finals.reserve(sim.num_peers());
    for (size_t i = 0; i < sim.num_peers(); ++i)
      finals.push_back(evaluate(sim.peer(i).model(), eval_set));
    std::vector<double> loss, acc, auc;
    for (const auto& m : finals) {
      loss.push_back(m.loss);
      acc.push_back(m.accuracy);
      if (m.auc) auc.push_back(*m.auc);
    }
    cell.final_loss = mean_std(loss).mean;
    cell.final_accuracy = mean_std(acc).mean;
    if (!auc.empty()) cell.final_auc = mean_std(auc).mean;
    append_metric_rows(cell.rows, 0, "p4l_final", finals);
  }

  // participation-round series: peers that reached at least round n
  uint32_t max_n = 0;
  for (const auto& snaps : cell.sim.per_peer)
    for (const auto& s : snaps) max_n = std::max(max_n, s.n);
  for (uint32_t n = 1; n <= max_n; ++n) {
    std::vector<EvalMetrics> at_n;
    for (const auto& snaps : cell.sim.per_peer)
      for (const auto& s : snaps)
        if (s.n == n) {
          EvalMetrics m;
          m.loss = s.loss;
          m.accuracy = s.accuracy;
          m.auc = s.auc;
          at_n.push_back(m);
        }
    append_metric_rows(cell.rows, n, "p4l", at_n);
  }

  // protocol counters
  auto counter = [&](const std::string& name, double v) {
    cell.rows.push_back({0, name, v, 0.0, cfg.sim.num_peers});
  };
  counter("synergies_initiated", static_cast<double>(cell.sim.initiated));
  counter("synergies_completed", static_cast<double>(cell.sim.completed));
  counter("synergies_failed", static_cast<double>(cell.sim.failed));
  counter("aggregates_accepted", static_cast<double>(cell.sim.accepts));
  counter("aggregates_rejected", static_cast<double>(cell.sim.rejects));
  counter("bad_proofs", static_cast<double>(cell.sim.bad_proofs));
  counter("messages_sent", static_cast<double>(cell.sim.messages_sent));
  counter("messages_dropped", static_cast<double>(cell.sim.messages_dropped));
  counter("max_shadow_deviation", cell.sim.max_shadow_deviation);
  counter("rounds_run", static_cast<double>(cell.sim.rounds_run));

  // baselines
  if (cfg.baselines.local_only) {
    SeededRng rng(derive_seed(seed, "local_only"));
    auto models = local_only_baseline(shards, init, cfg.train, rng);
    std::vector<EvalMetrics> ms;
    ms.reserve(models.size());
    for (const auto& m : models) ms.push_back(evaluate(m, eval_set));
    append_metric_rows(cell.rows, 0, "local_only", ms);
    EvalMetrics mean;
    std::vector<double> loss, acc, auc;
    for (const auto& m : ms) {
      loss.push_back(m.loss);
      acc.push_back(m.accuracy);
      if (m.auc) auc.push_back(*m.auc);
    }
    mean.loss = mean_std(loss).mean;
    mean.accuracy = mean_std(acc).mean;
    if (!auc.empty()) mean.auc = mean_std(auc).mean;
    cell.local_only = mean;
  }
  if (cfg.baselines.centralized) {
    SeededRng rng(derive_seed(seed, "centralized"));
    auto res = centralized_baseline(task.pool, eval_set, init, cfg.centralized, rng);
    cell.centralized = evaluate(res.model, eval_set);
    append_metric_rows(cell.rows, 0, "central", {*cell.centralized});
    cell.rows.push_back({0, "central_epochs", static_cast<double>(res.rounds_run), 0.0, 1});
  }
  if (cfg.baselines.fl) {
    SeededRng rng(derive_seed(seed, "fl"));
    std::vector<double> w(cfg.sim.num_peers);
    for (double& x : w) x = power_law_sample(rng, 2.0);
    WeightedSampler sampler(std::move(w));
    TrainConfig fl_local = cfg.train;
    fl_local.epochs = 5;
    auto res = fl_baseline(shards, eval_set, init, fl_local, cfg.fl_rounds,
                           cfg.fl_participants_per_round, sampler, rng);
    cell.fl_per_round = res.per_round;
    for (uint32_t r = 0; r < res.per_round.size(); ++r)
      append_metric_rows(cell.rows, r + 1, "fl", {res.per_round[r]});
  }

  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    cell.metrics_path = out_dir + "/metrics_seed" + std::to_string(seed) + ".csv";
    write_metrics_csv(cell.rows, config_hash(cfg), cell.metrics_path);
  }
  return cell;
}

std::vector<MetricsRow> summarize(const std::vector<CellOutcome>& cells) {
  std::map<std::pair<uint32_t, std::string>, std::vector<double>> acc;
  for (const CellOutcome& c : cells)
    for (const MetricsRow& r : c.rows) acc[{r.round, r.metric_name}].push_back(r.mean);
  std::vector<MetricsRow> out;
  for (const auto& [key, values] : acc) {
    MeanStd m = mean_std(values);
    out.push_back({key.first, key.second, m.mean, m.stddev, m.n});
  }
  std::sort(out.begin(), out.end(), [](const MetricsRow& a, const MetricsRow& b) {
    return a.round != b.round ? a.round < b.round : a.metric_name < b.metric_name;
  });
  return out;
}

std::vector<ExperimentOutcome> run_experiment(const ExperimentConfig& cfg) {
  std::vector<ExperimentConfig> grid;
  if (cfg.fixed_size_sweep.empty()) {
    grid.push_back(cfg);
  } else {
    for (uint32_t sz : cfg.fixed_size_sweep) {
      ExperimentConfig c = cfg;
      c.fixed_size_sweep.clear();
      c.sim.size_law = SynergySizeLaw::fixed;
      c.sim.fixed_size = sz;
      c.out_dir = cfg.out_dir + "/sz" + std::to_string(sz);
      grid.push_back(c);
    }
  }

  std::vector<ExperimentOutcome> outcomes;
  for (const ExperimentConfig& c : grid) {
    ExperimentOutcome out;
    out.config = c;
    out.hash = config_hash(c);
    if (!c.out_dir.empty()) fs::create_directories(c.out_dir);

    // worker pool over seeds; every cell is fully isolated
    size_t workers = std::max<size_t>(1, std::min<size_t>(std::thread::hardware_concurrency(),
                                                          c.seeds.size()));
    std::vector<std::future<CellOutcome>> futures;
    futures.reserve(c.seeds.size());
    size_t next = 0;
    std::vector<CellOutcome> cells(c.seeds.size());
    while (next < c.seeds.size()) {
      size_t batch = std::min(workers, c.seeds.size() - next);
      futures.clear();
      for (size_t k = 0; k < batch; ++k) {
        uint64_t seed = c.seeds[next + k];
        futures.push_back(std::async(std::launch::async,
                                     [&c, seed] { return run_cell(c, seed, c.out_dir); }));
      }
      for (size_t k = 0; k < batch; ++k) cells[next + k] = futures[k].get();
      next += batch;
    }
    out.cells = std::move(cells);
    out.summary = summarize(out.cells);
    if (!c.out_dir.empty()) {
      out.summary_path = c.out_dir + "/summary.csv";
      write_metrics_csv(out.summary, out.hash, out.summary_path);
    }
    outcomes.push_back(std::move(out));
  }
  return outcomes;
}

} // namespace p4l
