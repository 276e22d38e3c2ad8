#pragma once

#include <optional>
#include <string>

#include "p4l/adversary.hpp"
#include "p4l/sim.hpp"
#include "p4l/train.hpp"

namespace p4l {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A desk-scale task: data pool, held-out split, model shape and the metric
/// the acceptance rule uses.
struct TaskSpec {
  std::string id;
  Architecture arch;
  Dataset pool;
  Dataset heldout;
  bool auc_acceptance = false;
  PartitionConfig default_partition;
};

/// Known ids: "imbalanced2" (skewed binary logistic task, AUC-judged) and
/// "blobs10" (10-class Gaussian blobs with a 2-layer MLP, label-skew).
TaskSpec make_task(const std::string& id, size_t num_peers, uint64_t seed);

struct BaselineToggles {
  bool centralized = false;
  bool fl = false;
  bool local_only = true;
};

struct ExperimentConfig {
  std::string task = "imbalanced2";
  SimConfig sim;
  TrainConfig train{.batch_size = 16, .epochs = 3, .learning_rate = 0.05, .l1 = 0.001,
                    .l2 = 0.0};
  ProtocolConfig protocol;
  PartitionConfig partition;
  bool partition_overridden = false; // else the task default applies
  AttackConfig attack;
  bool attack_allow_out_of_range = false;
  bool encryption_enabled = true;
  unsigned key_bits = 512; // simulation scale; production sizes are 2048/3072
  bool unsafe_keys = true;
  BaselineToggles baselines;
  uint32_t fl_rounds = 50;
  size_t fl_participants_per_round = 100;
  CentralizedConfig centralized;
  std::vector<uint64_t> seeds{1};
  std::string out_dir = "p4l-out";
  bool write_trace = false;
  size_t eval_subset = 1024;
  std::vector<uint32_t> fixed_size_sweep; // expand into one experiment per sz
};

ExperimentConfig experiment_from_json_text(const std::string& text);
ExperimentConfig load_experiment_config(const std::string& path);
/// Canonical JSON of the parsed config (input formatting does not matter).
std::string experiment_to_json(const ExperimentConfig& cfg);
/// 32-hex-digit hash recorded in every output row.
std::string config_hash(const ExperimentConfig& cfg);

struct MetricsRow {
  uint32_t round = 0;
  std::string metric_name;
  double mean = 0;
  double stddev = 0;
  size_t n_peers = 0;
};

/// CSV schema: round,metric_name,mean,std,n_peers,config_hash
void write_metrics_csv(const std::vector<MetricsRow>& rows, const std::string& hash,
                       const std::string& path);
std::vector<MetricsRow> read_metrics_csv(const std::string& path);

struct CellOutcome {
  uint64_t seed = 0;
  SimResult sim;
  // mean metrics of the peers' final models on the held-out set
  double final_loss = 0;
  double final_accuracy = 0;
  std::optional<double> final_auc;
  std::optional<EvalMetrics> centralized;
  std::optional<EvalMetrics> local_only; // mean over peers
  std::vector<EvalMetrics> fl_per_round;
  std::vector<MetricsRow> rows;
  std::string metrics_path;
  std::string trace_path;
};

/// One (config, seed) cell. out_dir empty = no files written.
CellOutcome run_cell(const ExperimentConfig& cfg, uint64_t seed, const std::string& out_dir);

struct ExperimentOutcome {
  ExperimentConfig config;
  std::string hash;
  std::vector<CellOutcome> cells;
  std::vector<MetricsRow> summary; // across seeds
  std::string summary_path;
};

/// Runs every seed (worker pool, one isolated cell per seed), writes per-seed
/// metrics plus a summary, and expands fixed_size_sweep into one experiment
/// per synergy size.
std::vector<ExperimentOutcome> run_experiment(const ExperimentConfig& cfg);

/// Mean/std across seeds for every (round, metric) the cells produced.
std::vector<MetricsRow> summarize(const std::vector<CellOutcome>& cells);

} // namespace p4l
