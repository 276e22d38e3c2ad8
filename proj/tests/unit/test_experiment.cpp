#include <doctest.h>
#include <filesystem>
#include <fstream>

#include "p4l/experiment.hpp"

using namespace p4l;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.task = "imbalanced2";
  cfg.sim.num_peers = 15;
  cfg.sim.size_min = 3;
  cfg.sim.size_max = 5;
  cfg.sim.rounds = 30;
  cfg.sim.mrt = 3;
  cfg.sim.mrr = 0.5;
  cfg.sim.initiations_per_round = 3;
  cfg.train.epochs = 1;
  cfg.train.batch_size = 8;
  cfg.seeds = {5};
  cfg.eval_subset = 200;
  cfg.baselines.local_only = true;
  cfg.out_dir.clear();
  return cfg;
}

} // namespace

TEST_CASE("run_cell produces a complete metrics row set") {
  CellOutcome cell = run_cell(small_config(), 5, "");
  CHECK(cell.sim.initiated > 0);
  CHECK(cell.sim.completed > 0);
  CHECK(cell.sim.max_shadow_deviation <= 1e-9);
  CHECK(cell.final_auc.has_value());
  CHECK(cell.local_only.has_value());

  bool has_series = false, has_counter = false, has_local = false;
  for (const auto& r : cell.rows) {
    if (r.metric_name == "p4l_auc" && r.round >= 1) has_series = true;
    if (r.metric_name == "synergies_completed") has_counter = true;
    if (r.metric_name == "local_only_auc") has_local = true;
  }
  CHECK(has_series);
  CHECK(has_counter);
  CHECK(has_local);
}

TEST_CASE("metrics CSV is byte-identical across reruns of the same cell") {
  namespace fs = std::filesystem;
  ExperimentConfig cfg = small_config();
  auto dir1 = fs::temp_directory_path() / "p4l_exp_a";
  auto dir2 = fs::temp_directory_path() / "p4l_exp_b";
  fs::create_directories(dir1);
  fs::create_directories(dir2);
  CellOutcome a = run_cell(cfg, 5, dir1.string());
  CellOutcome b = run_cell(cfg, 5, dir2.string());

  std::ifstream f1(a.metrics_path), f2(b.metrics_path);
  std::string s1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
  std::string s2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
  CHECK(s1 == s2);
  CHECK(!s1.empty());
  fs::remove_all(dir1);
  fs::remove_all(dir2);
}

TEST_CASE("csv write/read round trip") {
  namespace fs = std::filesystem;
  auto path = fs::temp_directory_path() / "p4l_rows.csv";
  std::vector<MetricsRow> rows = {{1, "p4l_auc", 0.62, 0.01, 10},
                                  {0, "synergies_completed", 42, 0, 15}};
  write_metrics_csv(rows, "deadbeef", path.string());
  auto back = read_metrics_csv(path.string());
  REQUIRE(back.size() == 2);
  CHECK(back[0].round == 1);
  CHECK(back[0].metric_name == "p4l_auc");
  CHECK(back[0].mean == doctest::Approx(0.62));
  CHECK(back[1].n_peers == 15);
  fs::remove(path);
}

TEST_CASE("config json round trips and hashes stably") {
  ExperimentConfig cfg = small_config();
  std::string canon = experiment_to_json(cfg);
  ExperimentConfig back = experiment_from_json_text(canon);
  CHECK(experiment_to_json(back) == canon);
  CHECK(config_hash(back) == config_hash(cfg));
  cfg.sim.mrt = 99;
  CHECK(config_hash(cfg) != config_hash(back));
}

TEST_CASE("config validation rejects contradictions with diagnostics") {
  CHECK_THROWS_WITH_AS(experiment_from_json_text("{"), doctest::Contains("not valid JSON"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(experiment_from_json_text(R"({"bogus_key": 1})"),
                       doctest::Contains("unknown config key"), ConfigError);
  CHECK_THROWS_WITH_AS(experiment_from_json_text(R"({"task": "nope"})"),
                       doctest::Contains("unknown task"), ConfigError);
  CHECK_THROWS_WITH_AS(
      experiment_from_json_text(R"({"sim": {"num_peers": 10, "mrr": 1.5}})"),
      doctest::Contains("mrr"), ConfigError);
  CHECK_THROWS_WITH_AS(
      experiment_from_json_text(R"({"sim": {"num_peers": 4, "size_max": 9}})"),
      doctest::Contains("synergy size"), ConfigError);
  CHECK_THROWS_WITH_AS(
      experiment_from_json_text(
          R"({"sim": {"num_peers": 50}, "attack": {"kind": "flip_fixed", "byzantine_fraction": 0.5}})"),
      doctest::Contains("studied range"), ConfigError);
}

TEST_CASE("a valid config file parses with defaults applied") {
  std::string text = R"({
    "task": "imbalanced2",
    "sim": {"num_peers": 20, "mrt": 5, "mrr": 0.5},
    "seeds": [1, 2],
    "baselines": {"centralized": true, "fl": false, "local_only": true}
  })";
  ExperimentConfig cfg = experiment_from_json_text(text);
  CHECK(cfg.sim.num_peers == 20);
  CHECK(cfg.sim.mrt == 5);
  CHECK(cfg.seeds == std::vector<uint64_t>{1, 2});
  CHECK(cfg.baselines.centralized);
  CHECK(cfg.encryption_enabled);
  CHECK(cfg.key_bits == 512);
}

TEST_CASE("attack bindings poison shards and fraction zero is a no-op") {
  ExperimentConfig cfg = small_config();
  cfg.attack.kind = AttackKind::flip_fixed;
  cfg.attack.byzantine_fraction = 0.0;
  CellOutcome clean = run_cell(small_config(), 5, "");
  CellOutcome zero_attack = run_cell(cfg, 5, "");
  // fraction 0 must be bit-for-bit identical to no attack at all
  REQUIRE(clean.rows.size() == zero_attack.rows.size());
  for (size_t i = 0; i < clean.rows.size(); ++i) {
    CHECK(clean.rows[i].metric_name == zero_attack.rows[i].metric_name);
    CHECK(clean.rows[i].mean == zero_attack.rows[i].mean);
  }
}
