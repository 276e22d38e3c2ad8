#pragma once

#include <vector>

#include "p4l/model.hpp"
#include "p4l/sampling.hpp"

namespace p4l {

struct TrainConfig {
  uint32_t batch_size = 16;
  uint32_t epochs = 50;
  double learning_rate = 0.05;
  double l1 = 0.001;
  double l2 = 0.0;
};

/// Early-stopping settings for the centralized baseline.
struct CentralizedConfig {
  TrainConfig train{.batch_size = 16, .epochs = 300, .learning_rate = 0.05, .l1 = 0.001,
                    .l2 = 0.0001};
  uint32_t patience = 10;
  double min_delta = 0.001;
};

/// Mini-batch SGD with L1/L2 regularisation. Empty dataset is a no-op.
/// Throws on non-finite loss.
ModelParams local_train(const ModelParams& model, const Dataset& data, const TrainConfig& cfg,
                        SeededRng& rng);

/// Uniform weight average (Aggr.Res = Res / N at plaintext level).
ModelParams average_models(const std::vector<ModelParams>& models);

struct BaselineResult {
  ModelParams model;
  std::vector<EvalMetrics> per_round; // per epoch (centralized) or per FL round
  uint32_t rounds_run = 0;
};

/// Classical ML baseline: one model on the union of all shards, early
/// stopping on held-out loss.
BaselineResult centralized_baseline(const Dataset& train, const Dataset& heldout,
                                    const ModelParams& init, const CentralizedConfig& cfg,
                                    SeededRng& rng);

/// Centralised FedAvg: per round sample participants (power-law weights),
/// train locally, average uniformly, broadcast.
BaselineResult fl_baseline(const std::vector<Dataset>& shards, const Dataset& heldout,
                           const ModelParams& init, const TrainConfig& local_cfg,
                           uint32_t rounds, size_t participants_per_round,
                           const WeightedSampler& peer_sampler, SeededRng& rng);

/// Train-alone baseline: every peer trains only on its own shard; returns the
/// per-peer models (peers with empty shards keep the initial model).
std::vector<ModelParams> local_only_baseline(const std::vector<Dataset>& shards,
                                             const ModelParams& init, const TrainConfig& cfg,
                                             SeededRng& rng);

} // namespace p4l
