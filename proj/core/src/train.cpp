#include "p4l/train.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace p4l {

ModelParams local_train(const ModelParams& model, const Dataset& data, const TrainConfig& cfg,
                        SeededRng& rng) {
  if (data.empty()) return model;
  ModelParams m = model;
  std::vector<size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> grad;
  std::vector<size_t> batch;
  for (uint32_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    for (size_t start = 0; start < order.size(); start += cfg.batch_size) {
      size_t end = std::min(order.size(), start + cfg.batch_size);
      batch.assign(order.begin() + start, order.begin() + end);
      double loss = loss_and_grad(m, data, batch, grad);
      if (!std::isfinite(loss))
        throw std::runtime_error("non-finite training loss (task " + m.task_id + ", epoch " +
                                 std::to_string(epoch) + ")");
      for (size_t j = 0; j < m.weights.size(); ++j) {
        double w = m.weights[j];
        double g = grad[j] + cfg.l2 * w + cfg.l1 * (w > 0 ? 1.0 : (w < 0 ? -1.0 : 0.0));
        m.weights[j] = w - cfg.learning_rate * g;
      }
    }
  }
  return m;
}

ModelParams average_models(const std::vector<ModelParams>& models) {
  if (models.empty()) throw std::invalid_argument("average_models: empty input");
  ModelParams avg = models.front();
  for (size_t i = 1; i < models.size(); ++i) {
    if (models[i].weights.size() != avg.weights.size())
      throw std::invalid_argument("average_models: weight count mismatch");
    for (size_t j = 0; j < avg.weights.size(); ++j) avg.weights[j] += models[i].weights[j];
  }
  double inv = 1.0 / static_cast<double>(models.size());
  for (double& w : avg.weights) w *= inv;
  return avg;
}

BaselineResult centralized_baseline(const Dataset& train, const Dataset& heldout,
                                    const ModelParams& init, const CentralizedConfig& cfg,
                                    SeededRng& rng) {
  BaselineResult res;
  res.model = init;
  TrainConfig one_epoch = cfg.train;
  one_epoch.epochs = 1;
  double best_loss = std::numeric_limits<double>::infinity();
  uint32_t since_improvement = 0;
  for (uint32_t epoch = 0; epoch < cfg.train.epochs; ++epoch) {
    res.model = local_train(res.model, train, one_epoch, rng);
    EvalMetrics m = evaluate(res.model, heldout);
    res.per_round.push_back(m);
    ++res.rounds_run;
    if (m.loss < best_loss - cfg.min_delta) {
      best_loss = m.loss;
      since_improvement = 0;
    } else if (++since_improvement >= cfg.patience) {
      break;
    }
  }
  return res;
}

BaselineResult fl_baseline(const std::vector<Dataset>& shards, const Dataset& heldout,
                           const ModelParams& init, const TrainConfig& local_cfg,
                           uint32_t rounds, size_t participants_per_round,
                           const WeightedSampler& peer_sampler, SeededRng& rng) {
  BaselineResult res;
  res.model = init;
  for (uint32_t round = 0; round < rounds; ++round) {
    auto picked = peer_sampler.sample_without_replacement(participants_per_round, rng);
    std::vector<ModelParams> locals;
    locals.reserve(picked.size());
    for (size_t p : picked) locals.push_back(local_train(res.model, shards[p], local_cfg, rng));
    if (!locals.empty()) res.model = average_models(locals);
    res.per_round.push_back(evaluate(res.model, heldout));
    ++res.rounds_run;
  }
  return res;
}

std::vector<ModelParams> local_only_baseline(const std::vector<Dataset>& shards,
                                             const ModelParams& init, const TrainConfig& cfg,
                                             SeededRng& rng) {
  std::vector<ModelParams> models;
  models.reserve(shards.size());
  for (const Dataset& s : shards) models.push_back(local_train(init, s, cfg, rng));
  return models;
}

} // namespace p4l
