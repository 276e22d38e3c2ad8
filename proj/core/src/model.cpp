#include "p4l/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace p4l {

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// numerically stable -log(sigmoid(z)) and -log(1 - sigmoid(z))
double nll_pos(double z) { return z > 0 ? std::log1p(std::exp(-z)) : -z + std::log1p(std::exp(z)); }
double nll_neg(double z) { return nll_pos(-z); }

void softmax_inplace(std::vector<double>& z) {
  double mx = *std::max_element(z.begin(), z.end());
  double sum = 0;
  for (double& v : z) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (double& v : z) v /= sum;
}

struct MlpView {
  const double* w1;
  const double* b1;
  const double* w2;
  const double* b2;
  uint32_t d, h, c;
};

MlpView mlp_view(const Architecture& a, const double* w) {
  MlpView v;
  v.d = a.input_dim;
  v.h = a.hidden_dim;
  v.c = a.num_classes;
  v.w1 = w;
  v.b1 = w + static_cast<size_t>(v.h) * v.d;
  v.w2 = v.b1 + v.h;
  v.b2 = v.w2 + static_cast<size_t>(v.c) * v.h;
  return v;
}

void mlp_forward(const MlpView& m, const double* x, std::vector<double>& hidden,
                 std::vector<double>& probs) {
  hidden.assign(m.h, 0.0);
  for (uint32_t i = 0; i < m.h; ++i) {
    double z = m.b1[i];
    const double* row = m.w1 + static_cast<size_t>(i) * m.d;
    for (uint32_t j = 0; j < m.d; ++j) z += row[j] * x[j];
    hidden[i] = std::tanh(z);
  }
  probs.assign(m.c, 0.0);
  for (uint32_t k = 0; k < m.c; ++k) {
    double z = m.b2[k];
    const double* row = m.w2 + static_cast<size_t>(k) * m.h;
    for (uint32_t i = 0; i < m.h; ++i) z += row[i] * hidden[i];
    probs[k] = z;
  }
  softmax_inplace(probs);
}

} // namespace

size_t Architecture::weight_count() const {
  switch (kind) {
    case ArchKind::logistic:
      return static_cast<size_t>(input_dim) + 1;
    case ArchKind::mlp:
      return static_cast<size_t>(hidden_dim) * input_dim + hidden_dim +
             static_cast<size_t>(num_classes) * hidden_dim + num_classes;
  }
  return 0;
}

ModelParams init_model(const Architecture& arch, const std::string& task_id, SeededRng& rng) {
  ModelParams m;
  m.arch = arch;
  m.task_id = task_id;
  m.weights.resize(arch.weight_count());
  if (arch.kind == ArchKind::logistic) {
    for (double& w : m.weights) w = 0.0; // convex task: zero init
  } else {
    MlpView v = mlp_view(arch, m.weights.data());
    double s1 = std::sqrt(6.0 / (v.d + v.h));
    double s2 = std::sqrt(6.0 / (v.h + v.c));
    size_t w1n = static_cast<size_t>(v.h) * v.d;
    size_t w2n = static_cast<size_t>(v.c) * v.h;
    for (size_t i = 0; i < w1n; ++i) m.weights[i] = rng.uniform(-s1, s1);
    for (size_t i = 0; i < v.h; ++i) m.weights[w1n + i] = 0.0;
    for (size_t i = 0; i < w2n; ++i) m.weights[w1n + v.h + i] = rng.uniform(-s2, s2);
    for (size_t i = 0; i < v.c; ++i) m.weights[w1n + v.h + w2n + i] = 0.0;
  }
  return m;
}

std::vector<double> predict_proba(const ModelParams& model, const double* x) {
  const Architecture& a = model.arch;
  if (a.kind == ArchKind::logistic) {
    double z = model.weights[a.input_dim]; // bias
    for (uint32_t j = 0; j < a.input_dim; ++j) z += model.weights[j] * x[j];
    double p = sigmoid(z);
    return {1.0 - p, p};
  }
  std::vector<double> hidden, probs;
  mlp_forward(mlp_view(a, model.weights.data()), x, hidden, probs);
  return probs;
}

double loss_and_grad(const ModelParams& model, const Dataset& data,
                     const std::vector<size_t>& indices, std::vector<double>& grad) {
  const Architecture& a = model.arch;
  grad.assign(model.weights.size(), 0.0);
  if (indices.empty()) return 0.0;
  double loss = 0;
  if (a.kind == ArchKind::logistic) {
    for (size_t idx : indices) {
      const double* x = data.row(idx);
      int y = data.labels[idx];
      double z = model.weights[a.input_dim];
      for (uint32_t j = 0; j < a.input_dim; ++j) z += model.weights[j] * x[j];
      loss += y == 1 ? nll_pos(z) : nll_neg(z);
      double dz = sigmoid(z) - (y == 1 ? 1.0 : 0.0);
      for (uint32_t j = 0; j < a.input_dim; ++j) grad[j] += dz * x[j];
      grad[a.input_dim] += dz;
    }
  } else {
    MlpView v = mlp_view(a, model.weights.data());
    size_t w1n = static_cast<size_t>(v.h) * v.d;
    size_t w2n = static_cast<size_t>(v.c) * v.h;
    double* g_w1 = grad.data();
    double* g_b1 = grad.data() + w1n;
    double* g_w2 = g_b1 + v.h;
    double* g_b2 = g_w2 + w2n;
    std::vector<double> hidden, probs, dz1(v.h);
    for (size_t idx : indices) {
      const double* x = data.row(idx);
      int y = data.labels[idx];
      mlp_forward(v, x, hidden, probs);
      loss += -std::log(std::max(probs[y], 1e-300));
      for (uint32_t i = 0; i < v.h; ++i) dz1[i] = 0;
      for (uint32_t k = 0; k < v.c; ++k) {
        double dz2 = probs[k] - (static_cast<int>(k) == y ? 1.0 : 0.0);
        double* row = g_w2 + static_cast<size_t>(k) * v.h;
        const double* w_row = v.w2 + static_cast<size_t>(k) * v.h;
        for (uint32_t i = 0; i < v.h; ++i) {
          row[i] += dz2 * hidden[i];
          dz1[i] += dz2 * w_row[i];
        }
        g_b2[k] += dz2;
      }
      for (uint32_t i = 0; i < v.h; ++i) {
        double d = dz1[i] * (1.0 - hidden[i] * hidden[i]);
        double* row = g_w1 + static_cast<size_t>(i) * v.d;
        for (uint32_t j = 0; j < v.d; ++j) row[j] += d * x[j];
        g_b1[i] += d;
      }
    }
  }
  double inv = 1.0 / static_cast<double>(indices.size());
  for (double& g : grad) g *= inv;
  return loss * inv;
}

std::optional<double> binary_auc(const std::vector<double>& scores,
                                 const std::vector<int>& labels) {
  size_t n = scores.size();
  size_t pos = 0;
  for (int y : labels) pos += y == 1;
  size_t neg = n - pos;
  if (pos == 0 || neg == 0) return std::nullopt;
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return scores[a] < scores[b]; });
  // average ranks over tied scores, then Mann-Whitney
  double rank_sum_pos = 0;
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    double avg_rank = 0.5 * (i + j) + 1.0;
    for (size_t k = i; k <= j; ++k)
      if (labels[order[k]] == 1) rank_sum_pos += avg_rank;
    i = j + 1;
  }
  double u = rank_sum_pos - static_cast<double>(pos) * (pos + 1) / 2.0;
  return u / (static_cast<double>(pos) * static_cast<double>(neg));
}

EvalMetrics evaluate(const ModelParams& model, const Dataset& data) {
  if (data.empty()) throw std::invalid_argument("evaluate: empty dataset");
  EvalMetrics m;
  size_t n = data.size();
  uint32_t classes = model.arch.num_classes;
  std::vector<std::vector<double>> proba(n);
  size_t correct = 0;
  double loss = 0;
  for (size_t i = 0; i < n; ++i) {
    proba[i] = predict_proba(model, data.row(i));
    int y = data.labels[i];
    loss += -std::log(std::max(proba[i][y], 1e-300));
    size_t pred = std::distance(proba[i].begin(),
                                std::max_element(proba[i].begin(), proba[i].end()));
    correct += static_cast<int>(pred) == y;
  }
  m.loss = loss / n;
  m.accuracy = static_cast<double>(correct) / n;

  if (classes == 2) {
    std::vector<double> scores(n);
    for (size_t i = 0; i < n; ++i) scores[i] = proba[i][1];
    m.auc = binary_auc(scores, data.labels);
  } else {
    // macro one-vs-rest over classes present with both positives and negatives
    double total = 0;
    size_t valid = 0;
    std::vector<double> scores(n);
    std::vector<int> rel(n);
    for (uint32_t c = 0; c < classes; ++c) {
      for (size_t i = 0; i < n; ++i) {
        scores[i] = proba[i][c];
        rel[i] = data.labels[i] == static_cast<int>(c) ? 1 : 0;
      }
      auto auc_c = binary_auc(scores, rel);
      if (auc_c) {
        total += *auc_c;
        ++valid;
      }
    }
    if (valid > 0) m.auc = total / valid;
  }
  return m;
}

size_t clip_weights(std::vector<double>& weights, double cap) {
  size_t clipped = 0;
  for (double& w : weights) {
    if (w > cap) {
      w = cap;
      ++clipped;
    } else if (w < -cap) {
      w = -cap;
      ++clipped;
    }
  }
  return clipped;
}

} // namespace p4l
