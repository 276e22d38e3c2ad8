#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "p4l/dataset.hpp"
#include "p4l/rng.hpp"

namespace p4l {

enum class ArchKind : uint8_t { logistic, mlp };

/// Layer shapes of the shared model. logistic: single dense layer with
/// sigmoid (binary). mlp: dense(hidden, tanh) -> dense(classes, softmax).
struct Architecture {
  ArchKind kind = ArchKind::logistic;
  uint32_t input_dim = 0;
  uint32_t hidden_dim = 0; // mlp only
  uint32_t num_classes = 2;

  size_t weight_count() const;
  bool operator==(const Architecture&) const = default;
};

/// The unit exchanged and averaged: a flat weight vector plus its shape.
struct ModelParams {
  Architecture arch;
  std::vector<double> weights;
  std::string task_id;
};

/// Common starting point distributed to every peer (averaging differently
/// initialised non-convex models would be meaningless).
ModelParams init_model(const Architecture& arch, const std::string& task_id, SeededRng& rng);

/// Class-probability vector for one sample (size num_classes).
std::vector<double> predict_proba(const ModelParams& model, const double* x);

struct EvalMetrics {
  double loss = 0;
  double accuracy = 0;
  std::optional<double> auc; // absent when undefined (single-class data)
};

/// Mean cross-entropy loss, accuracy, and rank-based AUC (macro one-vs-rest
/// for multiclass). Throws on an empty dataset.
EvalMetrics evaluate(const ModelParams& model, const Dataset& data);

/// Mean loss and gradient over the given sample indices (data loss only;
/// regularisation is applied by the optimiser).
double loss_and_grad(const ModelParams& model, const Dataset& data,
                     const std::vector<size_t>& indices, std::vector<double>& grad);

/// Rank-based AUC with tied-score handling; equals the pairwise concordance
/// count. Returns nullopt when either class is empty.
std::optional<double> binary_auc(const std::vector<double>& scores,
                                 const std::vector<int>& labels);

/// Clamp weights to the fixed-point range before encryption. Returns the
/// number of clipped entries.
size_t clip_weights(std::vector<double>& weights, double cap = 1e3);

} // namespace p4l
