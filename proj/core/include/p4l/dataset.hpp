#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "p4l/rng.hpp"

namespace p4l {

/// A labelled sample set with flat row-major feature storage. Peers' local
/// shards use the same type; shards may be empty (new devices with no data).
struct Dataset {
  uint32_t dim = 0;
  uint32_t num_classes = 2;
  std::vector<double> features; // size() * dim
  std::vector<int> labels;

  size_t size() const { return labels.size(); }
  bool empty() const { return labels.empty(); }
  const double* row(size_t i) const { return features.data() + i * dim; }

  void push(const double* x, int y);
  std::map<int, size_t> class_histogram() const;
};

enum class PartitionMode : uint8_t { iid, label_skew, size_skew };

struct PartitionConfig {
  PartitionMode mode = PartitionMode::iid;
  uint32_t classes_per_peer = 6; // label_skew
  double size_skew_exponent = 2.0;
};

/// Split a task dataset into per-peer shards.
/// iid: equal sizes, class-balanced in expectation. label_skew: every peer
/// only holds samples from classes_per_peer distinct classes. size_skew:
/// shard sizes proportional to power-law draws (empty shards permitted).
std::vector<Dataset> partition_data(const Dataset& data, size_t num_peers,
                                    const PartitionConfig& config, SeededRng& rng);

/// 10-class Gaussian blobs, the multi-class stand-in task.
Dataset make_blobs(size_t n, uint32_t dim, uint32_t num_classes, double center_scale,
                   double noise, SeededRng& rng);

/// Imbalanced two-class Gaussian task (positive fraction ~ pos_frac), the
/// click-prediction stand-in. AUC is the meaningful metric here.
Dataset make_imbalanced_binary(size_t n, uint32_t dim, double pos_frac, double separation,
                               SeededRng& rng);

/// Linearly separable two-class data for the known-separable training oracle.
Dataset make_separable_binary(size_t n, uint32_t dim, double margin, SeededRng& rng);

/// CSV with rows label,f0,f1,... ; used for shard reproducibility dumps.
void save_csv(const Dataset& data, const std::string& path);
Dataset load_csv(const std::string& path, uint32_t num_classes);

} // namespace p4l
