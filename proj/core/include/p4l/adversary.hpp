#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "p4l/dataset.hpp"
#include "p4l/model.hpp"

namespace p4l {

enum class AttackKind : uint8_t {
  none,
  flip_fixed,    // consistently swap two fixed classes
  flip_random,   // one uniformly chosen class pair per Byzantine peer
  shuffle_all,   // permute all labels
  noisy_weights, // substitute weights with KDE resamples every contribution
};

struct AttackConfig {
  AttackKind kind = AttackKind::none;
  double byzantine_fraction = 0.0; // studied range [0, 0.3]
  int class_a = 0;
  int class_b = 5;
  double sigma = 0.0; // noisy_weights bandwidth; 0 = Silverman's rule
};

AttackKind attack_kind_from_string(const std::string& s);
std::string to_string(AttackKind k);

/// Swap labels class_a <-> class_b; features untouched.
Dataset flip_labels_fixed(const Dataset& data, int class_a, int class_b);

/// Swap one uniformly chosen unordered class pair.
Dataset flip_labels_random(const Dataset& data, SeededRng& rng);

/// Uniformly permute the label assignment (label multiset preserved).
Dataset shuffle_labels(const Dataset& data, SeededRng& rng);

/// One-dimensional Gaussian KDE over a layer's weights; the noisy-peers
/// attack draws substitution weights from it so the poisoned values stay
/// plausible in distribution.
struct WeightKde {
  std::vector<double> support;
  double sigma = 0.0;

  /// Unnormalised density: sum_i G(x - w_i; sigma).
  double density(double x) const;
  /// CDF of the normalised mixture (for goodness-of-fit tests).
  double cdf(double x) const;
  /// Exact KDE sampling: uniform support point + N(0, sigma).
  std::vector<double> sample(size_t count, SeededRng& rng) const;
};

/// Silverman's rule-of-thumb bandwidth.
double silverman_bandwidth(const std::vector<double>& values);

/// Which flat-weight positions the noisy-weights attack replaces: the last
/// two dense layers for the MLP, the single layer for logistic regression.
std::pair<size_t, size_t> noisy_attack_range(const Architecture& arch);

/// KDE-resample the selected layer weights of an honest model.
std::vector<double> make_noisy_weights(const ModelParams& honest, double sigma, SeededRng& rng);

/// Uniformly chosen Byzantine subset of round(fraction * num_peers) peers.
std::set<size_t> make_byzantine_population(size_t num_peers, double fraction, SeededRng& rng);

} // namespace p4l
