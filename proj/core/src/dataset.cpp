#include "p4l/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "p4l/sampling.hpp"

namespace p4l {

void Dataset::push(const double* x, int y) {
  features.insert(features.end(), x, x + dim);
  labels.push_back(y);
}

std::map<int, size_t> Dataset::class_histogram() const {
  std::map<int, size_t> h;
  for (int y : labels) ++h[y];
  return h;
}

namespace {

Dataset shard_like(const Dataset& data) {
  Dataset s;
  s.dim = data.dim;
  s.num_classes = data.num_classes;
  return s;
}

std::vector<Dataset> partition_by_sizes(const Dataset& data, const std::vector<size_t>& sizes,
                                        SeededRng& rng) {
  std::vector<size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  std::vector<Dataset> shards;
  shards.reserve(sizes.size());
  size_t next = 0;
  for (size_t sz : sizes) {
    Dataset s = shard_like(data);
    for (size_t i = 0; i < sz && next < order.size(); ++i, ++next)
      s.push(data.row(order[next]), data.labels[order[next]]);
    shards.push_back(std::move(s));
  }
  return shards;
}

} // namespace

std::vector<Dataset> partition_data(const Dataset& data, size_t num_peers,
                                    const PartitionConfig& config, SeededRng& rng) {
  if (num_peers == 0) throw std::invalid_argument("num_peers must be positive");
  switch (config.mode) {
    case PartitionMode::iid: {
      if (data.size() < num_peers)
        throw std::invalid_argument("IID partition needs at least one sample per peer");
      size_t base = data.size() / num_peers;
      std::vector<size_t> sizes(num_peers, base);
      return partition_by_sizes(data, sizes, rng);
    }
    case PartitionMode::size_skew: {
      std::vector<double> draws(num_peers);
      double total = 0;
      for (double& d : draws) {
        d = power_law_sample(rng, config.size_skew_exponent);
        total += d;
      }
      std::vector<size_t> sizes(num_peers);
      for (size_t i = 0; i < num_peers; ++i)
        sizes[i] = static_cast<size_t>(std::floor(draws[i] / total * data.size()));
      return partition_by_sizes(data, sizes, rng);
    }
    case PartitionMode::label_skew: {
      if (config.classes_per_peer > data.num_classes)
        throw std::invalid_argument("classes_per_peer exceeds number of classes");
      // choose a class subset per peer, then deal each class's samples among
      // the peers that own the class
      std::vector<std::vector<int>> peer_classes(num_peers);
      std::vector<std::vector<size_t>> class_owners(data.num_classes);
      std::vector<int> all_classes(data.num_classes);
      std::iota(all_classes.begin(), all_classes.end(), 0);
      for (size_t p = 0; p < num_peers; ++p) {
        std::vector<int> take = all_classes;
        rng.shuffle(take);
        take.resize(config.classes_per_peer);
        std::sort(take.begin(), take.end());
        peer_classes[p] = take;
        for (int c : take) class_owners[c].push_back(p);
      }
      std::vector<Dataset> shards;
      shards.reserve(num_peers);
      for (size_t p = 0; p < num_peers; ++p) shards.push_back(shard_like(data));
      std::vector<size_t> order(data.size());
      std::iota(order.begin(), order.end(), 0);
      rng.shuffle(order);
      for (size_t idx : order) {
        int c = data.labels[idx];
        const auto& owners = class_owners[c];
        if (owners.empty()) continue; // class owned by nobody: drop
        size_t p = owners[rng.index(owners.size())];
        shards[p].push(data.row(idx), data.labels[idx]);
      }
      return shards;
    }
  }
  throw std::logic_error("unreachable");
}

Dataset make_blobs(size_t n, uint32_t dim, uint32_t num_classes, double center_scale,
                   double noise, SeededRng& rng) {
  Dataset d;
  d.dim = dim;
  d.num_classes = num_classes;
  std::vector<double> centers(static_cast<size_t>(num_classes) * dim);
  for (double& c : centers) c = center_scale * rng.normal();
  std::vector<double> x(dim);
  for (size_t i = 0; i < n; ++i) {
    int y = static_cast<int>(rng.index(num_classes));
    for (uint32_t j = 0; j < dim; ++j)
      x[j] = centers[static_cast<size_t>(y) * dim + j] + noise * rng.normal();
    d.push(x.data(), y);
  }
  return d;
}

Dataset make_imbalanced_binary(size_t n, uint32_t dim, double pos_frac, double separation,
                               SeededRng& rng) {
  Dataset d;
  d.dim = dim;
  d.num_classes = 2;
  std::vector<double> direction(dim);
  double norm = 0;
  for (double& v : direction) {
    v = rng.normal();
    norm += v * v;
  }
  norm = std::sqrt(norm);
  for (double& v : direction) v /= norm;
  std::vector<double> x(dim);
  for (size_t i = 0; i < n; ++i) {
    int y = rng.uniform() < pos_frac ? 1 : 0;
    double shift = (y == 1 ? separation : 0.0);
    for (uint32_t j = 0; j < dim; ++j) x[j] = shift * direction[j] + rng.normal();
    d.push(x.data(), y);
  }
  return d;
}

Dataset make_separable_binary(size_t n, uint32_t dim, double margin, SeededRng& rng) {
  Dataset d;
  d.dim = dim;
  d.num_classes = 2;
  std::vector<double> x(dim);
  for (size_t i = 0; i < n; ++i) {
    int y = rng.uniform() < 0.5 ? 1 : 0;
    double side = y == 1 ? 1.0 : -1.0;
    x[0] = side * (margin + rng.uniform()); // separation along the first axis
    for (uint32_t j = 1; j < dim; ++j) x[j] = rng.normal();
    d.push(x.data(), y);
  }
  return d;
}

void save_csv(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out.precision(17);
  for (size_t i = 0; i < data.size(); ++i) {
    out << data.labels[i];
    const double* r = data.row(i);
    for (uint32_t j = 0; j < data.dim; ++j) out << ',' << r[j];
    out << '\n';
  }
}

Dataset load_csv(const std::string& path, uint32_t num_classes) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  Dataset d;
  d.num_classes = num_classes;
  std::string line;
  std::vector<double> row;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string cell;
    if (!std::getline(ss, cell, ',')) continue;
    int y = std::stoi(cell);
    row.clear();
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (d.dim == 0) d.dim = static_cast<uint32_t>(row.size());
    if (row.size() != d.dim) throw std::runtime_error("ragged csv row in " + path);
    d.push(row.data(), y);
  }
  return d;
}

} // namespace p4l
