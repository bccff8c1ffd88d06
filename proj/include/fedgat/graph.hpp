#pragma once

// Attributed undirected graph in CSR form. Immutable after construction and
// safe for concurrent reads; every mutation goes through build_graph.

#include <algorithm>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fedgat/matrix.hpp"

namespace fedgat {

using EdgeList = std::vector<std::pair<std::size_t, std::size_t>>;

struct Graph {
  std::size_t num_nodes = 0;
  std::vector<std::size_t> csr_offsets;  // length num_nodes + 1, nondecreasing
  std::vector<std::size_t> csr_targets;  // undirected edges stored both directions, sorted per node
  Mat features;                          // num_nodes x feature_dim
  std::vector<int> labels;               // class index per node
  std::vector<std::uint8_t> train_mask;
  std::vector<std::uint8_t> test_mask;

  std::size_t feature_dim() const { return features.cols; }

  std::size_t degree(std::size_t v) const { return csr_offsets[v + 1] - csr_offsets[v]; }

  // CSR slice for v, sorted ascending.
  std::span<const std::size_t> neighbors(std::size_t v) const {
    if (v >= num_nodes) throw std::out_of_range("neighbors: node index out of range");
    return {csr_targets.data() + csr_offsets[v], degree(v)};
  }

  std::size_t count_train() const {
    return static_cast<std::size_t>(std::count(train_mask.begin(), train_mask.end(), 1));
  }
  std::size_t count_test() const {
    return static_cast<std::size_t>(std::count(test_mask.begin(), test_mask.end(), 1));
  }
};

// Symmetric deduplicated CSR from an arbitrary edge list. Self loops in the
// input are dropped; the GAT layer injects them logically.
inline Graph build_graph(const EdgeList& edges, Mat features, std::vector<int> labels,
                         std::vector<std::uint8_t> train_mask = {},
                         std::vector<std::uint8_t> test_mask = {}) {
  const std::size_t n = features.rows;
  if (labels.size() != n) throw std::invalid_argument("build_graph: labels length != feature rows");
  if (train_mask.empty()) train_mask.assign(n, 0);
  if (test_mask.empty()) test_mask.assign(n, 0);
  if (train_mask.size() != n || test_mask.size() != n)
    throw std::invalid_argument("build_graph: mask length != num_nodes");
  for (std::size_t v = 0; v < n; ++v) {
    if (train_mask[v] && test_mask[v])
      throw std::invalid_argument("build_graph: node " + std::to_string(v) + " in both masks");
    if (labels[v] < 0) throw std::invalid_argument("build_graph: negative label");
  }

  std::vector<std::pair<std::size_t, std::size_t>> dir;
  dir.reserve(edges.size() * 2);
  for (const auto& [u, v] : edges) {
    if (u >= n || v >= n)
      throw std::invalid_argument("build_graph: edge endpoint out of range (" + std::to_string(u) +
                                  "," + std::to_string(v) + ")");
    if (u == v) continue;
    dir.emplace_back(u, v);
    dir.emplace_back(v, u);
  }
  std::sort(dir.begin(), dir.end());
  dir.erase(std::unique(dir.begin(), dir.end()), dir.end());

  Graph g;
  g.num_nodes = n;
  g.csr_offsets.assign(n + 1, 0);
  g.csr_targets.reserve(dir.size());
  std::size_t pos = 0;
  for (std::size_t v = 0; v < n; ++v) {
    g.csr_offsets[v] = pos;
    while (pos < dir.size() && dir[pos].first == v) {
      g.csr_targets.push_back(dir[pos].second);
      ++pos;
    }
  }
  g.csr_offsets[n] = g.csr_targets.size();
  g.features = std::move(features);
  g.labels = std::move(labels);
  g.train_mask = std::move(train_mask);
  g.test_mask = std::move(test_mask);
  return g;
}

struct DegreeStats {
  double avg_degree = 0.0;
  std::size_t max_degree = 0;
};

inline DegreeStats degree_stats(const Graph& g) {
  DegreeStats s;
  if (g.num_nodes == 0) return s;
  s.avg_degree = static_cast<double>(g.csr_targets.size()) / static_cast<double>(g.num_nodes);
  for (std::size_t v = 0; v < g.num_nodes; ++v) s.max_degree = std::max(s.max_degree, g.degree(v));
  return s;
}

// Full invariant check; used by the JSON loader and in tests.
inline void validate_graph(const Graph& g) {
  const std::size_t n = g.num_nodes;
  if (g.csr_offsets.size() != n + 1) throw std::invalid_argument("graph: bad offsets length");
  if (g.csr_offsets[0] != 0 || g.csr_offsets[n] != g.csr_targets.size())
    throw std::invalid_argument("graph: offsets do not span targets");
  for (std::size_t v = 0; v < n; ++v) {
    if (g.csr_offsets[v] > g.csr_offsets[v + 1])
      throw std::invalid_argument("graph: offsets not nondecreasing");
    auto nb = g.neighbors(v);
    for (std::size_t i = 0; i < nb.size(); ++i) {
      if (nb[i] >= n) throw std::invalid_argument("graph: target out of range");
      if (nb[i] == v) throw std::invalid_argument("graph: self loop stored");
      if (i > 0 && nb[i] <= nb[i - 1])
        throw std::invalid_argument("graph: adjacency not sorted or has duplicates");
      // symmetry: v must appear in nb[i]'s list
      auto back = g.neighbors(nb[i]);
      if (!std::binary_search(back.begin(), back.end(), v))
        throw std::invalid_argument("graph: adjacency not symmetric");
    }
  }
  if (g.features.rows != n) throw std::invalid_argument("graph: feature rows != num_nodes");
  if (g.labels.size() != n) throw std::invalid_argument("graph: labels length != num_nodes");
  if (g.train_mask.size() != n || g.test_mask.size() != n)
    throw std::invalid_argument("graph: mask length != num_nodes");
  for (std::size_t v = 0; v < n; ++v) {
    if (g.train_mask[v] && g.test_mask[v])
      throw std::invalid_argument("graph: train/test masks overlap");
    if (g.labels[v] < 0) throw std::invalid_argument("graph: negative label");
  }
}

// Canonical (u < v) edge list, one entry per undirected edge.
inline EdgeList edge_list(const Graph& g) {
  EdgeList out;
  out.reserve(g.csr_targets.size() / 2);
  for (std::size_t v = 0; v < g.num_nodes; ++v) {
    for (std::size_t u : g.neighbors(v)) {
      if (v < u) out.emplace_back(v, u);
    }
  }
  return out;
}

}  // namespace fedgat
