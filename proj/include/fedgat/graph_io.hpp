#pragma once

// JSON serialization for graphs and federation manifests.
// Graph file schema:
//   {"num_nodes": n, "edges": [[u,v],...], "features": [[...],...],
//    "labels": [...], "train_mask": [...], "test_mask": [...]}
// Edges are listed once per undirected pair with u < v; the loader rebuilds
// the symmetric CSR and re-validates every invariant.

#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "fedgat/graph.hpp"

namespace fedgat {

inline nlohmann::json graph_to_json(const Graph& g) {
  nlohmann::json j;
  j["num_nodes"] = g.num_nodes;
  auto edges = nlohmann::json::array();
  for (const auto& [u, v] : edge_list(g)) edges.push_back({u, v});
  j["edges"] = std::move(edges);
  auto feats = nlohmann::json::array();
  for (std::size_t v = 0; v < g.num_nodes; ++v) {
    auto row = nlohmann::json::array();
    for (double x : g.features.row(v)) row.push_back(x);
    feats.push_back(std::move(row));
  }
  j["features"] = std::move(feats);
  j["labels"] = g.labels;
  j["train_mask"] = g.train_mask;
  j["test_mask"] = g.test_mask;
  return j;
}

inline Graph graph_from_json(const nlohmann::json& j) {
  for (const char* key : {"num_nodes", "edges", "features", "labels", "train_mask", "test_mask"}) {
    if (!j.contains(key)) throw std::invalid_argument(std::string("graph json: missing key ") + key);
  }
  const std::size_t n = j.at("num_nodes").get<std::size_t>();
  const auto& jf = j.at("features");
  if (jf.size() != n) throw std::invalid_argument("graph json: feature rows != num_nodes");
  const std::size_t dim = n == 0 ? 0 : jf.at(0).size();
  Mat features(n, dim);
  for (std::size_t v = 0; v < n; ++v) {
    const auto& row = jf.at(v);
    if (row.size() != dim) throw std::invalid_argument("graph json: ragged feature rows");
    for (std::size_t c = 0; c < dim; ++c) features(v, c) = row.at(c).get<double>();
  }
  EdgeList edges;
  for (const auto& e : j.at("edges")) {
    if (e.size() != 2) throw std::invalid_argument("graph json: edge is not a pair");
    edges.emplace_back(e.at(0).get<std::size_t>(), e.at(1).get<std::size_t>());
  }
  Graph g = build_graph(edges, std::move(features), j.at("labels").get<std::vector<int>>(),
                        j.at("train_mask").get<std::vector<std::uint8_t>>(),
                        j.at("test_mask").get<std::vector<std::uint8_t>>());
  validate_graph(g);
  return g;
}

inline void save_graph_json(const Graph& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for write: " + path);
  out << graph_to_json(g).dump(2) << "\n";
  if (!out) throw std::runtime_error("write failed: " + path);
}

inline Graph load_graph_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  nlohmann::json j;
  in >> j;
  return graph_from_json(j);
}

}  // namespace fedgat
