#pragma once

// Synthetic covert-network generator: a two-block stochastic block model with
// a denser planted threat community, class-conditional Gaussian node features,
// Dirichlet-skewed per-client class mixes, and a feature-shift anomaly
// planter with ground truth.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "fedgat/graph.hpp"
#include "fedgat/rng.hpp"

namespace fedgat {

struct GenSpec {
  std::size_t num_nodes = 2000;
  // When num_nodes_max > num_nodes_min, each client's size is drawn uniformly
  // from [min, max]; otherwise num_nodes is used for every client.
  std::size_t num_nodes_min = 0;
  std::size_t num_nodes_max = 0;
  double target_avg_degree = 7.3;
  double threat_fraction = 0.1;     // expected share of non-benign nodes
  double intra_threat_boost = 4.0;  // edge-probability multiplier inside the threat block
  std::size_t feature_dim = 16;
  std::size_t num_classes = 2;
  double class_separation = 2.5;  // distance between class feature means
  double feature_noise = 1.0;     // per-coordinate std of the class-conditional Gaussian
  double dirichlet_alpha = 10.0;  // non-IID strength; larger = closer to base mix
  double train_fraction = 0.8;
  std::uint64_t seed = 42;
};

inline void validate_spec(const GenSpec& spec) {
  if (spec.threat_fraction <= 0.0 || spec.threat_fraction >= 1.0)
    throw std::invalid_argument("GenSpec: threat_fraction must be in (0,1)");
  if (spec.target_avg_degree >= static_cast<double>(spec.num_nodes) - 1.0)
    throw std::invalid_argument("GenSpec: target_avg_degree must be < num_nodes - 1");
  if (spec.dirichlet_alpha <= 0.0) throw std::invalid_argument("GenSpec: dirichlet_alpha must be > 0");
  if (spec.intra_threat_boost < 1.0)
    throw std::invalid_argument("GenSpec: intra_threat_boost must be >= 1");
  if (spec.num_classes < 2) throw std::invalid_argument("GenSpec: num_classes must be >= 2");
  if (spec.feature_noise < 0.0) throw std::invalid_argument("GenSpec: feature_noise must be >= 0");
  if (spec.train_fraction <= 0.0 || spec.train_fraction >= 1.0)
    throw std::invalid_argument("GenSpec: train_fraction must be in (0,1)");
}

namespace detail {

// Sample each pair of an index space of `total` pairs with probability p by
// geometric skipping, calling emit(k) for each selected linear index.
template <typename Emit>
void sample_pairs(std::size_t total, double p, Rng& rng, Emit emit) {
  if (p <= 0.0 || total == 0) return;
  if (p >= 1.0) {
    for (std::size_t k = 0; k < total; ++k) emit(k);
    return;
  }
  const double log1mp = std::log1p(-p);
  double k = -1.0;
  for (;;) {
    double u = rng.uniform();
    k += 1.0 + std::floor(std::log1p(-u) / log1mp);
    if (k >= static_cast<double>(total)) return;
    emit(static_cast<std::size_t>(k));
  }
}

// Map linear index k in [0, m*(m-1)/2) to the pair (i<j) enumerated row by row.
inline std::pair<std::size_t, std::size_t> unrank_pair(std::size_t k, std::size_t m) {
  // row i starts at offset i*m - i*(i+1)/2
  std::size_t i = static_cast<std::size_t>(
      std::floor((2.0 * m - 1.0 - std::sqrt((2.0 * m - 1.0) * (2.0 * m - 1.0) - 8.0 * k)) / 2.0));
  auto row_start = [m](std::size_t r) { return r * m - r * (r + 1) / 2; };
  while (i + 1 < m && row_start(i + 1) <= k) ++i;
  while (i > 0 && row_start(i) > k) --i;
  std::size_t j = i + 1 + (k - row_start(i));
  return {i, j};
}

// Class feature means: classes sit on orthogonal axes scaled so that every
// pair of means is class_separation apart; the binary case degenerates to
// +/- sep/2 along the normalized all-ones direction.
inline Mat class_means(std::size_t num_classes, std::size_t dim, double separation) {
  Mat means(num_classes, dim, 0.0);
  if (num_classes == 2) {
    const double s = separation / (2.0 * std::sqrt(static_cast<double>(dim)));
    for (std::size_t c = 0; c < dim; ++c) {
      means(0, c) = -s;
      means(1, c) = s;
    }
    return means;
  }
  if (num_classes > dim)
    throw std::invalid_argument("class_means: need feature_dim >= num_classes for k-ary labels");
  const double s = separation / std::sqrt(2.0);
  for (std::size_t c = 0; c < num_classes; ++c) means(c, c) = s;
  return means;
}

}  // namespace detail

// Deterministic function of (spec, client_id).
inline Graph generate_client_graph(const GenSpec& spec, std::size_t client_id) {
  validate_spec(spec);
  Rng rng(mix64(spec.seed, mix64(stream::kGenerator, client_id)));

  std::size_t n = spec.num_nodes;
  if (spec.num_nodes_max > spec.num_nodes_min)
    n = spec.num_nodes_min + rng.index(spec.num_nodes_max - spec.num_nodes_min + 1);

  // Per-client class mix: Dirichlet around the base proportions.
  std::vector<double> base(spec.num_classes);
  base[0] = 1.0 - spec.threat_fraction;
  for (std::size_t c = 1; c < spec.num_classes; ++c)
    base[c] = spec.threat_fraction / static_cast<double>(spec.num_classes - 1);
  std::vector<double> conc(base);
  for (auto& a : conc) a *= spec.dirichlet_alpha;
  std::vector<double> mix = rng.dirichlet(conc);

  // Integer class counts: floor plus largest remainders.
  std::vector<std::size_t> counts(spec.num_classes, 0);
  std::vector<std::pair<double, std::size_t>> rema;
  std::size_t assigned = 0;
  for (std::size_t c = 0; c < spec.num_classes; ++c) {
    double exact = mix[c] * static_cast<double>(n);
    counts[c] = static_cast<std::size_t>(std::floor(exact));
    assigned += counts[c];
    rema.emplace_back(exact - std::floor(exact), c);
  }
  std::sort(rema.begin(), rema.end(),
            [](const auto& a, const auto& b) { return a.first > b.first || (a.first == b.first && a.second < b.second); });
  for (std::size_t i = 0; assigned < n; ++i, ++assigned) counts[rema[i % rema.size()].second]++;

  // Shuffled label assignment so node ids carry no block structure.
  std::vector<std::size_t> order(n);
  for (std::size_t v = 0; v < n; ++v) order[v] = v;
  rng.shuffle(order);
  std::vector<int> labels(n, 0);
  std::size_t pos = 0;
  for (std::size_t c = 0; c < spec.num_classes; ++c) {
    for (std::size_t i = 0; i < counts[c]; ++i) labels[order[pos++]] = static_cast<int>(c);
  }

  std::vector<std::size_t> benign_ids, threat_ids;
  for (std::size_t v = 0; v < n; ++v) (labels[v] == 0 ? benign_ids : threat_ids).push_back(v);
  const std::size_t nb = benign_ids.size();
  const std::size_t nt = threat_ids.size();

  // Base edge probability from the expected-degree constraint:
  //   avg_degree * n / 2 = p0 * (C(n,2) + (boost-1) * C(nt,2))
  const double pairs_all = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  const double pairs_tt = 0.5 * static_cast<double>(nt) * static_cast<double>(nt ? nt - 1 : 0);
  const double denom = pairs_all + (spec.intra_threat_boost - 1.0) * pairs_tt;
  const double p0 = spec.target_avg_degree * static_cast<double>(n) / (2.0 * denom);
  const double pt = spec.intra_threat_boost * p0;
  if (p0 > 1.0 || pt > 1.0)
    throw std::invalid_argument("generate_client_graph: infeasible degree target (edge probability > 1)");

  EdgeList edges;
  edges.reserve(static_cast<std::size_t>(spec.target_avg_degree * n / 2 * 1.2) + 16);
  // benign-benign pairs
  detail::sample_pairs(nb * (nb ? nb - 1 : 0) / 2, p0, rng, [&](std::size_t k) {
    auto [i, j] = detail::unrank_pair(k, nb);
    edges.emplace_back(benign_ids[i], benign_ids[j]);
  });
  // benign-threat pairs
  detail::sample_pairs(nb * nt, p0, rng, [&](std::size_t k) {
    edges.emplace_back(benign_ids[k / (nt ? nt : 1)], threat_ids[k % (nt ? nt : 1)]);
  });
  // threat-threat pairs, boosted
  detail::sample_pairs(nt * (nt ? nt - 1 : 0) / 2, pt, rng, [&](std::size_t k) {
    auto [i, j] = detail::unrank_pair(k, nt);
    edges.emplace_back(threat_ids[i], threat_ids[j]);
  });

  // Class-conditional spherical Gaussian features.
  Mat means = detail::class_means(spec.num_classes, spec.feature_dim, spec.class_separation);
  Mat features(n, spec.feature_dim);
  for (std::size_t v = 0; v < n; ++v) {
    auto mu = means.row(static_cast<std::size_t>(labels[v]));
    auto row = features.row(v);
    for (std::size_t c = 0; c < spec.feature_dim; ++c)
      row[c] = mu[c] + spec.feature_noise * rng.gaussian();
  }

  // Exact train/test split.
  std::vector<std::size_t> split(n);
  for (std::size_t v = 0; v < n; ++v) split[v] = v;
  rng.shuffle(split);
  const std::size_t n_train = static_cast<std::size_t>(std::lround(spec.train_fraction * n));
  std::vector<std::uint8_t> train_mask(n, 0), test_mask(n, 0);
  for (std::size_t i = 0; i < n; ++i) (i < n_train ? train_mask : test_mask)[split[i]] = 1;

  return build_graph(edges, std::move(features), std::move(labels), std::move(train_mask),
                     std::move(test_mask));
}

inline std::vector<Graph> generate_federation(const GenSpec& spec, std::size_t num_clients) {
  if (num_clients < 1) throw std::invalid_argument("generate_federation: need at least one client");
  std::vector<Graph> out;
  out.reserve(num_clients);
  for (std::size_t i = 0; i < num_clients; ++i) out.push_back(generate_client_graph(spec, i));
  return out;
}

struct PlantedAnomalies {
  Graph graph;
  std::vector<std::size_t> truth;  // sorted node ids
};

// Shift ceil(fraction*n) node feature vectors by a random direction of the
// given norm; labels and structure are untouched.
inline PlantedAnomalies plant_anomalies(const Graph& g, double fraction, double magnitude,
                                        std::uint64_t seed) {
  if (fraction <= 0.0 || fraction >= 1.0)
    throw std::invalid_argument("plant_anomalies: fraction must be in (0,1)");
  Rng rng(mix64(seed, stream::kAnomaly));
  const std::size_t n = g.num_nodes;
  const std::size_t k = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n)));
  PlantedAnomalies out{g, rng.sample_without_replacement(n, k)};
  std::sort(out.truth.begin(), out.truth.end());
  const std::size_t dim = g.feature_dim();
  std::vector<double> dir(dim);
  for (std::size_t v : out.truth) {
    double norm = 0.0;
    do {
      for (auto& d : dir) d = rng.gaussian();
      norm = norm2(dir);
    } while (norm == 0.0);
    auto row = out.graph.features.row(v);
    for (std::size_t c = 0; c < dim; ++c) row[c] += magnitude / norm * dir[c];
  }
  return out;
}

}  // namespace fedgat
