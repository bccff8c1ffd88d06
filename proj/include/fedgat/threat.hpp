#pragma once

// Adversarial client behaviors (label flipping and gradient poisoning) and
// robust aggregation defenses (coordinate-wise trimmed mean, median-norm
// filtering). The malicious client set is a fixed seeded choice for the
// whole run; poisoned clients still speak the protocol correctly.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fedgat/graph.hpp"
#include "fedgat/matrix.hpp"
#include "fedgat/rng.hpp"

namespace fedgat {

enum class AttackKind { kLabelFlip, kGradScale, kGradSign, kGaussBlast };

inline std::string to_string(AttackKind k) {
  switch (k) {
    case AttackKind::kLabelFlip: return "label_flip";
    case AttackKind::kGradScale: return "grad_scale";
    case AttackKind::kGradSign: return "grad_sign";
    case AttackKind::kGaussBlast: return "gauss_blast";
  }
  throw std::invalid_argument("unknown attack kind");
}

inline AttackKind attack_kind_from_string(const std::string& s) {
  if (s == "label_flip") return AttackKind::kLabelFlip;
  if (s == "grad_scale") return AttackKind::kGradScale;
  if (s == "grad_sign") return AttackKind::kGradSign;
  if (s == "gauss_blast") return AttackKind::kGaussBlast;
  throw std::invalid_argument("unknown attack kind: " + s);
}

struct AttackSpec {
  double malicious_fraction = 0.0;  // paper evaluates 0.2
  AttackKind kind = AttackKind::kGradScale;
  double flip_fraction = 1.0;  // share of a malicious client's train labels
  double scale = -10.0;        // gamma for grad_scale
  std::uint64_t seed = 0;
};

inline void validate_attack(const AttackSpec& spec) {
  if (!(spec.malicious_fraction >= 0.0 && spec.malicious_fraction < 1.0))
    throw std::invalid_argument("attack: malicious_fraction must be in [0,1)");
  if (!(spec.flip_fraction >= 0.0 && spec.flip_fraction <= 1.0))
    throw std::invalid_argument("attack: flip_fraction must be in [0,1]");
}

// Seeded choice of floor(fraction*K) malicious clients, fixed per run.
inline std::vector<std::size_t> malicious_clients(std::size_t num_clients,
                                                  const AttackSpec& spec) {
  validate_attack(spec);
  const auto count =
      static_cast<std::size_t>(spec.malicious_fraction * static_cast<double>(num_clients));
  Rng rng(mix64(spec.seed, stream::kAttack));
  auto chosen = rng.sample_without_replacement(num_clients, count);
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

// Flip ceil(fraction*|train|) seeded train labels to (label+1) mod k.
inline Graph apply_label_flip(const Graph& g, const AttackSpec& spec, std::size_t num_classes) {
  validate_attack(spec);
  Graph out = g;
  std::vector<std::size_t> train_nodes;
  for (std::size_t v = 0; v < g.num_nodes; ++v)
    if (g.train_mask[v]) train_nodes.push_back(v);
  const auto flips = static_cast<std::size_t>(
      std::ceil(spec.flip_fraction * static_cast<double>(train_nodes.size())));
  Rng rng(mix64(spec.seed, mix64(stream::kAttack, 1)));
  auto picks = rng.sample_without_replacement(train_nodes.size(), flips);
  for (auto idx : picks) {
    const std::size_t v = train_nodes[idx];
    out.labels[v] = (out.labels[v] + 1) % static_cast<int>(num_classes);
  }
  return out;
}

inline std::vector<double> poison_gradient(std::span<const double> update, const AttackSpec& spec,
                                           Rng& rng) {
  std::vector<double> out(update.begin(), update.end());
  switch (spec.kind) {
    case AttackKind::kLabelFlip:
      break;  // acts on data, not the update
    case AttackKind::kGradScale:
      for (auto& x : out) x *= spec.scale;
      break;
    case AttackKind::kGradSign:
      for (auto& x : out) x = -x;
      break;
    case AttackKind::kGaussBlast: {
      double mean_abs = 0.0;
      for (double x : update) mean_abs += std::abs(x);
      if (!update.empty()) mean_abs /= static_cast<double>(update.size());
      const double sd = 10.0 * mean_abs;  // variance 100 * mean(|g|)^2
      for (auto& x : out) x += sd * rng.gaussian();
      break;
    }
  }
  return out;
}

enum class RobustMode { kOff, kTrimmedMean, kNormFilter };

inline std::string to_string(RobustMode m) {
  switch (m) {
    case RobustMode::kOff: return "off";
    case RobustMode::kTrimmedMean: return "trimmed_mean";
    case RobustMode::kNormFilter: return "norm_filter";
  }
  throw std::invalid_argument("unknown robust mode");
}

inline RobustMode robust_mode_from_string(const std::string& s) {
  if (s == "off") return RobustMode::kOff;
  if (s == "trimmed_mean") return RobustMode::kTrimmedMean;
  if (s == "norm_filter") return RobustMode::kNormFilter;
  throw std::invalid_argument("unknown robust mode: " + s);
}

struct RobustResult {
  std::vector<double> aggregate;
  std::vector<std::size_t> dropped;  // norm_filter: clients discarded
  bool all_filtered = false;         // aggregate forced to zero (no-op update)
};

// trimmed_mean: per coordinate, drop the trim_k smallest and largest values
// and average the rest, unweighted. norm_filter: discard clients whose
// update norm exceeds 3x the median norm, weighted-average the survivors.
inline RobustResult robust_aggregate(const std::vector<std::vector<double>>& updates,
                                     std::span<const double> weights, RobustMode mode,
                                     std::size_t trim_k) {
  const std::size_t k = updates.size();
  if (k == 0) throw std::invalid_argument("robust_aggregate: no updates");
  const std::size_t dim = updates.front().size();
  for (const auto& u : updates)
    if (u.size() != dim) throw std::invalid_argument("robust_aggregate: length mismatch");

  RobustResult res;
  res.aggregate.assign(dim, 0.0);

  if (mode == RobustMode::kTrimmedMean) {
    if (2 * trim_k >= k) throw std::invalid_argument("robust_aggregate: 2*trim_k must be < K");
    std::vector<double> col(k);
    for (std::size_t c = 0; c < dim; ++c) {
      for (std::size_t i = 0; i < k; ++i) col[i] = updates[i][c];
      std::sort(col.begin(), col.end());
      double s = 0.0;
      for (std::size_t i = trim_k; i < k - trim_k; ++i) s += col[i];
      res.aggregate[c] = s / static_cast<double>(k - 2 * trim_k);
    }
    return res;
  }

  if (mode == RobustMode::kNormFilter) {
    if (weights.size() != k) throw std::invalid_argument("robust_aggregate: weights size");
    std::vector<double> norms(k);
    for (std::size_t i = 0; i < k; ++i) norms[i] = norm2(updates[i]);
    std::vector<double> sorted = norms;
    std::sort(sorted.begin(), sorted.end());
    const double median = k % 2 == 1 ? sorted[k / 2] : 0.5 * (sorted[k / 2 - 1] + sorted[k / 2]);
    double weight_sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      if (norms[i] > 3.0 * median) {
        res.dropped.push_back(i);
        continue;
      }
      for (std::size_t c = 0; c < dim; ++c) res.aggregate[c] += weights[i] * updates[i][c];
      weight_sum += weights[i];
    }
    if (weight_sum == 0.0) {
      res.all_filtered = true;
      res.aggregate.assign(dim, 0.0);
      return res;
    }
    for (auto& x : res.aggregate) x /= weight_sum;
    return res;
  }

  throw std::invalid_argument("robust_aggregate: mode must be trimmed_mean or norm_filter");
}

}  // namespace fedgat
