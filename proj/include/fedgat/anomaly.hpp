#pragma once

// Embedding-based suspicious-node detection. Each node's score is the
// squared deviation of its embedding from the mean embedding of its
// neighborhood (self excluded; isolated nodes score 0). Flagging uses a
// strict threshold; default tau is the (1 - planted_fraction) score quantile
// when the planted fraction is known, else mean + 2*stddev. Cosine distance
// is available as an alternative scoring metric.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "fedgat/graph.hpp"
#include "fedgat/matrix.hpp"

namespace fedgat {

inline double cosine_distance(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw std::invalid_argument("cosine_distance: length mismatch");
  const double nu = norm2(u), nv = norm2(v);
  if (nu == 0.0 || nv == 0.0)
    throw std::invalid_argument("cosine_distance: undefined for zero vector");
  return 1.0 - dot(u, v) / (nu * nv);
}

enum class ScoreMetric { kSquaredDeviation, kCosine };

inline std::string to_string(ScoreMetric m) {
  return m == ScoreMetric::kSquaredDeviation ? "sq_deviation" : "cosine";
}

inline ScoreMetric score_metric_from_string(const std::string& s) {
  if (s == "sq_deviation") return ScoreMetric::kSquaredDeviation;
  if (s == "cosine") return ScoreMetric::kCosine;
  throw std::invalid_argument("unknown score metric: " + s);
}

// A(v) = ||h_v - mean_{u in N(v)} h_u||^2 (or cosine distance under the
// alternative metric). Isolated nodes score 0.
inline std::vector<double> anomaly_scores(const Mat& embeddings, const Graph& g,
                                          ScoreMetric metric = ScoreMetric::kSquaredDeviation) {
  if (embeddings.rows != g.num_nodes)
    throw std::invalid_argument("anomaly_scores: embedding rows != num_nodes");
  const std::size_t d = embeddings.cols;
  std::vector<double> scores(g.num_nodes, 0.0);
  std::vector<double> mean(d);
  for (std::size_t v = 0; v < g.num_nodes; ++v) {
    auto nb = g.neighbors(v);
    if (nb.empty()) continue;
    std::fill(mean.begin(), mean.end(), 0.0);
    for (auto u : nb) axpy(1.0, embeddings.row(u), mean);
    for (auto& x : mean) x /= static_cast<double>(nb.size());
    auto hv = embeddings.row(v);
    if (metric == ScoreMetric::kSquaredDeviation) {
      double s = 0.0;
      for (std::size_t c = 0; c < d; ++c) {
        const double diff = hv[c] - mean[c];
        s += diff * diff;
      }
      scores[v] = s;
    } else {
      const double nhv = norm2(hv), nmean = norm2(mean);
      scores[v] = (nhv == 0.0 || nmean == 0.0) ? 0.0 : cosine_distance(hv, mean);
    }
  }
  return scores;
}

// Linear-interpolated quantile of the score distribution, q in [0,1].
inline double score_quantile(std::span<const double> scores, double q) {
  if (scores.empty()) throw std::invalid_argument("score_quantile: empty");
  if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("score_quantile: q outside [0,1]");
  std::vector<double> sorted(scores.begin(), scores.end());
  std::sort(sorted.begin(), sorted.end());
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

// Default threshold selection per the documented policy.
inline double default_threshold(std::span<const double> scores, double planted_fraction = -1.0) {
  if (scores.empty()) throw std::invalid_argument("default_threshold: empty");
  if (planted_fraction > 0.0 && planted_fraction < 1.0)
    return score_quantile(scores, 1.0 - planted_fraction);
  double mean = 0.0;
  for (double s : scores) mean += s;
  mean /= static_cast<double>(scores.size());
  double var = 0.0;
  for (double s : scores) var += (s - mean) * (s - mean);
  var /= static_cast<double>(scores.size());
  return mean + 2.0 * std::sqrt(var);
}

// Strict threshold: {v : scores[v] > tau}.
inline std::vector<std::size_t> flag(std::span<const double> scores, double tau) {
  if (!std::isfinite(tau)) throw std::invalid_argument("flag: tau must be finite");
  std::vector<std::size_t> out;
  for (std::size_t v = 0; v < scores.size(); ++v)
    if (scores[v] > tau) out.push_back(v);
  return out;
}

// precision = |flagged & truth|/|flagged| (1 when flagged empty),
// recall = |flagged & truth|/|truth| (1 when truth empty).
inline std::pair<double, double> precision_recall(std::span<const std::size_t> flagged,
                                                  std::span<const std::size_t> truth) {
  std::vector<std::size_t> f(flagged.begin(), flagged.end());
  std::vector<std::size_t> t(truth.begin(), truth.end());
  std::sort(f.begin(), f.end());
  std::sort(t.begin(), t.end());
  std::size_t hits = 0;
  for (auto v : f)
    if (std::binary_search(t.begin(), t.end(), v)) ++hits;
  const double precision =
      f.empty() ? 1.0 : static_cast<double>(hits) / static_cast<double>(f.size());
  const double recall = t.empty() ? 1.0 : static_cast<double>(hits) / static_cast<double>(t.size());
  return {precision, recall};
}

struct AnomalyReport {
  std::vector<double> scores;
  double threshold = 0.0;
  std::vector<std::size_t> flagged;
  double precision = 0.0;
  double recall = 0.0;
};

inline AnomalyReport make_report(const Mat& embeddings, const Graph& g,
                                 std::span<const std::size_t> truth,
                                 double planted_fraction = -1.0,
                                 ScoreMetric metric = ScoreMetric::kSquaredDeviation) {
  AnomalyReport r;
  r.scores = anomaly_scores(embeddings, g, metric);
  r.threshold = default_threshold(r.scores, planted_fraction);
  r.flagged = flag(r.scores, r.threshold);
  std::tie(r.precision, r.recall) = precision_recall(r.flagged, truth);
  return r;
}

struct SweepPoint {
  double tau = 0.0;
  double precision = 0.0;
  double recall = 0.0;
};

// Operating points at evenly spaced score quantiles.
inline std::vector<SweepPoint> threshold_sweep(std::span<const double> scores,
                                               std::span<const std::size_t> truth,
                                               std::size_t num_points) {
  if (num_points < 2) throw std::invalid_argument("threshold_sweep: num_points must be >= 2");
  std::vector<SweepPoint> out;
  out.reserve(num_points);
  for (std::size_t i = 0; i < num_points; ++i) {
    const double q = static_cast<double>(i) / static_cast<double>(num_points - 1);
    SweepPoint p;
    p.tau = score_quantile(scores, q);
    auto flagged = flag(scores, p.tau);
    std::tie(p.precision, p.recall) = precision_recall(flagged, truth);
    out.push_back(p);
  }
  return out;
}

}  // namespace fedgat
