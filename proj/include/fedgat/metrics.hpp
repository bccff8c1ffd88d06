#pragma once

// Quantitative evaluation: accuracy, node-count-weighted global loss,
// communication accounting, overhead ratios, and the least-squares linearity
// check used by the scaling study.

#include <cstdint>
#include <cstdio>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fedgat/matrix.hpp"

namespace fedgat {

struct RoundRecord {
  std::size_t round = 0;
  double train_loss_avg = 0.0;  // node-count-weighted across clients
  double test_accuracy = 0.0;
  std::uint64_t bytes_up = 0;    // exact serialized frame bytes, client->server
  std::uint64_t bytes_down = 0;  // server->client broadcast traffic
  double wall_ms = 0.0;
  double epsilon = 0.0;
  std::string backend;
  std::string notes;
};

// Masked nodes whose argmax(logits) matches the label; argmax ties break
// toward the lower class index.
inline std::size_t correct_count(const Mat& logits, std::span<const int> labels,
                                 std::span<const std::uint8_t> mask) {
  if (logits.rows != labels.size() || logits.rows != mask.size())
    throw std::invalid_argument("accuracy: length mismatch");
  std::size_t correct = 0;
  for (std::size_t v = 0; v < logits.rows; ++v) {
    if (!mask[v]) continue;
    auto row = logits.row(v);
    std::size_t best = 0;
    for (std::size_t c = 1; c < logits.cols; ++c)
      if (row[c] > row[best]) best = c;
    if (best == static_cast<std::size_t>(labels[v])) ++correct;
  }
  return correct;
}

inline double accuracy(const Mat& logits, std::span<const int> labels,
                       std::span<const std::uint8_t> mask) {
  std::size_t count = 0;
  for (auto m : mask)
    if (m) ++count;
  if (count == 0) throw std::invalid_argument("accuracy: empty mask");
  return static_cast<double>(correct_count(logits, labels, mask)) / static_cast<double>(count);
}

// Node-count-weighted mean of per-client average losses; equals the pooled
// per-node mean when each client loss is its nodes' average.
inline double global_avg_loss(std::span<const double> losses,
                              std::span<const std::size_t> node_counts) {
  if (losses.size() != node_counts.size() || losses.empty())
    throw std::invalid_argument("global_avg_loss: length mismatch or empty");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < losses.size(); ++i) {
    if (node_counts[i] == 0) throw std::invalid_argument("global_avg_loss: zero node count");
    num += losses[i] * static_cast<double>(node_counts[i]);
    den += static_cast<double>(node_counts[i]);
  }
  return num / den;
}

// Uplink-only cost: K uploads of one update payload.
inline std::uint64_t comm_cost(std::uint64_t update_payload_bytes, std::size_t num_clients) {
  return update_payload_bytes * static_cast<std::uint64_t>(num_clients);
}

inline double overhead_ratio(std::uint64_t protected_bytes, std::uint64_t plain_bytes) {
  if (plain_bytes == 0) throw std::invalid_argument("overhead_ratio: plain_bytes must be > 0");
  return static_cast<double>(protected_bytes) / static_cast<double>(plain_bytes) - 1.0;
}

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

inline LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("linear_fit: need >= 2 matched points");
  const auto n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  LinearFit f;
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw std::invalid_argument("linear_fit: degenerate x values");
  f.slope = (n * sxy - sx * sy) / denom;
  f.intercept = (sy - f.slope * sx) / n;
  double ss_res = 0.0, ss_tot = 0.0;
  const double ybar = sy / n;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double pred = f.slope * x[i] + f.intercept;
    ss_res += (y[i] - pred) * (y[i] - pred);
    ss_tot += (y[i] - ybar) * (y[i] - ybar);
  }
  f.r_squared = ss_tot == 0.0 ? 1.0 : 1.0 - ss_res / ss_tot;
  return f;
}

// CSV row layout shared by the trainer and the determinism checks. Timing is
// deliberately excluded so reruns with equal seeds produce byte-identical
// files; wall_ms goes to a sidecar timing file.
inline std::string metrics_csv_header() {
  return "round,train_loss_avg,test_accuracy,bytes_up,bytes_down,epsilon,backend,notes\n";
}

inline std::string metrics_csv_row(const RoundRecord& r) {
  char loss[64], acc[64], eps[64];
  std::snprintf(loss, sizeof loss, "%.12g", r.train_loss_avg);
  std::snprintf(acc, sizeof acc, "%.12g", r.test_accuracy);
  std::snprintf(eps, sizeof eps, "%.12g", r.epsilon);
  std::string row = std::to_string(r.round);
  row += ',';
  row += loss;
  row += ',';
  row += acc;
  row += ',';
  row += std::to_string(r.bytes_up);
  row += ',';
  row += std::to_string(r.bytes_down);
  row += ',';
  row += eps;
  row += ',';
  row += r.backend;
  row += ',';
  row += r.notes;
  row += '\n';
  return row;
}

}  // namespace fedgat
