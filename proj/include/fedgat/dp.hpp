#pragma once

// Differential-privacy gradient release: L2 clipping, Gaussian noise scaled
// to the clip norm, and a naive-composition epsilon report (documented loose
// upper bound; sensitivity 1 after normalizing by the clip norm).

#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "fedgat/matrix.hpp"
#include "fedgat/rng.hpp"

namespace fedgat {

struct DpConfig {
  double clip_norm = 1.0;        // C
  double noise_multiplier = 1.1; // sigma
  double delta = 1e-5;
  std::uint64_t seed = 0;
};

inline void validate_dp(const DpConfig& cfg) {
  if (!(cfg.clip_norm > 0.0)) throw std::invalid_argument("dp: clip_norm must be > 0");
  if (!(cfg.noise_multiplier >= 0.0)) throw std::invalid_argument("dp: noise_multiplier must be >= 0");
  if (!(cfg.delta > 0.0 && cfg.delta < 1.0)) throw std::invalid_argument("dp: delta must be in (0,1)");
}

inline std::vector<double> clip(std::span<const double> grad, double c) {
  if (!(c > 0.0)) throw std::invalid_argument("clip: C must be > 0");
  std::vector<double> out(grad.begin(), grad.end());
  const double n = norm2(grad);
  if (n > c) {
    const double s = c / n;
    for (auto& x : out) x *= s;
  }
  return out;
}

// clip(g, C) + z, z_i ~ N(0, (sigma*C)^2) i.i.d. from the given stream.
inline std::vector<double> privatize(std::span<const double> grad, const DpConfig& cfg, Rng& rng) {
  validate_dp(cfg);
  std::vector<double> out = clip(grad, cfg.clip_norm);
  if (cfg.noise_multiplier > 0.0) {
    const double sd = cfg.noise_multiplier * cfg.clip_norm;
    for (auto& x : out) x += sd * rng.gaussian();
  }
  return out;
}

// Per-round Gaussian-mechanism bound eps = sqrt(2 ln(1.25/delta))/sigma,
// composed naively over T rounds. sigma=0 carries no guarantee: +infinity.
inline double epsilon_report(const DpConfig& cfg, std::size_t rounds) {
  validate_dp(cfg);
  if (cfg.noise_multiplier == 0.0) return std::numeric_limits<double>::infinity();
  const double per_round = std::sqrt(2.0 * std::log(1.25 / cfg.delta)) / cfg.noise_multiplier;
  return static_cast<double>(rounds) * per_round;
}

}  // namespace fedgat
