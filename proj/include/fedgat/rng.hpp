#pragma once

// Deterministic randomness for the whole lab. Every consumer derives its own
// stream from a seed with mix64, so results depend only on (seed, purpose,
// round) and never on thread scheduling or call order between modules.

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace fedgat {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// 64-bit seed combiner: avalanche the parent seed, fold in the salt, avalanche
// again. Used for every parent->child stream derivation.
inline std::uint64_t mix64(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t s = seed;
  std::uint64_t h = splitmix64(s) ^ (salt * 0xff51afd7ed558ccdULL + 0x2545f4914f6cdd1dULL);
  std::uint64_t t = h;
  return splitmix64(t);
}

// Stream purpose tags (salts for mix64). Keep values stable: they are part of
// the reproducibility contract.
namespace stream {
inline constexpr std::uint64_t kModelInit = 0x11;
inline constexpr std::uint64_t kGenerator = 0x22;
inline constexpr std::uint64_t kBatch = 0x33;
inline constexpr std::uint64_t kDpNoise = 0x44;
inline constexpr std::uint64_t kPairwiseSecret = 0x55;
inline constexpr std::uint64_t kAttack = 0x66;
inline constexpr std::uint64_t kAnomaly = 0x77;
inline constexpr std::uint64_t kKeygen = 0x88;
inline constexpr std::uint64_t kClient = 0x99;
}  // namespace stream

// xoshiro256** with splitmix64 seeding. Small, fast, and fully under our
// control so sequences are identical on every platform and compiler.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t s = seed;
    for (auto& w : state_) w = splitmix64(s);
  }

  // Seed directly from 256 bits of state (pairwise masking secrets).
  explicit Rng(const std::array<std::uint64_t, 4>& state) : state_(state) {
    bool all_zero = true;
    for (auto w : state_) all_zero = all_zero && w == 0;
    if (all_zero) state_[0] = 0x9e3779b97f4a7c15ULL;  // xoshiro forbids the zero state
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform in [0,1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Unbiased integer in [0,n) by rejection.
  std::uint64_t uniform_below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("uniform_below: n must be positive");
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      std::uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

  std::size_t index(std::size_t n) { return static_cast<std::size_t>(uniform_below(n)); }

  // Standard normal via the polar method; second value cached.
  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    has_spare_ = true;
    return u * m;
  }

  // Marsaglia-Tsang gamma sampler; alpha < 1 handled by the boost trick.
  double gamma(double alpha) {
    if (alpha <= 0.0) throw std::invalid_argument("gamma: alpha must be positive");
    if (alpha < 1.0) {
      const double u = uniform();
      return gamma(alpha + 1.0) * std::pow(u > 0 ? u : 0x1.0p-53, 1.0 / alpha);
    }
    const double d = alpha - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = gaussian();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  // Dirichlet draw with concentration vector alpha (all entries > 0).
  std::vector<double> dirichlet(const std::vector<double>& alpha) {
    std::vector<double> out(alpha.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
      out[i] = gamma(alpha[i]);
      sum += out[i];
    }
    if (sum <= 0.0) throw std::runtime_error("dirichlet: degenerate draw");
    for (auto& x : out) x /= sum;
    return out;
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = index(i);
      std::swap(v[i - 1], v[j]);
    }
  }

  // First k elements of a random permutation of [0,n); all of [0,n) if k >= n.
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k) {
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    if (k >= n) return idx;
    for (std::size_t i = 0; i < k; ++i) {
      std::size_t j = i + index(n - i);
      std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    return idx;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  std::array<std::uint64_t, 4> state_{};
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace fedgat
