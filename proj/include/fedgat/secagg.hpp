#pragma once

// Secure-aggregation plumbing shared by both protected backends: a
// fixed-point codec bridging real gradients to integer spaces, and pairwise
// additive masking over the 2^64 ring. Each client pair shares a 256-bit
// secret; per round both expand it to the same pseudorandom stream and apply
// it with opposite signs, so masks cancel in the ring sum and the server
// sees only the encoded sum.

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fedgat/rng.hpp"

namespace fedgat {

struct FixedPointCodec {
  unsigned scale_bits = 20;
  // Largest encodable magnitude; default keeps encodings within 2^40 so a
  // 10-client ring sum stays far from the 2^63 sign boundary.
  double max_magnitude = static_cast<double>(std::uint64_t{1} << 20);

  double scale() const { return static_cast<double>(std::uint64_t{1} << scale_bits); }
};

inline std::vector<std::int64_t> encode_fixed(std::span<const double> v,
                                              const FixedPointCodec& codec) {
  std::vector<std::int64_t> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!(std::abs(v[i]) <= codec.max_magnitude))
      throw std::invalid_argument("encode_fixed: coordinate " + std::to_string(i) +
                                  " magnitude " + std::to_string(v[i]) + " exceeds " +
                                  std::to_string(codec.max_magnitude));
    out[i] = std::llround(v[i] * codec.scale());
  }
  return out;
}

inline std::vector<double> decode_fixed(std::span<const std::int64_t> q,
                                        const FixedPointCodec& codec) {
  std::vector<double> out(q.size());
  for (std::size_t i = 0; i < q.size(); ++i)
    out[i] = static_cast<double>(q[i]) / codec.scale();
  return out;
}

// Two's-complement embedding into the masking ring.
inline std::vector<std::uint64_t> ring_embed(std::span<const std::int64_t> q) {
  std::vector<std::uint64_t> out(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) out[i] = static_cast<std::uint64_t>(q[i]);
  return out;
}

inline std::vector<std::int64_t> ring_extract(std::span<const std::uint64_t> r) {
  std::vector<std::int64_t> out(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) out[i] = static_cast<std::int64_t>(r[i]);
  return out;
}

// ---- pairwise masking ----

using Secret256 = std::array<std::uint64_t, 4>;

class PairwiseSecrets {
 public:
  PairwiseSecrets() = default;

  // One shared secret per unordered client pair, dealt at setup.
  static PairwiseSecrets deal(std::size_t num_clients, std::uint64_t master_seed) {
    PairwiseSecrets s;
    s.num_clients_ = num_clients;
    Rng rng(mix64(master_seed, stream::kPairwiseSecret));
    if (num_clients >= 2) s.table_.resize(num_clients * (num_clients - 1) / 2);
    for (auto& sec : s.table_)
      for (auto& w : sec) w = rng.next_u64();
    return s;
  }

  std::size_t num_clients() const { return num_clients_; }

  const Secret256& get(std::size_t i, std::size_t j) const {
    if (i == j || i >= num_clients_ || j >= num_clients_)
      throw std::invalid_argument("PairwiseSecrets: no secret for pair (" + std::to_string(i) +
                                  "," + std::to_string(j) + ")");
    if (i > j) std::swap(i, j);
    // Index of (i,j), i<j, in row-major upper-triangle order.
    const std::size_t row_start = i * num_clients_ - i * (i + 1) / 2;
    return table_[row_start + (j - i - 1)];
  }

 private:
  std::size_t num_clients_ = 0;
  std::vector<Secret256> table_;
};

struct MaskingContext {
  std::size_t client_id = 0;
  std::uint64_t round = 0;
  const PairwiseSecrets* secrets = nullptr;
};

namespace detail {

// Both members of a pair derive the identical stream for a round.
inline Rng pair_stream(const Secret256& secret, std::uint64_t round) {
  std::array<std::uint64_t, 4> state;
  for (std::size_t k = 0; k < 4; ++k) state[k] = mix64(mix64(secret[k], round), k + 1);
  return Rng(state);
}

}  // namespace detail

// enc + sum_{j<i} ... - ... per the i<j sign convention, mod 2^64.
inline std::vector<std::uint64_t> mask_update(std::span<const std::uint64_t> enc,
                                              const MaskingContext& ctx) {
  if (ctx.secrets == nullptr) throw std::invalid_argument("mask_update: no secrets");
  const std::size_t k = ctx.secrets->num_clients();
  if (ctx.client_id >= k) throw std::invalid_argument("mask_update: client_id out of range");
  std::vector<std::uint64_t> out(enc.begin(), enc.end());
  for (std::size_t j = 0; j < k; ++j) {
    if (j == ctx.client_id) continue;
    Rng prg = detail::pair_stream(ctx.secrets->get(ctx.client_id, j), ctx.round);
    if (ctx.client_id < j)
      for (auto& x : out) x += prg.next_u64();
    else
      for (auto& x : out) x -= prg.next_u64();
  }
  return out;
}

// Componentwise ring sum; with all participants present the masks cancel.
inline std::vector<std::uint64_t> unmask_sum(
    const std::vector<std::vector<std::uint64_t>>& masked) {
  if (masked.empty()) throw std::invalid_argument("unmask_sum: no participants");
  std::vector<std::uint64_t> out(masked.front().size(), 0);
  for (const auto& m : masked) {
    if (m.size() != out.size()) throw std::invalid_argument("unmask_sum: length mismatch");
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += m[i];
  }
  return out;
}

// Decode a ring sum of encodings back to reals. Valid while the true sum of
// magnitudes stays below 2^63/scale, which the codec guard guarantees for
// any realistic client count.
inline std::vector<double> decode_ring_sum(std::span<const std::uint64_t> ring_sum,
                                           const FixedPointCodec& codec) {
  std::vector<double> out(ring_sum.size());
  for (std::size_t i = 0; i < ring_sum.size(); ++i)
    out[i] = static_cast<double>(static_cast<std::int64_t>(ring_sum[i])) / codec.scale();
  return out;
}

}  // namespace fedgat
