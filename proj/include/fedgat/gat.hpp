#pragma once

// Two-layer single-head graph attention network: forward pass, masked
// cross-entropy, and exact hand-derived reverse-mode gradients. Self loops
// are injected inside the layer, so every node attends over N(v) plus
// itself; attention rows are softmax-normalized with max subtraction.
//
// Slot layout: node v owns the contiguous attention slots
//   [csr_offsets[v] + v, csr_offsets[v+1] + v + 1)
// where the first degree(v) slots are its neighbors in ascending order and
// the final slot is the self loop.

#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fedgat/graph.hpp"
#include "fedgat/matrix.hpp"
#include "fedgat/rng.hpp"

namespace fedgat {

enum class Activation { kElu, kIdentity };

struct GatHyper {
  std::size_t feature_dim = 16;
  std::size_t hidden_dim = 64;
  std::size_t num_classes = 2;
  double leaky_slope = 0.2;

  bool operator==(const GatHyper&) const = default;
};

struct ModelParams {
  Mat w1;                  // hidden_dim x feature_dim
  std::vector<double> a1;  // 2 * hidden_dim; first half scores the source, second the center
  Mat w2;                  // num_classes x hidden_dim
  std::vector<double> a2;  // 2 * num_classes
  GatHyper hyper;

  std::size_t param_count() const {
    return w1.data.size() + a1.size() + w2.data.size() + a2.size();
  }

  // Flatten order: W1 rows, a1, W2 rows, a2.
  std::vector<double> flatten() const {
    std::vector<double> out;
    out.reserve(param_count());
    out.insert(out.end(), w1.data.begin(), w1.data.end());
    out.insert(out.end(), a1.begin(), a1.end());
    out.insert(out.end(), w2.data.begin(), w2.data.end());
    out.insert(out.end(), a2.begin(), a2.end());
    return out;
  }

  static ModelParams unflatten(std::span<const double> flat, const GatHyper& hyper) {
    ModelParams p;
    p.hyper = hyper;
    p.w1 = Mat(hyper.hidden_dim, hyper.feature_dim);
    p.a1.resize(2 * hyper.hidden_dim);
    p.w2 = Mat(hyper.num_classes, hyper.hidden_dim);
    p.a2.resize(2 * hyper.num_classes);
    if (flat.size() != p.param_count())
      throw std::invalid_argument("unflatten: expected " + std::to_string(p.param_count()) +
                                  " values, got " + std::to_string(flat.size()));
    std::size_t k = 0;
    for (auto& x : p.w1.data) x = flat[k++];
    for (auto& x : p.a1) x = flat[k++];
    for (auto& x : p.w2.data) x = flat[k++];
    for (auto& x : p.a2) x = flat[k++];
    return p;
  }

  // Glorot-uniform initialization of all tensors.
  static ModelParams glorot(const GatHyper& hyper, std::uint64_t seed) {
    Rng rng(mix64(seed, stream::kModelInit));
    ModelParams p;
    p.hyper = hyper;
    auto fill = [&rng](std::span<double> dst, std::size_t fan_in, std::size_t fan_out) {
      const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
      for (auto& x : dst) x = limit * (2.0 * rng.uniform() - 1.0);
    };
    p.w1 = Mat(hyper.hidden_dim, hyper.feature_dim);
    fill(p.w1.data, hyper.feature_dim, hyper.hidden_dim);
    p.a1.resize(2 * hyper.hidden_dim);
    fill(p.a1, 2 * hyper.hidden_dim, 1);
    p.w2 = Mat(hyper.num_classes, hyper.hidden_dim);
    fill(p.w2.data, hyper.hidden_dim, hyper.num_classes);
    p.a2.resize(2 * hyper.num_classes);
    fill(p.a2, 2 * hyper.num_classes, 1);
    return p;
  }
};

inline double leaky_relu(double x, double slope) { return x >= 0.0 ? x : slope * x; }

// e_uv = LeakyReLU(a . [W h_u || W h_v])
inline double attention_logits(std::span<const double> h_u, std::span<const double> h_v,
                               const Mat& w, std::span<const double> a, double leaky_slope) {
  if (h_u.size() != w.cols || h_v.size() != w.cols || a.size() != 2 * w.rows)
    throw std::invalid_argument("attention_logits: dimension mismatch");
  std::vector<double> zu(w.rows), zv(w.rows);
  matvec(w, h_u, zu);
  matvec(w, h_v, zv);
  const double raw = dot(a.subspan(0, w.rows), zu) + dot(a.subspan(w.rows), zv);
  return leaky_relu(raw, leaky_slope);
}

struct LayerTrace {
  Mat z;                        // n x d, row u = W h_u
  std::vector<double> raw;      // pre-LeakyReLU logit per slot
  std::vector<double> att;      // attention weight per slot
  Mat pre;                      // n x d pre-activation
  Mat h;                        // n x d post-activation
  Activation activation = Activation::kIdentity;
};

inline std::size_t slot_begin(const Graph& g, std::size_t v) { return g.csr_offsets[v] + v; }
inline std::size_t slot_end(const Graph& g, std::size_t v) { return g.csr_offsets[v + 1] + v + 1; }

inline LayerTrace layer_forward(const Mat& h_in, const Graph& g, const Mat& w,
                                std::span<const double> a, double leaky_slope,
                                Activation activation) {
  const std::size_t n = g.num_nodes;
  if (h_in.rows != n) throw std::invalid_argument("layer_forward: feature rows != num_nodes");
  if (a.size() != 2 * w.rows) throw std::invalid_argument("layer_forward: attention vector size");
  const std::size_t d = w.rows;

  LayerTrace t;
  t.activation = activation;
  t.z = matmul_nt(h_in, w);
  const std::size_t total_slots = g.csr_targets.size() + n;
  t.raw.resize(total_slots);
  t.att.resize(total_slots);
  t.pre = Mat(n, d);
  t.h = Mat(n, d);

  // Per-node source/center scores: src_u = a[0:d] . z_u, ctr_v = a[d:2d] . z_v.
  std::vector<double> src(n), ctr(n);
  for (std::size_t u = 0; u < n; ++u) {
    src[u] = dot(a.subspan(0, d), t.z.row(u));
    ctr[u] = dot(a.subspan(d), t.z.row(u));
  }

  for (std::size_t v = 0; v < n; ++v) {
    const std::size_t begin = slot_begin(g, v);
    const std::size_t end = slot_end(g, v);
    auto nb = g.neighbors(v);
    double max_e = -std::numeric_limits<double>::infinity();
    for (std::size_t s = begin; s < end; ++s) {
      const std::size_t u = s + 1 == end ? v : nb[s - begin];
      t.raw[s] = src[u] + ctr[v];
      const double e = leaky_relu(t.raw[s], leaky_slope);
      t.att[s] = e;  // holds the logit until normalization below
      max_e = std::max(max_e, e);
    }
    double denom = 0.0;
    for (std::size_t s = begin; s < end; ++s) {
      t.att[s] = std::exp(t.att[s] - max_e);
      denom += t.att[s];
    }
    auto pre_v = t.pre.row(v);
    for (std::size_t s = begin; s < end; ++s) {
      t.att[s] /= denom;
      const std::size_t u = s + 1 == end ? v : nb[s - begin];
      axpy(t.att[s], t.z.row(u), pre_v);
    }
    auto h_v = t.h.row(v);
    for (std::size_t c = 0; c < d; ++c) {
      h_v[c] = activation == Activation::kElu ? (pre_v[c] > 0.0 ? pre_v[c] : std::expm1(pre_v[c]))
                                              : pre_v[c];
    }
  }
  return t;
}

struct ForwardTrace {
  LayerTrace l1;  // hidden layer (ELU)
  LayerTrace l2;  // output layer (identity), l2.h are the logits

  const Mat& logits() const { return l2.h; }
  const Mat& embeddings() const { return l1.h; }
  // Pre-aggregation hidden states W1 x_v. Attention averaging makes l1.h of a
  // shifted node blend back toward its neighborhood, so neighborhood-contrast
  // scoring reads the projection instead.
  const Mat& projections() const { return l1.z; }
};

inline ForwardTrace model_forward(const Graph& g, const ModelParams& p) {
  if (g.feature_dim() != p.hyper.feature_dim)
    throw std::invalid_argument("model_forward: graph feature_dim != model feature_dim");
  ForwardTrace t;
  t.l1 = layer_forward(g.features, g, p.w1, p.a1, p.hyper.leaky_slope, Activation::kElu);
  t.l2 = layer_forward(t.l1.h, g, p.w2, p.a2, p.hyper.leaky_slope, Activation::kIdentity);
  return t;
}

// Mean softmax cross-entropy over masked nodes, log-sum-exp stabilized.
inline double masked_loss(const Mat& logits, std::span<const int> labels,
                          std::span<const std::uint8_t> mask) {
  if (logits.rows != labels.size() || logits.rows != mask.size())
    throw std::invalid_argument("masked_loss: length mismatch");
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t v = 0; v < logits.rows; ++v) {
    if (!mask[v]) continue;
    auto row = logits.row(v);
    const std::size_t y = static_cast<std::size_t>(labels[v]);
    if (y >= logits.cols) throw std::invalid_argument("masked_loss: label out of range");
    double m = row[0];
    for (double x : row) m = std::max(m, x);
    double lse = 0.0;
    for (double x : row) lse += std::exp(x - m);
    total += m + std::log(lse) - row[y];
    ++count;
  }
  if (count == 0) throw std::invalid_argument("masked_loss: empty mask");
  return total / static_cast<double>(count);
}

namespace detail {

struct LayerGrads {
  Mat dw;
  std::vector<double> da;
  Mat dh_in;
};

// Reverse-mode pass through one attention layer. dh_out is dL/dH'.
inline LayerGrads layer_backward(const LayerTrace& t, const Mat& h_in, const Graph& g,
                                 const Mat& w, std::span<const double> a, double leaky_slope,
                                 const Mat& dh_out) {
  const std::size_t n = g.num_nodes;
  const std::size_t d = w.rows;
  LayerGrads out;
  out.dw = Mat(w.rows, w.cols);
  out.da.assign(a.size(), 0.0);
  out.dh_in = Mat(h_in.rows, h_in.cols);

  // P_v = dL/dpre_v
  Mat p(n, d);
  for (std::size_t v = 0; v < n; ++v) {
    auto pv = p.row(v);
    auto gv = dh_out.row(v);
    auto prev = t.pre.row(v);
    for (std::size_t c = 0; c < d; ++c) {
      const double act_grad =
          t.activation == Activation::kElu ? (prev[c] > 0.0 ? 1.0 : std::exp(prev[c])) : 1.0;
      pv[c] = gv[c] * act_grad;
    }
  }

  Mat dz(n, d);
  std::vector<double> dsrc(n, 0.0), dctr(n, 0.0);
  for (std::size_t v = 0; v < n; ++v) {
    const std::size_t begin = slot_begin(g, v);
    const std::size_t end = slot_end(g, v);
    auto nb = g.neighbors(v);
    auto pv = p.row(v);

    // Value path dZ_u += att * P_v, and softmax backward over v's slots.
    double weighted = 0.0;  // sum_u att_uv * galpha_uv
    for (std::size_t s = begin; s < end; ++s) {
      const std::size_t u = s + 1 == end ? v : nb[s - begin];
      const double galpha = dot(pv, t.z.row(u));
      weighted += t.att[s] * galpha;
      axpy(t.att[s], pv, dz.row(u));
    }
    for (std::size_t s = begin; s < end; ++s) {
      const std::size_t u = s + 1 == end ? v : nb[s - begin];
      const double galpha = dot(pv, t.z.row(u));
      const double de = t.att[s] * (galpha - weighted);
      const double draw = de * (t.raw[s] >= 0.0 ? 1.0 : leaky_slope);
      dsrc[u] += draw;
      dctr[v] += draw;
    }
  }

  // Score paths into a and z.
  for (std::size_t u = 0; u < n; ++u) {
    auto zu = t.z.row(u);
    axpy(dsrc[u], zu, std::span<double>(out.da).subspan(0, d));
    axpy(dctr[u], zu, std::span<double>(out.da).subspan(d));
    auto dzu = dz.row(u);
    axpy(dsrc[u], a.subspan(0, d), dzu);
    axpy(dctr[u], a.subspan(d), dzu);
  }

  // dW = dZ^T H, dH = dZ W.
  for (std::size_t u = 0; u < n; ++u) {
    auto dzu = dz.row(u);
    auto hu = h_in.row(u);
    auto dhu = out.dh_in.row(u);
    for (std::size_t r = 0; r < d; ++r) {
      if (dzu[r] != 0.0) {
        axpy(dzu[r], hu, out.dw.row(r));
        axpy(dzu[r], w.row(r), dhu);
      }
    }
  }
  return out;
}

}  // namespace detail

struct GradientResult {
  double loss = 0.0;
  std::vector<double> grad;  // flatten order
};

// Exact gradient of masked_loss(model_forward(g,p)) with respect to all
// parameters, in flatten order. Central-difference agreement is the module's
// correctness gate.
inline GradientResult backward(const Graph& g, const ModelParams& p, std::span<const int> labels,
                               std::span<const std::uint8_t> mask) {
  ForwardTrace t = model_forward(g, p);
  const Mat& logits = t.logits();
  GradientResult res;
  res.loss = masked_loss(logits, labels, mask);

  std::size_t count = 0;
  for (auto m : mask)
    if (m) ++count;

  // dL/dlogits = (softmax - onehot) / |mask| on masked rows.
  Mat dlogits(logits.rows, logits.cols);
  for (std::size_t v = 0; v < logits.rows; ++v) {
    if (!mask[v]) continue;
    auto row = logits.row(v);
    auto drow = dlogits.row(v);
    double m = row[0];
    for (double x : row) m = std::max(m, x);
    double denom = 0.0;
    for (double x : row) denom += std::exp(x - m);
    for (std::size_t c = 0; c < logits.cols; ++c) drow[c] = std::exp(row[c] - m) / denom;
    drow[static_cast<std::size_t>(labels[v])] -= 1.0;
    for (std::size_t c = 0; c < logits.cols; ++c) drow[c] /= static_cast<double>(count);
  }

  auto g2 = detail::layer_backward(t.l2, t.l1.h, g, p.w2, p.a2, p.hyper.leaky_slope, dlogits);
  auto g1 = detail::layer_backward(t.l1, g.features, g, p.w1, p.a1, p.hyper.leaky_slope, g2.dh_in);

  res.grad.reserve(p.param_count());
  res.grad.insert(res.grad.end(), g1.dw.data.begin(), g1.dw.data.end());
  res.grad.insert(res.grad.end(), g1.da.begin(), g1.da.end());
  res.grad.insert(res.grad.end(), g2.dw.data.begin(), g2.dw.data.end());
  res.grad.insert(res.grad.end(), g2.da.begin(), g2.da.end());
  return res;
}

inline ModelParams sgd_step(const ModelParams& p, std::span<const double> grad, double lr) {
  if (grad.size() != p.param_count())
    throw std::invalid_argument("sgd_step: gradient length != parameter count");
  std::vector<double> flat = p.flatten();
  for (std::size_t i = 0; i < flat.size(); ++i) flat[i] -= lr * grad[i];
  return ModelParams::unflatten(flat, p.hyper);
}

// ---- checkpoint format ----
// Header: magic "FGAT", u32 version (=1), u32 feature_dim, u32 hidden_dim,
// u32 num_classes, f64 leaky_slope, u64 param_count. Body: little-endian
// 64-bit floats in flatten order.

namespace detail {

template <typename T>
void put_le(std::string& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

template <typename T>
T get_le(std::span<const std::uint8_t> buf, std::size_t& pos) {
  if (pos + sizeof(T) > buf.size()) throw std::invalid_argument("checkpoint: truncated");
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(buf[pos + i]) << (8 * i);
  pos += sizeof(T);
  return v;
}

inline std::uint64_t f64_bits(double x) {
  std::uint64_t b;
  std::memcpy(&b, &x, sizeof(b));
  return b;
}

inline double bits_f64(std::uint64_t b) {
  double x;
  std::memcpy(&x, &b, sizeof(x));
  return x;
}

}  // namespace detail

inline std::string serialize_model(const ModelParams& p) {
  std::string out;
  out.reserve(32 + 8 * p.param_count());
  out.append("FGAT");
  detail::put_le<std::uint32_t>(out, 1);
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(p.hyper.feature_dim));
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(p.hyper.hidden_dim));
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(p.hyper.num_classes));
  detail::put_le<std::uint64_t>(out, detail::f64_bits(p.hyper.leaky_slope));
  detail::put_le<std::uint64_t>(out, p.param_count());
  for (double x : p.flatten()) detail::put_le<std::uint64_t>(out, detail::f64_bits(x));
  return out;
}

inline ModelParams deserialize_model(std::span<const std::uint8_t> buf) {
  if (buf.size() < 4 || std::memcmp(buf.data(), "FGAT", 4) != 0)
    throw std::invalid_argument("checkpoint: bad magic");
  std::size_t pos = 4;
  const auto version = detail::get_le<std::uint32_t>(buf, pos);
  if (version != 1) throw std::invalid_argument("checkpoint: unsupported version");
  GatHyper hyper;
  hyper.feature_dim = detail::get_le<std::uint32_t>(buf, pos);
  hyper.hidden_dim = detail::get_le<std::uint32_t>(buf, pos);
  hyper.num_classes = detail::get_le<std::uint32_t>(buf, pos);
  hyper.leaky_slope = detail::bits_f64(detail::get_le<std::uint64_t>(buf, pos));
  const auto count = detail::get_le<std::uint64_t>(buf, pos);
  std::vector<double> flat(count);
  for (auto& x : flat) x = detail::bits_f64(detail::get_le<std::uint64_t>(buf, pos));
  if (pos != buf.size()) throw std::invalid_argument("checkpoint: trailing bytes");
  return ModelParams::unflatten(flat, hyper);
}

inline ModelParams deserialize_model(const std::string& buf) {
  return deserialize_model(
      std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(buf.data()), buf.size()));
}

}  // namespace fedgat
