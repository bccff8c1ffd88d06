#pragma once

// Minimal dense row-major matrix plus the handful of vector kernels the GAT
// needs. Everything is double precision.

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace fedgat {

struct Mat {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Mat() = default;
  Mat(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

  bool same_shape(const Mat& o) const { return rows == o.rows && cols == o.cols; }
};

inline double dot(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("dot: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

// y += a*x
inline void axpy(double a, std::span<const double> x, std::span<double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("axpy: length mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

inline double norm2(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

// out = M x
inline void matvec(const Mat& m, std::span<const double> x, std::span<double> out) {
  if (x.size() != m.cols || out.size() != m.rows) throw std::invalid_argument("matvec: shape mismatch");
  for (std::size_t r = 0; r < m.rows; ++r) out[r] = dot(m.row(r), x);
}

// Z = H * W^T with H: n x f and W: d x f, so row v of Z is W h_v.
inline Mat matmul_nt(const Mat& h, const Mat& w) {
  if (h.cols != w.cols) throw std::invalid_argument("matmul_nt: inner dimension mismatch");
  Mat z(h.rows, w.rows);
  for (std::size_t v = 0; v < h.rows; ++v) {
    auto hv = h.row(v);
    auto zv = z.row(v);
    for (std::size_t d = 0; d < w.rows; ++d) zv[d] = dot(w.row(d), hv);
  }
  return z;
}

inline bool all_finite(std::span<const double> x) {
  for (double v : x) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace fedgat
