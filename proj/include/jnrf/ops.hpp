#pragma once

// Differentiable operations over Tensor. Every op computes its value eagerly
// and, when recording, attaches a backward rule that accumulates into the
// gradients of its inputs.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstddef>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "jnrf/counters.hpp"
#include "jnrf/tensor.hpp"

namespace jnrf {

namespace kernel {

// C (m x p) += A (m x k) * B (k x p)
inline void gemm_nn(const double* a, const double* b, double* c, std::size_t m, std::size_t k, std::size_t p) {
  for (std::size_t i = 0; i < m; ++i) {
    double* ci = c + i * p;
    const double* ai = a + i * k;
    for (std::size_t r = 0; r < k; ++r) {
      const double s = ai[r];
      const double* br = b + r * p;
      for (std::size_t j = 0; j < p; ++j) ci[j] += s * br[j];
    }
  }
  MulCounter::add(static_cast<std::uint64_t>(m) * k * p);
}

// C (m x p) += A^T * B with A (k x m), B (k x p)
inline void gemm_tn(const double* a, const double* b, double* c, std::size_t k, std::size_t m, std::size_t p) {
  for (std::size_t r = 0; r < k; ++r) {
    const double* ar = a + r * m;
    const double* br = b + r * p;
    for (std::size_t i = 0; i < m; ++i) {
      const double s = ar[i];
      double* ci = c + i * p;
      for (std::size_t j = 0; j < p; ++j) ci[j] += s * br[j];
    }
  }
  MulCounter::add(static_cast<std::uint64_t>(m) * k * p);
}

inline Matrix transposed(const Matrix& a) {
  Matrix t(a.cols, a.rows);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < a.cols; ++j) t(j, i) = a(i, j);
  return t;
}

// C (m x p) += A (m x k) * B^T with B (p x k)
inline void gemm_nt(const Matrix& a, const Matrix& b, Matrix& c) {
  const Matrix bt = transposed(b);
  gemm_nn(a.data.data(), bt.data.data(), c.data.data(), a.rows, a.cols, b.rows);
}

inline void axpy(Matrix& dst, const Matrix& src, double s = 1.0) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst.data[i] += s * src.data[i];
}

}  // namespace kernel

namespace detail {

inline Node& parent(Node& self, std::size_t i) { return *self.parents[i]; }

inline void require_same(const char* op, const Matrix& a, const Matrix& b) {
  if (!a.same_shape(b)) throw DimensionError(std::string(op) + ": shape mismatch " + shape_str(a) + " vs " + shape_str(b));
}

enum class Bcast { kSame, kScalar, kRow };

// How `b` broadcasts onto the shape of `a`; throws if it cannot.
inline Bcast broadcast_kind(const char* op, const Matrix& a, const Matrix& b) {
  if (a.same_shape(b)) return Bcast::kSame;
  if (b.rows == 1 && b.cols == 1) return Bcast::kScalar;
  if (b.rows == 1 && b.cols == a.cols) return Bcast::kRow;
  throw DimensionError(std::string(op) + ": cannot broadcast " + shape_str(b) + " onto " + shape_str(a));
}

inline std::size_t bindex(Bcast k, std::size_t i, std::size_t cols) {
  switch (k) {
    case Bcast::kSame:
      return i;
    case Bcast::kScalar:
      return 0;
    case Bcast::kRow:
      return i % cols;
  }
  return 0;
}

enum class Binary { kAdd, kSub, kMul };

inline Tensor binary(Binary kind, const char* name, Tensor a, Tensor b) {
  // Only the right operand broadcasts; swap commutative ops when needed.
  if (!a.value().same_shape(b.value()) && kind != Binary::kSub) {
    const auto& av = a.value();
    if ((av.rows == 1 && av.cols == 1) || (av.rows == 1 && av.cols == b.cols() && b.rows() != 1)) {
      std::swap(a, b);
    }
  }
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  const Bcast bk = broadcast_kind(name, av, bv);
  Matrix out(av.rows, av.cols);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double x = av.data[i];
    const double y = bv.data[bindex(bk, i, av.cols)];
    out.data[i] = kind == Binary::kAdd ? x + y : kind == Binary::kSub ? x - y : x * y;
  }
  return Tensor::make(std::move(out), {a, b}, [kind, bk](Node& self) {
    Node& pa = parent(self, 0);
    Node& pb = parent(self, 1);
    const Matrix& g = self.grad;
    if (pa.requires_grad) {
      Matrix& ga = pa.ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) {
        ga.data[i] += kind == Binary::kMul ? g.data[i] * pb.value.data[bindex(bk, i, g.cols)] : g.data[i];
      }
    }
    if (pb.requires_grad) {
      Matrix& gb = pb.ensure_grad();
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double d = kind == Binary::kAdd ? g.data[i] : kind == Binary::kSub ? -g.data[i] : g.data[i] * pa.value.data[i];
        gb.data[bindex(bk, i, g.cols)] += d;
      }
    }
  });
}

}  // namespace detail

/// Matrix product; records dL/da = g b^T and dL/db = a^T g.
inline Tensor matmul(const Tensor& a, const Tensor& b) {
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  if (av.cols != bv.rows) throw DimensionError("matmul: inner dimensions differ " + shape_str(av) + " x " + shape_str(bv));
  Matrix out(av.rows, bv.cols);
  kernel::gemm_nn(av.data.data(), bv.data.data(), out.data.data(), av.rows, av.cols, bv.cols);
  return Tensor::make(std::move(out), {a, b}, [](detail::Node& self) {
    auto& pa = detail::parent(self, 0);
    auto& pb = detail::parent(self, 1);
    if (pa.requires_grad) kernel::gemm_nt(self.grad, pb.value, pa.ensure_grad());
    if (pb.requires_grad) {
      kernel::gemm_tn(pa.value.data.data(), self.grad.data.data(), pb.ensure_grad().data.data(), pa.value.rows,
                      pa.value.cols, self.grad.cols);
    }
  });
}

/// a * b^T.
inline Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  if (av.cols != bv.cols) throw DimensionError("matmul_nt: inner dimensions differ " + shape_str(av) + " x " + shape_str(bv) + "^T");
  Matrix out(av.rows, bv.rows);
  kernel::gemm_nt(av, bv, out);
  return Tensor::make(std::move(out), {a, b}, [](detail::Node& self) {
    auto& pa = detail::parent(self, 0);
    auto& pb = detail::parent(self, 1);
    // dA = G B, dB = G^T A
    if (pa.requires_grad) {
      kernel::gemm_nn(self.grad.data.data(), pb.value.data.data(), pa.ensure_grad().data.data(), self.grad.rows,
                      self.grad.cols, pb.value.cols);
    }
    if (pb.requires_grad) {
      kernel::gemm_tn(self.grad.data.data(), pa.value.data.data(), pb.ensure_grad().data.data(), self.grad.rows,
                      self.grad.cols, pa.value.cols);
    }
  });
}

inline Tensor transpose(const Tensor& a) {
  return Tensor::make(kernel::transposed(a.value()), {a}, [](detail::Node& self) {
    auto& pa = detail::parent(self, 0);
    if (!pa.requires_grad) return;
    Matrix& ga = pa.ensure_grad();
    for (std::size_t i = 0; i < ga.rows; ++i)
      for (std::size_t j = 0; j < ga.cols; ++j) ga(i, j) += self.grad(j, i);
  });
}

/// Elementwise sum; `b` may be a 1x1 scalar or a 1xC row broadcast onto `a`.
inline Tensor add(const Tensor& a, const Tensor& b) { return detail::binary(detail::Binary::kAdd, "add", a, b); }
inline Tensor sub(const Tensor& a, const Tensor& b) { return detail::binary(detail::Binary::kSub, "sub", a, b); }
inline Tensor mul(const Tensor& a, const Tensor& b) { return detail::binary(detail::Binary::kMul, "mul", a, b); }

inline Tensor scale(const Tensor& a, double s) {
  Matrix out = a.value();
  for (auto& v : out.data) v *= s;
  return Tensor::make(std::move(out), {a}, [s](detail::Node& self) {
    auto& pa = detail::parent(self, 0);
    if (pa.requires_grad) kernel::axpy(pa.ensure_grad(), self.grad, s);
  });
}

inline Tensor relu(const Tensor& a) {
  Matrix out = a.value();
  for (auto& v : out.data) v = v > 0.0 ? v : 0.0;
  return Tensor::make(std::move(out), {a}, [](detail::Node& self) {
    auto& pa = detail::parent(self, 0);
    if (!pa.requires_grad) return;
    Matrix& ga = pa.ensure_grad();
    for (std::size_t i = 0; i < ga.size(); ++i)
      if (pa.value.data[i] > 0.0) ga.data[i] += self.grad.data[i];
  });
}

namespace detail {
constexpr double kGeluC = 0.044715;
inline const double kGeluK = std::sqrt(2.0 / std::numbers::pi);
}  // namespace detail

/// tanh-approximated GELU: 0.5 x (1 + tanh(sqrt(2/pi) (x + 0.044715 x^3))).
inline double gelu_scalar(double x) {
  return 0.5 * x * (1.0 + std::tanh(detail::kGeluK * (x + detail::kGeluC * x * x * x)));
}

inline double gelu_grad_scalar(double x) {
  const double u = detail::kGeluK * (x + detail::kGeluC * x * x * x);
  const double t = std::tanh(u);
  const double du = detail::kGeluK * (1.0 + 3.0 * detail::kGeluC * x * x);
  return 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * du;
}

inline Tensor gelu(const Tensor& a) {
  Matrix out = a.value();
  for (auto& v : out.data) v = gelu_scalar(v);
  return Tensor::make(std::move(out), {a}, [](detail::Node& self) {
    auto& pa = detail::parent(self, 0);
    if (!pa.requires_grad) return;
    Matrix& ga = pa.ensure_grad();
    for (std::size_t i = 0; i < ga.size(); ++i) ga.data[i] += self.grad.data[i] * gelu_grad_scalar(pa.value.data[i]);
  });
}

enum class Elementwise { kAdd, kSub, kMul, kScale, kGelu, kRelu };

/// Dispatcher over the elementwise family; `s` is used by kScale only.
inline Tensor elementwise(Elementwise op, const Tensor& a, const Tensor& b = Tensor(), double s = 1.0) {
  switch (op) {
    case Elementwise::kAdd:
      return add(a, b);
    case Elementwise::kSub:
      return sub(a, b);
    case Elementwise::kMul:
      return mul(a, b);
    case Elementwise::kScale:
      return scale(a, s);
    case Elementwise::kGelu:
      return gelu(a);
    case Elementwise::kRelu:
      return relu(a);
  }
  throw DimensionError("elementwise: unknown op");
}

/// Row-wise log-softmax with max subtraction.
inline Tensor log_softmax_rows(const Tensor& x) {
  const Matrix& xv = x.value();
  if (xv.cols == 0) throw DimensionError("log_softmax_rows: zero columns");
  Matrix out(xv.rows, xv.cols);
  for (std::size_t r = 0; r < xv.rows; ++r) {
    const double* xr = xv.row(r);
    double m = xr[0];
    for (std::size_t c = 1; c < xv.cols; ++c) m = std::max(m, xr[c]);
    double s = 0.0;
    for (std::size_t c = 0; c < xv.cols; ++c) s += std::exp(xr[c] - m);
    const double lse = m + std::log(s);
    double* o = out.row(r);
    for (std::size_t c = 0; c < xv.cols; ++c) o[c] = xr[c] - lse;
  }
  return Tensor::make(std::move(out), {x}, [](detail::Node& self) {
    auto& px = detail::parent(self, 0);
    if (!px.requires_grad) return;
    Matrix& gx = px.ensure_grad();
    const Matrix& y = self.value;
    const Matrix& g = self.grad;
    for (std::size_t r = 0; r < y.rows; ++r) {
      double gs = 0.0;
      for (std::size_t c = 0; c < y.cols; ++c) gs += g(r, c);
      for (std::size_t c = 0; c < y.cols; ++c) gx(r, c) += g(r, c) - std::exp(y(r, c)) * gs;
    }
  });
}

inline Tensor softmax_rows(const Tensor& x) {
  const Matrix& xv = x.value();
  if (xv.cols == 0) throw DimensionError("softmax_rows: zero columns");
  Matrix out(xv.rows, xv.cols);
  for (std::size_t r = 0; r < xv.rows; ++r) {
    const double* xr = xv.row(r);
    double m = xr[0];
    for (std::size_t c = 1; c < xv.cols; ++c) m = std::max(m, xr[c]);
    double s = 0.0;
    double* o = out.row(r);
    for (std::size_t c = 0; c < xv.cols; ++c) s += (o[c] = std::exp(xr[c] - m));
    for (std::size_t c = 0; c < xv.cols; ++c) o[c] /= s;
  }
  return Tensor::make(std::move(out), {x}, [](detail::Node& self) {
    auto& px = detail::parent(self, 0);
    if (!px.requires_grad) return;
    Matrix& gx = px.ensure_grad();
    const Matrix& y = self.value;
    const Matrix& g = self.grad;
    for (std::size_t r = 0; r < y.rows; ++r) {
      double dot = 0.0;
      for (std::size_t c = 0; c < y.cols; ++c) dot += g(r, c) * y(r, c);
      for (std::size_t c = 0; c < y.cols; ++c) gx(r, c) += y(r, c) * (g(r, c) - dot);
    }
  });
}

/// softmax(scale * Q K^T) row-wise, storing only the probabilities.
inline Tensor attention_probs(const Tensor& q, const Tensor& k, double scale_by) {
  const Matrix& qv = q.value();
  const Matrix& kv = k.value();
  if (qv.cols != kv.cols) throw DimensionError("attention_probs: " + shape_str(qv) + " vs " + shape_str(kv));
  Matrix p(qv.rows, kv.rows);
  kernel::gemm_nt(qv, kv, p);
  for (std::size_t r = 0; r < p.rows; ++r) {
    double* pr = p.row(r);
    double m = -INFINITY;
    for (std::size_t c = 0; c < p.cols; ++c) m = std::max(m, pr[c] * scale_by);
    double s = 0.0;
    for (std::size_t c = 0; c < p.cols; ++c) s += (pr[c] = std::exp(pr[c] * scale_by - m));
    for (std::size_t c = 0; c < p.cols; ++c) pr[c] /= s;
  }
  return Tensor::make(std::move(p), {q, k}, [scale_by](detail::Node& self) {
    auto& pq = detail::parent(self, 0);
    auto& pk = detail::parent(self, 1);
    Matrix ds = std::move(self.grad);  // reuse as dS
    const Matrix& y = self.value;
    for (std::size_t r = 0; r < y.rows; ++r) {
      double dot = 0.0;
      for (std::size_t c = 0; c < y.cols; ++c) dot += ds(r, c) * y(r, c);
      for (std::size_t c = 0; c < y.cols; ++c) ds(r, c) = y(r, c) * (ds(r, c) - dot) * scale_by;
    }
    if (pq.requires_grad) {
      kernel::gemm_nn(ds.data.data(), pk.value.data.data(), pq.ensure_grad().data.data(), ds.rows, ds.cols, pk.value.cols);
    }
    if (pk.requires_grad) {
      kernel::gemm_tn(ds.data.data(), pq.value.data.data(), pk.ensure_grad().data.data(), ds.rows, ds.cols, pq.value.cols);
    }
    self.grad = std::move(ds);
  });
}

/// Row-wise layer normalization with per-column gain and bias (both 1 x C).
inline Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps = 1e-5) {
  const Matrix& xv = x.value();
  const std::size_t n = xv.rows, c = xv.cols;
  if (gain.rows() != 1 || gain.cols() != c || bias.rows() != 1 || bias.cols() != c) {
    throw DimensionError("layer_norm: gain/bias must be " + shape_str(1, c));
  }
  Matrix out(n, c);
  Matrix xhat(n, c);
  Matrix inv_std(n, 1);
  const Matrix& g = gain.value();
  const Matrix& b = bias.value();
  for (std::size_t r = 0; r < n; ++r) {
    const double* xr = xv.row(r);
    double mean = 0.0;
    for (std::size_t j = 0; j < c; ++j) mean += xr[j];
    mean /= static_cast<double>(c);
    double var = 0.0;
    for (std::size_t j = 0; j < c; ++j) var += (xr[j] - mean) * (xr[j] - mean);
    var /= static_cast<double>(c);
    const double is = 1.0 / std::sqrt(var + eps);
    inv_std(r, 0) = is;
    for (std::size_t j = 0; j < c; ++j) {
      const double h = (xr[j] - mean) * is;
      xhat(r, j) = h;
      out(r, j) = h * g.data[j] + b.data[j];
    }
  }
  return Tensor::make(std::move(out), {x, gain, bias},
                      [xhat = std::move(xhat), inv_std = std::move(inv_std)](detail::Node& self) {
                        auto& px = detail::parent(self, 0);
                        auto& pg = detail::parent(self, 1);
                        auto& pb = detail::parent(self, 2);
                        const Matrix& gy = self.grad;
                        const std::size_t rows = gy.rows, cols = gy.cols;
                        if (pg.requires_grad || pb.requires_grad) {
                          Matrix* gg = pg.requires_grad ? &pg.ensure_grad() : nullptr;
                          Matrix* gb = pb.requires_grad ? &pb.ensure_grad() : nullptr;
                          for (std::size_t r = 0; r < rows; ++r)
                            for (std::size_t j = 0; j < cols; ++j) {
                              if (gg) gg->data[j] += gy(r, j) * xhat(r, j);
                              if (gb) gb->data[j] += gy(r, j);
                            }
                        }
                        if (!px.requires_grad) return;
                        Matrix& gx = px.ensure_grad();
                        const Matrix& gv = pg.value;
                        const double inv_c = 1.0 / static_cast<double>(cols);
                        for (std::size_t r = 0; r < rows; ++r) {
                          double s1 = 0.0, s2 = 0.0;
                          for (std::size_t j = 0; j < cols; ++j) {
                            const double dh = gy(r, j) * gv.data[j];
                            s1 += dh;
                            s2 += dh * xhat(r, j);
                          }
                          for (std::size_t j = 0; j < cols; ++j) {
                            const double dh = gy(r, j) * gv.data[j];
                            gx(r, j) += inv_std(r, 0) * (dh - inv_c * s1 - xhat(r, j) * inv_c * s2);
                          }
                        }
                      });
}

/// Rows of `x` at `idx` (duplicates allowed).
inline Tensor gather_rows(const Tensor& x, std::vector<std::size_t> idx) {
  const Matrix& xv = x.value();
  Matrix out(idx.size(), xv.cols);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (idx[i] >= xv.rows) throw DimensionError("gather_rows: index " + std::to_string(idx[i]) + " out of " + shape_str(xv));
    std::copy(xv.row(idx[i]), xv.row(idx[i]) + xv.cols, out.row(i));
  }
  return Tensor::make(std::move(out), {x}, [idx = std::move(idx)](detail::Node& self) {
    auto& px = detail::parent(self, 0);
    if (!px.requires_grad) return;
    Matrix& gx = px.ensure_grad();
    for (std::size_t i = 0; i < idx.size(); ++i) {
      double* dst = gx.row(idx[i]);
      const double* src = self.grad.row(i);
      for (std::size_t j = 0; j < gx.cols; ++j) dst[j] += src[j];
    }
  });
}

/// Mean of rows [begin, end) for every range.
inline Tensor segment_mean(const Tensor& x, std::vector<std::pair<std::size_t, std::size_t>> ranges) {
  const Matrix& xv = x.value();
  Matrix out(ranges.size(), xv.cols);
  for (std::size_t i = 0; i < ranges.size(); ++i) {
    const auto [b, e] = ranges[i];
    if (b >= e || e > xv.rows) throw DimensionError("segment_mean: bad range");
    const double inv = 1.0 / static_cast<double>(e - b);
    for (std::size_t r = b; r < e; ++r)
      for (std::size_t j = 0; j < xv.cols; ++j) out(i, j) += xv(r, j) * inv;
  }
  return Tensor::make(std::move(out), {x}, [ranges = std::move(ranges)](detail::Node& self) {
    auto& px = detail::parent(self, 0);
    if (!px.requires_grad) return;
    Matrix& gx = px.ensure_grad();
    for (std::size_t i = 0; i < ranges.size(); ++i) {
      const auto [b, e] = ranges[i];
      const double inv = 1.0 / static_cast<double>(e - b);
      for (std::size_t r = b; r < e; ++r)
        for (std::size_t j = 0; j < gx.cols; ++j) gx(r, j) += self.grad(i, j) * inv;
    }
  });
}

inline Tensor row_slice(const Tensor& x, std::size_t begin, std::size_t end) {
  const Matrix& xv = x.value();
  if (begin > end || end > xv.rows) throw DimensionError("row_slice: bad range for " + shape_str(xv));
  Matrix out(end - begin, xv.cols);
  std::copy(xv.row(begin), xv.row(begin) + out.size(), out.data.begin());
  return Tensor::make(std::move(out), {x}, [begin](detail::Node& self) {
    auto& px = detail::parent(self, 0);
    if (!px.requires_grad) return;
    Matrix& gx = px.ensure_grad();
    double* dst = gx.row(begin);
    for (std::size_t i = 0; i < self.grad.size(); ++i) dst[i] += self.grad.data[i];
  });
}

inline Tensor concat_rows(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw DimensionError("concat_rows: no inputs");
  const std::size_t cols = parts[0].cols();
  std::size_t rows = 0;
  for (const auto& p : parts) {
    if (p.cols() != cols) throw DimensionError("concat_rows: column mismatch");
    rows += p.rows();
  }
  Matrix out(rows, cols);
  std::size_t off = 0;
  for (const auto& p : parts) {
    std::copy(p.value().data.begin(), p.value().data.end(), out.data.begin() + static_cast<std::ptrdiff_t>(off));
    off += p.value().size();
  }
  return Tensor::make(std::move(out), parts, [](detail::Node& self) {
    std::size_t off = 0;
    for (auto& pp : self.parents) {
      const std::size_t sz = pp->value.size();
      if (pp->requires_grad) {
        Matrix& g = pp->ensure_grad();
        for (std::size_t i = 0; i < sz; ++i) g.data[i] += self.grad.data[off + i];
      }
      off += sz;
    }
  });
}

inline Tensor col_slice(const Tensor& x, std::size_t begin, std::size_t end) {
  const Matrix& xv = x.value();
  if (begin > end || end > xv.cols) throw DimensionError("col_slice: bad range for " + shape_str(xv));
  Matrix out(xv.rows, end - begin);
  for (std::size_t r = 0; r < xv.rows; ++r) std::copy(xv.row(r) + begin, xv.row(r) + end, out.row(r));
  return Tensor::make(std::move(out), {x}, [begin](detail::Node& self) {
    auto& px = detail::parent(self, 0);
    if (!px.requires_grad) return;
    Matrix& gx = px.ensure_grad();
    for (std::size_t r = 0; r < self.grad.rows; ++r)
      for (std::size_t j = 0; j < self.grad.cols; ++j) gx(r, begin + j) += self.grad(r, j);
  });
}

inline Tensor concat_cols(const std::vector<Tensor>& parts) {
  if (parts.empty()) throw DimensionError("concat_cols: no inputs");
  const std::size_t rows = parts[0].rows();
  std::size_t cols = 0;
  for (const auto& p : parts) {
    if (p.rows() != rows) throw DimensionError("concat_cols: row mismatch");
    cols += p.cols();
  }
  Matrix out(rows, cols);
  std::size_t off = 0;
  for (const auto& p : parts) {
    for (std::size_t r = 0; r < rows; ++r) std::copy(p.value().row(r), p.value().row(r) + p.cols(), out.row(r) + off);
    off += p.cols();
  }
  return Tensor::make(std::move(out), parts, [](detail::Node& self) {
    std::size_t off = 0;
    for (auto& pp : self.parents) {
      const std::size_t c = pp->value.cols;
      if (pp->requires_grad) {
        Matrix& g = pp->ensure_grad();
        for (std::size_t r = 0; r < g.rows; ++r)
          for (std::size_t j = 0; j < c; ++j) g(r, j) += self.grad(r, off + j);
      }
      off += c;
    }
  });
}

/// Sum of every element, as a 1x1 tensor.
inline Tensor sum(const Tensor& x) {
  double s = 0.0;
  for (double v : x.value().data) s += v;
  return Tensor::make(Matrix(1, 1, s), {x}, [](detail::Node& self) {
    auto& px = detail::parent(self, 0);
    if (!px.requires_grad) return;
    Matrix& gx = px.ensure_grad();
    const double g = self.grad.data[0];
    for (auto& v : gx.data) v += g;
  });
}

struct WeightedEntry {
  std::size_t row;
  std::size_t col;
  double weight;
};

/// sum_i weight_i * x[row_i, col_i] as a 1x1 tensor.
inline Tensor pick_sum(const Tensor& x, std::vector<WeightedEntry> entries) {
  const Matrix& xv = x.value();
  double s = 0.0;
  for (const auto& e : entries) {
    if (e.row >= xv.rows || e.col >= xv.cols) throw DimensionError("pick_sum: entry outside " + shape_str(xv));
    s += e.weight * xv(e.row, e.col);
  }
  return Tensor::make(Matrix(1, 1, s), {x}, [entries = std::move(entries)](detail::Node& self) {
    auto& px = detail::parent(self, 0);
    if (!px.requires_grad) return;
    Matrix& gx = px.ensure_grad();
    const double g = self.grad.data[0];
    for (const auto& e : entries) gx(e.row, e.col) += g * e.weight;
  });
}

/// x W + b for x (n x in), W (in x out), b (1 x out).
inline Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b) { return add(matmul(x, w), b); }

}  // namespace jnrf
