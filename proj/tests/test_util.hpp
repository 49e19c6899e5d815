#pragma once

// Test-only helpers: random tensors, a central finite-difference gradient
// checker and a naive O(n^2) DFT used as an independent oracle.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "jnrf/fft.hpp"
#include "jnrf/ops.hpp"
#include "jnrf/tensor.hpp"

namespace jnrf::testing {

inline Matrix random_matrix(std::mt19937_64& rng, std::size_t r, std::size_t c, double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  Matrix m(r, c);
  for (auto& v : m.data) v = nd(rng);
  return m;
}

/// Relative error with a magnitude floor so that vanishing gradients are
/// compared absolutely.
inline double rel_error(double a, double b, double floor = 1e-6) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
};

/// Three-point: (f(x+h) - f(x-h)) / 2h at the given h. Ridders: Richardson
/// extrapolation of three-point differences over steps h, h/1.4, ..., keeping
/// the estimate with the smallest internal error estimate. Slower, but it
/// resolves both tiny gradients and sharply curved regions.
enum class Stencil { kThreePoint, kRidders };

inline double ridders_derivative(const std::function<double(double)>& f, double h, std::size_t ntab = 12) {
  constexpr double kCon = 1.4, kCon2 = kCon * kCon, kSafe = 2.0;
  std::vector<std::vector<double>> a(ntab, std::vector<double>(ntab, 0.0));
  a[0][0] = (f(h) - f(-h)) / (2.0 * h);
  double err = std::numeric_limits<double>::max(), ans = a[0][0];
  for (std::size_t i = 1; i < ntab; ++i) {
    h /= kCon;
    a[0][i] = (f(h) - f(-h)) / (2.0 * h);
    double fac = kCon2;
    for (std::size_t j = 1; j <= i; ++j) {
      a[j][i] = (a[j - 1][i] * fac - a[j - 1][i - 1]) / (fac - 1.0);
      fac *= kCon2;
      const double e = std::max(std::abs(a[j][i] - a[j - 1][i]), std::abs(a[j][i] - a[j - 1][i - 1]));
      if (e <= err) {
        err = e;
        ans = a[j][i];
      }
    }
    if (std::abs(a[i][i] - a[i - 1][i - 1]) >= kSafe * err) break;
  }
  return ans;
}

/// Compares tape gradients of `loss()` with central differences for every
/// element of `params` (or `max_per_param` randomly chosen elements).
inline GradCheckResult grad_check(const std::function<Tensor()>& loss, std::vector<Tensor> params, double h = 1e-5,
                                  std::size_t max_per_param = 0, std::uint64_t seed = 1,
                                  Stencil stencil = Stencil::kThreePoint) {
  for (auto& p : params) p.clear_grad();
  Tensor l = loss();
  backward(l);
  GradCheckResult res;
  std::mt19937_64 rng(seed);
  for (auto& p : params) {
    const Matrix analytic = p.grad().empty() ? Matrix(p.rows(), p.cols()) : p.grad();
    std::vector<std::size_t> idx(p.value().size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    if (max_per_param && idx.size() > max_per_param) {
      std::shuffle(idx.begin(), idx.end(), rng);
      idx.resize(max_per_param);
    }
    for (std::size_t i : idx) {
      double& v = p.mutable_value().data[i];
      const double saved = v;
      auto at = [&](double offset) {
        NoGradGuard ng;
        v = saved + offset;
        return loss().item();
      };
      const double numeric = stencil == Stencil::kThreePoint ? (at(h) - at(-h)) / (2.0 * h) : ridders_derivative(at, h);
      v = saved;
      res.max_rel_error = std::max(res.max_rel_error, rel_error(analytic.data[i], numeric));
      ++res.checked;
    }
  }
  for (auto& p : params) p.clear_grad();
  return res;
}

/// Scalar projection sum(W .* y) that turns any tensor into a loss with O(1)
/// gradients.
inline Tensor project(const Tensor& y, const Matrix& w) { return sum(mul(y, Tensor::constant(w))); }

/// Naive DFT with a precomputed twiddle table; sign -1 forward, +1 inverse
/// (unscaled).
inline void naive_dft(const std::vector<double>& re, const std::vector<double>& im, std::vector<double>& out_re,
                      std::vector<double>& out_im, int sign = -1) {
  const std::size_t n = re.size();
  std::vector<double> c(n), s(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double a = sign * 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    c[k] = std::cos(a);
    s[k] = std::sin(a);
  }
  out_re.assign(n, 0.0);
  out_im.assign(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    double sr = 0.0, si = 0.0;
    std::size_t idx = 0;
    for (std::size_t m = 0; m < n; ++m) {
      sr += re[m] * c[idx] - im[m] * s[idx];
      si += re[m] * s[idx] + im[m] * c[idx];
      idx += k;
      if (idx >= n) idx -= n;
    }
    out_re[k] = sr;
    out_im[k] = si;
  }
}

/// Reference fourier mixing built from naive DFTs on the zero-padded input:
/// hidden axis first, then sequence axis, real part, cropped.
inline Matrix naive_fourier_mix(const Matrix& x) {
  const std::size_t n = x.rows, d = x.cols;
  const std::size_t sn = next_pow2(n), sd = next_pow2(d);
  std::vector<std::vector<double>> zr(sn, std::vector<double>(sd, 0.0)), zi = zr;
  for (std::size_t m = 0; m < n; ++m) {
    std::vector<double> re(sd, 0.0), im(sd, 0.0), ore, oim;
    for (std::size_t c = 0; c < d; ++c) re[c] = x(m, c);
    naive_dft(re, im, ore, oim);
    zr[m] = ore;
    zi[m] = oim;
  }
  Matrix out(n, d);
  for (std::size_t c = 0; c < d; ++c) {
    std::vector<double> re(sn), im(sn), ore, oim;
    for (std::size_t m = 0; m < sn; ++m) {
      re[m] = zr[m][c];
      im[m] = zi[m][c];
    }
    naive_dft(re, im, ore, oim);
    for (std::size_t k = 0; k < n; ++k) out(k, c) = ore[k];
  }
  return out;
}

}  // namespace jnrf::testing
