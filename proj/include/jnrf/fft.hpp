#pragma once

// Iterative radix-2 Cooley-Tukey FFT over split real/imaginary arrays.

#include <cmath>
#include <cstddef>
#include <map>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "jnrf/counters.hpp"
#include "jnrf/errors.hpp"

namespace jnrf {

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

/// Smallest power of two >= n (1 for n == 0).
inline std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

/// Complex samples stored as two real arrays of equal power-of-two length.
struct ComplexBuffer {
  std::vector<double> re;
  std::vector<double> im;

  ComplexBuffer() = default;
  explicit ComplexBuffer(std::size_t len) : re(len, 0.0), im(len, 0.0) {}
  ComplexBuffer(std::vector<double> r, std::vector<double> i) : re(std::move(r)), im(std::move(i)) {}

  std::size_t size() const { return re.size(); }
};

namespace detail {

// Twiddles e^{-2 pi i k / n} for k < n/2, cached per length and thread.
inline const std::pair<std::vector<double>, std::vector<double>>& twiddles(std::size_t n) {
  thread_local std::map<std::size_t, std::pair<std::vector<double>, std::vector<double>>> cache;
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  std::vector<double> c(n / 2), s(n / 2);
  for (std::size_t k = 0; k < n / 2; ++k) {
    const double a = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    c[k] = std::cos(a);
    s[k] = std::sin(a);
  }
  return cache.emplace(n, std::make_pair(std::move(c), std::move(s))).first->second;
}

// In-place transform of `n` samples laid out with the given stride.
// Unnormalized; `inverse` conjugates the twiddles.
inline void fft_strided(double* re, double* im, std::size_t n, std::size_t stride, bool inverse) {
  if (n <= 1) return;
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) {
      std::swap(re[i * stride], re[j * stride]);
      std::swap(im[i * stride], im[j * stride]);
    }
  }
  const auto& [tc, ts] = twiddles(n);
  const double sign = inverse ? -1.0 : 1.0;
  std::size_t butterflies = 0;
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t step = n / len;
    for (std::size_t base = 0; base < n; base += len) {
      for (std::size_t k = 0; k < half; ++k) {
        const double wr = tc[k * step];
        const double wi = sign * ts[k * step];
        const std::size_t a = (base + k) * stride;
        const std::size_t b = (base + k + half) * stride;
        const double xr = re[b] * wr - im[b] * wi;
        const double xi = re[b] * wi + im[b] * wr;
        re[b] = re[a] - xr;
        im[b] = im[a] - xi;
        re[a] += xr;
        im[a] += xi;
      }
      butterflies += half;
    }
  }
  // One complex multiply (four real multiplies) per butterfly.
  MulCounter::add(4 * butterflies);
}

}  // namespace detail

/// Forward transform is the unnormalized DFT X_k = sum_m x_m e^{-2 pi i k m / n};
/// the inverse conjugates the kernel and scales by 1/n.
inline ComplexBuffer fft_pow2(ComplexBuffer buf, bool inverse = false) {
  const std::size_t n = buf.size();
  if (buf.im.size() != n) throw LengthError("fft_pow2: re/im length mismatch");
  if (!is_pow2(n)) throw LengthError("fft_pow2: length " + std::to_string(n) + " is not a power of two");
  detail::fft_strided(buf.re.data(), buf.im.data(), n, 1, inverse);
  if (inverse) {
    const double s = 1.0 / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      buf.re[i] *= s;
      buf.im[i] *= s;
    }
  }
  return buf;
}

}  // namespace jnrf
