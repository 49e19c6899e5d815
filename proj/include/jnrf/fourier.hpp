#pragma once

// Parameter-free Fourier token mixing.
//
// fourier_mix(x) = crop(Re(F_seq * pad(x) * F_hidden)) where pad zero-extends
// x (n x d) to (N x D), N and D being the next powers of two, and crop keeps
// the leading n x d block. The hidden axis is transformed first, then the
// sequence axis.
//
// Because both DFT matrices are symmetric and pad/crop are transposes of each
// other, the map is self-adjoint; its backward rule applies the same mixing
// to the incoming gradient.

#include <cstddef>
#include <utility>

#include "jnrf/fft.hpp"
#include "jnrf/tensor.hpp"

namespace jnrf {

namespace detail {

inline Matrix fourier_mix_value(const Matrix& x) {
  const std::size_t n = x.rows, d = x.cols;
  Matrix out(n, d);
  if (n == 0 || d == 0) return out;
  const std::size_t seq_len = next_pow2(n);
  const std::size_t hid_len = next_pow2(d);

  // Column-major spectrum of the hidden transform, columns [0, d) only: the
  // crop never reads the rest.
  Buffer col_re(d * seq_len, 0.0), col_im(d * seq_len, 0.0);
  Buffer row_re(hid_len), row_im(hid_len);
  for (std::size_t m = 0; m < n; ++m) {
    std::fill(row_re.begin(), row_re.end(), 0.0);
    std::fill(row_im.begin(), row_im.end(), 0.0);
    std::copy(x.row(m), x.row(m) + d, row_re.begin());
    fft_strided(row_re.data(), row_im.data(), hid_len, 1, false);
    for (std::size_t c = 0; c < d; ++c) {
      col_re[c * seq_len + m] = row_re[c];
      col_im[c * seq_len + m] = row_im[c];
    }
  }
  for (std::size_t c = 0; c < d; ++c) {
    double* re = col_re.data() + c * seq_len;
    double* im = col_im.data() + c * seq_len;
    fft_strided(re, im, seq_len, 1, false);
    for (std::size_t k = 0; k < n; ++k) out(k, c) = re[k];
  }
  return out;
}

}  // namespace detail

inline Tensor fourier_mix(const Tensor& x) {
  return Tensor::make(detail::fourier_mix_value(x.value()), {x}, [](detail::Node& self) {
    auto& px = *self.parents[0];
    if (!px.requires_grad) return;
    const Matrix g = detail::fourier_mix_value(self.grad);
    Matrix& gx = px.ensure_grad();
    for (std::size_t i = 0; i < gx.size(); ++i) gx.data[i] += g.data[i];
  });
}

}  // namespace jnrf
