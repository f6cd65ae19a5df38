#pragma once

#include <bit>
#include <complex>
#include <cstddef>
#include <vector>

#include "brt/geometry.hpp"  // brt::pi

namespace brt {

namespace detail {

/// In-place iterative radix-2 transform; `a.size()` must be a power of two.
inline void fft_radix2(std::vector<std::complex<double>>& a, bool inverse) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  const double sign = inverse ? 1.0 : -1.0;
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = sign * 2.0 * pi / static_cast<double>(len);
    for (std::size_t i = 0; i < n; i += len) {
      for (std::size_t k = 0; k < len / 2; ++k) {
        const auto w = std::polar(1.0, ang * static_cast<double>(k));
        const auto u = a[i + k];
        const auto v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
      }
    }
  }
}

/// Chirp-z (Bluestein) transform for arbitrary lengths, expressed as a
/// power-of-two circular convolution. Quadratic phases are reduced modulo 2n
/// in integer arithmetic so the chirp stays accurate for any input length.
inline void fft_bluestein(std::vector<std::complex<double>>& a, bool inverse) {
  const std::size_t n = a.size();
  const std::size_t p = std::bit_ceil(2 * n - 1);
  const double sign = inverse ? 1.0 : -1.0;

  std::vector<std::complex<double>> chirp(n);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t q = (j * j) % (2 * n);
    chirp[j] = std::polar(1.0, sign * pi * static_cast<double>(q) / static_cast<double>(n));
  }

  std::vector<std::complex<double>> x(p, {0.0, 0.0}), y(p, {0.0, 0.0});
  for (std::size_t j = 0; j < n; ++j) x[j] = a[j] * chirp[j];
  y[0] = std::conj(chirp[0]);
  for (std::size_t m = 1; m < n; ++m) y[m] = y[p - m] = std::conj(chirp[m]);

  fft_radix2(x, false);
  fft_radix2(y, false);
  for (std::size_t j = 0; j < p; ++j) x[j] *= y[j];
  fft_radix2(x, true);
  const double scale = 1.0 / static_cast<double>(p);
  for (std::size_t k = 0; k < n; ++k) a[k] = x[k] * scale * chirp[k];
}

}  // namespace detail

/// In-place complex DFT with the e^{-2 pi i jk/n} convention; any length.
inline void fft(std::vector<std::complex<double>>& a) {
  if (a.size() <= 1) return;
  if (std::has_single_bit(a.size()))
    detail::fft_radix2(a, false);
  else
    detail::fft_bluestein(a, false);
}

/// In-place inverse DFT (e^{+2 pi i jk/n}), scaled by 1/n.
inline void ifft(std::vector<std::complex<double>>& a) {
  if (a.empty()) return;
  if (a.size() > 1) {
    if (std::has_single_bit(a.size()))
      detail::fft_radix2(a, true);
    else
      detail::fft_bluestein(a, true);
  }
  const double scale = 1.0 / static_cast<double>(a.size());
  for (auto& v : a) v *= scale;
}

}  // namespace brt
