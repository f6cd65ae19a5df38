#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "brt/fft.hpp"
#include "brt/forward.hpp"
#include "brt/phantoms.hpp"

namespace brt {

/// Angular Fourier coefficients sampled on the radial grid: entry (n, i) is
/// the coefficient of e^{i n beta} at radius t_{i+1} = (i+1)*(R-epsilon)/M,
/// for n = 0..N/2. Negative harmonics follow from conjugate symmetry of real
/// data and are never stored.
struct HarmonicStack {
  int M = 0;
  int N = 0;  ///< angular count of the originating grid (even)
  double R = 1.0;
  double epsilon = 0.0;
  std::vector<std::complex<double>> data;  ///< (N/2 + 1) x M, row-major in n

  int harmonic_count() const { return N / 2 + 1; }
  double radial_step() const { return (R - epsilon) / M; }
  double radius(int i) const { return (i + 1) * radial_step(); }

  std::complex<double>& at(int n, int i) { return data[static_cast<std::size_t>(n) * M + i]; }
  std::complex<double> at(int n, int i) const { return data[static_cast<std::size_t>(n) * M + i]; }

  std::complex<double>* row(int n) { return data.data() + static_cast<std::size_t>(n) * M; }
  const std::complex<double>* row(int n) const { return data.data() + static_cast<std::size_t>(n) * M; }
};

inline HarmonicStack make_harmonic_stack(int M, int N, double R, double epsilon) {
  if (M < 1) throw std::invalid_argument("HarmonicStack: M must be at least 1");
  if (N < 2 || N % 2 != 0) throw std::invalid_argument("HarmonicStack: N must be even and at least 2");
  HarmonicStack st;
  st.M = M;
  st.N = N;
  st.R = R;
  st.epsilon = epsilon;
  st.data.assign(static_cast<std::size_t>(N / 2 + 1) * M, {0.0, 0.0});
  return st;
}

/// Per-radius angular analysis of a real sinogram row using one complex FFT
/// of half the length: the even/odd samples are packed as real and imaginary
/// parts, transformed, and unpacked through the standard symmetry identities.
/// Normalization puts 1/N here, so that
///   coeff(n, i) = (1/N) * sum_j g(t_{i+1}, beta_j) e^{-i n beta_j},
/// i.e. the outputs are directly the angular series coefficients.
inline HarmonicStack forward_harmonics(const Sinogram& s) {
  if (s.N < 2 || s.N % 2 != 0)
    throw std::invalid_argument("forward_harmonics: angular count must be even and at least 2");
  HarmonicStack st = make_harmonic_stack(s.M, s.N, s.cfg.R, s.epsilon);

  const int half = s.N / 2;
  std::vector<std::complex<double>> z(half);
  for (int i = 0; i < s.M; ++i) {
    for (int m = 0; m < half; ++m) z[m] = {s.at(i, 2 * m), s.at(i, 2 * m + 1)};
    fft(z);
    for (int n = 0; n <= half; ++n) {
      const std::complex<double> zk = z[n % half];
      const std::complex<double> zs = std::conj(z[(half - n) % half]);
      const std::complex<double> even = 0.5 * (zk + zs);
      const std::complex<double> odd = std::complex<double>(0.0, -0.5) * (zk - zs);
      const std::complex<double> twiddle = std::polar(1.0, -2.0 * pi * n / s.N);
      st.at(n, i) = (even + twiddle * odd) / static_cast<double>(s.N);
    }
  }
  return st;
}

/// Evaluates the real angular series on a pixel grid:
///   f(x, y) = Re[ c_0(rho) + 2 * sum_{n=1}^{N/2-1} c_n(rho) e^{i n phi}
///                 + c_{N/2}(rho) e^{i (N/2) phi} ],
/// with coefficients linearly interpolated between grid radii. Pixels with
/// rho below the first radius or beyond R - epsilon are set to zero. When
/// `imag_ratio` is given it receives ||imaginary part|| / ||real part|| of
/// the synthesized values, a consistency diagnostic that should be tiny for
/// data with genuine conjugate symmetry.
inline ImageGrid inverse_harmonics(const HarmonicStack& st, int grid_size, double* imag_ratio = nullptr) {
  ImageGrid img = make_image(grid_size, st.R, "synthesized image");
  const int half = st.N / 2;
  const double h = st.radial_step();
  const double rho_min = st.radius(0);
  const double rho_max = st.radius(st.M - 1);  // == R - epsilon up to rounding

  double im2 = 0.0, re2 = 0.0;
  for (int i = 0; i < grid_size; ++i) {
    for (int j = 0; j < grid_size; ++j) {
      const Vec2 p = img.pixel_center(i, j);
      const double rho = p.norm();
      if (rho < rho_min || rho > rho_max) continue;

      const double pos = rho / h - 1.0;  // fractional index into the radial grid
      int k0 = static_cast<int>(pos);
      if (k0 > st.M - 2) k0 = st.M - 2;
      const double w = pos - k0;
      auto interp = [&](int n) { return (1.0 - w) * st.at(n, k0) + w * st.at(n, k0 + 1); };

      const std::complex<double> u = std::polar(1.0, std::atan2(p.y, p.x));
      std::complex<double> acc = interp(0);
      std::complex<double> phase = u;
      for (int n = 1; n <= half; ++n) {
        const double weight = (n < half) ? 2.0 : 1.0;
        acc += weight * interp(n) * phase;
        phase *= u;
      }
      img.at(i, j) = acc.real();
      re2 += acc.real() * acc.real();
      im2 += acc.imag() * acc.imag();
    }
  }
  if (imag_ratio) *imag_ratio = re2 > 0.0 ? std::sqrt(im2 / re2) : 0.0;
  return img;
}

}  // namespace brt
