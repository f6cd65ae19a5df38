#pragma once

// Independent reference implementations used to validate the library:
// a direct O(n^2) DFT, adaptive Gauss quadrature for the transform integrals,
// a finite-difference arc-length derivative driven only by geometry ops, and
// small helpers for image comparison and temp-file management. Everything
// here is deliberately simple and slow.

#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "brt/forward.hpp"
#include "brt/geometry.hpp"
#include "brt/kernels.hpp"
#include "brt/phantoms.hpp"
#include "brt/system.hpp"

namespace oracle {

/// Plain quadratic-time DFT, sum_j a_j e^{-2 pi i j k / n}, with the angle
/// argument reduced modulo n before multiplication so large j*k products do
/// not lose precision.
inline std::vector<std::complex<double>> dft(const std::vector<std::complex<double>>& a) {
  const std::size_t n = a.size();
  std::vector<std::complex<double>> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double angle = -2.0 * brt::pi * static_cast<double>((j * k) % n) / static_cast<double>(n);
      sum += a[j] * std::polar(1.0, angle);
    }
    out[k] = sum;
  }
  return out;
}

namespace detail {

template <class F>
std::complex<double> gauss_panel(const F& f, double a, double b) {
  const brt::detail::GaussRule& rule = brt::detail::assembler_gauss_rule();
  const double mid = 0.5 * (a + b), halfw = 0.5 * (b - a);
  std::complex<double> sum = 0.0;
  for (std::size_t q = 0; q < rule.x.size(); ++q)
    sum += rule.w[q] * f(mid + halfw * rule.x[q]);
  return halfw * sum;
}

template <class F>
std::complex<double> adapt(const F& f, double a, double b, double tol, int depth) {
  const double mid = 0.5 * (a + b);
  const std::complex<double> whole = gauss_panel(f, a, b);
  const std::complex<double> split = gauss_panel(f, a, mid) + gauss_panel(f, mid, b);
  if (depth >= 14 || std::abs(split - whole) <= tol) return split;
  return adapt(f, a, mid, 0.5 * tol, depth + 1) + adapt(f, mid, b, 0.5 * tol, depth + 1);
}

}  // namespace detail

template <class F>
std::complex<double> integrate(const F& f, double a, double b, double tol = 1e-13) {
  if (!(b > a)) return 0.0;
  return detail::adapt(f, a, b, tol, 0);
}

/// Adaptive-quadrature value of one harmonic's transform of a smooth radial
/// profile at radial coordinate t, integrating over [t sin(theta), upper].
/// The kernel's inverse-square-root behavior at the lower limit is removed by
/// the substitution rho = t sin(theta) + u^2, so both pieces put to the
/// quadrature are smooth.
inline std::complex<double> transform_value(const std::function<double(double)>& profile, int n,
                                            double t, double theta, double upper) {
  const double rho_s = t * std::sin(theta);
  const auto near_piece = [&](double u) {
    const double rho = rho_s + u * u;
    return 2.0 * u * profile(rho) * brt::kernel_K(t / rho, n, theta);
  };
  const auto far_piece = [&](double rho) {
    return profile(rho) * brt::kernel_K(t / rho, n, theta);
  };
  return integrate(near_piece, 0.0, std::sqrt(t - rho_s)) + integrate(far_piece, t, upper);
}

/// Arc length s on the bent segment at which the polar radius equals rho,
/// found by bisection. branch 1 is the descending piece (bend vertex to the
/// closest approach), branch 2 the ascending piece (closest approach to the
/// boundary). Uses only the public geometry operations.
inline double arc_length_at_radius(const brt::BrokenRay& ray, double rho, int branch) {
  const double len = (ray.C - ray.B).norm();
  // bracket by branch: [0, s_min] descending, [s_min, len] ascending, where
  // s_min is the closest-approach arc length located by ternary search
  double lo_s = 0.0, hi_s = len;
  {
    double a = 0.0, b = len;
    for (int it = 0; it < 200; ++it) {
      const double m1 = a + (b - a) / 3.0, m2 = b - (b - a) / 3.0;
      if (brt::polar_radius_along_branch(ray, m1) < brt::polar_radius_along_branch(ray, m2))
        b = m2;
      else
        a = m1;
    }
    const double s_min = 0.5 * (a + b);
    if (branch == 1) {
      lo_s = 0.0;
      hi_s = s_min;
    } else {
      lo_s = s_min;
      hi_s = len;
    }
  }
  double lo = lo_s, hi = hi_s;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double r = brt::polar_radius_along_branch(ray, mid);
    const bool go_right = (branch == 1) ? (r > rho) : (r < rho);
    if (go_right)
      lo = mid;
    else
      hi = mid;
    if (hi - lo < 1e-15) break;
  }
  return 0.5 * (lo + hi);
}

/// Central finite difference of s(rho) on one monotone piece of the bent
/// segment; the signed arc-length derivative the transform kernels encode.
inline double fd_ds_drho(const brt::BrokenRay& ray, double rho, int branch, double delta = 1e-7) {
  const double sp = arc_length_at_radius(ray, rho + delta, branch);
  const double sm = arc_length_at_radius(ray, rho - delta, branch);
  return (sp - sm) / (2.0 * delta);
}

/// Bilinear sample of an image at a physical point; points outside the pixel
/// lattice clamp to the border.
inline double bilinear_sample(const brt::ImageGrid& img, brt::Vec2 p) {
  const double w = img.pixel_width();
  const double fx = (p.x + img.R) / w - 0.5;
  const double fy = (img.R - p.y) / w - 0.5;
  const auto clampi = [&](double v) {
    if (v < 0.0) return 0.0;
    if (v > img.size - 1.0) return img.size - 1.0;
    return v;
  };
  const double cx = clampi(fx), cy = clampi(fy);
  const int j0 = std::min(static_cast<int>(cx), img.size - 2);
  const int i0 = std::min(static_cast<int>(cy), img.size - 2);
  const double ax = cx - j0, ay = cy - i0;
  return (1 - ay) * ((1 - ax) * img.at(i0, j0) + ax * img.at(i0, j0 + 1)) +
         ay * ((1 - ax) * img.at(i0 + 1, j0) + ax * img.at(i0 + 1, j0 + 1));
}

/// Image rotated by `angle` about the origin (counterclockwise), resampled
/// bilinearly onto the same grid.
inline brt::ImageGrid rotate_image(const brt::ImageGrid& img, double angle) {
  brt::ImageGrid out = brt::make_image(img.size, img.R, img.description);
  for (int i = 0; i < img.size; ++i)
    for (int j = 0; j < img.size; ++j)
      out.at(i, j) = bilinear_sample(img, brt::rotate(out.pixel_center(i, j), -angle));
  return out;
}

/// Unique scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::mt19937_64 rng{std::random_device{}()};
    path_ = std::filesystem::temp_directory_path() /
            ("brt_test_" + std::to_string(rng() & 0xffffffffull));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string operator/(const std::string& name) const { return (path_ / name).string(); }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace oracle
