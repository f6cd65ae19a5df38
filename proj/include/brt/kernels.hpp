#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>

namespace brt {

/// Auxiliary angles of the integral-equation kernel. `t_hat` is the ratio
/// t/rho of vertex radius to integration radius; both angles are exit angles
/// of the two path branches through the circle of radius rho.
inline double psi(double t_hat, double theta) {
  const double x = t_hat * std::sin(theta);
  if (!(t_hat >= 0.0) || x > 1.0) throw std::domain_error("psi: t_hat*sin(theta) must lie in [0, 1]");
  return std::asin(x) + theta;
}

inline double psi_bar(double t_hat, double theta) {
  const double x = t_hat * std::sin(theta);
  if (!(t_hat >= 0.0) || x > 1.0) throw std::domain_error("psi_bar: t_hat*sin(theta) must lie in [0, 1]");
  return theta - std::asin(x);  // == 2*theta - psi
}

/// n-independent decomposition of the kernel at a fixed argument:
///
///   K_n(t_hat) = base - e^{i n psi_bar} * frac1 + (-1)^n e^{i n psi} * frac2
///
/// `base` is the unit arc-length factor of the diameter segment (present for
/// t_hat <= 1, i.e. radii at or beyond the vertex), and frac1/frac2 are the
/// signed arc-length derivatives ds/drho of the two halves of the broken
/// segment. The assembler batches kernel evaluations through this struct so
/// each quadrature node is analyzed once for all harmonics.
struct KernelFactors {
  double psi = 0.0;
  double psi_bar = 0.0;
  double base = 0.0;
  double frac1 = 0.0;  ///< zero when t_hat <= 1 (the first branch does not reach such radii)
  double frac2 = 0.0;
};

/// Evaluates the kernel factors at t_hat in [0, 1/sin(theta)). The forms used
/// here are algebraically identical to the textbook expressions
///   (1 -+ t_hat cos(angle) + t_hat^2 sin(angle) sin(theta)/cos(alpha)) /
///   sqrt(1 + t_hat^2 -+ 2 t_hat cos(angle))
/// but written via (1 - t_hat)^2 + 4 t_hat sin^2(angle/2) so that they stay
/// fully accurate near the jump at t_hat = 1, where the naive denominator
/// suffers catastrophic cancellation.
inline KernelFactors kernel_factors(double t_hat, double theta) {
  const double s = std::sin(theta);
  const double x = t_hat * s;
  if (!(t_hat >= 0.0)) throw std::domain_error("kernel_factors: t_hat must be nonnegative");
  if (x >= 1.0) throw std::domain_error("kernel_factors: t_hat at or beyond the singular point 1/sin(theta)");

  const double cos_alpha = std::sqrt((1.0 - x) * (1.0 + x));
  const double alpha = std::asin(x);

  KernelFactors f;
  f.psi = theta + alpha;
  f.psi_bar = theta - alpha;

  const double sp_half = std::cos(f.psi / 2);
  const double d2 = std::sqrt((1.0 - t_hat) * (1.0 - t_hat) + 4.0 * t_hat * sp_half * sp_half);
  const double n2 = 1.0 + t_hat * std::cos(f.psi) + t_hat * t_hat * std::sin(f.psi) * s / cos_alpha;
  f.frac2 = n2 / d2;

  if (t_hat > 1.0) {
    const double sb_half = std::sin(f.psi_bar / 2);
    const double d1 = std::sqrt((1.0 - t_hat) * (1.0 - t_hat) + 4.0 * t_hat * sb_half * sb_half);
    const double n1 = (1.0 - t_hat) + 2.0 * t_hat * sb_half * sb_half +
                      t_hat * t_hat * std::sin(f.psi_bar) * s / cos_alpha;
    f.frac1 = n1 / d1;
    f.base = 0.0;
  } else {
    f.frac1 = 0.0;
    f.base = 1.0;
  }
  return f;
}

namespace detail {
inline double sign_pow(int n) { return (n % 2 != 0) ? -1.0 : 1.0; }
}

/// First-branch kernel, defined for 1 < t_hat < 1/sin(theta).
inline std::complex<double> kernel_K1(double t_hat, int n, double theta) {
  if (!(t_hat > 1.0)) throw std::domain_error("kernel_K1: t_hat must exceed 1");
  const KernelFactors f = kernel_factors(t_hat, theta);
  return -std::polar(1.0, n * f.psi_bar) * f.frac1;
}

/// Second-branch kernel, defined for 0 <= t_hat < 1/sin(theta).
inline std::complex<double> kernel_K2(double t_hat, int n, double theta) {
  const KernelFactors f = kernel_factors(t_hat, theta);
  return detail::sign_pow(n) * std::polar(1.0, n * f.psi) * f.frac2;
}

/// Combined piecewise kernel: 1 + K2 on [0, 1] (closed at 1), K1 + K2 on
/// (1, 1/sin(theta)). The jump at t_hat = 1 has size 1/cos(theta) - 1.
inline std::complex<double> kernel_K(double t_hat, int n, double theta) {
  const KernelFactors f = kernel_factors(t_hat, theta);
  return std::complex<double>(f.base, 0.0) - std::polar(1.0, n * f.psi_bar) * f.frac1 +
         detail::sign_pow(n) * std::polar(1.0, n * f.psi) * f.frac2;
}

}  // namespace brt
