#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "brt/errors.hpp"
#include "brt/forward.hpp"
#include "brt/harmonics.hpp"
#include "brt/parallel.hpp"
#include "brt/phantoms.hpp"
#include "brt/system.hpp"

namespace brt {

/// Parameters and diagnostics of one reconstruction run.
struct ReconstructionReport {
  double R = 0.0;
  double theta = 0.0;
  double epsilon = 0.0;
  int chirality = +1;
  int M = 0;
  int N = 0;
  int rank = 0;
  int grid_size = 0;
  double seconds_harmonics = 0.0;
  double seconds_solve = 0.0;
  double seconds_synthesis = 0.0;
  double seconds_total = 0.0;
  /// Norm ratio of the discarded imaginary part to the kept real part of the
  /// synthesized image; should be tiny for real input data.
  double imag_ratio = 0.0;
  /// Filled only when an exact image is available for comparison.
  std::optional<double> rel_l2_percent;
};

struct InversionResult {
  ImageGrid image;
  ReconstructionReport report;
};

/// Builds the truncated pseudoinverses of all harmonics n = 0..N/2 on the
/// radial grid t_m = m (R - epsilon)/M. The truncation rank is
/// floor(M * rank_fraction), with a small tolerance so that fractions like
/// 1/1.5 land on the intended integer. Deterministic for fixed inputs
/// regardless of the thread count.
inline OperatorCache precompute(const AcquisitionConfig& cfg, int M, int N, double epsilon,
                                double rank_fraction, int threads = 0) {
  cfg.validate();
  if (N < 2 || N % 2 != 0)
    throw std::invalid_argument("precompute: N must be even and at least 2");
  if (!(rank_fraction > 0.0 && rank_fraction <= 1.0))
    throw std::invalid_argument("precompute: rank_fraction must lie in (0, 1]");
  const int rank = static_cast<int>(std::floor(M * rank_fraction + 1e-9));
  if (rank < 1)
    throw std::invalid_argument("precompute: rank_fraction too small, truncation rank would be 0");

  const SystemAssembler assembler(cfg, M, epsilon);
  OperatorCache cache;
  cache.cfg = cfg;
  cache.M = M;
  cache.N = N;
  cache.rank = rank;
  cache.epsilon = epsilon;
  cache.ops.resize(static_cast<std::size_t>(N / 2) + 1);
  parallel_for(0, N / 2 + 1, resolve_thread_count(threads),
               [&](int n) { cache.ops[n] = truncated_svd(assembler.assemble(n), rank); });
  return cache;
}

namespace detail {

inline void require_match(bool ok, const char* field, const std::string& detail) {
  if (!ok) throw ConfigMismatchError(field, detail);
}

}  // namespace detail

/// Reconstructs an image from a sinogram using a precomputed operator cache.
/// Every acquisition and discretization parameter of the sinogram must match
/// the cache exactly; a mismatch raises ConfigMismatchError naming the field.
inline InversionResult invert(const Sinogram& sino, const OperatorCache& cache, int grid_size,
                              int threads = 0) {
  using clock = std::chrono::steady_clock;
  const auto secs = [](clock::time_point a, clock::time_point b) {
    return std::chrono::duration<double>(b - a).count();
  };

  detail::require_match(sino.cfg.R == cache.cfg.R, "R",
                        "sinogram disc radius differs from the cached operators");
  detail::require_match(sino.cfg.theta == cache.cfg.theta, "theta",
                        "sinogram break angle differs from the cached operators");
  detail::require_match(sino.cfg.chirality == cache.cfg.chirality, "chirality",
                        "sinogram break orientation differs from the cached operators");
  detail::require_match(sino.M == cache.M, "M",
                        "sinogram radial sample count differs from the cached operators");
  detail::require_match(sino.N == cache.N, "N",
                        "sinogram direction count differs from the cached operators");
  detail::require_match(sino.epsilon == cache.epsilon, "epsilon",
                        "sinogram boundary margin differs from the cached operators");
  if (grid_size < 1) throw std::invalid_argument("invert: grid_size must be positive");

  const int M = cache.M;
  const int half = cache.N / 2;

  const auto t0 = clock::now();
  const HarmonicStack g = forward_harmonics(sino);
  const auto t1 = clock::now();

  HarmonicStack f = make_harmonic_stack(M, cache.N, cache.cfg.R, cache.epsilon);
  parallel_for(0, half + 1, resolve_thread_count(threads), [&](int n) {
    Eigen::Map<const Eigen::VectorXcd> gn(g.row(n), M);
    const Eigen::VectorXcd fn = solve(cache.ops[n], gn);
    std::copy(fn.data(), fn.data() + M, f.row(n));
  });
  const auto t2 = clock::now();

  InversionResult result;
  result.image = inverse_harmonics(f, grid_size, &result.report.imag_ratio);
  result.image.description = "reconstructed image";
  const auto t3 = clock::now();

  ReconstructionReport& rep = result.report;
  rep.R = cache.cfg.R;
  rep.theta = cache.cfg.theta;
  rep.epsilon = cache.epsilon;
  rep.chirality = cache.cfg.chirality;
  rep.M = M;
  rep.N = cache.N;
  rep.rank = cache.rank;
  rep.grid_size = grid_size;
  rep.seconds_harmonics = secs(t0, t1);
  rep.seconds_solve = secs(t1, t2);
  rep.seconds_synthesis = secs(t2, t3);
  rep.seconds_total = secs(t0, t3);
  return result;
}

/// Relative L2 reconstruction error in percent, evaluated on the annulus
/// 5 * pixel_width < rho < R sin(theta) where the method resolves the image:
/// immediately around the origin the radial grid carries no samples, and
/// beyond the critical radius R sin(theta) artifacts are expected by design.
/// The grid norm prefactors of numerator and denominator cancel.
inline double relative_l2(const ImageGrid& rec, const ImageGrid& exact,
                          const AcquisitionConfig& cfg) {
  if (rec.size != exact.size || rec.R != exact.R)
    throw std::invalid_argument("relative_l2: image geometries differ");
  cfg.validate();
  const double lo = 5.0 * rec.pixel_width();
  const double hi = cfg.R * std::sin(cfg.theta);
  double num = 0.0, den = 0.0;
  for (int i = 0; i < rec.size; ++i) {
    for (int j = 0; j < rec.size; ++j) {
      const double rho = rec.pixel_center(i, j).norm();
      if (rho <= lo || rho >= hi) continue;
      const double d = rec.at(i, j) - exact.at(i, j);
      num += d * d;
      den += exact.at(i, j) * exact.at(i, j);
    }
  }
  if (den == 0.0)
    throw std::domain_error("relative_l2: exact image vanishes on the comparison region");
  return 100.0 * std::sqrt(num / den);
}

/// Mean absolute reconstruction error binned by radius: 50 equal-width bins
/// covering (epsilon, R). Empty bins report 0. The profile localizes
/// reconstruction artifacts, which concentrate near the critical circle
/// rho = R sin(theta) and at the origin.
inline std::vector<double> artifact_profile(const ImageGrid& rec, const ImageGrid& exact,
                                            const AcquisitionConfig& cfg, double epsilon = 1e-3) {
  if (rec.size != exact.size || rec.R != exact.R)
    throw std::invalid_argument("artifact_profile: image geometries differ");
  cfg.validate();
  if (!(epsilon > 0.0 && epsilon < cfg.R))
    throw std::invalid_argument("artifact_profile: epsilon must lie in (0, R)");
  constexpr int bins = 50;
  const double width = (cfg.R - epsilon) / bins;
  std::vector<double> sums(bins, 0.0);
  std::vector<long> counts(bins, 0);
  for (int i = 0; i < rec.size; ++i) {
    for (int j = 0; j < rec.size; ++j) {
      const double rho = rec.pixel_center(i, j).norm();
      if (rho <= epsilon || rho >= cfg.R) continue;
      int b = static_cast<int>((rho - epsilon) / width);
      b = std::clamp(b, 0, bins - 1);
      sums[b] += std::abs(rec.at(i, j) - exact.at(i, j));
      ++counts[b];
    }
  }
  std::vector<double> profile(bins, 0.0);
  for (int b = 0; b < bins; ++b)
    if (counts[b] > 0) profile[b] = sums[b] / counts[b];
  return profile;
}

}  // namespace brt
