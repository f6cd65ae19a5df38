#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "brt/errors.hpp"
#include "brt/geometry.hpp"
#include "brt/parallel.hpp"
#include "brt/phantoms.hpp"

namespace brt {

/// Sampled transform data. Entry (i, j) holds the path integral for vertex
/// radius t_{i+1} = (i+1)*(R-epsilon)/M and source angle beta_j = 2*pi*j/N,
/// stored row-major with the radial index as the row.
struct Sinogram {
  AcquisitionConfig cfg;
  int M = 0;             ///< radial sample count
  int N = 0;             ///< angular sample count (even)
  double epsilon = 0.0;  ///< radial puncture; the grid spans (0, R-epsilon]
  std::vector<double> values;

  double radial_step() const { return (cfg.R - epsilon) / M; }
  double t(int i) const { return (i + 1) * radial_step(); }
  double beta(int j) const { return 2.0 * pi * j / N; }

  double& at(int i, int j) { return values[static_cast<std::size_t>(i) * N + j]; }
  double at(int i, int j) const { return values[static_cast<std::size_t>(i) * N + j]; }
};

namespace detail {

/// Exact line integral of the raster image along the segment [p0, p1]:
/// the segment is cut at every pixel boundary it crosses and each piece
/// contributes its length times the pixel value at its midpoint.
inline double integrate_segment(const ImageGrid& img, Vec2 p0, Vec2 p1, std::vector<double>& cuts) {
  const Vec2 d = p1 - p0;
  const double len = d.norm();
  if (len == 0.0) return 0.0;
  const double w = img.pixel_width();

  cuts.clear();
  cuts.push_back(0.0);
  cuts.push_back(len);
  if (d.x != 0.0) {
    for (int m = 0; m <= img.size; ++m) {
      const double s = (-img.R + m * w - p0.x) * len / d.x;
      if (s > 0.0 && s < len) cuts.push_back(s);
    }
  }
  if (d.y != 0.0) {
    for (int m = 0; m <= img.size; ++m) {
      const double s = (img.R - m * w - p0.y) * len / d.y;
      if (s > 0.0 && s < len) cuts.push_back(s);
    }
  }
  std::sort(cuts.begin(), cuts.end());

  double sum = 0.0;
  for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
    const double piece = cuts[c + 1] - cuts[c];
    if (piece <= 0.0) continue;
    const double mid = cuts[c] + piece / 2;
    const double x = p0.x + mid / len * d.x;
    const double y = p0.y + mid / len * d.y;
    const int j = static_cast<int>(std::floor((x + img.R) / w));
    const int i = static_cast<int>(std::floor((img.R - y) / w));
    if (i < 0 || i >= img.size || j < 0 || j >= img.size) continue;
    sum += piece * img.at(i, j);
  }
  return sum;
}

/// Deterministic standard-normal stream: explicit Box-Muller over a
/// mt19937_64 stream, so identical seeds give identical noise on every
/// platform (the distribution adapters in the standard library do not pin
/// their output sequence).
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : rng_(seed) {}

  double next() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * pi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

 private:
  double uniform01() {  // uniform on (0, 1]; never 0, so the log is safe
    return (static_cast<double>(rng_() >> 11) + 1.0) * 0x1.0p-53;
  }

  std::mt19937_64 rng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace detail

/// Simulates the transform of `img` on an M x N (radius x angle) grid by
/// exact ray-pixel clipping of both path segments.
inline Sinogram project(const ImageGrid& img, const AcquisitionConfig& cfg, int M, int N,
                        double epsilon, int threads = 1) {
  cfg.validate();
  if (img.R != cfg.R)
    throw ConfigMismatchError("R", "image half-width " + std::to_string(img.R) +
                                       " vs acquisition radius " + std::to_string(cfg.R));
  if (M < 2) throw std::invalid_argument("project: M must be at least 2");
  if (N < 2 || N % 2 != 0) throw std::invalid_argument("project: N must be even and at least 2");
  if (!(epsilon > 0.0 && epsilon <= 0.1 * cfg.R))
    throw std::invalid_argument("project: epsilon must satisfy 0 < epsilon <= R/10");

  Sinogram s;
  s.cfg = cfg;
  s.M = M;
  s.N = N;
  s.epsilon = epsilon;
  s.values.assign(static_cast<std::size_t>(M) * N, 0.0);

  parallel_for(0, M, threads, [&](int i) {
    std::vector<double> cuts;
    cuts.reserve(2 * img.size + 4);
    for (int j = 0; j < N; ++j) {
      const BrokenRay ray = make_broken_ray(cfg, s.beta(j), s.t(i));
      s.at(i, j) = detail::integrate_segment(img, ray.A, ray.B, cuts) +
                   detail::integrate_segment(img, ray.B, ray.C, cuts);
    }
  });
  return s;
}

/// Returns a copy of `s` with multiplicative Gaussian noise:
/// value' = value * (1 + level * xi), xi ~ N(0,1), drawn in row-major order
/// from a seeded deterministic stream. Negative results are kept; the
/// inversion is linear and clipping would bias it.
inline Sinogram add_noise(const Sinogram& s, double level, std::uint64_t seed) {
  if (level < 0.0) throw std::invalid_argument("add_noise: level must be nonnegative");
  Sinogram out = s;
  if (level == 0.0) return out;
  detail::GaussianStream gauss(seed);
  for (double& v : out.values) v *= 1.0 + level * gauss.next();
  return out;
}

}  // namespace brt
