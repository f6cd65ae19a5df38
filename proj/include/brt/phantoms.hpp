#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "brt/geometry.hpp"

namespace brt {

/// Square raster over [-R, R]^2, row-major. Cell (i, j) is centered at
/// x = -R + (j + 1/2) * 2R/size, y = R - (i + 1/2) * 2R/size, i.e. row index
/// grows downward as in image conventions.
struct ImageGrid {
  int size = 0;
  double R = 1.0;
  std::string description;
  std::vector<double> values;  ///< size*size entries, row-major

  double pixel_width() const { return 2.0 * R / size; }

  Vec2 pixel_center(int i, int j) const {
    const double w = pixel_width();
    return {-R + (j + 0.5) * w, R - (i + 0.5) * w};
  }

  double& at(int i, int j) { return values[static_cast<std::size_t>(i) * size + j]; }
  double at(int i, int j) const { return values[static_cast<std::size_t>(i) * size + j]; }

  /// Sum of values times pixel area.
  double mass() const {
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum * pixel_width() * pixel_width();
  }
};

inline ImageGrid make_image(int size, double R, std::string description = {}) {
  if (size < 1) throw std::invalid_argument("ImageGrid: size must be at least 1");
  if (!(R > 0.0)) throw std::invalid_argument("ImageGrid: R must be positive");
  ImageGrid img;
  img.size = size;
  img.R = R;
  img.description = std::move(description);
  img.values.assign(static_cast<std::size_t>(size) * size, 0.0);
  return img;
}

/// Constant-intensity disk, rasterized by pixel-center membership. The disk
/// must fit inside the disc of radius R so that the support assumption of the
/// transform holds.
inline ImageGrid phantom_disk(int size, double R, Vec2 center, double radius, double intensity) {
  if (radius < 0.0) throw std::domain_error("phantom_disk: radius must be nonnegative");
  if (center.norm() + radius > R) throw std::domain_error("phantom_disk: disk extends outside the disc of radius R");
  ImageGrid img = make_image(size, R, "disk phantom");
  for (int i = 0; i < size; ++i) {
    for (int j = 0; j < size; ++j) {
      const Vec2 p = img.pixel_center(i, j) - center;
      if (p.x * p.x + p.y * p.y <= radius * radius) img.at(i, j) = intensity;
    }
  }
  return img;
}

/// Multi-feature phantom: three disks of distinct intensities plus a hollow
/// square frame. Positions are fixed constants of the toolkit, scaled by R.
/// One disk sits near the origin; the others and the frame probe the annulus
/// around the critical circle rho = R/2 (= R sin(theta) for theta = pi/6),
/// where reconstructions from radially limited data lose resolution: the
/// frame's material spans radii from about 0.22 R to 0.79 R, straddling it.
inline ImageGrid phantom_combined(int size, double R) {
  if (size < 2) throw std::invalid_argument("phantom_combined: size must be at least 2");
  ImageGrid img = make_image(size, R, "combined phantom");

  struct Disk {
    Vec2 c;
    double r, v;
  };
  const Disk disks[] = {
      {{0.05, 0.00}, 0.15, 1.00},
      {{-0.55, 0.35}, 0.12, 0.75},
      {{0.30, -0.60}, 0.10, 1.25},
  };
  const Vec2 frame_center{0.38, 0.33};
  const double frame_outer = 0.20, frame_inner = 0.13, frame_value = 0.80;

  for (int i = 0; i < size; ++i) {
    for (int j = 0; j < size; ++j) {
      const Vec2 p = img.pixel_center(i, j);
      double v = 0.0;
      for (const Disk& d : disks) {
        const Vec2 q = p - (R * d.c);
        if (q.x * q.x + q.y * q.y <= (R * d.r) * (R * d.r)) v += d.v;
      }
      const Vec2 q = p - (R * frame_center);
      const double cheb = std::max(std::abs(q.x), std::abs(q.y));
      if (cheb <= frame_outer * R && cheb > frame_inner * R) v += frame_value;
      img.at(i, j) = v;
    }
  }
  return img;
}

}  // namespace brt
