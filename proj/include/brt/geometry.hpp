#pragma once

#include <cmath>
#include <stdexcept>

namespace brt {

inline constexpr double pi = 3.14159265358979323846;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double a) const { return {a * x, a * y}; }
  double dot(Vec2 o) const { return x * o.x + y * o.y; }
  double cross(Vec2 o) const { return x * o.y - y * o.x; }
  double norm() const { return std::hypot(x, y); }
};

inline Vec2 operator*(double a, Vec2 v) { return {a * v.x, a * v.y}; }

/// Rotates v counterclockwise by `angle` radians.
inline Vec2 rotate(Vec2 v, double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

/// Acquisition geometry shared by the forward simulator and the inversion:
/// disc radius, half scattering angle, and the rotation sense of the broken
/// segment. Both directions of the processing chain must use the same values,
/// so the struct travels with every sinogram and operator cache.
struct AcquisitionConfig {
  double R = 1.0;          ///< disc radius
  double theta = pi / 6;   ///< scattering half-angle, in (0, pi/2)
  int chirality = +1;      ///< +1: inward radial direction rotated counterclockwise by theta

  void validate() const {
    if (!(R > 0.0) || !std::isfinite(R)) throw std::domain_error("AcquisitionConfig: R must be positive and finite");
    if (!(theta > 0.0 && theta < pi / 2)) throw std::domain_error("AcquisitionConfig: theta must lie in (0, pi/2)");
    if (chirality != 1 && chirality != -1) throw std::domain_error("AcquisitionConfig: chirality must be +1 or -1");
  }
};

/// A two-segment measurement path: the ray enters along the diameter through
/// A = R(cos b, sin b), travels to the vertex B = t(cos b, sin b), and breaks
/// by the obtuse angle pi - theta onto the chord BC that exits the disc at C.
struct BrokenRay {
  double beta = 0.0;  ///< source angle
  double t = 0.0;     ///< vertex radius, in [0, R]
  Vec2 A, B, C;
};

/// Constructs the broken ray for source angle `beta` and vertex radius `t`.
/// The second segment's direction is the inward radial direction at B rotated
/// by chirality * theta, which puts its closest approach to the origin at
/// distance t*sin(theta).
inline BrokenRay make_broken_ray(const AcquisitionConfig& cfg, double beta, double t) {
  cfg.validate();
  if (!std::isfinite(beta)) throw std::domain_error("make_broken_ray: beta must be finite");
  if (!(t >= 0.0 && t <= cfg.R)) throw std::domain_error("make_broken_ray: t must lie in [0, R]");

  const Vec2 u{std::cos(beta), std::sin(beta)};
  BrokenRay ray;
  ray.beta = beta;
  ray.t = t;
  ray.A = cfg.R * u;
  ray.B = t * u;

  const Vec2 dir = rotate(-1.0 * u, cfg.chirality * cfg.theta);
  // Chord length from B to the circle along dir: solve |B + s*dir| = R.
  const double proj = t * std::cos(cfg.theta);
  const double chord = proj + std::sqrt(std::max(0.0, cfg.R * cfg.R - t * t * std::sin(cfg.theta) * std::sin(cfg.theta)));
  ray.C = ray.B + chord * dir;
  return ray;
}

/// Total path length |AB| + |BC|.
inline double branch_length(const BrokenRay& ray) {
  return (ray.A - ray.B).norm() + (ray.C - ray.B).norm();
}

/// Polar radius of the point at arc length s from the vertex B along the
/// second segment BC. Strictly decreasing until the closest approach at
/// s = t*cos(theta), strictly increasing afterwards.
inline double polar_radius_along_branch(const BrokenRay& ray, double s) {
  const Vec2 bc = ray.C - ray.B;
  const double len = bc.norm();
  if (!(s >= 0.0 && s <= len)) throw std::domain_error("polar_radius_along_branch: s must lie in [0, |BC|]");
  if (len == 0.0) return ray.B.norm();
  return (ray.B + (s / len) * bc).norm();
}

}  // namespace brt
