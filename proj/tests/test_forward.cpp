#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "brt/forward.hpp"
#include "brt/geometry.hpp"
#include "brt/phantoms.hpp"

using Catch::Approx;
using brt::AcquisitionConfig;
using brt::ImageGrid;
using brt::Sinogram;
using brt::pi;

namespace {

ImageGrid rot90(const ImageGrid& img) {
  ImageGrid out = brt::make_image(img.size, img.R, img.description);
  for (int i = 0; i < img.size; ++i)
    for (int j = 0; j < img.size; ++j) out.at(i, j) = img.at(j, img.size - 1 - i);
  return out;
}

}  // namespace

TEST_CASE("zero image projects to a zero sinogram") {
  const ImageGrid img = brt::make_image(64, 1.0, "");
  const Sinogram s = brt::project(img, AcquisitionConfig{}, 12, 8, 1e-3);
  for (double v : s.values) CHECK(v == 0.0);
}

TEST_CASE("constant disc projects to the branch length") {
  const ImageGrid img =
      brt::phantom_disk(400, 1.0, {0.0, 0.0}, std::nextafter(1.0, 0.0), 1.0);
  AcquisitionConfig cfg;
  const Sinogram s = brt::project(img, cfg, 10, 8, 1e-3);
  const double tol = 2.0 * img.pixel_width();
  for (int i = 0; i < s.M; ++i) {
    for (int j = 0; j < s.N; ++j) {
      const double expected = brt::branch_length(brt::make_broken_ray(cfg, s.beta(j), s.t(i)));
      CHECK(s.at(i, j) == Approx(expected).margin(tol));
    }
  }
}

TEST_CASE("a ray that misses the support integrates to zero") {
  const ImageGrid img = brt::phantom_disk(150, 1.0, {0.05, 0.0}, 0.15, 1.0);
  const Sinogram s = brt::project(img, AcquisitionConfig{}, 10, 2, 1e-3);
  // beta = pi, t near R: both legs stay in the left half plane, far from the disk
  CHECK(s.at(9, 1) == 0.0);
}

TEST_CASE("projection is linear in the image") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ImageGrid a = brt::make_image(50, 1.0, "");
  ImageGrid b = brt::make_image(50, 1.0, "");
  for (auto& v : a.values) v = u(rng);
  for (auto& v : b.values) v = u(rng);
  ImageGrid combo = brt::make_image(50, 1.0, "");
  for (std::size_t k = 0; k < combo.values.size(); ++k)
    combo.values[k] = a.values[k] + 2.0 * b.values[k];

  AcquisitionConfig cfg;
  cfg.theta = 0.7;
  const Sinogram sa = brt::project(a, cfg, 6, 4, 1e-3);
  const Sinogram sb = brt::project(b, cfg, 6, 4, 1e-3);
  const Sinogram sc = brt::project(combo, cfg, 6, 4, 1e-3);
  for (std::size_t k = 0; k < sc.values.size(); ++k)
    CHECK(sc.values[k] == Approx(sa.values[k] + 2.0 * sb.values[k]).margin(1e-10));
}

TEST_CASE("projection commutes with quarter-turn rotations") {
  AcquisitionConfig cfg;
  const int N = 8;

  SECTION("rotationally symmetric image gives matching columns") {
    const ImageGrid img = brt::phantom_disk(100, 1.0, {0.0, 0.0}, 0.4, 1.0);
    const Sinogram s = brt::project(img, cfg, 7, N, 1e-3);
    for (int i = 0; i < s.M; ++i)
      for (int j = 0; j < N; ++j)
        CHECK(s.at(i, j) == Approx(s.at(i, (j + 2) % N)).margin(1e-10));
  }

  SECTION("rotating the image shifts the sinogram columns") {
    const ImageGrid img = brt::phantom_disk(100, 1.0, {0.3, 0.1}, 0.2, 1.0);
    const ImageGrid rot = rot90(img);
    const Sinogram s0 = brt::project(img, cfg, 7, N, 1e-3);
    const Sinogram s1 = brt::project(rot, cfg, 7, N, 1e-3);
    for (int i = 0; i < s0.M; ++i)
      for (int j = 0; j < N; ++j)
        CHECK(s1.at(i, j) == Approx(s0.at(i, (j - 2 + N) % N)).margin(1e-10));
  }
}

TEST_CASE("projection values respect the path-length bound") {
  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  ImageGrid img = brt::make_image(40, 1.0, "");
  for (auto& v : img.values) v = u(rng);
  AcquisitionConfig cfg;
  cfg.theta = 0.5;
  const Sinogram s = brt::project(img, cfg, 9, 6, 1e-3);
  for (int i = 0; i < s.M; ++i) {
    const double len =
        brt::branch_length(brt::make_broken_ray(cfg, 0.0, s.t(i)));
    for (int j = 0; j < s.N; ++j) CHECK(s.at(i, j) <= 2.0 * len + 1e-9);
  }
}

TEST_CASE("projection preconditions") {
  const ImageGrid img = brt::make_image(16, 1.0, "");
  AcquisitionConfig cfg;
  CHECK_THROWS_AS(brt::project(img, cfg, 1, 4, 1e-3), std::invalid_argument);
  CHECK_THROWS_AS(brt::project(img, cfg, 8, 5, 1e-3), std::invalid_argument);
  CHECK_THROWS_AS(brt::project(img, cfg, 8, 4, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(brt::project(img, cfg, 8, 4, 0.2), std::invalid_argument);

  const ImageGrid other = brt::make_image(16, 2.0, "");
  CHECK_THROWS_AS(brt::project(other, cfg, 8, 4, 1e-3), brt::ConfigMismatchError);
}

TEST_CASE("multithreaded projection matches single-threaded") {
  const ImageGrid img = brt::phantom_combined(80, 1.0);
  AcquisitionConfig cfg;
  const Sinogram s1 = brt::project(img, cfg, 20, 8, 1e-3, 1);
  const Sinogram s4 = brt::project(img, cfg, 20, 8, 1e-3, 4);
  CHECK(s1.values == s4.values);
}

TEST_CASE("noise level zero returns identical data") {
  const ImageGrid img = brt::phantom_combined(60, 1.0);
  const Sinogram s = brt::project(img, AcquisitionConfig{}, 8, 4, 1e-3);
  const Sinogram noisy = brt::add_noise(s, 0.0, 42);
  CHECK(noisy.values == s.values);
}

TEST_CASE("noise is reproducible for a fixed seed") {
  Sinogram s;
  s.M = 32;
  s.N = 32;
  s.epsilon = 1e-3;
  s.values.assign(32 * 32, 1.0);
  const Sinogram a = brt::add_noise(s, 0.05, 1234);
  const Sinogram b = brt::add_noise(s, 0.05, 1234);
  const Sinogram c = brt::add_noise(s, 0.05, 1235);
  CHECK(a.values == b.values);
  CHECK(a.values != c.values);
}

TEST_CASE("noise has the requested relative magnitude") {
  Sinogram s;
  s.M = 100;
  s.N = 100;
  s.epsilon = 1e-3;
  s.values.assign(100 * 100, 1.0);
  const Sinogram noisy = brt::add_noise(s, 0.05, 7);
  double sq = 0.0;
  for (double v : noisy.values) sq += (v - 1.0) * (v - 1.0);
  const double rms = std::sqrt(sq / noisy.values.size());
  CHECK(rms > 0.045);
  CHECK(rms < 0.055);
}

TEST_CASE("large noise can push values negative and is kept") {
  Sinogram s;
  s.M = 40;
  s.N = 40;
  s.epsilon = 1e-3;
  s.values.assign(40 * 40, 1.0);
  const Sinogram noisy = brt::add_noise(s, 3.0, 9);
  bool has_negative = false;
  for (double v : noisy.values) has_negative = has_negative || v < 0.0;
  CHECK(has_negative);
  CHECK_THROWS_AS(brt::add_noise(s, -0.1, 0), std::invalid_argument);
}
