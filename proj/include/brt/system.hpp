#pragma once

#include <Eigen/Core>
#include <Eigen/SVD>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "brt/errors.hpp"
#include "brt/geometry.hpp"
#include "brt/kernels.hpp"

namespace brt {

/// Discretized integral operator for one angular harmonic: entries(i-1, k-1)
/// is the quadrature weight a_{i,k} multiplying the unknown f_n(t_k) in the
/// approximation of g_n(t_i), on the shared radial grid t_m = m*h,
/// h = (R - epsilon)/M, m = 1..M.
struct SystemMatrix {
  int n = 0;
  int M = 0;
  double R = 1.0;
  double theta = 0.0;
  double epsilon = 0.0;
  int chirality = +1;
  double h = 0.0;
  Eigen::MatrixXcd entries;
};

namespace detail {

struct GaussRule {
  std::vector<double> x, w;  // nodes and weights on [-1, 1]
};

/// Gauss-Legendre rule computed by Newton iteration on the Legendre
/// recurrence; machine-precision nodes without embedded tables.
inline GaussRule make_gauss_rule(int q) {
  GaussRule r;
  r.x.assign(q, 0.0);
  r.w.assign(q, 0.0);
  for (int i = 0; i < (q + 1) / 2; ++i) {
    double x = std::cos(pi * (i + 0.75) / (q + 0.5));
    double pq = 0.0, dpq = 0.0;
    for (int iter = 0; iter < 64; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < q; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2 * j + 1) * x * p1 - j * p2) / (j + 1);
      }
      pq = p0;
      dpq = q * (x * p0 - p1) / (x * x - 1.0);
      const double dx = pq / dpq;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    r.x[i] = -x;
    r.x[q - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * dpq * dpq);
    r.w[i] = w;
    r.w[q - 1 - i] = w;
  }
  return r;
}

inline const GaussRule& assembler_gauss_rule() {
  static const GaussRule rule = make_gauss_rule(24);
  return rule;
}

/// One precomputed kernel evaluation point of a matrix row. The kernel value
/// for harmonic n follows from the stored n-independent factors as
///   K_n = base - e^{i n psi_bar} frac1 + (-1)^n e^{i n psi} frac2,
/// and contributes weight w0 to column `col` and w1 to column `col + 1`.
struct QuadNode {
  int col;  // -1 allowed when w0 == 0 (dropped hat at the excluded node t_0)
  double w0, w1;
  double base, frac1, frac2;
  double psi, psi_bar;
};

}  // namespace detail

/// Builds the per-row quadrature data for the product-integration scheme once
/// and assembles the matrix of any harmonic from it.
///
/// Scheme per row i (integration range [t_i sin(theta), R - epsilon]):
///  - Cells inside a fixed-width band above the lower limit, where the kernel
///    has an integrable inverse-square-root singularity, and the cell
///    [t_{i-1}, t_i] containing the kernel's jump, are integrated by moments:
///    the unknown is replaced by its piecewise-linear interpolant and
///    kernel x interpolant is integrated by Gauss quadrature under the
///    substitution rho = rho_s + u^2, which makes the integrand analytic.
///  - All remaining cells use plain trapezoid-on-product weights, i.e. h/2
///    times the kernel value at each cell edge.
/// The band has fixed physical width (not a fixed cell count), which keeps
/// the composite error O(h^2) uniformly in the row index; with trapezoid
/// weights at the singular cells the error would degrade to O(sqrt(h)).
/// The moment treatment also removes the need for any endpoint clamp at
/// ratios near the singular point 1/sin(theta): quadrature nodes never touch
/// it, and lower limits that collide with grid points only shift weights at
/// the scale of the collision offset.
class SystemAssembler {
 public:
  SystemAssembler(const AcquisitionConfig& cfg, int M, double epsilon)
      : cfg_(cfg), M_(M), epsilon_(epsilon) {
    cfg.validate();
    if (M < 2) throw std::invalid_argument("SystemAssembler: M must be at least 2");
    if (!(epsilon > 0.0 && epsilon <= 0.1 * cfg.R))
      throw std::invalid_argument("SystemAssembler: epsilon must satisfy 0 < epsilon <= R/10");
    h_ = (cfg.R - epsilon) / M;

    const double s = std::sin(cfg.theta);
    const double band = std::max(3.0 * h_, 0.08 * cfg.R);
    const int extra_cells = static_cast<int>(std::ceil(band / h_));
    const detail::GaussRule& gauss = detail::assembler_gauss_rule();

    rows_.resize(M);
    std::vector<double> node_weight(static_cast<std::size_t>(M) + 1);
    for (int i = 1; i <= M; ++i) {
      std::vector<detail::QuadNode>& row = rows_[i - 1];
      const double ti = i * h_;
      const double rho_s = ti * s;

      // Cell index holding the lower limit; exact grid hits (which occur for
      // rational sin(theta) up to roundoff) are snapped so that degenerate
      // sliver cells cannot appear.
      const double frac_index = i * s;
      long c0 = static_cast<long>(std::floor(frac_index));
      const long nearest = std::lround(frac_index);
      if (std::abs(frac_index - nearest) < 1e-9 * std::max(1.0, static_cast<double>(nearest)))
        c0 = nearest;
      if (c0 > M - 1) c0 = M - 1;
      const long band_end = std::min<long>(c0 + extra_cells, M - 1);

      auto add_moment_cell = [&](long c) {
        const double lo = std::max(c * h_, rho_s);
        const double hi = (c + 1) * h_;
        if (hi <= lo) return;
        const double ua = std::sqrt(lo - rho_s);
        const double ub = std::sqrt(hi - rho_s);
        const double mid = 0.5 * (ua + ub), halfw = 0.5 * (ub - ua);
        for (std::size_t q = 0; q < gauss.x.size(); ++q) {
          const double u = mid + halfw * gauss.x[q];
          const double rho = rho_s + u * u;
          const double wq = halfw * gauss.w[q] * 2.0 * u;
          const KernelFactors f = kernel_factors(ti / rho, cfg.theta);
          const double hat_left = ((c + 1) * h_ - rho) / h_;
          const double hat_right = (rho - c * h_) / h_;
          detail::QuadNode node;
          node.col = static_cast<int>(c) - 1;
          node.w0 = (c >= 1) ? wq * hat_left : 0.0;  // node t_0 is not an unknown
          node.w1 = wq * hat_right;
          node.base = f.base;
          node.frac1 = f.frac1;
          node.frac2 = f.frac2;
          node.psi = f.psi;
          node.psi_bar = f.psi_bar;
          row.push_back(node);
        }
      };

      for (long c = c0; c <= band_end; ++c) add_moment_cell(c);
      if (i - 1 > band_end) add_moment_cell(i - 1);  // jump cell, kept at full accuracy

      // Composite trapezoid weights for the remaining cells, accumulated per
      // node: interior nodes collect h, nodes adjacent to a moment cell h/2.
      std::fill(node_weight.begin(), node_weight.end(), 0.0);
      for (long c = band_end + 1; c <= M - 1; ++c) {
        if (c == i - 1) continue;
        node_weight[c] += 0.5 * h_;
        node_weight[c + 1] += 0.5 * h_;
      }
      for (int k = 1; k <= M; ++k) {
        if (node_weight[k] == 0.0) continue;
        const KernelFactors f = kernel_factors(static_cast<double>(i) / k, cfg_.theta);
        detail::QuadNode node;
        node.col = k - 1;
        node.w0 = node_weight[k];
        node.w1 = 0.0;
        node.base = f.base;
        node.frac1 = f.frac1;
        node.frac2 = f.frac2;
        node.psi = f.psi;
        node.psi_bar = f.psi_bar;
        row.push_back(node);
      }
      row.shrink_to_fit();
    }
  }

  int M() const { return M_; }
  double h() const { return h_; }
  double epsilon() const { return epsilon_; }
  const AcquisitionConfig& config() const { return cfg_; }

  /// Assembles the matrix of harmonic n. Thread-safe and deterministic.
  SystemMatrix assemble(int n) const {
    SystemMatrix A;
    A.n = n;
    A.M = M_;
    A.R = cfg_.R;
    A.theta = cfg_.theta;
    A.epsilon = epsilon_;
    A.chirality = cfg_.chirality;
    A.h = h_;
    A.entries = Eigen::MatrixXcd::Zero(M_, M_);
    const double sign = detail::sign_pow(n);
    for (int i = 0; i < M_; ++i) {
      for (const detail::QuadNode& node : rows_[i]) {
        const std::complex<double> value =
            std::complex<double>(node.base, 0.0) -
            std::polar(1.0, n * node.psi_bar) * node.frac1 +
            sign * std::polar(1.0, n * node.psi) * node.frac2;
        if (node.w0 != 0.0) A.entries(i, node.col) += node.w0 * value;
        if (node.w1 != 0.0) A.entries(i, node.col + 1) += node.w1 * value;
      }
    }
    return A;
  }

 private:
  AcquisitionConfig cfg_;
  int M_;
  double epsilon_;
  double h_ = 0.0;
  std::vector<std::vector<detail::QuadNode>> rows_;
};

/// One-shot assembly of a single harmonic's matrix.
inline SystemMatrix assemble(int n, const AcquisitionConfig& cfg, int M, double epsilon) {
  return SystemAssembler(cfg, M, epsilon).assemble(n);
}

/// Applies the discretized operator: approximates the integral transform of
/// the radial samples f with O(h^2) accuracy for smooth profiles.
inline Eigen::VectorXcd forward_apply(const SystemMatrix& A, const Eigen::VectorXcd& f) {
  if (f.size() != A.M) throw std::invalid_argument("forward_apply: dimension mismatch");
  return A.entries * f;
}

/// Rank-truncated pseudoinverse of one harmonic's matrix with its full
/// singular spectrum kept for diagnostics.
struct TruncatedOperator {
  int n = 0;
  int rank = 0;
  Eigen::VectorXd sigma;   ///< all M singular values, nonincreasing
  Eigen::MatrixXcd pinv;   ///< V * D_r^{-1} * U^H

  double cond_full() const { return sigma(0) / sigma(sigma.size() - 1); }
  double cond_truncated() const { return sigma(0) / sigma(rank - 1); }
  /// Spectral distance between the matrix and its rank-r truncation.
  double truncation_error() const { return rank < sigma.size() ? sigma(rank) : 0.0; }
};

/// Computes the SVD A = U diag(sigma) V^H (conjugate-transpose factors),
/// zeroes all singular values past `rank`, and returns the rank-r
/// pseudoinverse together with the full spectrum.
inline TruncatedOperator truncated_svd(const SystemMatrix& A, int rank) {
  if (rank < 1 || rank > A.M) throw std::invalid_argument("truncated_svd: rank must lie in [1, M]");
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(A.entries, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  if (!(sv(rank - 1) > 0.0)) {
    int usable = 0;
    while (usable < A.M && sv(usable) > 0.0) ++usable;
    throw RankDeficiencyError(A.n, rank, usable);
  }
  TruncatedOperator op;
  op.n = A.n;
  op.rank = rank;
  op.sigma = sv;
  op.pinv = svd.matrixV().leftCols(rank) * sv.head(rank).cwiseInverse().asDiagonal() *
            svd.matrixU().leftCols(rank).adjoint();
  return op;
}

/// Applies the truncated pseudoinverse to one harmonic's data vector.
inline Eigen::VectorXcd solve(const TruncatedOperator& op, const Eigen::VectorXcd& g) {
  if (g.size() != op.pinv.cols()) throw std::invalid_argument("solve: dimension mismatch");
  return op.pinv * g;
}

/// Precomputed inversion operators for all stored harmonics n = 0..N/2,
/// together with the acquisition and discretization parameters they were
/// built for. Serialized to a little-endian binary file.
struct OperatorCache {
  AcquisitionConfig cfg;
  int M = 0;
  int N = 0;
  int rank = 0;
  double epsilon = 0.0;
  std::vector<TruncatedOperator> ops;  ///< index n = 0..N/2
};

namespace detail {

inline constexpr char cache_magic[7] = {'B', 'R', 'T', 'O', 'P', 'v', '1'};

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xff));
}

inline void put_f64(std::string& out, double v) {
  const std::uint64_t u = std::bit_cast<std::uint64_t>(v);
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((u >> (8 * b)) & 0xff));
}

class ByteReader {
 public:
  explicit ByteReader(std::istream& is, std::string path) : is_(is), path_(std::move(path)) {}

  void bytes(char* dst, std::size_t count) {
    is_.read(dst, static_cast<std::streamsize>(count));
    if (static_cast<std::size_t>(is_.gcount()) != count)
      throw std::runtime_error("operator cache '" + path_ + "': unexpected end of file");
  }

  std::uint32_t u32() {
    unsigned char b[4];
    bytes(reinterpret_cast<char*>(b), 4);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
  }

  double f64() {
    unsigned char b[8];
    bytes(reinterpret_cast<char*>(b), 8);
    std::uint64_t u = 0;
    for (int k = 7; k >= 0; --k) u = (u << 8) | b[k];
    return std::bit_cast<double>(u);
  }

  std::int8_t i8() {
    char b;
    bytes(&b, 1);
    return static_cast<std::int8_t>(b);
  }

 private:
  std::istream& is_;
  std::string path_;
};

}  // namespace detail

/// Writes the cache in its binary format: magic "BRTOPv1"; u32 M, N, rank;
/// f64 R, theta, epsilon; i8 chirality; then per harmonic n = 0..N/2 a u32 n,
/// M singular values, and the M x M pseudoinverse as interleaved (re, im)
/// doubles in row-major order. All numbers little-endian.
inline void write_operator_cache(const OperatorCache& cache, const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("operator cache '" + path + "': cannot open for writing");

  std::string buf;
  buf.reserve(64);
  buf.append(detail::cache_magic, sizeof detail::cache_magic);
  detail::put_u32(buf, static_cast<std::uint32_t>(cache.M));
  detail::put_u32(buf, static_cast<std::uint32_t>(cache.N));
  detail::put_u32(buf, static_cast<std::uint32_t>(cache.rank));
  detail::put_f64(buf, cache.cfg.R);
  detail::put_f64(buf, cache.cfg.theta);
  detail::put_f64(buf, cache.epsilon);
  buf.push_back(static_cast<char>(cache.cfg.chirality));
  os.write(buf.data(), static_cast<std::streamsize>(buf.size()));

  const int M = cache.M;
  for (std::size_t idx = 0; idx < cache.ops.size(); ++idx) {
    const TruncatedOperator& op = cache.ops[idx];
    buf.clear();
    buf.reserve(4 + 8 * static_cast<std::size_t>(M) * (1 + 2 * M));
    detail::put_u32(buf, static_cast<std::uint32_t>(op.n));
    for (int k = 0; k < M; ++k) detail::put_f64(buf, op.sigma(k));
    for (int r = 0; r < M; ++r) {
      for (int c = 0; c < M; ++c) {
        const std::complex<double> v = op.pinv(r, c);
        detail::put_f64(buf, v.real());
        detail::put_f64(buf, v.imag());
      }
    }
    os.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  }
  if (!os) throw std::runtime_error("operator cache '" + path + "': write failed");
}

inline OperatorCache read_operator_cache(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("operator cache '" + path + "': cannot open");
  detail::ByteReader in(is, path);

  char magic[sizeof detail::cache_magic];
  in.bytes(magic, sizeof magic);
  if (!std::equal(std::begin(magic), std::end(magic), std::begin(detail::cache_magic)))
    throw std::runtime_error("operator cache '" + path + "': bad magic (not a cache file)");

  OperatorCache cache;
  cache.M = static_cast<int>(in.u32());
  cache.N = static_cast<int>(in.u32());
  cache.rank = static_cast<int>(in.u32());
  cache.cfg.R = in.f64();
  cache.cfg.theta = in.f64();
  cache.epsilon = in.f64();
  cache.cfg.chirality = in.i8();
  if (cache.M < 1 || cache.N < 2 || cache.N % 2 != 0 || cache.rank < 1 || cache.rank > cache.M)
    throw std::runtime_error("operator cache '" + path + "': inconsistent header");

  const int M = cache.M;
  cache.ops.resize(cache.N / 2 + 1);
  for (int n = 0; n <= cache.N / 2; ++n) {
    TruncatedOperator& op = cache.ops[n];
    const std::uint32_t stored_n = in.u32();
    if (stored_n != static_cast<std::uint32_t>(n))
      throw std::runtime_error("operator cache '" + path + "': harmonic blocks out of order");
    op.n = n;
    op.rank = cache.rank;
    op.sigma.resize(M);
    for (int k = 0; k < M; ++k) op.sigma(k) = in.f64();
    op.pinv.resize(M, M);
    for (int r = 0; r < M; ++r) {
      for (int c = 0; c < M; ++c) {
        const double re = in.f64();
        const double im = in.f64();
        op.pinv(r, c) = {re, im};
      }
    }
  }
  return cache;
}

}  // namespace brt
