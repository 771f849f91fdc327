#pragma once

// Benchmark problems: least squares over the spectrahedron and a strongly
// convex box-constrained QP with a known minimizer.

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "ipg/linalg.hpp"
#include "ipg/rng.hpp"

namespace ipg {

/// Objective oracle over a point type. lipschitz() and strong_convexity()
/// return nullopt when unknown.
template <class F>
concept Objective = requires(const F& f, const typename F::point_type& x) {
  { f.value(x) } -> std::convertible_to<double>;
  { f.gradient(x) } -> std::same_as<typename F::point_type>;
  { f.lipschitz() } -> std::convertible_to<std::optional<double>>;
  { f.strong_convexity() } -> std::convertible_to<std::optional<double>>;
};

/// Density used when none is given: 1e-4, raised on small instances to 0.4
/// nonzeros per column of A (the count 1e-4 gives at m = 4000) and to at
/// least 20 nonzeros overall.
inline double default_density(Index n, Index m) {
  const double nd = static_cast<double>(n);
  const double md = static_cast<double>(m);
  return std::min(1.0, std::max({1e-4, 0.4 / md, 20.0 / (nd * md)}));
}

/// f(X) = 1/2 |A X - B|_F^2 over symmetric X, with A sparse m x n and B
/// dense m x n.
class SpectrahedronLSQ {
 public:
  using point_type = SymMatrix;
  using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor, std::int64_t>;

  struct Metadata {
    Index n = 0;
    Index m = 0;
    std::int64_t omega = 0;
    double density = 0.0;
    std::uint64_t seed = 0;
  };

  SpectrahedronLSQ(Metadata meta, SparseMatrix a, Eigen::MatrixXd b)
      : meta_(meta), a_(std::move(a)), b_(std::move(b)) {
    if (a_.rows() != meta_.m || a_.cols() != meta_.n || b_.rows() != meta_.m ||
        b_.cols() != meta_.n) {
      throw std::invalid_argument("SpectrahedronLSQ: A and B must be m x n");
    }
    a_.makeCompressed();
    const Eigen::MatrixXd ata = Eigen::MatrixXd(a_.transpose() * a_);
    lipschitz_ = ata.norm();
  }

  const Metadata& metadata() const { return meta_; }
  Index n() const { return meta_.n; }
  Index m() const { return meta_.m; }
  const SparseMatrix& a() const { return a_; }
  const Eigen::MatrixXd& b() const { return b_; }

  double value(const SymMatrix& x) const {
    check(x);
    return 0.5 * (a_ * x.matrix() - b_).squaredNorm();
  }
  SymMatrix gradient(const SymMatrix& x) const {
    check(x);
    const Eigen::MatrixXd residual = a_ * x.matrix() - b_;
    return SymMatrix::from_square(a_.transpose() * residual);
  }
  /// |A^T A|_F
  std::optional<double> lipschitz() const { return lipschitz_; }
  std::optional<double> strong_convexity() const { return std::nullopt; }
  static constexpr bool is_convex() { return true; }

  friend bool operator==(const SpectrahedronLSQ& x, const SpectrahedronLSQ& y) {
    return x.meta_.n == y.meta_.n && x.meta_.m == y.meta_.m && x.meta_.omega == y.meta_.omega &&
           x.meta_.density == y.meta_.density && x.meta_.seed == y.meta_.seed &&
           x.a_.nonZeros() == y.a_.nonZeros() &&
           Eigen::MatrixXd(x.a_) == Eigen::MatrixXd(y.a_) && x.b_ == y.b_;
  }

 private:
  void check(const SymMatrix& x) const {
    if (x.dim() != meta_.n) throw std::invalid_argument("SpectrahedronLSQ: X has wrong size");
  }

  Metadata meta_;
  SparseMatrix a_;
  Eigen::MatrixXd b_;
  double lipschitz_ = 0.0;
};

/// The planted matrix sum_i g_i g_i^T, each g_i with entries (cos t, sin t)
/// at two distinct random positions. Uses its own RNG streams, so it can be
/// regenerated from the seed alone.
inline Eigen::MatrixXd planted_matrix(Index n, std::int64_t omega, std::uint64_t seed) {
  Rng positions(seed, Rng::Stream::kRankOnePositions);
  Rng angles(seed, Rng::Stream::kAngles);
  Eigen::MatrixXd xbar = Eigen::MatrixXd::Zero(n, n);
  for (std::int64_t i = 0; i < omega; ++i) {
    const auto j1 = static_cast<Index>(positions.below(static_cast<std::uint64_t>(n)));
    auto j2 = static_cast<Index>(positions.below(static_cast<std::uint64_t>(n - 1)));
    if (j2 >= j1) ++j2;
    const double theta = angles.uniform(0.0, 2.0 * std::numbers::pi);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
    g(j1) = std::cos(theta);
    g(j2) = std::sin(theta);
    xbar += g * g.transpose();
  }
  return xbar;
}

/// Random instance: A has round(density n m) (at least one) nonzeros at
/// distinct positions, values uniform in (-1, 1); B = A Xbar with Xbar the
/// planted matrix. Deterministic in the seed.
inline SpectrahedronLSQ generate_instance(Index n, Index m, std::int64_t omega, double density,
                                          std::uint64_t seed) {
  if (n < 2 || m < n) throw std::invalid_argument("generate_instance: need m >= n >= 2");
  if (omega < 2) throw std::invalid_argument("generate_instance: omega must be > 1");
  if (!(density > 0.0 && density <= 1.0)) {
    throw std::invalid_argument("generate_instance: density must lie in (0, 1]");
  }
  const auto cells = static_cast<std::uint64_t>(n) * static_cast<std::uint64_t>(m);
  const auto nnz = std::max<std::uint64_t>(
      1, std::min<std::uint64_t>(cells, static_cast<std::uint64_t>(std::llround(density * cells))));

  Rng pattern(seed, Rng::Stream::kSparsePattern);
  std::unordered_set<std::uint64_t> taken;
  std::vector<Eigen::Triplet<double, std::int64_t>> triplets;
  triplets.reserve(nnz);
  while (triplets.size() < nnz) {
    const std::uint64_t cell = pattern.below(cells);
    if (!taken.insert(cell).second) continue;
    double value = 0.0;
    while (value == 0.0 || value == -1.0) value = pattern.uniform(-1.0, 1.0);
    triplets.emplace_back(static_cast<std::int64_t>(cell / static_cast<std::uint64_t>(n)),
                          static_cast<std::int64_t>(cell % static_cast<std::uint64_t>(n)), value);
  }
  SpectrahedronLSQ::SparseMatrix a(m, n);
  a.setFromTriplets(triplets.begin(), triplets.end());

  const Eigen::MatrixXd xbar = planted_matrix(n, omega, seed);
  Eigen::MatrixXd b = a * xbar;
  return SpectrahedronLSQ({n, m, omega, density, seed}, std::move(a), std::move(b));
}

/// (1 - beta) I / n + beta e1 e1^T
inline SymMatrix starting_point(double beta, Index n) {
  if (!(beta >= 0.0 && beta <= 1.0)) throw std::invalid_argument("starting_point: beta in [0, 1]");
  if (n < 1) throw std::invalid_argument("starting_point: n must be >= 1");
  Eigen::VectorXd d = Eigen::VectorXd::Constant(n, (1.0 - beta) / static_cast<double>(n));
  d(0) += beta;
  return SymMatrix::diagonal(d);
}

// ---------------------------------------------------------------------------
// Instance container.
//
// Little-endian binary:
//   magic "IPGLSQ\0\0" (8 bytes), u64 format version (1),
//   u64 n, u64 m, u64 omega, f64 density, u64 seed, u64 nnz,
//   nnz x (u64 row, u64 col, f64 value), then B as m * n f64, row-major.

namespace detail {

inline constexpr std::array<char, 8> kInstanceMagic = {'I', 'P', 'G', 'L', 'S', 'Q', '\0', '\0'};
inline constexpr std::uint64_t kInstanceVersion = 1;

inline void put_u64(std::ostream& out, std::uint64_t x) {
  std::array<char, 8> bytes{};
  for (int i = 0; i < 8; ++i) bytes[static_cast<std::size_t>(i)] = static_cast<char>((x >> (8 * i)) & 0xFF);
  out.write(bytes.data(), 8);
}
inline void put_f64(std::ostream& out, double x) { put_u64(out, std::bit_cast<std::uint64_t>(x)); }

inline std::uint64_t get_u64(std::istream& in) {
  std::array<unsigned char, 8> bytes{};
  in.read(reinterpret_cast<char*>(bytes.data()), 8);
  if (!in) throw std::runtime_error("instance file truncated");
  std::uint64_t x = 0;
  for (int i = 7; i >= 0; --i) x = (x << 8) | bytes[static_cast<std::size_t>(i)];
  return x;
}
inline double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }

}  // namespace detail

inline void save_instance(const SpectrahedronLSQ& inst, std::ostream& out) {
  const auto& meta = inst.metadata();
  out.write(detail::kInstanceMagic.data(), 8);
  detail::put_u64(out, detail::kInstanceVersion);
  detail::put_u64(out, static_cast<std::uint64_t>(meta.n));
  detail::put_u64(out, static_cast<std::uint64_t>(meta.m));
  detail::put_u64(out, static_cast<std::uint64_t>(meta.omega));
  detail::put_f64(out, meta.density);
  detail::put_u64(out, meta.seed);
  const auto& a = inst.a();
  detail::put_u64(out, static_cast<std::uint64_t>(a.nonZeros()));
  for (Index col = 0; col < a.outerSize(); ++col) {
    for (SpectrahedronLSQ::SparseMatrix::InnerIterator it(a, col); it; ++it) {
      detail::put_u64(out, static_cast<std::uint64_t>(it.row()));
      detail::put_u64(out, static_cast<std::uint64_t>(it.col()));
      detail::put_f64(out, it.value());
    }
  }
  for (Index i = 0; i < meta.m; ++i) {
    for (Index j = 0; j < meta.n; ++j) detail::put_f64(out, inst.b()(i, j));
  }
  if (!out) throw std::runtime_error("failed to write instance");
}

inline SpectrahedronLSQ load_instance(std::istream& in) {
  std::array<char, 8> magic{};
  in.read(magic.data(), 8);
  if (!in || magic != detail::kInstanceMagic) throw std::runtime_error("not an instance file");
  const std::uint64_t version = detail::get_u64(in);
  if (version != detail::kInstanceVersion) {
    throw std::runtime_error("unsupported instance format version " + std::to_string(version));
  }
  SpectrahedronLSQ::Metadata meta;
  meta.n = static_cast<Index>(detail::get_u64(in));
  meta.m = static_cast<Index>(detail::get_u64(in));
  meta.omega = static_cast<std::int64_t>(detail::get_u64(in));
  meta.density = detail::get_f64(in);
  meta.seed = detail::get_u64(in);
  const std::uint64_t nnz = detail::get_u64(in);
  if (meta.n < 1 || meta.m < 1 || nnz > static_cast<std::uint64_t>(meta.n * meta.m)) {
    throw std::runtime_error("corrupt instance header");
  }
  std::vector<Eigen::Triplet<double, std::int64_t>> triplets;
  triplets.reserve(nnz);
  for (std::uint64_t k = 0; k < nnz; ++k) {
    const auto row = static_cast<std::int64_t>(detail::get_u64(in));
    const auto col = static_cast<std::int64_t>(detail::get_u64(in));
    const double value = detail::get_f64(in);
    if (row < 0 || row >= meta.m || col < 0 || col >= meta.n) {
      throw std::runtime_error("instance triplet out of range");
    }
    triplets.emplace_back(row, col, value);
  }
  SpectrahedronLSQ::SparseMatrix a(meta.m, meta.n);
  a.setFromTriplets(triplets.begin(), triplets.end());
  Eigen::MatrixXd b(meta.m, meta.n);
  for (Index i = 0; i < meta.m; ++i) {
    for (Index j = 0; j < meta.n; ++j) b(i, j) = detail::get_f64(in);
  }
  return SpectrahedronLSQ(meta, std::move(a), std::move(b));
}

inline void save_instance(const SpectrahedronLSQ& inst, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  save_instance(inst, out);
}
inline SpectrahedronLSQ load_instance(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return load_instance(in);
}

// ---------------------------------------------------------------------------

/// f(x) = 1/2 x^T Q x - b^T x over a box, Q symmetric positive definite.
class BoxQP {
 public:
  using point_type = Eigen::VectorXd;

  BoxQP(Eigen::MatrixXd q, Eigen::VectorXd b, Eigen::VectorXd lo, Eigen::VectorXd hi,
        std::optional<Eigen::VectorXd> minimizer = std::nullopt)
      : q_(std::move(q)), b_(std::move(b)), lo_(std::move(lo)), hi_(std::move(hi)),
        minimizer_(std::move(minimizer)) {
    if (q_.rows() != q_.cols() || q_.rows() != b_.size() || lo_.size() != b_.size() ||
        hi_.size() != b_.size()) {
      throw std::invalid_argument("BoxQP: inconsistent sizes");
    }
    q_ = (0.5 * (q_ + q_.transpose())).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(q_, Eigen::EigenvaluesOnly);
    mu_ = es.eigenvalues()(0);
    l_ = es.eigenvalues()(es.eigenvalues().size() - 1);
    if (!(mu_ > 0.0)) throw std::invalid_argument("BoxQP: Q must be positive definite");
    if (!minimizer_) {
      const Eigen::VectorXd x = q_.ldlt().solve(b_);
      if ((x.array() >= lo_.array()).all() && (x.array() <= hi_.array()).all()) minimizer_ = x;
      else if (q_.rows() == 1) minimizer_ = x.cwiseMax(lo_).cwiseMin(hi_);
    }
  }

  Index dim() const { return b_.size(); }
  const Eigen::MatrixXd& q() const { return q_; }
  const Eigen::VectorXd& b() const { return b_; }
  const Eigen::VectorXd& lo() const { return lo_; }
  const Eigen::VectorXd& hi() const { return hi_; }
  double mu() const { return mu_; }
  double l() const { return l_; }
  /// Constrained minimizer, when known in closed form.
  const std::optional<Eigen::VectorXd>& minimizer() const { return minimizer_; }

  double value(const Eigen::VectorXd& x) const { return 0.5 * x.dot(q_ * x) - b_.dot(x); }
  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const { return q_ * x - b_; }
  std::optional<double> lipschitz() const { return l_; }
  std::optional<double> strong_convexity() const { return mu_; }
  static constexpr bool is_convex() { return true; }

 private:
  Eigen::MatrixXd q_;
  Eigen::VectorXd b_, lo_, hi_;
  std::optional<Eigen::VectorXd> minimizer_;
  double mu_ = 0.0;
  double l_ = 0.0;
};

/// Q = U diag(spectrum) U^T with U random orthogonal and the spectrum evenly
/// spread over [mu, L]. The box is [-1, 1]^n; a minimizer x* with roughly half
/// of its coordinates on the boundary is planted and b chosen so that x*
/// satisfies the KKT conditions.
inline BoxQP make_boxqp(Index n, double mu, double l, std::uint64_t seed) {
  if (n < 1 || !(mu > 0.0) || !(l >= mu)) throw std::invalid_argument("make_boxqp: need 0 < mu <= L");
  Rng rng(seed);
  Eigen::MatrixXd gauss(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) gauss(i, j) = rng.uniform(-1.0, 1.0);
  const Eigen::MatrixXd u = Eigen::HouseholderQR<Eigen::MatrixXd>(gauss).householderQ();
  Eigen::VectorXd spectrum(n);
  for (Index i = 0; i < n; ++i) {
    spectrum(i) = n == 1 ? l : mu + (l - mu) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  Eigen::MatrixXd q = u * spectrum.asDiagonal() * u.transpose();
  q = (0.5 * (q + q.transpose())).eval();

  Eigen::VectorXd x_star(n);
  Eigen::VectorXd grad_star(n);
  for (Index i = 0; i < n; ++i) {
    const double pick = rng.uniform01();
    if (pick < 0.25) {
      x_star(i) = -1.0;
      grad_star(i) = rng.uniform(0.1, 1.0);  // pushes against the lower bound
    } else if (pick < 0.5) {
      x_star(i) = 1.0;
      grad_star(i) = -rng.uniform(0.1, 1.0);
    } else {
      x_star(i) = rng.uniform(-0.9, 0.9);
      grad_star(i) = 0.0;
    }
  }
  Eigen::VectorXd b = q * x_star - grad_star;
  return BoxQP(std::move(q), std::move(b), Eigen::VectorXd::Constant(n, -1.0),
               Eigen::VectorXd::Constant(n, 1.0), x_star);
}

}  // namespace ipg
