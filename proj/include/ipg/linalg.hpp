#pragma once

// Dense symmetric matrices and a block Krylov partial eigensolver.

#include <algorithm>
#include <bit>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "ipg/errors.hpp"
#include "ipg/rng.hpp"

namespace ipg {

using Index = Eigen::Index;

/// Dense symmetric n x n matrix. Entries (i, j) and (j, i) are bitwise equal
/// and finite; every way of constructing one enforces this.
class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(Index n) : m_(Eigen::MatrixXd::Zero(n, n)) {}

  static SymMatrix zero(Index n) { return SymMatrix(n); }
  static SymMatrix identity(Index n) {
    return SymMatrix(Eigen::MatrixXd::Identity(n, n), Trusted{});
  }
  static SymMatrix diagonal(const Eigen::VectorXd& d) {
    return from_square(Eigen::MatrixXd(d.asDiagonal()));
  }

  /// Symmetric part (M + M^T) / 2 of a general square matrix.
  static SymMatrix from_square(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols()) {
      throw std::invalid_argument("SymMatrix: matrix is not square");
    }
    if (!m.allFinite()) {
      throw std::invalid_argument("SymMatrix: non-finite entry");
    }
    return SymMatrix(0.5 * (m + m.transpose()), Trusted{});
  }

  /// scale * q q^T
  static SymMatrix outer(const Eigen::VectorXd& q, double scale = 1.0) {
    return low_rank(q, Eigen::VectorXd::Constant(1, scale));
  }

  /// Q diag(w) Q^T, computed on the upper triangle and mirrored.
  static SymMatrix low_rank(const Eigen::MatrixXd& q, const Eigen::VectorXd& w) {
    if (q.cols() != w.size()) {
      throw std::invalid_argument("SymMatrix::low_rank: weight count mismatch");
    }
    Eigen::MatrixXd m = (q * w.asDiagonal()) * q.transpose();
    m.triangularView<Eigen::StrictlyLower>() = m.transpose();
    return SymMatrix(std::move(m), Trusted{});
  }

  Index dim() const { return m_.rows(); }
  const Eigen::MatrixXd& matrix() const { return m_; }
  double operator()(Index i, Index j) const { return m_(i, j); }
  double trace() const { return m_.trace(); }
  double norm() const { return m_.norm(); }

  SymMatrix& operator+=(const SymMatrix& o) {
    check_same(o);
    m_ += o.m_;
    return *this;
  }
  SymMatrix& operator-=(const SymMatrix& o) {
    check_same(o);
    m_ -= o.m_;
    return *this;
  }
  SymMatrix& operator*=(double s) {
    m_ *= s;
    return *this;
  }

  friend SymMatrix operator+(SymMatrix a, const SymMatrix& b) { return a += b; }
  friend SymMatrix operator-(SymMatrix a, const SymMatrix& b) { return a -= b; }
  friend SymMatrix operator*(SymMatrix a, double s) { return a *= s; }
  friend SymMatrix operator*(double s, SymMatrix a) { return a *= s; }
  friend SymMatrix operator-(SymMatrix a) { return a *= -1.0; }
  friend bool operator==(const SymMatrix& a, const SymMatrix& b) {
    return a.m_.rows() == b.m_.rows() && a.m_ == b.m_;
  }

 private:
  struct Trusted {};
  SymMatrix(Eigen::MatrixXd m, Trusted) : m_(std::move(m)) {}

  void check_same(const SymMatrix& o) const {
    if (o.dim() != dim()) throw std::invalid_argument("SymMatrix: dimension mismatch");
  }

  Eigen::MatrixXd m_;
};

/// tr(A^T B) for equally shaped matrices.
inline double frobenius_inner(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("frobenius_inner: shape mismatch");
  }
  return a.cwiseProduct(b).sum();
}
inline double frobenius_inner(const SymMatrix& a, const SymMatrix& b) {
  return frobenius_inner(a.matrix(), b.matrix());
}
inline double frobenius_norm(const Eigen::MatrixXd& a) { return std::sqrt(frobenius_inner(a, a)); }
inline double frobenius_norm(const SymMatrix& a) { return frobenius_norm(a.matrix()); }

// Inner product and norms for the two point types the solvers work with.
inline double inner(const SymMatrix& a, const SymMatrix& b) { return frobenius_inner(a, b); }
inline double inner(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) throw std::invalid_argument("inner: size mismatch");
  return a.dot(b);
}
template <class Point>
double squared_norm(const Point& x) {
  return inner(x, x);
}
template <class Point>
double norm(const Point& x) {
  return std::sqrt(squared_norm(x));
}
template <class Point>
double squared_distance(const Point& a, const Point& b) {
  return squared_norm(Point(a - b));
}

struct EigenPair {
  double value = 0.0;
  Eigen::VectorXd vector;
};

struct EigenSolverOptions {
  /// Residual tolerance relative to max(1, ||S||_F).
  double tol = 1e-9;
  /// Matrix-vector product budget; 0 means 50 * n.
  long max_matvecs = 0;
  std::uint64_t seed = 0x1a2b3c4d5e6fULL;
};

/// A symmetric linear operator the eigensolver can apply to a block of vectors.
template <class Op>
concept SymmetricOperator = requires(const Op& op, const Eigen::MatrixXd& x) {
  { op.dim() } -> std::convertible_to<Index>;
  { op.apply(x) } -> std::convertible_to<Eigen::MatrixXd>;
  { op.scale() } -> std::convertible_to<double>;
};

class DenseSymOperator {
 public:
  explicit DenseSymOperator(const SymMatrix& s) : s_(&s), scale_(std::max(1.0, s.norm())) {}
  Index dim() const { return s_->dim(); }
  Eigen::MatrixXd apply(const Eigen::MatrixXd& x) const { return s_->matrix() * x; }
  double scale() const { return scale_; }

 private:
  const SymMatrix* s_;
  double scale_;
};

namespace detail {

inline Eigen::VectorXd random_direction(Index n, Rng& rng) {
  Eigen::VectorXd v(n);
  for (Index i = 0; i < n; ++i) v(i) = rng.uniform(-1.0, 1.0);
  return v;
}

// Orthonormalizes the columns of `block` against the orthonormal columns of
// `basis` and against each other (classical Gram-Schmidt, applied twice).
// Columns that collapse are replaced by random directions.
inline Eigen::MatrixXd orthonormalize_block(const Eigen::MatrixXd& basis,
                                            const Eigen::MatrixXd& block, Rng& rng) {
  const Index n = basis.rows();
  const Index room = n - basis.cols();
  const Index want = std::min(block.cols(), room);
  Eigen::MatrixXd out(n, want);
  Index accepted = 0;
  Index column = 0;
  int random_attempts = 0;
  while (accepted < want) {
    Eigen::VectorXd v;
    if (column < block.cols()) {
      v = block.col(column++);
    } else {
      if (++random_attempts > 8 * want + 8) break;
      v = random_direction(n, rng);
    }
    const double before = v.norm();
    if (!(before > 0.0) || !std::isfinite(before)) continue;
    for (int pass = 0; pass < 2; ++pass) {
      // Coefficients are evaluated first: Eigen does not guard `-=` products
      // against aliasing.
      if (basis.cols() > 0) {
        const Eigen::VectorXd c = basis.transpose() * v;
        v -= basis * c;
      }
      if (accepted > 0) {
        const Eigen::VectorXd c = out.leftCols(accepted).transpose() * v;
        v -= out.leftCols(accepted) * c;
      }
    }
    const double after = v.norm();
    if (after <= 1e-10 * before) continue;
    out.col(accepted++) = v / after;
  }
  return out.leftCols(accepted);
}

inline void append_columns(Eigen::MatrixXd& m, const Eigen::MatrixXd& cols) {
  const Index old = m.cols();
  m.conservativeResize(cols.rows(), old + cols.cols());
  m.rightCols(cols.cols()) = cols;
}

}  // namespace detail

/// The p algebraically largest eigenpairs of a symmetric operator, in
/// descending order, by block Rayleigh-Ritz over a Krylov subspace with full
/// reorthogonalization and thick restarts. Block size is p, so eigenvalues of
/// multiplicity up to p are resolved. Columns of `warm` (previous
/// eigenvectors) seed the starting block together with random columns.
template <SymmetricOperator Op>
std::vector<EigenPair> leading_eigenpairs(const Op& op, int p, const EigenSolverOptions& opts = {},
                                          const Eigen::MatrixXd& warm = {}) {
  const Index n = op.dim();
  if (p < 1 || p > n) throw std::invalid_argument("leading_eigenpairs: need 1 <= p <= n");
  if (!(opts.tol > 0.0)) throw std::invalid_argument("leading_eigenpairs: eig_tol must be > 0");
  if (warm.cols() > 0 && warm.rows() != n) {
    throw std::invalid_argument("leading_eigenpairs: warm start has wrong dimension");
  }

  const double threshold = opts.tol * op.scale();
  const long budget = opts.max_matvecs > 0 ? opts.max_matvecs : 50L * n;
  const Index block = p;
  const Index max_basis = std::min<Index>(n, std::max<Index>(2 * block + p + 8, 20));
  const Index keep = p + (max_basis - p - block) / 2;

  // Fresh random directions per call: with a fixed seed they would repeat
  // the previous call's, which a warm block may already span.
  std::uint64_t fingerprint = Rng::splitmix64(static_cast<std::uint64_t>(p));
  if (warm.size() > 0) {
    fingerprint ^= Rng::splitmix64(std::bit_cast<std::uint64_t>(warm.sum()) +
                                   static_cast<std::uint64_t>(warm.cols()));
  }
  Rng rng(opts.seed ^ fingerprint);
  Eigen::MatrixXd start(n, 0);
  const Index n_warm = std::min<Index>(warm.cols(), std::max<Index>(block, max_basis / 2));
  if (n_warm > 0) start = warm.leftCols(n_warm);
  // A warm block can span an invariant subspace that misses the leading
  // eigenvector, so it always gets at least one random column.
  do {
    detail::append_columns(start, detail::random_direction(n, rng));
  } while (start.cols() < block);

  Eigen::MatrixXd basis(n, 0);
  Eigen::MatrixXd image(n, 0);
  Eigen::MatrixXd next = detail::orthonormalize_block(basis, start, rng);
  // Small residuals only certify eigenpairs, not that they are the leading
  // ones: an exact non-leading eigenvector in the warm block converges at
  // once. Guard Ritz pairs and a minimum Krylov dimension cover that case.
  const Index guard = 2;
  const Index min_basis = std::min<Index>(max_basis, next.cols() + 10);
  long matvecs = 0;

  for (;;) {
    detail::append_columns(image, op.apply(next));
    detail::append_columns(basis, next);
    matvecs += next.cols();

    const Index m = basis.cols();
    Eigen::MatrixXd projected = basis.transpose() * image;
    projected = 0.5 * (projected + projected.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> small(projected);
    // Descending order.
    const Eigen::VectorXd theta = small.eigenvalues().reverse();
    const Eigen::MatrixXd ritz_coeffs = small.eigenvectors().rowwise().reverse();

    const Index top = std::min<Index>(p + guard, m);
    const Eigen::MatrixXd x = basis * ritz_coeffs.leftCols(top);
    const Eigen::MatrixXd residual =
        image * ritz_coeffs.leftCols(top) - x * theta.head(top).asDiagonal();
    Eigen::VectorXd res_norm = residual.colwise().norm().transpose();

    const bool converged =
        top >= p && m >= min_basis && (res_norm.head(std::min<Index>(p, top)).array() <= threshold).all();
    if (converged || m == n) {
      std::vector<EigenPair> pairs(static_cast<std::size_t>(p));
      for (int i = 0; i < p; ++i) {
        pairs[static_cast<std::size_t>(i)] = {theta(i), x.col(i).normalized()};
      }
      return pairs;
    }
    if (matvecs >= budget) {
      std::ostringstream msg;
      msg << "leading_eigenpairs: no convergence after " << matvecs
          << " matrix-vector products (p = " << p << ", residual "
          << res_norm.head(std::min<Index>(p, top)).maxCoeff()
          << ", target " << threshold << ")";
      throw EigenSolverError(msg.str(), res_norm.maxCoeff());
    }

    Eigen::MatrixXd expand(n, 0);
    for (Index i = 0; i < top; ++i) {
      if (res_norm(i) > threshold) detail::append_columns(expand, residual.col(i));
    }
    if (expand.cols() == 0) expand = detail::random_direction(n, rng);

    if (max_basis < n && m + expand.cols() > max_basis) {
      const Index k = std::min(keep, m);
      basis = (basis * ritz_coeffs.leftCols(k)).eval();
      image = (image * ritz_coeffs.leftCols(k)).eval();
    }
    next = detail::orthonormalize_block(basis, expand, rng);
    if (next.cols() == 0) {
      next = detail::orthonormalize_block(basis, detail::random_direction(n, rng), rng);
    }
    if (next.cols() == 0) {
      throw EigenSolverError("leading_eigenpairs: Krylov expansion collapsed", res_norm.maxCoeff());
    }
  }
}

inline std::vector<EigenPair> leading_eigenpairs(const SymMatrix& s, int p,
                                                 const EigenSolverOptions& opts = {},
                                                 const Eigen::MatrixXd& warm = {}) {
  return leading_eigenpairs(DenseSymOperator(s), p, opts, warm);
}

inline EigenPair largest_eigenpair(const SymMatrix& s, const EigenSolverOptions& opts = {},
                                   const Eigen::MatrixXd& warm = {}) {
  return leading_eigenpairs(s, 1, opts, warm).front();
}

struct EigenDecomposition {
  Eigen::VectorXd values;   // descending
  Eigen::MatrixXd vectors;  // matching columns
};

/// Full dense decomposition (Householder tridiagonalization + implicit QR).
inline EigenDecomposition full_eigendecomposition(const SymMatrix& s) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s.matrix());
  if (es.info() != Eigen::Success) {
    throw EigenSolverError("full_eigendecomposition: QR iteration failed", NAN);
  }
  return {es.eigenvalues().reverse(), es.eigenvectors().rowwise().reverse()};
}

inline double smallest_eigenvalue(const SymMatrix& s) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s.matrix(), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

}  // namespace ipg
