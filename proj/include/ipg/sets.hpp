#pragma once

// Convex-set oracles, the feasible inexact projection contract and the
// adaptive rank-p projector onto the spectrahedron {X sym : tr X = 1, X >= 0}.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ipg/errors.hpp"
#include "ipg/linalg.hpp"
#include "ipg/schedules.hpp"

namespace ipg {

inline constexpr double kDefaultFeasTol = 1e-9;
// Roundoff allowance for the certificate test, relative to max(1, |v|).
inline constexpr double kCertificateSlack = 1e-12;

/// Euclidean projection onto the probability simplex {x >= 0, sum x = 1}
/// (sort and threshold, O(p log p)).
inline Eigen::VectorXd project_simplex(const Eigen::VectorXd& d) {
  const Index p = d.size();
  if (p == 0) throw std::invalid_argument("project_simplex: empty vector");
  if (!d.allFinite()) throw std::invalid_argument("project_simplex: non-finite entry");
  std::vector<double> sorted(d.data(), d.data() + p);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double threshold = 0.0;
  for (Index j = 0; j < p; ++j) {
    cumulative += sorted[static_cast<std::size_t>(j)];
    const double candidate = (cumulative - 1.0) / static_cast<double>(j + 1);
    if (sorted[static_cast<std::size_t>(j)] - candidate > 0.0) threshold = candidate;
  }
  return (d.array() - threshold).max(0.0).matrix();
}

template <class Point>
struct InexactProjection {
  Point point;
  /// Rank used by the spectrahedron projector; 0 for other sets.
  int rank_used = 0;
  /// <v - w, y* - w> - phi(u, v, w) with y* the support point of v - w.
  /// NaN when not computed.
  double certificate_gap = std::numeric_limits<double>::quiet_NaN();
  /// Leading eigenvectors behind a spectrahedron projection (warm start).
  Eigen::MatrixXd basis;
};

/// Closed convex set with membership and a linear maximization oracle.
/// support_point returns nullopt when the linear form is unbounded above.
template <class S>
concept ConvexSet = requires(const S& s, const typename S::point_type& x, double tol) {
  { s.contains(x, tol) } -> std::convertible_to<bool>;
  { s.support_point(x) } -> std::same_as<std::optional<typename S::point_type>>;
  { s.descriptor() } -> std::convertible_to<std::string>;
};

template <class S>
concept ExactlyProjectable = ConvexSet<S> && requires(const S& s, const typename S::point_type& v) {
  { s.exact_project(v) } -> std::same_as<typename S::point_type>;
};

// ---------------------------------------------------------------------------
// Vector sets

class Box {
 public:
  using point_type = Eigen::VectorXd;

  Box(Eigen::VectorXd lo, Eigen::VectorXd hi) : lo_(std::move(lo)), hi_(std::move(hi)) {
    if (lo_.size() != hi_.size() || lo_.size() == 0) throw std::invalid_argument("Box: bad bounds");
    if ((lo_.array() > hi_.array()).any()) throw std::invalid_argument("Box: lo > hi");
  }
  static Box uniform(Index n, double lo, double hi) {
    return {Eigen::VectorXd::Constant(n, lo), Eigen::VectorXd::Constant(n, hi)};
  }

  Index dim() const { return lo_.size(); }
  const Eigen::VectorXd& lo() const { return lo_; }
  const Eigen::VectorXd& hi() const { return hi_; }

  bool contains(const point_type& x, double tol = kDefaultFeasTol) const {
    return x.size() == dim() && (x.array() >= lo_.array() - tol).all() &&
           (x.array() <= hi_.array() + tol).all();
  }
  std::optional<point_type> support_point(const point_type& c) const {
    point_type y(dim());
    for (Index i = 0; i < dim(); ++i) y(i) = c(i) > 0.0 ? hi_(i) : lo_(i);
    return y;
  }
  point_type exact_project(const point_type& v) const { return v.cwiseMax(lo_).cwiseMin(hi_); }
  std::string descriptor() const { return "box(" + std::to_string(dim()) + ")"; }

 private:
  Eigen::VectorXd lo_, hi_;
};

class Ball {
 public:
  using point_type = Eigen::VectorXd;

  Ball(Eigen::VectorXd center, double radius) : center_(std::move(center)), radius_(radius) {
    if (!(radius >= 0.0)) throw std::invalid_argument("Ball: negative radius");
  }

  Index dim() const { return center_.size(); }
  bool contains(const point_type& x, double tol = kDefaultFeasTol) const {
    return x.size() == dim() && (x - center_).norm() <= radius_ + tol;
  }
  std::optional<point_type> support_point(const point_type& c) const {
    const double nc = c.norm();
    if (nc == 0.0) return center_;
    return point_type(center_ + (radius_ / nc) * c);
  }
  point_type exact_project(const point_type& v) const {
    const double dist = (v - center_).norm();
    if (dist <= radius_) return v;
    return center_ + (radius_ / dist) * (v - center_);
  }
  std::string descriptor() const {
    std::ostringstream s;
    s << "ball(" << dim() << ", r=" << radius_ << ")";
    return s.str();
  }

 private:
  Eigen::VectorXd center_;
  double radius_;
};

class ProbabilitySimplex {
 public:
  using point_type = Eigen::VectorXd;

  explicit ProbabilitySimplex(Index n) : n_(n) {
    if (n < 1) throw std::invalid_argument("ProbabilitySimplex: n must be >= 1");
  }
  Index dim() const { return n_; }
  bool contains(const point_type& x, double tol = kDefaultFeasTol) const {
    return x.size() == n_ && std::abs(x.sum() - 1.0) <= tol && x.minCoeff() >= -tol;
  }
  std::optional<point_type> support_point(const point_type& c) const {
    Index best = 0;
    c.maxCoeff(&best);
    return point_type(point_type::Unit(n_, best));
  }
  point_type exact_project(const point_type& v) const { return project_simplex(v); }
  std::string descriptor() const { return "simplex(" + std::to_string(n_) + ")"; }

 private:
  Index n_;
};

/// Second-order cone {(x, t) : |x| <= t}; t is the last coordinate.
class LorentzCone {
 public:
  using point_type = Eigen::VectorXd;

  explicit LorentzCone(Index n) : n_(n) {
    if (n < 1) throw std::invalid_argument("LorentzCone: n must be >= 1");
  }
  Index dim() const { return n_; }
  bool contains(const point_type& v, double tol = kDefaultFeasTol) const {
    return v.size() == n_ && v.head(n_ - 1).norm() <= v(n_ - 1) + tol;
  }
  /// Maximizer of <c, y> over the cone: the apex when c lies in the polar
  /// cone, unbounded otherwise.
  std::optional<point_type> support_point(const point_type& c) const {
    if (c.head(n_ - 1).norm() <= -c(n_ - 1)) return point_type(point_type::Zero(n_));
    return std::nullopt;
  }
  point_type exact_project(const point_type& v) const {
    const double t = v(n_ - 1);
    const double r = v.head(n_ - 1).norm();
    if (r <= t) return v;
    if (r <= -t) return point_type::Zero(n_);
    const double scale = 0.5 * (r + t);
    point_type out(n_);
    out.head(n_ - 1) = (scale / r) * v.head(n_ - 1);
    out(n_ - 1) = scale;
    return out;
  }
  std::string descriptor() const { return "lorentz(" + std::to_string(n_) + ")"; }

 private:
  Index n_;
};

inline Eigen::VectorXd exact_project_box(const Box& box, const Eigen::VectorXd& v) {
  return box.exact_project(v);
}
inline Eigen::VectorXd exact_project_ball(const Ball& ball, const Eigen::VectorXd& v) {
  return ball.exact_project(v);
}
inline Eigen::VectorXd exact_project_lorentz(const LorentzCone& cone, const Eigen::VectorXd& v) {
  return cone.exact_project(v);
}

// ---------------------------------------------------------------------------
// Spectrahedron

/// qq^T for q a leading unit eigenvector of c: maximizes <c, Y> over the
/// spectrahedron.
inline SymMatrix support_point_spectrahedron(const SymMatrix& c, const EigenSolverOptions& eig = {},
                                             const Eigen::MatrixXd& warm = {}) {
  return SymMatrix::outer(largest_eigenpair(c, eig, warm).vector);
}

/// Q P_simplex(D) Q^T from a full eigendecomposition V = Q D Q^T.
inline SymMatrix exact_project_spectrahedron(const SymMatrix& v) {
  const EigenDecomposition ed = full_eigendecomposition(v);
  const Eigen::VectorXd weights = project_simplex(ed.values);
  Index rank = 0;
  while (rank < weights.size() && weights(rank) > 0.0) ++rank;
  return SymMatrix::low_rank(ed.vectors.leftCols(rank), weights.head(rank));
}

class Spectrahedron {
 public:
  using point_type = SymMatrix;

  explicit Spectrahedron(Index n, EigenSolverOptions eig = {}) : n_(n), eig_(eig) {
    if (n < 1) throw std::invalid_argument("Spectrahedron: n must be >= 1");
  }

  Index dim() const { return n_; }
  const EigenSolverOptions& eigen_options() const { return eig_; }

  bool contains(const SymMatrix& x, double tol = kDefaultFeasTol) const {
    return x.dim() == n_ && std::abs(x.trace() - 1.0) <= tol && smallest_eigenvalue(x) >= -tol;
  }
  std::optional<SymMatrix> support_point(const SymMatrix& c) const {
    return support_point_spectrahedron(c, eig_);
  }
  SymMatrix exact_project(const SymMatrix& v) const { return exact_project_spectrahedron(v); }
  std::string descriptor() const { return "spectrahedron(" + std::to_string(n_) + ")"; }

 private:
  Index n_;
  EigenSolverOptions eig_;
};

struct Certificate {
  bool accepted = false;
  /// <v - w, y* - w> - phi(u, v, w); +inf when the support problem is unbounded.
  double gap = 0.0;
};

/// Decides w in P_C(phi_gamma, u, v): the supremum of <v - w, y - w> over
/// y in C is attained at the support point of v - w, so one oracle call
/// settles the quantifier.
template <ConvexSet Set>
Certificate certify_inexact_projection(const Set& set, const typename Set::point_type& u,
                                       const typename Set::point_type& v,
                                       const typename Set::point_type& w, const ForcingParams& g,
                                       const ToleranceFn& phi,
                                       double slack = kCertificateSlack) {
  using Point = typename Set::point_type;
  const Point direction = v - w;
  const std::optional<Point> y = set.support_point(direction);
  if (!y) return {false, std::numeric_limits<double>::infinity()};
  const double lhs = inner(direction, Point(*y - w));
  const double gap = lhs - phi(g, u, v, w);
  return {gap <= slack * std::max(1.0, norm(v)), gap};
}

/// Adaptive rank-p inexact projection of V onto the spectrahedron relative
/// to U. For p = p_start, p_start + 1, ...: W_p is the rank-p projection
/// built from the p leading eigenpairs of V with simplex-projected
/// eigenvalues; Y_p = qq^T with q the leading eigenvector of V - W_p; W_p is
/// accepted once <W_p - V, Y_p - W_p> >= -phi(U, V, W_p). W_p is also
/// accepted when a projected weight vanishes (then W_p is the exact
/// projection) or when p = n.
///
/// V - W_p equals theta_p on span(q_1..q_p) and V on its complement, so its
/// leading eigenpair is (lambda_{p+1}, q_{p+1}) or, if larger, theta_p. The
/// eigenpairs of V are computed a few at a time and reused as p grows.
inline InexactProjection<SymMatrix> inexact_project_spectrahedron(
    const SymMatrix& v, const SymMatrix& u, const ForcingParams& g, const ToleranceFn& phi,
    int p_start = 1, const EigenSolverOptions& eig = {}, const Eigen::MatrixXd& warm = {},
    double slack = kCertificateSlack) {
  const Index n = v.dim();
  if (u.dim() != n) throw std::invalid_argument("inexact_project_spectrahedron: U has wrong size");
  if (p_start < 1 || p_start > n) {
    throw std::invalid_argument("inexact_project_spectrahedron: need 1 <= p_start <= n");
  }
  const double accept_tol = slack * std::max(1.0, v.norm());

  std::vector<EigenPair> pairs;
  Eigen::MatrixXd vectors = warm;
  for (int p = p_start;; ++p) {
    const auto needed = static_cast<std::size_t>(std::min<Index>(n, p + 1));
    if (pairs.size() < needed) {
      const int count = static_cast<int>(std::min<Index>(n, static_cast<Index>(needed) + 2));
      try {
        pairs = leading_eigenpairs(v, count, eig, vectors);
      } catch (const EigenSolverError& e) {
        throw ProjectionError(std::string("spectrahedron projection at rank ") + std::to_string(p) +
                                  ": " + e.what(),
                              p, e.residual());
      }
      vectors.resize(n, count);
      for (int i = 0; i < count; ++i) vectors.col(i) = pairs[static_cast<std::size_t>(i)].vector;
    }

    Eigen::VectorXd values(p);
    for (int i = 0; i < p; ++i) values(i) = pairs[static_cast<std::size_t>(i)].value;
    const Eigen::VectorXd weights = project_simplex(values);
    SymMatrix w = SymMatrix::low_rank(vectors.leftCols(p), weights);

    const double theta = values(0) - weights(0);
    const double top = p < n ? std::max(theta, pairs[static_cast<std::size_t>(p)].value) : theta;
    // <V - W, Y - W> = lambda_max(V - W) - <V - W, W>
    const double lhs = top - frobenius_inner(SymMatrix(v - w), w);
    const double gap = lhs - phi(g, u, v, w);
    const bool exact = weights(p - 1) == 0.0 || p == n;
    if (gap <= accept_tol || exact) {
      return {std::move(w), p, gap, vectors};
    }
  }
}

// ---------------------------------------------------------------------------
// Projectors: stateful per-run adaptors the solvers call once per iteration.

/// Wraps a set's exact projection. Exact projections are feasible inexact
/// projections for every gamma, so the certificate is optional.
template <ExactlyProjectable Set>
class ExactProjector {
 public:
  using point_type = typename Set::point_type;

  explicit ExactProjector(const Set& set, bool certify = false) : set_(&set), certify_(certify) {}

  InexactProjection<point_type> operator()(const point_type& u, const point_type& v,
                                           const ForcingParams& g, const ToleranceFn& phi) {
    InexactProjection<point_type> out{set_->exact_project(v), 0, std::numeric_limits<double>::quiet_NaN(), {}};
    if constexpr (std::same_as<Set, Spectrahedron>) out.rank_used = static_cast<int>(set_->dim());
    if (certify_) out.certificate_gap = certify_inexact_projection(*set_, u, v, out.point, g, phi).gap;
    return out;
  }

  const Set& set() const { return *set_; }
  static constexpr bool is_exact() { return true; }

 private:
  const Set* set_;
  bool certify_;
};

/// Adaptive rank-p projector with warm starts across outer iterations. The
/// first call starts at p = 1; later calls start at max(1, p_prev - 1) and
/// seed the eigensolver with the previous eigenvectors.
class SpectrahedronInexactProjector {
 public:
  using point_type = SymMatrix;

  explicit SpectrahedronInexactProjector(const Spectrahedron& set) : set_(&set) {}

  InexactProjection<SymMatrix> operator()(const SymMatrix& u, const SymMatrix& v,
                                          const ForcingParams& g, const ToleranceFn& phi) {
    const int p_start = previous_rank_ == 0 ? 1 : std::max(1, previous_rank_ - 1);
    InexactProjection<SymMatrix> out =
        inexact_project_spectrahedron(v, u, g, phi, p_start, set_->eigen_options(), basis_);
    previous_rank_ = out.rank_used;
    basis_ = out.basis;
    return out;
  }

  const Spectrahedron& set() const { return *set_; }
  static constexpr bool is_exact() { return false; }

 private:
  const Spectrahedron* set_;
  int previous_rank_ = 0;
  Eigen::MatrixXd basis_;
};

}  // namespace ipg
