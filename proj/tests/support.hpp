#pragma once

// Random inputs and brute-force oracles shared by the test binaries.

#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "ipg/linalg.hpp"
#include "ipg/rng.hpp"
#include "ipg/schedules.hpp"

namespace testing_support {

using ipg::Index;
using ipg::Rng;
using ipg::SymMatrix;

inline Eigen::MatrixXd random_matrix(Index rows, Index cols, Rng& rng, double lo = -1.0, double hi = 1.0) {
  Eigen::MatrixXd m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = rng.uniform(lo, hi);
  return m;
}

inline Eigen::VectorXd random_vector(Index n, Rng& rng, double lo = -1.0, double hi = 1.0) {
  return random_matrix(n, 1, rng, lo, hi).col(0);
}

inline SymMatrix random_sym(Index n, Rng& rng, double scale = 1.0) {
  return SymMatrix::from_square(scale * random_matrix(n, n, rng));
}

/// Random member of the spectrahedron with rank between 1 and n.
inline SymMatrix random_spectrahedron_point(Index n, Rng& rng) {
  const Index rank = 1 + static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)));
  const Eigen::MatrixXd g = random_matrix(n, rank, rng);
  Eigen::MatrixXd x = g * g.transpose();
  x /= x.trace();
  return SymMatrix::from_square(x);
}

/// Euclidean projection onto the probability simplex by enumerating all
/// supports and keeping the one satisfying the KKT conditions.
inline Eigen::VectorXd brute_force_simplex(const Eigen::VectorXd& d) {
  const Index p = d.size();
  Eigen::VectorXd best;
  double best_dist = std::numeric_limits<double>::infinity();
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << p); ++mask) {
    double sum = 0.0;
    int count = 0;
    for (Index i = 0; i < p; ++i) {
      if (mask >> i & 1U) {
        sum += d(i);
        ++count;
      }
    }
    const double t = (sum - 1.0) / count;
    bool ok = true;
    Eigen::VectorXd x = Eigen::VectorXd::Zero(p);
    for (Index i = 0; i < p && ok; ++i) {
      if (mask >> i & 1U) {
        x(i) = d(i) - t;
        ok = x(i) >= -1e-13;
      } else {
        ok = d(i) - t <= 1e-13;  // multiplier of x_i >= 0 is nonnegative
      }
    }
    if (!ok) continue;
    x = x.cwiseMax(0.0);
    const double dist = (x - d).squaredNorm();
    if (dist < best_dist) {
      best_dist = dist;
      best = x;
    }
  }
  return best;
}

inline ipg::ForcingParams random_forcing(Rng& rng) {
  return {rng.uniform(0.0, 1.0), rng.uniform(0.0, 0.499), rng.uniform(0.0, 0.499)};
}

inline ipg::ToleranceFn random_phi(Rng& rng) {
  return ipg::ToleranceFn::canonical(1 + static_cast<int>(rng.below(5)));
}

/// Projector onto span of the columns of q (assumed orthonormal).
inline Eigen::MatrixXd subspace_projector(const Eigen::MatrixXd& q) { return q * q.transpose(); }

}  // namespace testing_support
