#include <gtest/gtest.h>

#include "ipg/linalg.hpp"
#include "support.hpp"

using namespace ipg;
using namespace testing_support;

TEST(SymMatrix, SymmetrizesGeneralInput) {
  Eigen::MatrixXd m(2, 2);
  m << 1, 5, -5, 1;
  const SymMatrix s = SymMatrix::from_square(m);
  EXPECT_EQ(s.matrix(), Eigen::MatrixXd::Identity(2, 2));
}

TEST(SymMatrix, EntriesMirrorExactly) {
  Rng rng(3);
  const SymMatrix s = random_sym(9, rng);
  const SymMatrix w = SymMatrix::low_rank(random_matrix(9, 3, rng), random_vector(3, rng));
  for (const SymMatrix* x : {&s, &w}) {
    for (Index i = 0; i < 9; ++i)
      for (Index j = 0; j < 9; ++j) EXPECT_EQ((*x)(i, j), (*x)(j, i));
  }
}

TEST(SymMatrix, RejectsNonFiniteAndNonSquare) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2, 2);
  m(0, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(SymMatrix::from_square(m), std::invalid_argument);
  EXPECT_THROW(SymMatrix::from_square(Eigen::MatrixXd::Zero(2, 3)), std::invalid_argument);
}

TEST(FrobeniusInner, Examples) {
  EXPECT_DOUBLE_EQ(frobenius_inner(SymMatrix::identity(3), SymMatrix::identity(3)), 3.0);
  Eigen::MatrixXd a(2, 2);
  a << 1, 2, 2, 1;
  EXPECT_DOUBLE_EQ(frobenius_inner(a, a), 10.0);
  EXPECT_DOUBLE_EQ(frobenius_norm(a), std::sqrt(10.0));
  EXPECT_THROW(frobenius_inner(Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Zero(3, 3)),
               std::invalid_argument);
}

TEST(FrobeniusInner, Symmetric) {
  Rng rng(5);
  for (int t = 0; t < 20; ++t) {
    const Eigen::MatrixXd a = random_matrix(4, 6, rng);
    const Eigen::MatrixXd b = random_matrix(4, 6, rng);
    EXPECT_NEAR(frobenius_inner(a, b), frobenius_inner(b, a), 1e-14);
    EXPECT_NEAR(frobenius_inner(a, b), (a.transpose() * b).trace(), 1e-12);
  }
}

TEST(LeadingEigenpairs, Diagonal) {
  const auto pairs = leading_eigenpairs(SymMatrix::diagonal(Eigen::Vector3d(3, 2, 1)), 2);
  ASSERT_EQ(pairs.size(), 2U);
  EXPECT_NEAR(pairs[0].value, 3.0, 1e-12);
  EXPECT_NEAR(pairs[1].value, 2.0, 1e-12);
  EXPECT_NEAR(std::abs(pairs[0].vector(0)), 1.0, 1e-9);
  EXPECT_NEAR(std::abs(pairs[1].vector(1)), 1.0, 1e-9);
}

TEST(LeadingEigenpairs, Identity) {
  const auto pairs = leading_eigenpairs(SymMatrix::identity(6), 1);
  EXPECT_NEAR(pairs[0].value, 1.0, 1e-12);
  EXPECT_NEAR(pairs[0].vector.norm(), 1.0, 1e-12);
}

TEST(LeadingEigenpairs, MatchesFullDecomposition) {
  Rng rng(12);
  const SymMatrix s = random_sym(12, rng);
  const auto pairs = leading_eigenpairs(s, 4);
  const auto full = full_eigendecomposition(s);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(pairs[static_cast<std::size_t>(i)].value, full.values(i), 1e-8);
}

TEST(LeadingEigenpairs, InvariantsOnRandomMatrices) {
  Rng rng(99);
  const EigenSolverOptions opts;
  for (int t = 0; t < 60; ++t) {
    const Index n = 2 + static_cast<Index>(rng.below(29));
    const int p = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
    const SymMatrix s = random_sym(n, rng, rng.uniform(0.1, 10.0));
    const auto pairs = leading_eigenpairs(s, p, opts);
    const auto full = full_eigendecomposition(s);
    ASSERT_EQ(pairs.size(), static_cast<std::size_t>(p));
    Eigen::MatrixXd q(n, p);
    for (int i = 0; i < p; ++i) {
      const auto& e = pairs[static_cast<std::size_t>(i)];
      q.col(i) = e.vector;
      EXPECT_NEAR(e.vector.norm(), 1.0, 1e-12);
      EXPECT_LE((s.matrix() * e.vector - e.value * e.vector).norm(), opts.tol * std::max(1.0, s.norm()));
      EXPECT_NEAR(e.value, full.values(i), 1e-8);
      if (i > 0) {
        EXPECT_LE(e.value, pairs[static_cast<std::size_t>(i - 1)].value);
      }
    }
    const Eigen::MatrixXd gram = q.transpose() * q - Eigen::MatrixXd::Identity(p, p);
    EXPECT_LE(gram.cwiseAbs().maxCoeff(), 1e-10);
    // Subspace check when the p-th eigenvalue is separated from the next.
    if (p < n && full.values(p - 1) - full.values(p) >= 1e-6) {
      const Eigen::MatrixXd diff =
          subspace_projector(q) - subspace_projector(full.vectors.leftCols(p));
      EXPECT_LE(diff.norm(), 1e-6);
    }
  }
}

TEST(LeadingEigenpairs, ClusteredSpectrumGivesInvariantSubspace) {
  Rng rng(7);
  const Index n = 20;
  const Eigen::MatrixXd u = Eigen::HouseholderQR<Eigen::MatrixXd>(random_matrix(n, n, rng)).householderQ();
  Eigen::VectorXd d = Eigen::VectorXd::LinSpaced(n, -1.0, 0.5);
  d.head(4).setConstant(2.0);  // fourfold leading eigenvalue
  const SymMatrix s = SymMatrix::from_square(u * d.asDiagonal() * u.transpose());
  const auto pairs = leading_eigenpairs(s, 4);
  Eigen::MatrixXd q(n, 4);
  for (int i = 0; i < 4; ++i) {
    EXPECT_NEAR(pairs[static_cast<std::size_t>(i)].value, 2.0, 1e-9);
    q.col(i) = pairs[static_cast<std::size_t>(i)].vector;
  }
  // Eigenvalues -1 .. 0.5 after the cluster are well separated from 2.
  Eigen::MatrixXd top(n, 4);
  top = u.leftCols(4);
  EXPECT_LE((subspace_projector(q) - subspace_projector(top)).norm(), 1e-7);
}

TEST(LeadingEigenpairs, WarmStartAtNonLeadingEigenvector) {
  // A warm start that is an exact eigenvector for a small eigenvalue is an
  // invariant subspace; the solver must still find the leading pair.
  const Eigen::VectorXd d = Eigen::VectorXd::LinSpaced(15, 1.0, 15.0);
  const SymMatrix s = SymMatrix::diagonal(d);
  const Eigen::MatrixXd warm = Eigen::MatrixXd::Identity(15, 2);  // e1, e2: eigenvalues 1, 2
  const auto pairs = leading_eigenpairs(s, 2, {}, warm);
  EXPECT_NEAR(pairs[0].value, 15.0, 1e-9);
  EXPECT_NEAR(pairs[1].value, 14.0, 1e-9);
}

TEST(LeadingEigenpairs, WarmStartReproducesResult) {
  Rng rng(21);
  const SymMatrix s = random_sym(25, rng);
  const auto cold = leading_eigenpairs(s, 3);
  Eigen::MatrixXd warm(25, 3);
  for (int i = 0; i < 3; ++i) warm.col(i) = cold[static_cast<std::size_t>(i)].vector;
  const SymMatrix nearby = s + SymMatrix::outer(random_vector(25, rng), 1e-3);
  const auto again = leading_eigenpairs(nearby, 3, {}, warm);
  const auto full = full_eigendecomposition(nearby);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(again[static_cast<std::size_t>(i)].value, full.values(i), 1e-8);
}

TEST(LeadingEigenpairs, RejectsBadArguments) {
  const SymMatrix s = SymMatrix::identity(3);
  EXPECT_THROW(leading_eigenpairs(s, 0), std::invalid_argument);
  EXPECT_THROW(leading_eigenpairs(s, 4), std::invalid_argument);
  EigenSolverOptions bad;
  bad.tol = 0.0;
  EXPECT_THROW(leading_eigenpairs(s, 1, bad), std::invalid_argument);
  EXPECT_THROW(leading_eigenpairs(s, 1, {}, Eigen::MatrixXd::Zero(4, 1)), std::invalid_argument);
}

TEST(LeadingEigenpairs, BudgetExhaustionIsReported) {
  Rng rng(4);
  const SymMatrix s = random_sym(30, rng);
  EigenSolverOptions tight;
  tight.tol = 1e-15;
  tight.max_matvecs = 3;
  try {
    leading_eigenpairs(s, 2, tight);
    FAIL() << "expected EigenSolverError";
  } catch (const EigenSolverError& e) {
    EXPECT_GT(e.residual(), 0.0);
  }
}

TEST(LargestEigenpair, Examples) {
  const EigenPair e = largest_eigenpair(SymMatrix::diagonal(Eigen::Vector2d(0.4, -0.4)));
  EXPECT_NEAR(e.value, 0.4, 1e-12);
  EXPECT_NEAR(std::abs(e.vector(0)), 1.0, 1e-9);

  const EigenPair z = largest_eigenpair(SymMatrix::zero(5));
  EXPECT_NEAR(z.value, 0.0, 1e-15);
  EXPECT_NEAR(z.vector.norm(), 1.0, 1e-12);

  Rng rng(10);
  const SymMatrix s = random_sym(10, rng);
  EXPECT_NEAR(largest_eigenpair(s).value, full_eigendecomposition(s).values(0), 1e-8);
}
