#include <gtest/gtest.h>

#include "ipg/sets.hpp"
#include "support.hpp"

using namespace ipg;
using namespace testing_support;

TEST(Simplex, Examples) {
  EXPECT_LE((project_simplex(Eigen::Vector2d(0.3, 0.7)) - Eigen::Vector2d(0.3, 0.7)).norm(), 1e-15);
  EXPECT_LE((project_simplex(Eigen::Vector2d(2, 0)) - Eigen::Vector2d(1, 0)).norm(), 1e-15);
  EXPECT_LE((project_simplex(Eigen::Vector2d(0, 0)) - Eigen::Vector2d(0.5, 0.5)).norm(), 1e-15);
  EXPECT_LE((project_simplex(Eigen::Vector3d(1, 1, 1)) - Eigen::Vector3d::Constant(1.0 / 3)).norm(), 1e-15);
  EXPECT_THROW(project_simplex(Eigen::VectorXd()), std::invalid_argument);
}

TEST(Simplex, MatchesBruteForce) {
  Rng rng(31);
  for (int t = 0; t < 2000; ++t) {
    const Index p = 1 + static_cast<Index>(rng.below(8));
    const Eigen::VectorXd d = random_vector(p, rng, -2.0, 2.0);
    const Eigen::VectorXd x = project_simplex(d);
    EXPECT_NEAR(x.sum(), 1.0, 1e-12);
    EXPECT_GE(x.minCoeff(), 0.0);
    EXPECT_LE((x - brute_force_simplex(d)).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(VectorSets, ExactProjections) {
  const Box box = Box::uniform(2, 0.0, 1.0);
  EXPECT_EQ(exact_project_box(box, Eigen::Vector2d(2, -1)), Eigen::Vector2d(1, 0));
  const Ball ball(Eigen::Vector2d::Zero(), 1.0);
  EXPECT_LE((exact_project_ball(ball, Eigen::Vector2d(3, 4)) - Eigen::Vector2d(0.6, 0.8)).norm(), 1e-15);
  const LorentzCone cone(2);
  EXPECT_LE(exact_project_lorentz(cone, Eigen::Vector2d(0, -1)).norm(), 1e-15);
  // Projection of (2, 0) onto {|x| <= t}: the point (1, 1).
  EXPECT_LE((exact_project_lorentz(cone, Eigen::Vector2d(2, 0)) - Eigen::Vector2d(1, 1)).norm(), 1e-15);
  EXPECT_EQ(exact_project_lorentz(cone, Eigen::Vector2d(0.5, 1)), Eigen::Vector2d(0.5, 1));
}

// Variational inequality of the exact projection, checked at the support
// point and on sampled members of the set.
template <class Set>
void check_exact_projection(const Set& set, const Eigen::VectorXd& v, Rng& rng) {
  const Eigen::VectorXd w = set.exact_project(v);
  EXPECT_TRUE(set.contains(w, 1e-9));
  if (const auto y = set.support_point(Eigen::VectorXd(v - w))) {
    EXPECT_LE((v - w).dot(*y - w), 1e-9 * std::max(1.0, v.norm()));
  }
  for (int s = 0; s < 20; ++s) {
    const Eigen::VectorXd x = set.exact_project(random_vector(v.size(), rng, -3.0, 3.0));
    EXPECT_LE((v - w).dot(x - w), 1e-9 * std::max(1.0, v.norm()));
  }
}

TEST(VectorSets, ProjectionVariationalInequality) {
  Rng rng(41);
  const Box box(Eigen::Vector3d(-1, 0, 2), Eigen::Vector3d(1, 0.5, 3));
  const Ball ball(Eigen::Vector3d(1, 2, 3), 0.5);
  const ProbabilitySimplex simplex(3);
  const LorentzCone cone(3);
  for (int t = 0; t < 50; ++t) {
    const Eigen::VectorXd v = random_vector(3, rng, -4.0, 4.0);
    check_exact_projection(box, v, rng);
    check_exact_projection(ball, v, rng);
    check_exact_projection(simplex, v, rng);
    check_exact_projection(cone, v, rng);
  }
}

TEST(LorentzCone, MatchesNumericalMinimum) {
  // Compare against a crude search along the cone boundary.
  Rng rng(43);
  const LorentzCone cone(2);
  for (int t = 0; t < 50; ++t) {
    const Eigen::Vector2d v = random_vector(2, rng, -2.0, 2.0);
    const Eigen::Vector2d w = cone.exact_project(v);
    double best = v.squaredNorm();  // apex
    if (cone.contains(v)) best = 0.0;
    for (int s = -4000; s <= 4000; ++s) {
      const double x = s * 1e-3;
      best = std::min(best, (Eigen::Vector2d(x, std::abs(x)) - v).squaredNorm());
    }
    EXPECT_LE((w - v).squaredNorm(), best + 1e-12);
    EXPECT_GE((w - v).squaredNorm(), best - 1e-5);
  }
}

TEST(Spectrahedron, ExactProjectionExamples) {
  EXPECT_LE(frobenius_norm(SymMatrix(exact_project_spectrahedron(SymMatrix::identity(4) * 0.25) -
                                     SymMatrix::identity(4) * 0.25)),
            1e-14);
  const SymMatrix d = exact_project_spectrahedron(SymMatrix::diagonal(Eigen::Vector2d(2, 0)));
  EXPECT_LE(frobenius_norm(SymMatrix(d - SymMatrix::diagonal(Eigen::Vector2d(1, 0)))), 1e-14);
  Eigen::MatrixXd g(2, 2);
  g << 1, 5, -5, 1;
  const SymMatrix h = exact_project_spectrahedron(SymMatrix::from_square(g));
  EXPECT_LE(frobenius_norm(SymMatrix(h - SymMatrix::identity(2) * 0.5)), 1e-14);
}

TEST(Spectrahedron, ExactProjectionVariationalInequality) {
  Rng rng(51);
  const Spectrahedron set(8);
  for (int t = 0; t < 30; ++t) {
    const SymMatrix v = random_sym(8, rng, 2.0);
    const SymMatrix w = set.exact_project(v);
    EXPECT_TRUE(set.contains(w));
    const SymMatrix y = *set.support_point(SymMatrix(v - w));
    EXPECT_LE(frobenius_inner(SymMatrix(v - w), SymMatrix(y - w)), 1e-8);
  }
}

TEST(Spectrahedron, SupportPoint) {
  const SymMatrix y = support_point_spectrahedron(SymMatrix::diagonal(Eigen::Vector2d(0.4, -0.4)));
  EXPECT_NEAR(y(0, 0), 1.0, 1e-12);
  EXPECT_NEAR(frobenius_inner(SymMatrix::zero(3), support_point_spectrahedron(SymMatrix::zero(3))), 0.0, 0.0);

  Rng rng(61);
  const SymMatrix c = random_sym(8, rng);
  const SymMatrix best = support_point_spectrahedron(c);
  const double top = frobenius_inner(c, best);
  EXPECT_NEAR(top, full_eigendecomposition(c).values(0), 1e-9);
  for (int s = 0; s < 1000; ++s) {
    EXPECT_LE(frobenius_inner(c, random_spectrahedron_point(8, rng)), top + 1e-12);
  }
}

TEST(Spectrahedron, Membership) {
  const Spectrahedron set(3);
  EXPECT_TRUE(set.contains(SymMatrix::identity(3) * (1.0 / 3)));
  EXPECT_FALSE(set.contains(SymMatrix::identity(3)));
  EXPECT_FALSE(set.contains(SymMatrix::diagonal(Eigen::Vector3d(1.1, -0.1, 0))));
  EXPECT_TRUE(set.contains(SymMatrix::diagonal(Eigen::Vector3d(1.0 + 5e-10, -5e-10, 0))));
}

TEST(InexactSpectrahedron, HandTraces) {
  const SymMatrix v2 = SymMatrix::diagonal(Eigen::Vector2d(2, 0));
  const auto a = inexact_project_spectrahedron(v2, SymMatrix::identity(2) * 0.5, {}, ToleranceFn::full());
  EXPECT_EQ(a.rank_used, 1);
  EXPECT_LE(frobenius_norm(SymMatrix(a.point - SymMatrix::diagonal(Eigen::Vector2d(1, 0)))), 1e-12);
  EXPECT_NEAR(a.certificate_gap, 0.0, 1e-12);

  const SymMatrix v3 = SymMatrix::diagonal(Eigen::Vector3d(0.6, 0.4, 0));
  const auto b = inexact_project_spectrahedron(v3, v3, {}, ToleranceFn::full());
  EXPECT_EQ(b.rank_used, 2);
  EXPECT_LE(frobenius_norm(SymMatrix(b.point - v3)), 1e-12);
  EXPECT_NEAR(b.certificate_gap, 0.0, 1e-12);

  const SymMatrix e3 = SymMatrix::diagonal(Eigen::Vector3d(0, 0, 1));
  const auto c = inexact_project_spectrahedron(v3, e3, {0, 0, 0.45}, ToleranceFn::relative());
  EXPECT_EQ(c.rank_used, 1);
  EXPECT_LE(frobenius_norm(SymMatrix(c.point - SymMatrix::diagonal(Eigen::Vector3d(1, 0, 0)))), 1e-12);
  EXPECT_NEAR(c.certificate_gap, 0.8 - 0.9, 1e-12);
}

TEST(Certificate, Examples) {
  const Spectrahedron set(3);
  const SymMatrix v = SymMatrix::diagonal(Eigen::Vector3d(0.6, 0.4, 0));
  const SymMatrix e1 = SymMatrix::diagonal(Eigen::Vector3d(1, 0, 0));
  const Certificate bad = certify_inexact_projection(set, v, v, e1, {}, ToleranceFn::full());
  EXPECT_FALSE(bad.accepted);
  EXPECT_NEAR(bad.gap, 0.8, 1e-12);

  const Certificate self = certify_inexact_projection(set, v, v, v, {}, ToleranceFn::full());
  EXPECT_TRUE(self.accepted);
  EXPECT_NEAR(self.gap, 0.0, 1e-12);

  Rng rng(71);
  for (int t = 0; t < 20; ++t) {
    const SymMatrix z = random_sym(6, rng, 3.0);
    const Spectrahedron s6(6);
    const SymMatrix u = random_spectrahedron_point(6, rng);
    const Certificate c =
        certify_inexact_projection(s6, u, z, s6.exact_project(z), random_forcing(rng), random_phi(rng));
    EXPECT_TRUE(c.accepted);
  }
}

TEST(Certificate, UnboundedSupportRejects) {
  const LorentzCone cone(2);
  const Eigen::Vector2d v(0, 5), w(0, 0);
  const Certificate c = certify_inexact_projection(cone, w, v, w, {}, ToleranceFn::full());
  EXPECT_FALSE(c.accepted);
  EXPECT_TRUE(std::isinf(c.gap));
}

TEST(InexactSpectrahedron, ZeroToleranceEqualsExact) {
  Rng rng(81);
  for (int t = 0; t < 40; ++t) {
    const Index n = 2 + static_cast<Index>(rng.below(29));
    const SymMatrix v = random_sym(n, rng, rng.uniform(0.05, 3.0));
    const SymMatrix u = random_spectrahedron_point(n, rng);
    const auto w = inexact_project_spectrahedron(v, u, {}, ToleranceFn::full());
    EXPECT_LE(frobenius_norm(SymMatrix(w.point - exact_project_spectrahedron(v))), 1e-7);
  }
}

TEST(InexactSpectrahedron, OutputsAreCertifiedAndFeasible) {
  Rng rng(91);
  for (int t = 0; t < 60; ++t) {
    const Index n = 3 + static_cast<Index>(rng.below(20));
    const Spectrahedron set(n);
    const SymMatrix u = random_spectrahedron_point(n, rng);
    const SymMatrix v = u - random_sym(n, rng, rng.uniform(0.01, 2.0));
    const ForcingParams g = random_forcing(rng);
    const ToleranceFn phi = random_phi(rng);
    const int p_start = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(n)));
    const auto w = inexact_project_spectrahedron(v, u, g, phi, p_start);
    EXPECT_TRUE(set.contains(w.point));
    EXPECT_GE(w.rank_used, p_start);
    EXPECT_TRUE(certify_inexact_projection(set, u, v, w.point, g, phi).accepted);
  }
}

TEST(InexactSpectrahedron, RankNonincreasingInTolerance) {
  Rng rng(101);
  for (int t = 0; t < 20; ++t) {
    const Index n = 12;
    const SymMatrix u = random_spectrahedron_point(n, rng);
    const SymMatrix v = u - random_sym(n, rng, 0.5);
    int previous = std::numeric_limits<int>::max();
    for (double g3 : {0.0, 0.1, 0.2, 0.3, 0.4, 0.49}) {
      const auto w = inexact_project_spectrahedron(v, u, {0, 0, g3}, ToleranceFn::relative());
      EXPECT_LE(w.rank_used, previous);
      previous = w.rank_used;
    }
  }
}

TEST(InexactSpectrahedron, RejectsBadArguments) {
  const SymMatrix v = SymMatrix::identity(3);
  EXPECT_THROW(inexact_project_spectrahedron(v, v, {}, ToleranceFn::full(), 0), std::invalid_argument);
  EXPECT_THROW(inexact_project_spectrahedron(v, v, {}, ToleranceFn::full(), 4), std::invalid_argument);
  EXPECT_THROW(inexact_project_spectrahedron(v, SymMatrix::identity(2), {}, ToleranceFn::full()),
               std::invalid_argument);
}

TEST(Projectors, WarmStartedProjectorTracksRank) {
  Rng rng(111);
  const Spectrahedron set(15);
  SpectrahedronInexactProjector proj(set);
  SymMatrix x = SymMatrix::identity(15) * (1.0 / 15);
  const SymMatrix target = random_sym(15, rng);
  for (int k = 0; k < 15; ++k) {
    const SymMatrix z = x - 0.3 * SymMatrix(x - target);
    const auto w = proj(x, z, {0, 0, 0.2}, ToleranceFn::relative());
    EXPECT_TRUE(set.contains(w.point));
    EXPECT_TRUE(certify_inexact_projection(set, x, z, w.point, {0, 0, 0.2}, ToleranceFn::relative()).accepted);
    x = w.point;
  }
  ExactProjector<Spectrahedron> exact(set, true);
  const auto e = exact(x, target, {}, ToleranceFn::full());
  EXPECT_EQ(e.rank_used, 15);
  EXPECT_LE(e.certificate_gap, 1e-9);
}
