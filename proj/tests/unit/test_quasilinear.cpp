#include <gtest/gtest.h>

#include <cmath>

#include "helpers.hpp"
#include "maxlab/error.hpp"
#include "maxlab/lorgraph.hpp"
#include "maxlab/quadrature.hpp"
#include "maxlab/quasilinear.hpp"

namespace maxlab {
namespace {

Jet2 jet(Vec x, double r, Vec p, SymMatrix h) { return {std::move(x), r, std::move(p), std::move(h)}; }

TEST(Quadrature, IntegratesPolynomialsExactly) {
  const QuadratureRule q = gauss_legendre(8, 0.0, 2.0);
  EXPECT_NEAR(integrate(q, [](double t) { return std::pow(t, 15); }), std::pow(2.0, 16) / 16.0, 1e-9);
  EXPECT_NEAR(integrate_composite(0.0, M_PI, 4, 10, [](double t) { return std::sin(t); }), 2.0, 1e-14);
}

TEST(Laplacian, EvaluatesTrace) {
  const QuasiLinearOperator op = QuasiLinearOperator::laplacian(2);
  const Jet2 j = jet(Vec::Zero(2), 0.3, Vec::Zero(2), SymMatrix::diag({1.5, -0.25}));
  EXPECT_DOUBLE_EQ(evaluate(op, j), 1.25);
}

TEST(FlatMeanCurvature, PlaneIsZeroAndHyperboloidIsOne) {
  const QuasiLinearOperator op = flat_mean_curvature_operator(2);
  EXPECT_DOUBLE_EQ(evaluate(op, jet(Vec::Zero(2), 0.0, Vec::Zero(2), SymMatrix::zero(2))), 0.0);
  for (double x0 : {0.0, 0.3, -0.7}) {
    Vec x(2);
    x << x0, 0.5 * x0;
    const double s = std::sqrt(1.0 + x.squaredNorm());
    const Jet2 j = jet(x, s, x / s, SymMatrix::from((Mat::Identity(2, 2) - x * x.transpose() / (s * s)) / s));
    EXPECT_NEAR(evaluate(op, j), 1.0, 1e-14);
    EXPECT_NEAR(flat_mean_curvature(j), 1.0, 1e-14);
  }
}

TEST(FlatMeanCurvature, OutsideRegionIsAdmissibilityError) {
  QuasiLinearOperator op = flat_mean_curvature_operator(2);
  op.attach_region(admissible_region(MetricChart::minkowski(3), 0.5, 2.0, Vec::Constant(2, -1), Vec::Constant(2, 1)));
  Vec p(2);
  p << 0.9, 0.0;  // |p|^2 = 0.81 > 1 - rho^2
  try {
    evaluate(op, jet(Vec::Zero(2), 0.0, p, SymMatrix::zero(2)));
    FAIL() << "expected an admissibility error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Admissibility);
  }
}

TEST(Ellipticity, CertificateAtHalfRho) {
  const MetricChart chart = MetricChart::minkowski(3);
  const AdmissibleSet set = admissible_set(chart, flat_mean_curvature_operator(2), 0.5, 2.0, Vec::Constant(2, -1),
                                           Vec::Constant(2, 1), 2000, 7);
  EXPECT_TRUE(set.certificate.valid);
  EXPECT_EQ(set.certificate.samples_checked, 2000u);
  // a = (1/m)(I + p p^T/W^2)/W has eigenvalues in [1/m, 1/(m rho^3)]; the
  // derivative bounds (order rho^-5) dominate the constant.
  EXPECT_LE(set.certificate.worst_ratio, 4.0 + 1e-12);
  EXPECT_GE(set.certificate.worst_ratio, 2.0 - 1e-12);
  EXPECT_GT(set.certificate.worst_derivative_bound, set.certificate.worst_ratio);
  EXPECT_LT(set.certificate.required_constant(), 64.0);
}

TEST(Ellipticity, CertificateBlowsUpAsRhoShrinks) {
  const MetricChart chart = MetricChart::minkowski(3);
  double prev = 0.0;
  for (double rho : {0.8, 0.4, 0.2, 0.1}) {
    const AdmissibleSet set = admissible_set(chart, flat_mean_curvature_operator(2), rho, 2.0, Vec::Constant(2, -1),
                                             Vec::Constant(2, 1), 2000, 7);
    EXPECT_GT(set.certificate.required_constant(), prev) << "rho=" << rho;
    prev = set.certificate.required_constant();
  }
  EXPECT_GT(prev, 100.0);
}

TEST(Ellipticity, TooSmallCandidateIsInvalid) {
  const MetricChart chart = MetricChart::minkowski(3);
  const auto region = admissible_region(chart, 0.5, 2.0, Vec::Constant(2, -1), Vec::Constant(2, 1));
  std::mt19937_64 rng(3);
  const auto pts = sample_admissible(chart, 0.5, 2.0, Vec::Constant(2, -1), Vec::Constant(2, 1), 200, rng);
  const EllipticityCertificate c = certify_ellipticity(flat_mean_curvature_operator(2), *region, pts, 1.0);
  EXPECT_FALSE(c.valid);
  EXPECT_FALSE(c.witness.is_null());
}

TEST(FiberConvexity, BallFibersAreConvex) {
  const MetricChart chart = MetricChart::minkowski(3);
  const auto region = admissible_region(chart, 0.5, 2.0, Vec::Constant(2, -1), Vec::Constant(2, 1));
  std::mt19937_64 rng(5);
  auto draw = [&](std::mt19937_64& g) {
    const JetPoint q = sample_admissible(chart, 0.5, 2.0, Vec::Zero(2), Vec::Zero(2), 1, g).front();
    return std::make_pair(q.r, q.p);
  };
  EXPECT_EQ(check_fiber_convexity(*region, Vec::Zero(2), draw, 500, rng).verdict, Verdict::Pass);
}

TEST(FiberConvexity, AnnulusIsDetected) {
  // U_x = {1/2 < |p| < 1}: midpoints of opposite points leave the fiber.
  const AdmissibleRegion annulus(
      1, [](const Vec&, double, const Vec& p) { return p.norm() > 0.5 && p.norm() < 1.0; }, "annulus", false);
  std::mt19937_64 rng(1);
  auto draw = [](std::mt19937_64& g) {
    std::bernoulli_distribution s;
    Vec p(1);
    p << (s(g) ? 0.75 : -0.75);
    return std::make_pair(0.0, p);
  };
  const Report r = check_fiber_convexity(annulus, Vec::Zero(1), draw, 50, rng);
  EXPECT_EQ(r.verdict, Verdict::ConclusionFailure);
}

// Quadrature accuracy of the integral coefficients depends on how close the
// path comes to |p| = 1; at rho = 0.9 order 16 is already at roundoff.
TEST(Linearization, IdentityHoldsForMeanCurvature) {
  const MetricChart chart = MetricChart::minkowski(3);
  const QuasiLinearOperator op = flat_mean_curvature_operator(2);
  std::mt19937_64 rng(17);
  for (const auto& [rho, order, tol] : {std::tuple{0.9, 16, 1e-12}, std::tuple{0.5, 32, 1e-10}}) {
    const auto pts = sample_admissible(chart, rho, 2.0, Vec::Constant(2, -1), Vec::Constant(2, 1), 200, rng);
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
      const Jet2 j0{pts[2 * k].x, pts[2 * k].r, pts[2 * k].p, testing::random_symmetric(testing::uniform_vec(2, -1, 1, rng), rng)};
      const Jet2 j1{pts[2 * k].x, pts[2 * k + 1].r, pts[2 * k + 1].p,
                    testing::random_symmetric(testing::uniform_vec(2, -1, 1, rng), rng)};
      const Linearization lin = linearization_coefficients(op, j0, j1, order);
      worst = std::max(worst, std::abs(linearization_identity_residual(op, j0, j1, lin)));
    }
    EXPECT_LT(worst, tol) << "rho=" << rho << " order=" << order;
  }
}

TEST(Linearization, LaplacianHasUnitCoefficients) {
  const QuasiLinearOperator op = QuasiLinearOperator::laplacian(3);
  const Jet2 j0{Vec::Zero(3), 0.0, Vec::Zero(3), SymMatrix::identity(3)};
  const Jet2 j1{Vec::Zero(3), 1.0, Vec::Ones(3), SymMatrix::diag({1, 2, 3})};
  const Linearization lin = linearization_coefficients(op, j0, j1);
  EXPECT_LT(max_abs_entry(lin.A - SymMatrix::identity(3)), 1e-15);
  EXPECT_LT(lin.B.norm(), 1e-15);
  EXPECT_EQ(lin.C, 0.0);
  EXPECT_NEAR(linearization_identity_residual(op, j0, j1, lin), 0.0, 1e-14);
}

TEST(Linearization, FiniteDifferenceDerivativesMatchAnalytic) {
  const QuasiLinearOperator analytic = flat_mean_curvature_operator(2);
  const QuasiLinearOperator fd = chart_mean_curvature_operator(MetricChart::minkowski(3));
  ASSERT_TRUE(analytic.has_analytic_derivatives());
  Vec x(2), p(2);
  x << 0.1, -0.2;
  p << 0.3, 0.4;
  const CoefficientDerivatives a = analytic.derivatives(x, 0.2, p);
  const CoefficientDerivatives f = fd.derivatives(x, 0.2, p);
  for (int k = 0; k < 2; ++k) EXPECT_LT(max_abs_entry(a.da_dp[k] - f.da_dp[k]), 1e-6);
  EXPECT_LT((a.db_dp - f.db_dp).norm(), 1e-6);
}

}  // namespace
}  // namespace maxlab
