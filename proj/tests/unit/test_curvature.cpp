#include <gtest/gtest.h>

#include <cmath>

#include "maxlab/curvature.hpp"
#include "maxlab/error.hpp"

namespace maxlab {
namespace {

Vec point(std::initializer_list<double> v) {
  Vec x(static_cast<int>(v.size()));
  int i = 0;
  for (double c : v) x(i++) = c;
  return x;
}

TEST(Curvature, MinkowskiIsFlat) {
  const CurvatureBundle b = curvature(MetricField::minkowski(4), point({0.3, -0.2, 0.1, 0.5}));
  EXPECT_EQ(b.riemann.max_abs(), 0.0);
  EXPECT_EQ(b.scalar, 0.0);
}

// The cos^2-warped strip over hyperbolic space is anti-de Sitter: K = -1.
TEST(Curvature, AntiDeSitterConstantCurvature) {
  const MetricField g = MetricField::parse("ads-strip dim=3");
  const Vec x = point({0.1, -0.2, 0.15, 0.3});
  const CurvatureBundle b = curvature(g, x);
  const int n = 4;
  EXPECT_NEAR(b.scalar, -double(n * (n - 1)), 1e-10);
  EXPECT_LT((b.ricci + (n - 1) * b.g).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT(weyl_norm_sq(b), 1e-20);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> gauss;
  for (int k = 0; k < 20; ++k) {
    Vec X(n), Y(n);
    for (int i = 0; i < n; ++i) X(i) = gauss(rng), Y(i) = gauss(rng);
    const double area = X.dot(b.g * X) * Y.dot(b.g * Y) - std::pow(X.dot(b.g * Y), 2);
    if (std::abs(area) < 1e-3) continue;
    EXPECT_NEAR(sectional_curvature(b, X, Y), -1.0, 1e-9);
  }
}

TEST(Curvature, RoundSphereHasUnitCurvature) {
  const CurvatureBundle b = curvature(MetricField::parse("sphere dim=2"), point({0.4, 0.7}));
  EXPECT_NEAR(b.scalar, 2.0, 1e-9);
}

TEST(Curvature, PairSymmetriesOnGenericMetric) {
  const MetricField g = MetricField::parse("warped fiber=perturbed dim=3 amplitude=0.05 warp=cos");
  const Vec x = point({0.2, 0.1, -0.3, 0.4});
  const CurvatureBundle b = curvature(g, x);
  EXPECT_LT(b.symmetry_residual, 1e-8);
  EXPECT_LT(weyl_trace_residual(b), 1e-8);
  for (int a = 0; a < 4; ++a)
    for (int c = 0; c < 4; ++c)
      for (int d = 0; d < 4; ++d) EXPECT_NEAR(b.riemann(a, a, c, d), 0.0, 1e-8);
  EXPECT_LT((b.ricci - b.ricci.transpose()).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Curvature, BianchiIdentities) {
  const MetricField g = MetricField::parse("warped fiber=perturbed dim=3 amplitude=0.05 warp=cos");
  const BianchiResiduals r = bianchi_residuals(g, point({0.2, 0.1, -0.3, 0.4}));
  EXPECT_LT(r.first, 1e-10);
  EXPECT_LT(r.second, 1e-6);
}

TEST(Curvature, RicciTimeTimeOfCosineWarp) {
  for (const char* decl : {"ads-strip dim=3", "warped fiber=perturbed dim=3 amplitude=0.05 warp=cos"}) {
    const CurvatureBundle b = curvature(MetricField::parse(decl), point({0.1, 0.2, 0.3, -0.25}));
    EXPECT_NEAR(b.ricci(3, 3), 3.0, 1e-8) << decl;
  }
}

TEST(Weyl, ConformalTransformLaw) {
  const MetricField g = MetricField::parse("warped fiber=perturbed dim=3 amplitude=0.05 warp=cos");
  const Vec x = point({0.2, 0.1, -0.3, 0.4});
  EXPECT_EQ(conformal_transform_check(g, ConformalFactor::constant(2.0), x).verdict, Verdict::Pass);
  EXPECT_TRUE(conformal_transform_check(g, ConformalFactor::secant_of_time(4), x, 1e-5).passed());
}

TEST(Weyl, RejectsLowDimension) {
  const CurvatureBundle b = curvature(MetricField::parse("ads-strip dim=2"), point({0.1, 0.1, 0.2}));
  EXPECT_THROW(weyl_norm_sq(b), Error);
}

TEST(Weyl, ProductDecompositionAndStripConformality) {
  const FiberMetric fiber{FiberKind::Perturbed, 3, 0.05};
  const Vec x = point({0.2, 0.1, -0.3, 0.0});
  const double N = 4.0;
  const double a = -1.0 / (N - 2.0), b = 1.0 / ((N - 1.0) * (N - 2.0));
  EXPECT_TRUE(product_norm_decomposition(fiber, x, a, b, true).passed());
  EXPECT_TRUE(product_norm_decomposition(fiber, x, 0.3, -0.2, false).passed());
  EXPECT_TRUE(strip_conformal_product_check(fiber, point({0.2, 0.1, -0.3, 0.4})).passed());
}

TEST(Schur, HyperbolicFiberIsIsotropic) {
  const MetricField h = MetricField::fiber(FiberMetric{FiberKind::Hyperbolic, 3, 0.0});
  std::mt19937_64 rng(6);
  const SchurResult s = schur_residual(h, point({0.1, 0.2, -0.1}), 50, rng);
  EXPECT_LT(s.residual, 1e-9);
  EXPECT_NEAR(s.mean_curvature, -1.0, 1e-9);
}

TEST(Schur, PerturbedFiberIsNot) {
  const MetricField h = MetricField::fiber(FiberMetric{FiberKind::Perturbed, 3, 0.2});
  std::mt19937_64 rng(6);
  EXPECT_GT(schur_residual(h, point({0.1, 0.2, -0.1}), 50, rng).residual, 1e-3);
}

TEST(Frame, OrthonormalSigns) {
  const MetricField g = MetricField::parse("ads-strip dim=2");
  const Mat G = g.g(point({0.1, 0.2, 0.3}));
  const Frame f = orthonormal_frame(G, 2);
  const Mat gram = f.E.transpose() * G * f.E;
  EXPECT_LT((gram - Mat(f.signs.asDiagonal())).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(f.signs.sum(), 1.0);
}

}  // namespace
}  // namespace maxlab
