#include <gtest/gtest.h>

#include <cmath>

#include "maxlab/error.hpp"
#include "maxlab/lorgraph.hpp"

namespace maxlab {
namespace {

// Upper hyperboloid t = sqrt(1 + |x|^2): totally umbilic, H = 1.
Jet2 hyperboloid(const Vec& x) {
  const int m = static_cast<int>(x.size());
  const double s = std::sqrt(1.0 + x.squaredNorm());
  return {x, s, x / s, SymMatrix::from((Mat::Identity(m, m) - x * x.transpose() / (s * s)) / s)};
}

class HyperboloidTest : public ::testing::TestWithParam<int> {};

TEST_P(HyperboloidTest, UnitMeanCurvature) {
  const int n = GetParam();
  const MetricChart chart = MetricChart::minkowski(n);
  std::mt19937_64 rng(n);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 50; ++k) {
    Vec x(n - 1);
    for (int i = 0; i < n - 1; ++i) x(i) = u(rng);
    const GraphGeometry g = graph_geometry(chart, hyperboloid(x));
    EXPECT_NEAR(g.H, 1.0, 1e-13);
    // Umbilic: h = H G.
    EXPECT_LT(max_abs_entry(g.h - g.G), 1e-12);
    EXPECT_NEAR(g.W, 1.0 / std::sqrt(1.0 + x.squaredNorm()), 1e-14);
  }
}

INSTANTIATE_TEST_SUITE_P(Dimensions, HyperboloidTest, ::testing::Values(3, 4));

TEST(GraphGeometry, PlaneIsMaximal) {
  const GraphGeometry g = graph_geometry(MetricChart::minkowski(3), {Vec::Zero(2), 0.7, Vec::Zero(2), SymMatrix::zero(2)});
  EXPECT_EQ(g.H, 0.0);
  EXPECT_EQ(g.W, 1.0);
}

TEST(GraphGeometry, TimeSymmetricSliceOfStripIsTotallyGeodesic) {
  const MetricChart chart = MetricChart::parse("ads-strip dim=2");
  Vec x(2);
  x << 0.2, -0.1;
  const GraphGeometry g = graph_geometry(chart, {x, 0.0, Vec::Zero(2), SymMatrix::zero(2)});
  EXPECT_NEAR(g.H, 0.0, 1e-12);
}

TEST(GraphGeometry, StripLevelSetsHaveTanMeanCurvature) {
  // {t = c} in -dt^2 + cos^2 t g_N has h = sin c cos c g_N, so H = tan c.
  const MetricChart chart = MetricChart::parse("strip dim=2");
  for (double c : {-0.8, -0.2, 0.3, 1.1}) {
    const GraphGeometry g = graph_geometry(chart, {Vec::Zero(2), c, Vec::Zero(2), SymMatrix::zero(2)});
    EXPECT_NEAR(std::abs(g.H), std::abs(std::tan(c)), 1e-9) << c;
  }
}

TEST(GraphGeometry, HessianRoundTrip) {
  const MetricChart chart = MetricChart::parse("ads-strip dim=2");
  Vec x(2), p(2);
  x << 0.1, 0.2;
  p << 0.2, -0.3;
  const Jet2 j{x, 0.15, p, SymMatrix::diag({0.4, -0.7})};
  const GraphGeometry g = graph_geometry(chart, j);
  EXPECT_LT(max_abs_entry(hessian_from_geometry(chart, j, g) - j.hess), 1e-12);
}

TEST(GraphGeometry, TimelikeGraphRejected) {
  Vec p(2);
  p << 1.0, 0.5;
  try {
    graph_geometry(MetricChart::minkowski(3), {Vec::Zero(2), 0.0, p, SymMatrix::zero(2)});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotSpacelike);
  }
}

TEST(GraphGeometry, FiniteDifferenceGridConverges) {
  auto grid = std::make_shared<GridFunction>(GridFunction::sample(
      {101, 101}, Vec::Constant(2, -0.5), Vec::Constant(2, 0.01), [](const Vec& x) { return std::sqrt(1.0 + x.squaredNorm()); }));
  const GraphSurface s = GraphSurface::from_grid(grid);
  const MetricChart chart = MetricChart::minkowski(3);
  for (std::size_t k : {grid->flat({50, 50}), grid->flat({20, 75}), grid->flat({90, 10})}) {
    EXPECT_NEAR(graph_geometry(chart, s.jet(grid->node(k))).H, 1.0, 1e-4);
  }
}

TEST(Chart, AnalyticAndFiniteDifferenceOperatorsAgree) {
  const QuasiLinearOperator flat = flat_mean_curvature_operator(2);
  const QuasiLinearOperator chart = chart_mean_curvature_operator(MetricChart::minkowski(3));
  Vec x(2), p(2);
  x << 0.3, 0.1;
  p << -0.2, 0.5;
  const Jet2 j{x, 0.2, p, SymMatrix::diag({1.0, 0.5})};
  EXPECT_NEAR(evaluate(flat, j), evaluate(chart, j), 1e-12);
}

TEST(Chart, ParseErrors) {
  EXPECT_THROW(MetricChart::parse("klein-bottle"), Error);
  EXPECT_THROW(MetricChart::parse("minkowski n=3 colour=red"), Error);
  EXPECT_THROW(MetricChart::parse("minkowski n=x"), Error);
}

}  // namespace
}  // namespace maxlab
