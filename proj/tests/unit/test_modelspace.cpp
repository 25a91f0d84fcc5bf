#include <gtest/gtest.h>

#include <cmath>

#include "maxlab/error.hpp"
#include "maxlab/modelspace.hpp"

namespace maxlab {
namespace {

Vec point(std::initializer_list<double> v) {
  Vec x(static_cast<int>(v.size()));
  int i = 0;
  for (double c : v) x(i++) = c;
  return x;
}

TEST(Distance, StripMatchesAntiDeSitterClosedForm) {
  for (const auto& [t1, t2, rho] : {std::tuple{-0.5, 0.7, 0.3}, std::tuple{-1.2, 1.1, 1.5}, std::tuple{0.0, 0.4, 0.1},
                                    std::tuple{-0.3, 1.4, 0.0}}) {
    EXPECT_NEAR(strip_distance(t1, t2, rho), anti_de_sitter_distance(t1, t2, rho), 1e-12)
        << t1 << " " << t2 << " " << rho;
  }
}

TEST(Distance, VerticalSegmentIsTimeDifference) {
  EXPECT_NEAR(strip_distance(-0.4, 0.9, 0.0), 1.3, 1e-14);
  const ModelSpacetime m = ModelSpacetime::parse("strip");
  EXPECT_NEAR(lorentz_distance(m, point({0.2, -0.4}), point({0.2, 0.9})), 1.3, 1e-14);
}

TEST(Distance, MinkowskiClosedForm) {
  const ModelSpacetime m = ModelSpacetime::minkowski(3);
  EXPECT_DOUBLE_EQ(lorentz_distance(m, point({0, 0, 0}), point({0.3, 0.4, 1.3})), std::sqrt(1.69 - 0.25));
  EXPECT_EQ(lorentz_distance(m, point({0, 0, 0}), point({1, 0, 0.5})), 0.0);  // spacelike
  EXPECT_EQ(lorentz_distance(m, point({0, 0, 1}), point({0, 0, 0})), 0.0);    // past
}

TEST(Distance, ReverseTriangleInequality) {
  const ModelSpacetime m = ModelSpacetime::parse("ads-strip dim=2");
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> ux(-0.4, 0.4), ut(-1.4, 1.4);
  int tested = 0;
  for (int k = 0; k < 3000 && tested < 300; ++k) {
    Vec p = point({ux(rng), ux(rng), ut(rng)}), q = point({ux(rng), ux(rng), ut(rng)}),
        r = point({ux(rng), ux(rng), ut(rng)});
    if (!m.chronological(p, q) || !m.chronological(q, r)) continue;
    ++tested;
    EXPECT_GE(lorentz_distance(m, p, r), lorentz_distance(m, p, q) + lorentz_distance(m, q, r) - 1e-10);
  }
  EXPECT_GT(tested, 50);
}

TEST(Distance, BoundedByPiOnTheStrip) {
  const ModelSpacetime m = ModelSpacetime::parse("strip");
  EXPECT_LT(lorentz_distance(m, point({0.0, -1.5}), point({0.0, 1.5})), M_PI);
  EXPECT_NEAR(strip_distance(-1.5, 1.5, 0.0), 3.0, 1e-14);
}

TEST(Busemann, VerticalLineGivesTime) {
  for (const char* decl : {"strip", "ads-strip", "minkowski n=3"}) {
    const ModelSpacetime m = ModelSpacetime::parse(decl);
    const TimelikeGeodesic line = parse_line(m, "center");
    const BusemannEvaluator eval(m, line);
    Vec x = Vec::Zero(m.n());
    x(0) = 0.3;
    x(m.n() - 1) = 0.4;
    EXPECT_NEAR(eval.plus(x).value, 0.4, 1e-3) << decl;
    EXPECT_NEAR(eval.plus(x).value + eval.minus(x).value, 0.0, 2e-3) << decl;
  }
}

TEST(Busemann, InequalitySuitePasses) {
  const ModelSpacetime m = ModelSpacetime::parse("strip");
  const BusemannEvaluator eval(m, parse_line(m, "center"));
  std::vector<Vec> pts;
  for (double x : {-0.8, -0.2, 0.5})
    for (double t : {-1.0, -0.3, 0.4, 1.0}) pts.push_back(point({x, t}));
  EXPECT_TRUE(busemann_inequality_suite(eval, pts).passed());
}

TEST(Busemann, LineParsing) {
  const ModelSpacetime m = ModelSpacetime::parse("ads-strip");
  EXPECT_NEAR(parse_line(m, "s=0.1,0.2").fiber_point(1), 0.2, 0.0);
  EXPECT_THROW(parse_line(m, "s=0.1"), Error);
  EXPECT_TRUE(check_unit_speed(m, parse_line(m, "s=0.1,0.2")).passed());
}

TEST(Spheres, MeanCurvatureOracles) {
  const ModelSpacetime strip = ModelSpacetime::parse("strip");
  const ModelSpacetime mink = ModelSpacetime::minkowski(3);
  for (double r : {M_PI / 6, M_PI / 4, M_PI / 3}) {
    const SphereResult s = geodesic_sphere(strip, point({0.0, 0.0}), point({0.0, 1.0}), r);
    EXPECT_NEAR(s.expected_H, -1.0 / std::tan(r), 1e-15);
    EXPECT_NEAR(s.geometry.H, s.expected_H, 1e-6) << r;
    const SphereResult f = geodesic_sphere(mink, point({0.0, 0.0, 0.0}), point({0.0, 0.0, 1.0}), r);
    EXPECT_NEAR(f.geometry.H, -1.0 / r, 1e-6) << r;
  }
}

TEST(Spheres, TiltedAntiDeSitter) {
  const ModelSpacetime m = ModelSpacetime::parse("ads-strip");
  // The fiber metric at the ball centre is 4 delta, so this eta is a unit future vector.
  const SphereResult s =
      geodesic_sphere(m, point({0.0, 0.0, 0.0}), point({0.5 * std::sinh(0.3), 0.0, std::cosh(0.3)}), M_PI / 4);
  EXPECT_NEAR(s.geometry.H, -1.0, 1e-5);
}

TEST(Spheres, CentreOutsideStripIsDomainError) {
  // cosh(0.6) sin(pi/3) > 1: the geodesic reaches t = pi/2 before s = r.
  const ModelSpacetime m = ModelSpacetime::parse("strip");
  try {
    geodesic_sphere(m, point({0.1, 0.0}), point({std::sinh(-0.6), std::cosh(0.6)}), M_PI / 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Domain);
  }
}

TEST(Integrators, JacobiFieldsOfFlatSpaceAreLinear) {
  const MetricField g = MetricField::minkowski(3);
  const Mat J0 = Mat::Identity(3, 3), W0 = 0.5 * Mat::Identity(3, 3);
  const JacobiSolution s = integrate_jacobi(g, Vec::Zero(3), point({0.0, 0.0, 1.0}), J0, W0, 2.0, 100);
  EXPECT_LT((s.J - 2.0 * Mat::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(s.end.X(2), 2.0, 1e-14);
}

TEST(Integrators, StripGeodesicPreservesNorm) {
  const MetricField g = ModelSpacetime::parse("strip").field();
  const Vec X0 = point({0.0, 0.0});
  const Vec V0 = point({0.5 / std::cos(0.0), std::sqrt(1.25)});
  const auto path = integrate_geodesic(g, X0, V0, 0.8, 400);
  for (const GeodesicPoint& q : path) EXPECT_NEAR(q.V.dot(g.g(q.X) * q.V), -1.0, 1e-10);
}

TEST(Splitting, PullbackMatchesProductMetric) {
  const ModelSpacetime m = ModelSpacetime::parse("strip");
  SplittingOptions opt;
  opt.y = {-0.6, -0.3, 0.0, 0.3, 0.6};
  opt.t = {-0.9, -0.45, 0.0, 0.45, 0.9};
  const Report r = splitting_map_check(m, opt);
  EXPECT_TRUE(r.passed()) << r.to_json().dump(1);
}

TEST(CosmologicalTime, EstimateApproachesTimeFromPastBoundary) {
  const ModelSpacetime m = ModelSpacetime::parse("strip");
  for (double t : {-0.5, 0.0, 0.4, 1.0}) {
    const Vec q = point({0.1, t});
    EXPECT_DOUBLE_EQ(cosmological_time(m, q), t + M_PI / 2);
    EXPECT_NEAR(cosmological_time_estimate(m, q), t + M_PI / 2, 1e-4) << t;
  }
}

TEST(Model, ParseErrors) {
  EXPECT_THROW(ModelSpacetime::parse("de-sitter"), Error);
  EXPECT_THROW(ModelSpacetime::parse("strip fiber=flat dim=0"), Error);
}

}  // namespace
}  // namespace maxlab
