#include <gtest/gtest.h>

#include <cmath>

#include "maxlab/error.hpp"
#include "maxlab/lorgraph.hpp"
#include "maxlab/principle.hpp"

namespace maxlab {
namespace {

TEST(Ledger, ReferenceConstants) {
  const ConstantLedger L = derive_constants(2, 1.0, 0.0, 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(L.C_H, 8.0);
  EXPECT_DOUBLE_EQ(L.alpha_bar, 73.0);
  EXPECT_DOUBLE_EQ(L.b_norm_bound(), 72.0);
  EXPECT_NEAR(L.log_delta_bar, log_delta_bar(73.0, 1.0 / 3.0), 1e-12);
  EXPECT_LE(L.log_r1, std::log(L.r0));
}

TEST(Ledger, ExactRationals) {
  const ExactLedger e = derive_constants_exact(2, "1", "0", "1/3");
  EXPECT_EQ(e.C_H, "8");
  EXPECT_EQ(e.alpha_bar, "73");
  const ExactLedger small = derive_constants_exact(2, "1", "0", "1/3", std::string("1"));
  ASSERT_TRUE(small.delta_bar.has_value());
  EXPECT_EQ(*small.delta_bar, "1/27");
  ASSERT_TRUE(small.r1.has_value());
  EXPECT_EQ(*small.r1, "1/3888");
}

TEST(Ledger, MonotoneInEllipticityConstant) {
  double prev = 0.0;
  for (double ce : {1.0, 1.5, 2.0, 4.0}) {
    const ConstantLedger L = derive_constants(3, ce, 1.0, 0.25);
    EXPECT_GT(L.alpha_bar, prev);
    prev = L.alpha_bar;
  }
}

TEST(Comparison, JetMatchesFiniteDifferences) {
  const double alpha = 3.0;
  Vec x(2);
  x << 0.4, -0.3;
  const Jet2 j = comparison_jet(alpha, x);
  EXPECT_NEAR(j.r, std::pow(x.norm(), -alpha), 1e-12);
  const double h = 1e-5;
  for (int i = 0; i < 2; ++i) {
    Vec e = Vec::Zero(2);
    e(i) = h;
    const double d = (comparison_jet(alpha, x + e).r - comparison_jet(alpha, x - e).r) / (2 * h);
    EXPECT_NEAR(j.p(i), d, 1e-6 * std::abs(d) + 1e-8);
    const Vec dd = (comparison_jet(alpha, x + e).p - comparison_jet(alpha, x - e).p) / (2 * h);
    for (int k = 0; k < 2; ++k) EXPECT_NEAR(j.hess(i, k), dd(k), 1e-5 * (1 + std::abs(dd(k))));
  }
}

StandardSetupSampler flat_sampler(double rho, double C_E, double C_S) {
  const MetricChart chart = MetricChart::minkowski(3);
  QuasiLinearOperator op = flat_mean_curvature_operator(2);
  op.attach_region(admissible_region(chart, rho, 2.0, Vec::Constant(2, -1), Vec::Constant(2, 1)));
  auto draw = [chart, rho](const Vec& x, std::mt19937_64& g) {
    return sample_admissible(chart, rho, 2.0, x, x, 1, g).front();
  };
  return StandardSetupSampler(op, C_E, C_S, draw);
}

TEST(StandardSetup, SampledSetupsValidateAndMeetBudget) {
  const QuasiLinearOperator op = flat_mean_curvature_operator(2);
  const StandardSetupSampler sampler = flat_sampler(0.9, 2.0, 1.0);
  std::mt19937_64 rng(99);
  for (int k = 0; k < 100; ++k) {
    const auto s = sampler.draw(rng);
    EXPECT_EQ(validate_setup(s.setup, op, s.ledger).verdict, Verdict::Pass) << k;
    EXPECT_EQ(hessian_budget(s.setup, op, s.ledger).verdict, Verdict::Pass) << k;
  }
}

TEST(StandardSetup, BrokenItemIsNamed) {
  const QuasiLinearOperator op = flat_mean_curvature_operator(2);
  std::mt19937_64 rng(4);
  auto s = flat_sampler(0.9, 2.0, 1.0).draw(rng);
  s.setup.x1 *= 1.5;  // |x1| != 2 r0
  const Report r = validate_setup(s.setup, op, s.ledger);
  EXPECT_EQ(r.verdict, Verdict::HypothesisFailure);
  EXPECT_EQ(r.witness["failed_items"][0]["item"], 1);
}

TEST(OperatorLowerBound, AtLeastOneOnSampledSetups) {
  const QuasiLinearOperator op = flat_mean_curvature_operator(2);
  const StandardSetupSampler sampler = flat_sampler(0.9, 2.0, 1.0);
  std::mt19937_64 rng(1234);
  for (int k = 0; k < 200; ++k) {
    const auto s = sampler.draw(rng);
    const Linearization lin = linearization_coefficients(op, s.setup.jet0, s.setup.jet1, 16);
    const OperatorLowerBound lb = comparison_operator_lower_bound(s.setup, s.ledger, lin);
    ASSERT_TRUE(lb.in_contract) << lb.report.to_json().dump();
    EXPECT_GE(lb.log_value, std::log1p(-1e-9)) << k;
  }
}

TEST(OperatorLowerBound, WrongAlphaLeavesContract) {
  const QuasiLinearOperator op = flat_mean_curvature_operator(2);
  std::mt19937_64 rng(8);
  auto s = flat_sampler(0.9, 2.0, 1.0).draw(rng);
  s.setup.alpha *= 0.5;
  const Linearization lin = linearization_coefficients(op, s.setup.jet0, s.setup.jet1, 16);
  EXPECT_FALSE(comparison_operator_lower_bound(s.setup, s.ledger, lin).in_contract);
}

GridFunction line_grid(const std::function<double(double)>& f, int n = 41) {
  return GridFunction::sample({n}, Vec::Constant(1, -1.0), Vec::Constant(1, 2.0 / (n - 1)),
                              [&](const Vec& x) { return f(x(0)); });
}

TEST(Contact, OrderingAndContactVerdicts) {
  const GridFunction u0 = line_grid([](double x) { return x * x; });
  EXPECT_EQ(contact_locator(u0, u0).verdict, Verdict::Identical);
  EXPECT_EQ(contact_locator(u0, line_grid([](double x) { return x * x - 1.0; })).verdict, Verdict::HypothesisFailure);
  EXPECT_EQ(contact_locator(u0, line_grid([](double x) { return x * x + 0.1; })).verdict, Verdict::HypothesisFailure);
}

TEST(Contact, SingleTouchingPoint) {
  // u1 touches u0 only at the origin.
  const GridFunction u0 = line_grid([](double x) { return x * x; });
  const GridFunction u1 = line_grid([](double x) { return 0.5 * x * x; });
  const ContactResult c = contact_locator(u0, u1);
  ASSERT_TRUE(c.found()) << c.message;
  EXPECT_EQ(c.contact.size(), 1u);
  EXPECT_NEAR(c.x1(0), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(c.x0(0) - c.x1(0)), 2.0 * c.r0, 1e-14);
  EXPECT_LE(3.0 * c.r0, 1.0 + 1e-12);
}

TEST(SupportParaboloid, SemiconcaveAndNot) {
  const GridFunction smooth = line_grid([](double x) { return std::sin(x); });
  const std::size_t mid = 20;
  EXPECT_EQ(support_paraboloid(smooth, mid, 1.0).report.verdict, Verdict::Pass);
  // -|x| has no lower support paraboloid at its kink for moderate C.
  const GridFunction kink = line_grid([](double x) { return -std::abs(x); });
  EXPECT_EQ(support_paraboloid(kink, mid, 1.0).report.verdict, Verdict::ConclusionFailure);
  EXPECT_THROW(support_paraboloid(smooth, 999, 1.0), Error);
}

TEST(Pipeline, BuiltInInstanceVerdicts) {
  EXPECT_EQ(contradiction_report(plane_vs_hyperboloid_instance(21)).verdict, Verdict::HypothesisFailure);
  EXPECT_EQ(contradiction_report(identical_hyperboloid_instance(21)).verdict, Verdict::Identical);
  const Report fab = contradiction_report(fabricated_strict_gap_instance());
  EXPECT_EQ(fab.verdict, Verdict::InconsistentHypotheses) << fab.message;
}

}  // namespace
}  // namespace maxlab
