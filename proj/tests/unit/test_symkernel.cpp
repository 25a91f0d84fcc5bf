#include <gtest/gtest.h>

#include "helpers.hpp"
#include "maxlab/error.hpp"
#include "maxlab/symkernel.hpp"

namespace maxlab {
namespace {

using testing::random_symmetric;
using testing::uniform_vec;

TEST(PsdOrdering, Examples) {
  EXPECT_TRUE(psd_ordering(SymMatrix::zero(2), SymMatrix::identity(2), 0.0));
  EXPECT_FALSE(psd_ordering(SymMatrix::identity(2), SymMatrix::zero(2), 0.0));
  EXPECT_FALSE(psd_ordering(SymMatrix::diag({1, 3}), SymMatrix::diag({2, 2}), 0.0));
}

TEST(PsdOrdering, DimensionMismatchThrows) {
  EXPECT_THROW(psd_ordering(SymMatrix::zero(2), SymMatrix::zero(3)), Error);
}

TEST(PsdOrdering, ReflexiveAndAntisymmetric) {
  std::mt19937_64 rng(11);
  for (int k = 0; k < 500; ++k) {
    const int n = 2 + k % 4;
    const SymMatrix a = random_symmetric(uniform_vec(n, -3, 3, rng), rng);
    const SymMatrix b = random_symmetric(uniform_vec(n, -3, 3, rng), rng);
    EXPECT_TRUE(psd_ordering(a, a));
    if (psd_ordering(a, b) && psd_ordering(b, a)) EXPECT_LT(max_abs_entry(a - b), 1e-8);
  }
}

TEST(MaxAbsEntry, Examples) {
  EXPECT_EQ(max_abs_entry(SymMatrix::diag({2, -1})), 2.0);
  SymMatrix m(2);
  m.set(0, 1, -3.0);
  m.set(1, 1, 1.0);
  EXPECT_EQ(max_abs_entry(m), 3.0);
  EXPECT_EQ(max_abs_entry(SymMatrix::zero(3)), 0.0);
}

TEST(SymMatrix, FromRejectsAsymmetric) {
  Mat m(2, 2);
  m << 1, 2, 3, 4;
  EXPECT_THROW(SymMatrix::from(m), Error);
}

TEST(TraceBound, OneDimensional) {
  // n = 1: b <= c1 c4 whenever a b <= c4 and a >= 1/c1.
  const TraceBoundConstants c{2.0, 5.0, 1.0, 3.0};
  const Report r = trace_bound_check(SymMatrix::diag({0.5}), SymMatrix::diag({6.0}), c);
  EXPECT_EQ(r.verdict, Verdict::Pass);
  EXPECT_DOUBLE_EQ(trace_bound_rhs(1, c), 6.0);
}

TEST(TraceBound, TwoDimensionalHandExample) {
  // A = I, B = diag(-c3, beta) with -c3 + beta <= c4 gives beta <= c3 + c4.
  const TraceBoundConstants c{1.0, 1.0, 0.7, 1.3};
  const double beta = c.c3 + c.c4;
  const Report r = trace_bound_check(SymMatrix::identity(2), SymMatrix::diag({-c.c3, beta}), c);
  EXPECT_EQ(r.verdict, Verdict::Pass);
  EXPECT_NEAR(r.residual["slack"].get<double>(), 0.0, 1e-12);
}

TEST(TraceBound, PreconditionViolationIsHypothesisFailure) {
  const TraceBoundConstants c{1.0, 1.0, 1.0, 1.0};
  EXPECT_EQ(trace_bound_check(SymMatrix::identity(2, 0.5), SymMatrix::zero(2), c).verdict, Verdict::HypothesisFailure);
  EXPECT_EQ(trace_bound_check(SymMatrix::identity(2), SymMatrix::diag({-2, 0}), c).verdict, Verdict::HypothesisFailure);
  EXPECT_EQ(trace_bound_check(SymMatrix::identity(2), SymMatrix::diag({1, 1}), c).verdict, Verdict::HypothesisFailure);
}

// Brute force over precondition-satisfying samples: the conclusion never fails.
TEST(TraceBound, NeverFailsOnValidSamples) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int checked = 0;
  for (int k = 0; k < 10000; ++k) {
    const int n = 2 + k % 4;
    const TraceBoundConstants c{1.0 + 4.0 * u(rng), 1.0 + 4.0 * u(rng), 0.1 + 2.0 * u(rng), 0.0};
    const SymMatrix a = random_symmetric(uniform_vec(n, 1.0 / c.c1, c.c2, rng), rng);
    Vec eb = uniform_vec(n, -c.c3, 3.0, rng);
    if (k % 3 == 0) eb.head(n - 1).setConstant(-c.c3);  // pushes B to the extreme allowed by the trace
    const SymMatrix b = random_symmetric(eb, rng);
    TraceBoundConstants cc = c;
    cc.c4 = std::max(trace_product(a, b), 1e-3) * (1.0 + 0.1 * u(rng));
    const Report r = trace_bound_check(a, b, cc);
    ASSERT_NE(r.verdict, Verdict::ConclusionFailure) << r.to_json().dump();
    checked += r.verdict == Verdict::Pass;
  }
  EXPECT_EQ(checked, 10000);
}

TEST(Spectral, BoundsOfDiagonal) {
  const SpectralBounds s = spectral_bounds(SymMatrix::diag({3, -1, 2}));
  EXPECT_DOUBLE_EQ(s.lambda_min, -1.0);
  EXPECT_DOUBLE_EQ(s.lambda_max, 3.0);
}

}  // namespace
}  // namespace maxlab
