#pragma once

// Machinery of the strong maximum principle: the comparison function
// w = |x|^-alpha, the constant ledger, standard setups and their Hessian
// budgets, the lower bound L w(x*) >= 1, contact geometry on grids, the
// contradiction pipeline and the global support-paraboloid check.
//
// alpha_bar grows like C_E^5 m^4, so r0^-(alpha+2) overflows doubles for
// modest constants.  Quantities of that kind are carried as natural logs
// next to their (possibly under/overflowed) double values.

#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "maxlab/grid.hpp"
#include "maxlab/quasilinear.hpp"
#include "maxlab/report.hpp"

namespace maxlab {

// w(x) = |x|^-alpha with Dw = s * (-x) and D^2 w = s * ((alpha+2) x x^T/|x|^2 - I),
// s = alpha |x|^-(alpha+2).
struct ComparisonFunction {
  double alpha = 1.0;

  double log_value(const Vec& x) const;
  double log_scale(const Vec& x) const;
  Vec unit_gradient(const Vec& x) const { return -x; }
  SymMatrix unit_hessian(const Vec& x) const;
  Jet2 jet(const Vec& x) const;
};

Jet2 comparison_jet(double alpha, const Vec& x);

double delta_bar(double alpha, double r0);
double log_delta_bar(double alpha, double r0);

// Exact rational ledger, decimal or p/q inputs; entries are "p/q" strings or
// null when not representable (non-integer alpha for delta_bar, or alpha too
// large for an explicit power).
struct ExactLedger {
  std::string C_H;
  std::string alpha_bar;
  std::string alpha;  // the alpha behind delta_bar and r1
  std::optional<std::string> delta_bar;
  std::optional<std::string> r1;

  nlohmann::json to_json() const;
};

// delta_bar and r1 use `alpha` when given (integer text), alpha_bar otherwise.
ExactLedger derive_constants_exact(int m, const std::string& C_E, const std::string& C_S, const std::string& r0,
                                   const std::optional<std::string>& alpha = std::nullopt);

struct ConstantLedger {
  int m = 1;
  double C_E = 1.0;
  double C_S = 0.0;
  double r0 = 1.0 / 3.0;
  double C_H = 0.0;
  double alpha_bar = 0.0;
  double alpha = 0.0;  // the alpha used by delta_bar and r1, alpha_bar unless overridden
  double delta_bar = 0.0;
  double log_delta_bar = 0.0;
  double r1 = 0.0;
  double log_r1 = 0.0;
  std::optional<ExactLedger> exact;

  // log(alpha r0^-(alpha+2)), the gradient scale of w on the annulus.
  double log_gradient_scale() const;
  // m^3 C_E (C_H + 1), the bound on |B| used by the operator lemma.
  double b_norm_bound() const;
  nlohmann::json to_json() const;
};

ConstantLedger derive_constants(int m, double C_E, double C_S, double r0, std::optional<double> alpha = {});

struct StandardSetup {
  Vec x1;
  Vec x_star;
  double r0 = 0.0;
  double r1 = 0.0;
  double log_r1 = 0.0;
  double alpha = 0.0;
  double log_delta = 0.0;
  Jet2 jet0;
  Jet2 jet1;

  double delta() const;
  nlohmann::json to_json() const;
};

// Items 1-6 of the standard setup, each reported by number on failure.
Report validate_setup(const StandardSetup& s, const QuasiLinearOperator& op, const ConstantLedger& ledger,
                      double tol = 1e-9);

Report hessian_budget(const StandardSetup& s, const QuasiLinearOperator& op, const ConstantLedger& ledger,
                      double tol = 1e-9);

struct OperatorLowerBound {
  double value = 0.0;      // L w(x*), may overflow to inf
  double log_value = 0.0;  // log of the above, NaN when not positive
  double q = 0.0;          // L w(x*) / (alpha |x*|^-(alpha+2))
  bool in_contract = true;
  Report report;
};

// L w(x*) = sum A^ij D_ij w + sum B^i D_i w, plus the contract checks of the
// lemma (alpha = alpha_bar, delta <= delta_bar, coefficient bounds).
OperatorLowerBound comparison_operator_lower_bound(const StandardSetup& s, const ConstantLedger& ledger,
                                                   const Linearization& lin, double tol = 1e-9);

// Draws standard setups for an operator: random r0, x1, delta <= delta_bar,
// jets with D^2 phi1 >= -C_S I, D^2 f <= 0, D f = 0 and the phi0 trace bound.
class StandardSetupSampler {
 public:
  // draw_point(x, rng) returns an admissible (r, p) at x.
  using PointDraw = std::function<JetPoint(const Vec& x, std::mt19937_64& rng)>;

  StandardSetupSampler(QuasiLinearOperator op, double C_E, double C_S, PointDraw draw_point,
                       double r0_min = 0.05, double r0_max = 1.0 / 3.0);

  struct Sample {
    StandardSetup setup;
    ConstantLedger ledger;
  };

  // Rejection sampling; throws after max_tries failed attempts.
  Sample draw(std::mt19937_64& rng, int max_tries = 1000) const;

 private:
  QuasiLinearOperator op_;
  double C_E_, C_S_;
  PointDraw draw_point_;
  double r0_min_, r0_max_;
};

struct ContactResult {
  Verdict verdict = Verdict::Pass;
  std::string message;
  std::vector<std::size_t> contact;  // K as flat node indices
  std::size_t x0_index = 0;
  std::size_t x1_index = 0;
  Vec x0, x1;
  double r0 = 0.0;

  bool found() const { return verdict == Verdict::Pass; }
  nlohmann::json to_json() const;
};

// Contact nodes have u0 - u1 <= tol_scale (1 + |u0|).  Among non-contact
// centres x0 with a unique nearest contact node x1, r0 = |x1 - x0| / 2,
// 3 r0 <= 1 and B(x0, 3 r0) inside the grid box, picks the largest r0 and
// then the lexicographically smallest centre.
ContactResult contact_locator(const GridFunction& u0, const GridFunction& u1, double tol_scale = 1e-9);

struct SupportParaboloid {
  Vec a;
  Report report;
};

// v(x) >= v(x0) + <x - x0, a> - (C/2)|x - x0|^2 at every node.  Without a
// supplied slope, a is the centered FD gradient at x0.
SupportParaboloid support_paraboloid(const GridFunction& v, std::size_t node, double C,
                                     std::optional<Vec> slope = {}, double tol = 1e-12);

// What the pipeline hands a support-function supplier.
struct SupportRequest {
  Vec x;
  double eps = 0.0;
  // Pipeline state, for suppliers that build jets against the comparison function.
  Vec x0;
  double alpha = 0.0;
  double log_delta = 0.0;
};

struct SupportJet {
  Jet2 jet;
  std::optional<double> claimed_M;  // when set, used instead of evaluating the operator
};

using SupportSupplier = std::function<SupportJet(const SupportRequest&)>;

SupportSupplier analytic_supplier(std::function<Jet2(const Vec&)> jet);
SupportSupplier grid_supplier(std::shared_ptr<const GridFunction> grid);

struct MaxPrincipleInstance {
  std::string name;
  QuasiLinearOperator op;
  GridFunction u0;
  GridFunction u1;
  SupportSupplier upper0;  // upper support functions of u0
  SupportSupplier lower1;  // lower support functions of u1
  double C_E = 1.0;
  double C_S = 0.0;
  double H0 = 0.0;
  int quadrature_order = 16;
  double tol = 1e-9;
};

Report contradiction_report(const MaxPrincipleInstance& inst);

// Built-in instances.
MaxPrincipleInstance plane_vs_hyperboloid_instance(int nodes_per_axis = 41, std::uint64_t seed = 0);
MaxPrincipleInstance identical_hyperboloid_instance(int nodes_per_axis = 41);
MaxPrincipleInstance fabricated_strict_gap_instance(int nodes_per_axis = 21);

}  // namespace maxlab
