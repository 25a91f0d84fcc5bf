#include <cmath>
#include <limits>

#include "maxlab/error.hpp"
#include "maxlab/principle.hpp"

namespace maxlab {

namespace {

// exp(log_scale) * v without forming an overflowing scale when v == 0.
double scaled(double log_scale, double v) { return v == 0.0 ? 0.0 : std::copysign(std::exp(log_scale + std::log(std::abs(v))), v); }

struct FDerivatives {
  Vec Df;
  SymMatrix D2f;
};

// D f and D^2 f of f = phi1 - phi0 + delta w at x*.
FDerivatives f_derivatives(const StandardSetup& s) {
  const ComparisonFunction w{s.alpha};
  const double log_ds = s.log_delta + w.log_scale(s.x_star);
  const Vec g = w.unit_gradient(s.x_star);
  const SymMatrix H = w.unit_hessian(s.x_star);
  FDerivatives out{s.jet1.p - s.jet0.p, s.jet1.hess - s.jet0.hess};
  for (int i = 0; i < g.size(); ++i) {
    out.Df(i) += scaled(log_ds, g(i));
    for (int j = i; j < g.size(); ++j) out.D2f.set(i, j, out.D2f(i, j) + scaled(log_ds, H(i, j)));
  }
  return out;
}

}  // namespace

double StandardSetup::delta() const { return std::exp(log_delta); }

nlohmann::json StandardSetup::to_json() const {
  return {{"x1", maxlab::to_json(x1)},     {"x_star", maxlab::to_json(x_star)},
          {"r0", r0},                      {"r1", r1},
          {"log_r1", log_r1},              {"alpha", alpha},
          {"delta", delta()},              {"log_delta", log_delta},
          {"jet0", maxlab::to_json(jet0)}, {"jet1", maxlab::to_json(jet1)}};
}

Report validate_setup(const StandardSetup& s, const QuasiLinearOperator& op, const ConstantLedger& ledger,
                      double tol) {
  Report rep;
  rep.check = "standard-setup";
  rep.params = {{"tol", tol}};
  nlohmann::json failed = nlohmann::json::array();
  auto item = [&](int k, bool ok, const std::string& what, nlohmann::json data = {}) {
    if (!ok) failed.push_back({{"item", k}, {"condition", what}, {"data", std::move(data)}});
  };

  const int m = op.dim();
  if (s.x1.size() != m || s.x_star.size() != m || s.jet0.dim() != m || s.jet1.dim() != m) {
    throw Error(ErrorKind::Dimension, "standard setup dimension does not match the operator");
  }
  const double nx1 = s.x1.norm();
  item(1, std::abs(nx1 - 2.0 * s.r0) <= tol * (1.0 + 2.0 * s.r0), "|x1| = 2 r0", {{"norm_x1", nx1}});
  item(2, s.r1 > 0.0 || std::isfinite(s.log_r1), "r1 > 0");
  item(2, s.log_r1 <= std::log(s.r0) + 1e-12, "r1 <= r0", {{"log_r1", s.log_r1}, {"r0", s.r0}});
  item(2, s.r0 > 0.0 && 3.0 * s.r0 <= 1.0 + 1e-12, "0 < 3 r0 <= 1", {{"r0", s.r0}});
  item(3, s.alpha > 0.0, "alpha > 0", {{"alpha", s.alpha}});
  item(4, std::isfinite(s.log_delta), "delta > 0", {{"log_delta", s.log_delta}});

  // x* interior to B(x1, r1); x* == x1 is interior for any positive r1.
  const double dist = (s.x_star - s.x1).norm();
  item(4, dist == 0.0 || std::log(dist) < s.log_r1, "x* interior to B(x1, r1)", {{"distance", dist}, {"log_r1", s.log_r1}});
  item(4, (s.x_star - s.jet0.x).norm() == 0.0 && (s.x_star - s.jet1.x).norm() == 0.0, "jets taken at x*");

  const FDerivatives fd = f_derivatives(s);
  const double gscale = 1.0 + s.jet0.p.norm() + s.jet1.p.norm();
  item(4, fd.Df.norm() <= tol * gscale, "D f(x*) = 0 (first-order condition)", {{"norm_Df", fd.Df.norm()}});
  const double hscale = 1.0 + max_abs_entry(s.jet0.hess) + max_abs_entry(s.jet1.hess);
  const double lmax = spectral_bounds(fd.D2f).lambda_max;
  item(4, lmax <= tol * hscale, "D^2 f(x*) <= 0 (local maximum)", {{"lambda_max_D2f", lmax}});

  const double l1 = spectral_bounds(s.jet1.hess).lambda_min;
  item(5, l1 >= -ledger.C_S - tol * hscale, "D^2 phi1(x*) >= -C_S I", {{"lambda_min", l1}, {"C_S", ledger.C_S}});

  try {
    const double tr = trace_product(op.a(s.jet0.x, s.jet0.r, s.jet0.p), s.jet0.hess);
    item(6, tr <= 2.0 * ledger.C_E + tol * hscale, "sum a^ij(phi0) D_ij phi0 <= 2 C_E", {{"trace", tr}});
    if (const AdmissibleRegion* region = op.region()) {
      item(6, region->contains(s.jet0.point()), "phi0 admissible at x*");
      item(5, region->contains(s.jet1.point()), "phi1 admissible at x*");
    }
  } catch (const Error& e) {
    item(6, false, e.what(), e.witness());
  }

  if (!failed.empty()) {
    rep.verdict = Verdict::HypothesisFailure;
    rep.message = "standard setup item " + std::to_string(failed[0]["item"].get<int>()) + " fails: " +
                  failed[0]["condition"].get<std::string>();
    rep.witness = {{"failed_items", failed}};
  }
  return rep;
}

Report hessian_budget(const StandardSetup& s, const QuasiLinearOperator& op, const ConstantLedger& ledger,
                      double tol) {
  Report rep = validate_setup(s, op, ledger, tol);
  rep.check = "hessian-budget";
  if (!rep.passed()) return rep;

  const double measured = max_abs_entry(s.jet0.hess) + max_abs_entry(s.jet1.hess);
  const double log_kappa = s.log_delta + std::log(s.alpha) - (s.alpha + 2.0) * std::log(s.r0);
  double bound;
  std::string branch;
  if (s.log_delta <= log_delta_bar(s.alpha, s.r0) + 1e-12) {
    bound = ledger.C_H;
    branch = "corollary: delta <= delta_bar";
  } else {
    const double kappa = std::exp(log_kappa);
    const int m = ledger.m;
    bound = 2.0 * (ledger.C_E * ledger.C_E * ((m - 1) * (ledger.C_S + kappa) + 2.0) + kappa);
    branch = "lemma: general delta";
  }
  rep.witness = {{"measured", measured}};
  rep.residual = {{"bound", bound}, {"slack", bound - measured}, {"log_delta_alpha_r0", log_kappa}};
  rep.params["branch"] = branch;
  if (measured > bound * (1.0 + tol) + tol) {
    rep.verdict = Verdict::ConclusionFailure;
    rep.message = "|D^2 phi0| + |D^2 phi1| exceeds the Hessian budget";
  }
  return rep;
}

OperatorLowerBound comparison_operator_lower_bound(const StandardSetup& s, const ConstantLedger& ledger,
                                                   const Linearization& lin, double tol) {
  OperatorLowerBound out;
  Report& rep = out.report;
  rep.check = "operator-lower-bound";

  const ComparisonFunction w{s.alpha};
  const Vec& x = s.x_star;
  const double q = (s.alpha + 2.0) * x.dot(lin.A.matrix() * x) / x.squaredNorm() - lin.A.trace() - lin.B.dot(x);
  const double log_s = w.log_scale(x);
  out.q = q;
  out.log_value = q > 0.0 ? log_s + std::log(q) : std::numeric_limits<double>::quiet_NaN();
  out.value = q > 0.0 ? std::exp(out.log_value) : scaled(log_s, q);

  nlohmann::json contract = nlohmann::json::array();
  auto need = [&](bool ok, const std::string& what, nlohmann::json data = {}) {
    if (!ok) contract.push_back({{"condition", what}, {"data", std::move(data)}});
  };
  need(std::abs(s.alpha - ledger.alpha_bar) <= 1e-12 * ledger.alpha_bar, "alpha = alpha_bar",
       {{"alpha", s.alpha}, {"alpha_bar", ledger.alpha_bar}});
  need(s.log_delta <= ledger.log_delta_bar + 1e-12, "delta <= delta_bar",
       {{"log_delta", s.log_delta}, {"log_delta_bar", ledger.log_delta_bar}});
  const double nx = x.norm();
  need(nx >= s.r0 * (1.0 - 1e-12) && nx <= 3.0 * s.r0 * (1.0 + 1e-12), "r0 <= |x*| <= 3 r0", {{"norm", nx}});
  for (int i = 0; i < lin.A.dim(); ++i) {
    need(lin.A(i, i) >= 1.0 / ledger.C_E - tol && lin.A(i, i) <= ledger.C_E + tol, "1/C_E <= A^ii <= C_E",
         {{"i", i}, {"value", lin.A(i, i)}});
  }
  const SpectralBounds sb = spectral_bounds(lin.A);
  need(sb.lambda_min >= 1.0 / ledger.C_E - tol && sb.lambda_max <= ledger.C_E + tol, "(1/C_E) I <= A <= C_E I",
       {{"lambda_min", sb.lambda_min}, {"lambda_max", sb.lambda_max}});
  need(lin.B.norm() <= ledger.b_norm_bound() * (1.0 + tol), "|B| <= m^3 C_E (C_H + 1)",
       {{"norm_B", lin.B.norm()}, {"bound", ledger.b_norm_bound()}});

  out.in_contract = contract.empty();
  rep.params = {{"alpha", s.alpha}, {"log_delta", s.log_delta}};
  rep.residual = {{"value", out.value}, {"log_value", std::isfinite(out.log_value) ? nlohmann::json(out.log_value) : nlohmann::json(nullptr)},
                  {"q", q}, {"log_scale", log_s}};
  rep.witness = {{"x_star", to_json(x)}};
  if (!out.in_contract) {
    rep.verdict = Verdict::HypothesisFailure;
    rep.message = "out-of-contract input: " + contract[0]["condition"].get<std::string>();
    rep.witness["contract"] = contract;
    return out;
  }
  const double floor = std::log1p(-1e-9);
  if (!(q > 0.0) || out.log_value < floor) {
    rep.verdict = Verdict::ConclusionFailure;
    rep.message = "L w(x*) < 1 - 1e-9";
  }
  return out;
}

StandardSetupSampler::StandardSetupSampler(QuasiLinearOperator op, double C_E, double C_S, PointDraw draw_point,
                                           double r0_min, double r0_max)
    : op_(std::move(op)), C_E_(C_E), C_S_(C_S), draw_point_(std::move(draw_point)), r0_min_(r0_min), r0_max_(r0_max) {
  if (!(r0_min > 0.0 && r0_min <= r0_max && 3.0 * r0_max <= 1.0 + 1e-12)) {
    throw Error(ErrorKind::InvalidArgument, "r0 range must satisfy 0 < r0_min <= r0_max <= 1/3");
  }
}

namespace {

Vec random_unit(int m, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vec v(m);
  do {
    for (int k = 0; k < m; ++k) v(k) = g(rng);
  } while (v.norm() < 1e-12);
  return v / v.norm();
}

// Q diag(lambda) Q^T with Q a random orthogonal matrix.
SymMatrix random_symmetric(int m, double lo, double hi, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  std::uniform_real_distribution<double> u(lo, hi);
  Mat z(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) z(i, j) = g(rng);
  const Eigen::HouseholderQR<Mat> qr(z);
  const Mat Q = qr.householderQ();
  Vec lam(m);
  for (int k = 0; k < m; ++k) lam(k) = u(rng);
  return SymMatrix::from(Q * lam.asDiagonal() * Q.transpose(), 1e-9);
}

}  // namespace

StandardSetupSampler::Sample StandardSetupSampler::draw(std::mt19937_64& rng, int max_tries) const {
  const int m = op_.dim();
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int attempt = 0; attempt < max_tries; ++attempt) {
    Sample out;
    const double r0 = r0_min_ + (r0_max_ - r0_min_) * uni(rng);
    out.ledger = derive_constants(m, C_E_, C_S_, r0);
    StandardSetup& s = out.setup;
    s.r0 = r0;
    s.alpha = out.ledger.alpha_bar;
    s.log_r1 = out.ledger.log_r1;
    s.r1 = out.ledger.r1;
    s.x1 = random_unit(m, rng) * (2.0 * r0);
    s.log_delta = out.ledger.log_delta_bar - 5.0 * uni(rng);
    s.x_star = s.x1 + random_unit(m, rng) * (s.r1 * 0.9 * uni(rng));

    const ComparisonFunction w{s.alpha};
    const double log_ds = s.log_delta + w.log_scale(s.x_star);
    const Vec dw = w.unit_gradient(s.x_star);
    const SymMatrix d2w = w.unit_hessian(s.x_star);
    Vec ddw(m);
    SymMatrix dd2w(m);
    for (int i = 0; i < m; ++i) {
      ddw(i) = scaled(log_ds, dw(i));
      for (int j = i; j < m; ++j) dd2w.set(i, j, scaled(log_ds, d2w(i, j)));
    }

    const JetPoint p0 = draw_point_(s.x_star, rng);
    s.jet0 = Jet2{s.x_star, p0.r, p0.p, SymMatrix::zero(m)};
    s.jet1 = Jet2{s.x_star, p0.r - 0.1 * uni(rng), p0.p - ddw, SymMatrix::zero(m)};
    s.jet1.hess = random_symmetric(m, -C_S_, C_S_ + 2.0, rng);
    const SymMatrix P = random_symmetric(m, 0.0, 1.0, rng);
    s.jet0.hess = s.jet1.hess + dd2w + P;

    if (const AdmissibleRegion* region = op_.region()) {
      if (!region->contains(s.jet0.point()) || !region->contains(s.jet1.point())) continue;
    }
    if (trace_product(op_.a(s.jet0.x, s.jet0.r, s.jet0.p), s.jet0.hess) > 2.0 * C_E_) continue;
    return out;
  }
  throw Error(ErrorKind::Numerical, "standard-setup sampler exhausted its attempts", {{"max_tries", max_tries}});
}

}  // namespace maxlab
