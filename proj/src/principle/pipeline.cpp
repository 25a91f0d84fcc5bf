#include <algorithm>
#include <cmath>
#include <limits>

#include "maxlab/error.hpp"
#include "maxlab/lorgraph.hpp"
#include "maxlab/principle.hpp"

namespace maxlab {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b), lo = std::min(a, b);
  return hi + std::log1p(std::exp(lo - hi));
}

// Signed quantity held as (sign, log|value|) so that terms scaled by
// 1/delta or by |x|^-(alpha+2) can be summed without overflow.
struct LogTerm {
  int sign = 0;
  double log_abs = kNegInf;
};

LogTerm log_term(double v) { return v == 0.0 ? LogTerm{} : LogTerm{v > 0 ? 1 : -1, std::log(std::abs(v))}; }

// Whether sum(terms) >= threshold > 0, decided in log space.
bool log_sum_at_least(const std::vector<LogTerm>& terms, double threshold, double* log_pos, double* log_neg) {
  double pos = kNegInf, neg = kNegInf;
  for (const LogTerm& t : terms) {
    if (t.sign > 0) pos = log_add(pos, t.log_abs);
    if (t.sign < 0) neg = log_add(neg, t.log_abs);
  }
  *log_pos = pos;
  *log_neg = neg;
  return pos >= log_add(neg, std::log(threshold));
}

nlohmann::json finite_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

// delta (w(y) - w(y1)) with |y1| = 2 r0, as a signed value.
double delta_w_offset(double alpha, double log_delta, double r0, const Vec& y) {
  const double ly = std::log(y.norm());
  const double ratio = alpha * (ly - std::log(2.0 * r0));
  if (ratio == 0.0) return 0.0;
  const double mag = log_delta - alpha * ly + std::log(std::abs(std::expm1(ratio)));
  return (ratio < 0.0 ? 1.0 : -1.0) * std::exp(mag);
}

Report failure(Report rep, Verdict v, std::string message, nlohmann::json witness = nlohmann::json::object()) {
  rep.verdict = v;
  rep.message = std::move(message);
  for (auto& [k, val] : witness.items()) rep.witness[k] = val;
  return rep;
}

}  // namespace

SupportSupplier analytic_supplier(std::function<Jet2(const Vec&)> jet) {
  return [jet = std::move(jet)](const SupportRequest& req) { return SupportJet{jet(req.x), std::nullopt}; };
}

SupportSupplier grid_supplier(std::shared_ptr<const GridFunction> grid) {
  return [grid = std::move(grid)](const SupportRequest& req) {
    const int m = grid->dims();
    std::vector<int> idx(m);
    for (int a = 0; a < m; ++a) idx[a] = static_cast<int>(std::lround((req.x(a) - grid->origin()(a)) / grid->spacing()(a)));
    const std::size_t k = grid->flat(idx);
    return SupportJet{Jet2{grid->node(k), (*grid)[k], grid->gradient(k), grid->hessian(k)}, std::nullopt};
  };
}

Report contradiction_report(const MaxPrincipleInstance& inst) {
  Report rep;
  rep.check = "contradiction-pipeline";
  const double tol = inst.tol;
  const QuasiLinearOperator op = inst.op.shifted(inst.H0);
  const double C_E = inst.C_E + std::abs(inst.H0);
  const int m = op.dim();
  rep.params = {{"instance", inst.name},  {"operator", inst.op.name()}, {"H0", inst.H0},
                {"C_E", inst.C_E},        {"C_E_shifted", C_E},         {"C_S", inst.C_S},
                {"quadrature_order", inst.quadrature_order}, {"tol", tol}};
  if (inst.u0.dims() != m) throw Error(ErrorKind::Dimension, "grid dimension does not match the operator");

  // Contact geometry.
  const ContactResult contact = contact_locator(inst.u0, inst.u1);
  rep.witness["contact"] = contact.to_json();
  if (contact.verdict == Verdict::Identical) {
    rep.verdict = Verdict::Identical;
    rep.message = "u0 and u1 coincide on the grid";
    return rep;
  }
  if (!contact.found()) return failure(rep, contact.verdict, "contact: " + contact.message);

  const ConstantLedger ledger = derive_constants(m, C_E, inst.C_S, contact.r0);
  rep.params["ledger"] = ledger.to_json();
  const double alpha = ledger.alpha_bar;
  const double r0 = contact.r0;
  const Vec& x0 = contact.x0;
  const Vec& x1 = contact.x1;
  const GridFunction& u0 = inst.u0;
  const GridFunction& u1 = inst.u1;
  const double h_grid = u0.spacing().maxCoeff();

  // delta = min(delta1, delta_bar), delta1 the halved margin keeping h < 0 on S'.
  double log_r1 = ledger.log_r1;
  double log_delta1 = kNegInf;
  bool have_delta1 = false;
  for (std::size_t k = 0; k < u0.size(); ++k) {
    const Vec x = u0.node(k);
    const double dist = (x - x1).norm();
    if (std::abs(dist - std::exp(log_r1)) > h_grid) continue;
    const Vec y = x - x0;
    const double gap = u0[k] - u1[k];
    if (y.norm() >= 2.0 * r0 || gap <= 1e-9 * (1.0 + std::abs(u0[k]))) continue;
    const double ly = std::log(y.norm());
    const double log_dw = -alpha * ly + std::log(-std::expm1(alpha * (ly - std::log(2.0 * r0))));
    const double cand = std::log(0.5) + std::log(gap) - log_dw;
    log_delta1 = have_delta1 ? std::min(log_delta1, cand) : cand;
    have_delta1 = true;
  }
  const double log_delta = have_delta1 ? std::min(log_delta1, ledger.log_delta_bar) : ledger.log_delta_bar;
  const double delta = std::exp(log_delta);
  rep.params["delta1_source"] = have_delta1 ? "S'-band margin" : "delta_bar (no S'-band nodes)";
  rep.params["log_delta"] = log_delta;

  // Interior maximum of h over grid nodes in B(x1, r1).
  std::size_t x_star_index = contact.x1_index;
  int retries = 0;
  for (;; ++retries) {
    const double r1 = std::exp(log_r1);
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < u0.size(); ++k) {
      if (!u0.interior(k)) continue;
      const Vec x = u0.node(k);
      const double dist = (x - x1).norm();
      if (!(dist < r1) && k != contact.x1_index) continue;
      const double h = (u1[k] - u0[k]) + delta_w_offset(alpha, log_delta, r0, x - x0);
      if (h > best) {  // row-major scan, so ties keep the lexicographically smallest node
        best = h;
        x_star_index = k;
      }
    }
    const double d_star = (u0.node(x_star_index) - x1).norm();
    if (x_star_index == contact.x1_index || d_star < r1 - h_grid || retries >= 60) break;
    log_r1 -= std::log(2.0);
  }
  const Vec x_star = u0.node(x_star_index);
  rep.params["log_r1"] = log_r1;
  rep.params["r1_halvings"] = retries;
  rep.witness["x_star"] = to_json(x_star);
  rep.witness["x_star_index"] = x_star_index;

  const double eps = std::min(delta / 4.0, C_E) / 2.0;
  rep.params["eps"] = eps;

  // Support-sense hypotheses at every interior node: M[phi0] <= H0 + eps and
  // M[phi1] >= H0 - eps for the supplied touching jets.  After the shift H0 is 0.
  double lo = -std::numeric_limits<double>::infinity(), hi = std::numeric_limits<double>::infinity();
  std::size_t lo_at = 0, hi_at = 0;
  for (std::size_t k = 0; k < u0.size(); ++k) {
    if (!u0.interior(k)) continue;
    const Vec x = u0.node(k);
    const SupportRequest req{x, eps, x0, alpha, log_delta};
    const SupportJet s0 = inst.upper0(req);
    const SupportJet s1 = inst.lower1(req);
    nlohmann::json where = {{"node", k}, {"x", to_json(x)}};
    if (std::abs(s0.jet.r - u0[k]) > 1e-9 * (1.0 + std::abs(u0[k])) ||
        std::abs(s1.jet.r - u1[k]) > 1e-9 * (1.0 + std::abs(u1[k]))) {
      return failure(rep, Verdict::HypothesisFailure, "supplied support jet does not touch the grid function", where);
    }
    const double l1 = spectral_bounds(s1.jet.hess).lambda_min;
    if (l1 < -inst.C_S - tol * (1.0 + max_abs_entry(s1.jet.hess))) {
      where["lambda_min"] = l1;
      return failure(rep, Verdict::HypothesisFailure, "lower support jet of u1 violates D^2 phi1 >= -C_S I", where);
    }
    double M0, M1;
    try {
      M0 = s0.claimed_M ? *s0.claimed_M : evaluate(op, s0.jet) + inst.H0;
      M1 = s1.claimed_M ? *s1.claimed_M : evaluate(op, s1.jet) + inst.H0;
    } catch (const Error& e) {
      where["error"] = e.what();
      return failure(rep, Verdict::HypothesisFailure, "supplier returned an inadmissible jet", where);
    }
    if (M0 - eps > lo) {
      lo = M0 - eps;
      lo_at = k;
    }
    if (M1 + eps < hi) {
      hi = M1 + eps;
      hi_at = k;
    }
  }
  rep.residual["H0_window"] = {finite_or_null(lo), finite_or_null(hi)};
  const nlohmann::json window_witness = {{"lower_from_node", lo_at}, {"upper_from_node", hi_at},
                                         {"lower_x", to_json(u0.node(lo_at))}, {"upper_x", to_json(u0.node(hi_at))}};
  if (lo > hi) {
    return failure(rep, Verdict::HypothesisFailure,
                   "H0 window empty: no H0 satisfies both support-sense inequalities", window_witness);
  }
  if (inst.H0 < lo || inst.H0 > hi) {
    return failure(rep, Verdict::HypothesisFailure,
                   inst.H0 < lo ? "u0 is not a supersolution M[u0] <= H0 in the support sense"
                                : "u1 is not a subsolution M[u1] >= H0 in the support sense",
                   window_witness);
  }

  // Jets at x*, linearization and both branches of the contradiction.
  const SupportRequest req{x_star, eps, x0, alpha, log_delta};
  const SupportJet s0 = inst.upper0(req);
  const SupportJet s1 = inst.lower1(req);
  Linearization lin;
  try {
    lin = linearization_coefficients(op, s0.jet, s1.jet, inst.quadrature_order);
  } catch (const Error& e) {
    return failure(rep, Verdict::HypothesisFailure, std::string("linearization: ") + e.what(), e.witness());
  }
  const double M0_eval = evaluate(op, s0.jet), M1_eval = evaluate(op, s1.jet);
  const double M0 = s0.claimed_M ? *s0.claimed_M - inst.H0 : M0_eval;
  const double M1 = s1.claimed_M ? *s1.claimed_M - inst.H0 : M1_eval;

  StandardSetup setup;
  setup.x1 = x1 - x0;
  setup.x_star = x_star - x0;
  setup.r0 = r0;
  setup.log_r1 = log_r1;
  setup.r1 = std::exp(log_r1);
  setup.alpha = alpha;
  setup.log_delta = log_delta;
  setup.jet0 = s0.jet;
  setup.jet1 = s1.jet;
  setup.jet0.x = setup.x_star;
  setup.jet1.x = setup.x_star;
  const OperatorLowerBound lw = comparison_operator_lower_bound(setup, ledger, lin, tol);
  std::vector<Report> parts{lw.report};

  // Gradient difference against delta alpha r0^-(alpha+2).
  {
    Report g;
    g.check = "gradient-difference";
    const double nd = (s1.jet.p - s0.jet.p).norm();
    const double log_bound = log_delta + ledger.log_gradient_scale();
    g.residual = {{"norm", nd}, {"log_bound", log_bound}};
    if (nd > 0.0 && std::log(nd) > log_bound + std::log1p(1e-6) && nd > tol) {
      g.verdict = Verdict::HypothesisFailure;
      g.message = "|D phi1 - D phi0| exceeds delta alpha r0^-(alpha+2)";
    }
    parts.push_back(g);
  }

  // Branch A, divided by delta: (M1 - M0)/delta - |C||phi1 - phi0|/delta + L w >= 1/4.
  const LogTerm tA = log_term(M1 - M0);
  const LogTerm tC = log_term(-std::abs(lin.C) * std::abs(s1.jet.r - s0.jet.r));
  std::vector<LogTerm> terms{{tA.sign, tA.log_abs - log_delta}, {tC.sign, tC.log_abs - log_delta}};
  if (lw.q > 0.0) terms.push_back({1, lw.log_value});
  else if (lw.q < 0.0) terms.push_back({-1, ComparisonFunction{alpha}.log_scale(setup.x_star) + std::log(-lw.q)});
  double log_pos, log_neg;
  const bool branch_a = log_sum_at_least(terms, 0.25, &log_pos, &log_neg);

  // Branch B: D f(x*) = 0 and D^2 f(x*) <= 0, so L f(x*) = A:D^2 f + B.D f <= 0.
  const ComparisonFunction w{alpha};
  const double log_s = log_delta + w.log_scale(setup.x_star);
  const Vec Dw = w.unit_gradient(setup.x_star);
  const SymMatrix D2w = w.unit_hessian(setup.x_star);
  Vec Df = s1.jet.p - s0.jet.p;
  SymMatrix D2f = s1.jet.hess - s0.jet.hess;
  for (int i = 0; i < m; ++i) {
    if (Dw(i) != 0.0) Df(i) += std::copysign(std::exp(log_s + std::log(std::abs(Dw(i)))), Dw(i));
    for (int j = i; j < m; ++j)
      if (D2w(i, j) != 0.0)
        D2f.set(i, j, D2f(i, j) + std::copysign(std::exp(log_s + std::log(std::abs(D2w(i, j)))), D2w(i, j)));
  }
  const double scale = 1.0 + max_abs_entry(s0.jet.hess) + max_abs_entry(s1.jet.hess);
  const double lmax = spectral_bounds(D2f).lambda_max;
  const bool first_order = Df.norm() <= tol * (1.0 + s0.jet.p.norm() + s1.jet.p.norm());
  const bool second_order = lmax <= tol * scale;
  const bool branch_b = first_order && second_order;
  const double Lf_direct = trace_product(lin.A, D2f) + lin.B.dot(Df);

  rep.residual["branch_a"] = {{"fires", branch_a}, {"log_positive", finite_or_null(log_pos)},
                              {"log_negative", finite_or_null(log_neg)}, {"threshold", 0.25}};
  rep.residual["branch_b"] = {{"fires", branch_b}, {"norm_Df", Df.norm()}, {"lambda_max_D2f", lmax},
                              {"Lf_direct", Lf_direct}};
  rep.residual["parts"] = nlohmann::json::array();
  for (const Report& p : parts) rep.residual["parts"].push_back(p.to_json());
  rep.witness["M"] = {{"claimed0", s0.claimed_M ? nlohmann::json(*s0.claimed_M) : nlohmann::json(nullptr)},
                      {"claimed1", s1.claimed_M ? nlohmann::json(*s1.claimed_M) : nlohmann::json(nullptr)},
                      {"evaluated0", M0_eval + inst.H0},
                      {"evaluated1", M1_eval + inst.H0}};
  rep.witness["linearization"] = {{"A", to_json(lin.A)}, {"B", to_json(lin.B)}, {"C", lin.C}};

  if (lw.report.conclusion_failure()) {
    return failure(rep, Verdict::ConclusionFailure, "L w(x*) < 1 on an in-contract setup");
  }
  if (branch_a && branch_b) {
    std::string msg = "L f(x*) >= delta/4 > 0 and L f(x*) <= 0 both follow from the hypotheses";
    if (s0.claimed_M || s1.claimed_M) msg += "; claimed M values disagree with the jets (see witness.M)";
    return failure(rep, Verdict::InconsistentHypotheses, msg);
  }
  if (!branch_b) {
    return failure(rep, Verdict::HypothesisFailure,
                   !first_order ? "x* is not a critical point of f = phi1 - phi0 + delta w (D f != 0)"
                                : "x* is not a local maximum of f (D^2 f has a positive eigenvalue)");
  }
  return failure(rep, Verdict::HypothesisFailure,
                 "support-sense inequalities too weak at x*: L f(x*) >= delta/4 not reached");
}

namespace {

std::vector<int> square_shape(int m, int nodes) { return std::vector<int>(m, nodes); }

GridFunction square_grid(int nodes, const std::function<double(const Vec&)>& f) {
  if (nodes < 5 || nodes % 2 == 0) throw Error(ErrorKind::InvalidArgument, "nodes per axis must be odd and >= 5");
  const double h = 2.0 / (nodes - 1);
  return GridFunction::sample(square_shape(2, nodes), Vec::Constant(2, -1.0), Vec::Constant(2, h), f);
}

Jet2 hyperboloid_jet(const Vec& x) {
  // 1 - sqrt(1 + |x|^2), mean curvature -1.
  const double q = std::sqrt(1.0 + x.squaredNorm());
  const Mat hess = -(Mat::Identity(x.size(), x.size()) / q - x * x.transpose() / (q * q * q));
  return Jet2{x, 1.0 - q, -x / q, SymMatrix::from(hess, 1e-12)};
}

Jet2 plane_jet(const Vec& x) { return Jet2{x, 0.0, Vec::Zero(x.size()), SymMatrix::zero(static_cast<int>(x.size()))}; }

QuasiLinearOperator flat_operator_on_square(double rho, double bound, std::uint64_t seed, double* C_E) {
  QuasiLinearOperator op = flat_mean_curvature_operator(2);
  const AdmissibleSet set = admissible_set(MetricChart::minkowski(3), op, rho, bound, Vec::Constant(2, -1.0),
                                           Vec::Constant(2, 1.0), 2000, seed);
  op.attach_region(set.region);
  *C_E = std::max(1.0, set.certificate.C_E);
  return op;
}

}  // namespace

MaxPrincipleInstance plane_vs_hyperboloid_instance(int nodes_per_axis, std::uint64_t seed) {
  double C_E = 1.0;
  QuasiLinearOperator op = flat_operator_on_square(0.5, 2.0, seed, &C_E);
  return MaxPrincipleInstance{
      "plane-vs-hyperboloid",
      std::move(op),
      square_grid(nodes_per_axis, [](const Vec&) { return 0.0; }),
      square_grid(nodes_per_axis, [](const Vec& x) { return 1.0 - std::sqrt(1.0 + x.squaredNorm()); }),
      analytic_supplier(plane_jet),
      analytic_supplier(hyperboloid_jet),
      C_E,
      1.0,
  };
}

MaxPrincipleInstance identical_hyperboloid_instance(int nodes_per_axis) {
  double C_E = 1.0;
  QuasiLinearOperator op = flat_operator_on_square(0.5, 2.0, 0, &C_E);
  auto u = square_grid(nodes_per_axis, [](const Vec& x) { return 1.0 - std::sqrt(1.0 + x.squaredNorm()); });
  return MaxPrincipleInstance{"identical-hyperboloid", std::move(op), u, u,
                              analytic_supplier(hyperboloid_jet), analytic_supplier(hyperboloid_jet), C_E, 1.0};
}

MaxPrincipleInstance fabricated_strict_gap_instance(int nodes_per_axis) {
  // u0 = 0 above u1 = -|x|^2, touching only at the origin.  In the annulus
  // around the contact ball the supplied jets are built against the
  // comparison function so that x* is an exact critical point of f with
  // D^2 f = -I/2, while the claimed operator values assert a strict gap.
  auto upper0 = [](const SupportRequest& req) {
    return SupportJet{plane_jet(req.x), -2.0 * req.eps};
  };
  auto lower1 = [](const SupportRequest& req) {
    const int m = static_cast<int>(req.x.size());
    const Vec y = req.x - req.x0;
    const double r = -req.x.squaredNorm();
    const ComparisonFunction w{req.alpha};
    const double ny = y.norm();
    const double r0 = 0.5 * req.x0.norm();  // |x1 - x0| = 2 r0 with x1 = 0
    if (!(ny >= r0 && ny <= 3.0 * r0)) {
      return SupportJet{Jet2{req.x, r, -2.0 * req.x, SymMatrix::identity(m, -2.0)}, 2.0 * req.eps};
    }
    const double s = std::exp(req.log_delta + w.log_scale(y));
    const Vec p = -s * w.unit_gradient(y);
    const SymMatrix hess = w.unit_hessian(y) * (-s) + SymMatrix::identity(m, -0.5);
    return SupportJet{Jet2{req.x, r, p, hess}, 2.0 * req.eps};
  };
  return MaxPrincipleInstance{"fabricated-strict-gap",
                              QuasiLinearOperator::laplacian(2),
                              square_grid(nodes_per_axis, [](const Vec&) { return 0.0; }),
                              square_grid(nodes_per_axis, [](const Vec& x) { return -x.squaredNorm(); }),
                              upper0,
                              lower1,
                              1.0,
                              2.0};
}

}  // namespace maxlab
