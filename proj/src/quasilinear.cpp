#include "maxlab/quasilinear.hpp"

#include <cmath>

#include "maxlab/error.hpp"
#include "maxlab/quadrature.hpp"

namespace maxlab {

namespace {

nlohmann::json point_json(const Vec& x, double r, const Vec& p) {
  return {{"x", to_json(x)}, {"r", r}, {"p", to_json(p)}};
}

void require_member(const QuasiLinearOperator& op, const Vec& x, double r, const Vec& p) {
  if (const AdmissibleRegion* region = op.region(); region && !region->contains(x, r, p)) {
    throw Error(ErrorKind::Admissibility, "jet outside the admissible region of " + op.name(),
                point_json(x, r, p));
  }
}

}  // namespace

nlohmann::json to_json(const Jet2& j) {
  nlohmann::json out = point_json(j.x, j.r, j.p);
  out["hess"] = to_json(j.hess);
  return out;
}

AdmissibleRegion::AdmissibleRegion(int m, Predicate contains, std::string fiber, bool convex_fibers)
    : m_(m), contains_(std::move(contains)), fiber_(std::move(fiber)), convex_(convex_fibers) {
  if (m < 1) throw Error(ErrorKind::InvalidArgument, "region dimension must be >= 1");
}

AdmissibleRegion AdmissibleRegion::everywhere(int m) {
  return AdmissibleRegion(m, [](const Vec&, double, const Vec&) { return true; }, "all of R x R^m", true);
}

Report check_fiber_convexity(const AdmissibleRegion& region, const Vec& x,
                             const std::function<std::pair<double, Vec>(std::mt19937_64&)>& draw,
                             int pairs, std::mt19937_64& rng) {
  Report rep;
  rep.check = "fiber-convexity";
  rep.params = {{"x", to_json(x)}, {"pairs", pairs}};
  int tested = 0;
  int rejected = 0;
  for (int k = 0; k < pairs; ++k) {
    auto [r0, p0] = draw(rng);
    auto [r1, p1] = draw(rng);
    if (!region.contains(x, r0, p0) || !region.contains(x, r1, p1)) {
      ++rejected;
      continue;
    }
    ++tested;
    const double rm = 0.5 * (r0 + r1);
    const Vec pm = 0.5 * (p0 + p1);
    if (!region.contains(x, rm, pm)) {
      rep.verdict = Verdict::ConclusionFailure;
      rep.message = "midpoint of two fiber members is not a member";
      rep.witness = {{"first", point_json(x, r0, p0)}, {"second", point_json(x, r1, p1)}};
      break;
    }
  }
  rep.residual = {{"pairs_tested", tested}, {"draws_rejected", rejected}};
  if (tested == 0 && rep.passed()) {
    rep.verdict = Verdict::HypothesisFailure;
    rep.message = "sampler produced no member pairs";
  }
  return rep;
}

QuasiLinearOperator::QuasiLinearOperator(std::string name, int m, CoeffA a, CoeffB b,
                                         DerivativeEval derivatives, double h_fd)
    : name_(std::move(name)),
      m_(m),
      a_(std::move(a)),
      b_(std::move(b)),
      derivatives_(std::move(derivatives)),
      h_fd_(h_fd) {
  if (m < 1) throw Error(ErrorKind::InvalidArgument, "operator dimension must be >= 1");
  if (!a_ || !b_) throw Error(ErrorKind::InvalidArgument, "operator needs both a and b evaluators");
  if (!(h_fd > 0.0)) throw Error(ErrorKind::InvalidArgument, "h_fd must be positive");
}

QuasiLinearOperator QuasiLinearOperator::laplacian(int m) {
  return QuasiLinearOperator(
      "laplacian", m, [m](const Vec&, double, const Vec&) { return SymMatrix::identity(m); },
      [](const Vec&, double, const Vec&) { return 0.0; },
      [m](const Vec&, double, const Vec&) {
        CoefficientDerivatives d;
        d.da_dr = SymMatrix::zero(m);
        d.da_dp.assign(m, SymMatrix::zero(m));
        d.db_dp = Vec::Zero(m);
        return d;
      });
}

SymMatrix QuasiLinearOperator::a(const Vec& x, double r, const Vec& p) const {
  SymMatrix out = a_(x, r, p);
  if (out.dim() != m_) {
    throw Error(ErrorKind::Dimension, "coefficient matrix has wrong dimension", {{"expected", m_}, {"got", out.dim()}});
  }
  return out;
}

CoefficientDerivatives QuasiLinearOperator::derivatives(const Vec& x, double r, const Vec& p) const {
  if (derivatives_) return derivatives_(x, r, p);

  CoefficientDerivatives d;
  {
    const double h = h_fd_ * (1.0 + std::abs(r));
    const SymMatrix ap = a(x, r + h, p), am = a(x, r - h, p);
    d.da_dr = (ap - am) * (0.5 / h);
    d.db_dr = (b_(x, r + h, p) - b_(x, r - h, p)) / (2.0 * h);
  }
  d.da_dp.reserve(m_);
  d.db_dp = Vec::Zero(m_);
  for (int k = 0; k < m_; ++k) {
    const double h = h_fd_ * (1.0 + std::abs(p(k)));
    Vec pp = p, pm = p;
    pp(k) += h;
    pm(k) -= h;
    d.da_dp.push_back((a(x, r, pp) - a(x, r, pm)) * (0.5 / h));
    d.db_dp(k) = (b_(x, r, pp) - b_(x, r, pm)) / (2.0 * h);
  }
  return d;
}

QuasiLinearOperator QuasiLinearOperator::shifted(double h0) const {
  if (h0 == 0.0) return *this;
  CoeffB b = [inner = b_, h0](const Vec& x, double r, const Vec& p) { return inner(x, r, p) - h0; };
  QuasiLinearOperator out(name_, m_, a_, std::move(b), derivatives_, h_fd_);
  out.region_ = region_;
  return out;
}

QuasiLinearOperator table_operator(std::string name, std::vector<GridFunction> a_upper, GridFunction b) {
  const int m = b.dims();
  if (static_cast<int>(a_upper.size()) != m * (m + 1) / 2) {
    throw Error(ErrorKind::Dimension, "table operator needs m(m+1)/2 coefficient grids",
                {{"m", m}, {"got", a_upper.size()}});
  }
  for (const GridFunction& g : a_upper) {
    if (!g.same_layout(b)) throw Error(ErrorKind::Dimension, "coefficient grids must share one layout");
  }
  auto tables = std::make_shared<const std::vector<GridFunction>>(std::move(a_upper));
  auto btable = std::make_shared<const GridFunction>(std::move(b));
  CoeffA a = [tables, m](const Vec& x, double, const Vec&) {
    SymMatrix s(m);
    int k = 0;
    for (int i = 0; i < m; ++i) {
      for (int j = i; j < m; ++j) s.set(i, j, (*tables)[k++].interpolate(x));
    }
    return s;
  };
  CoeffB bb = [btable](const Vec& x, double, const Vec&) { return btable->interpolate(x); };
  DerivativeEval d = [m](const Vec&, double, const Vec&) {
    CoefficientDerivatives out;
    out.da_dr = SymMatrix::zero(m);
    out.da_dp.assign(m, SymMatrix::zero(m));
    out.db_dp = Vec::Zero(m);
    return out;
  };
  return QuasiLinearOperator(std::move(name), m, std::move(a), std::move(bb), std::move(d));
}

double evaluate(const QuasiLinearOperator& op, const Jet2& jet) {
  if (jet.dim() != op.dim() || jet.p.size() != op.dim() || jet.hess.dim() != op.dim()) {
    throw Error(ErrorKind::Dimension, "jet dimension does not match operator", {{"operator", op.dim()}});
  }
  require_member(op, jet.x, jet.r, jet.p);
  return trace_product(op.a(jet.x, jet.r, jet.p), jet.hess) + op.b(jet.x, jet.r, jet.p);
}

nlohmann::json EllipticityCertificate::to_json() const {
  return {{"valid", valid},
          {"C_E", C_E},
          {"samples_checked", samples_checked},
          {"worst_ratio", worst_ratio},
          {"worst_derivative_bound", worst_derivative_bound},
          {"required_C_E", required_constant()},
          {"witness", witness}};
}

EllipticityCertificate certify_ellipticity(const QuasiLinearOperator& op, const AdmissibleRegion& region,
                                           const std::vector<JetPoint>& samples, double C_E_candidate) {
  if (samples.empty()) throw Error(ErrorKind::InvalidArgument, "ellipticity certification needs samples");
  EllipticityCertificate cert;
  cert.C_E = C_E_candidate;
  cert.valid = true;
  for (const JetPoint& q : samples) {
    if (!region.contains(q)) {
      throw Error(ErrorKind::Admissibility, "sample outside the region", point_json(q.x, q.r, q.p));
    }
    ++cert.samples_checked;
    const SpectralBounds sb = spectral_bounds(op.a(q.x, q.r, q.p));
    const double ratio = sb.lambda_min > 0.0 ? std::max(sb.lambda_max, 1.0 / sb.lambda_min) : INFINITY;

    const CoefficientDerivatives d = op.derivatives(q.x, q.r, q.p);
    double der = std::max({max_abs_entry(d.da_dr), std::abs(d.db_dr), std::abs(op.b(q.x, q.r, q.p))});
    for (const SymMatrix& m : d.da_dp) der = std::max(der, max_abs_entry(m));
    if (d.db_dp.size() > 0) der = std::max(der, d.db_dp.cwiseAbs().maxCoeff());

    cert.worst_ratio = std::max(cert.worst_ratio, ratio);
    cert.worst_derivative_bound = std::max(cert.worst_derivative_bound, der);
    if (cert.valid && (ratio > C_E_candidate || der > C_E_candidate)) {
      cert.valid = false;
      cert.witness = point_json(q.x, q.r, q.p);
      cert.witness["eigen_ratio"] = ratio;
      cert.witness["derivative_bound"] = der;
    }
  }
  return cert;
}

Linearization linearization_coefficients(const QuasiLinearOperator& op, const Jet2& jet0, const Jet2& jet1,
                                         int quadrature_order) {
  const int m = op.dim();
  if (jet0.dim() != m || jet1.dim() != m) throw Error(ErrorKind::Dimension, "jet dimension mismatch");
  if ((jet0.x - jet1.x).cwiseAbs().maxCoeff() > 0.0) {
    throw Error(ErrorKind::InvalidArgument, "linearization needs both jets at the same point");
  }
  const QuadratureRule rule = gauss_legendre(quadrature_order);

  Linearization lin{SymMatrix::zero(m), Vec::Zero(m), 0.0};
  for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
    const double t = rule.nodes[q];
    const double w = rule.weights[q];
    const double r = (1.0 - t) * jet0.r + t * jet1.r;
    const Vec p = (1.0 - t) * jet0.p + t * jet1.p;
    const SymMatrix hess = jet0.hess * (1.0 - t) + jet1.hess * t;
    if (const AdmissibleRegion* region = op.region(); region && !region->contains(jet0.x, r, p)) {
      nlohmann::json wit = point_json(jet0.x, r, p);
      wit["t"] = t;
      throw Error(ErrorKind::Admissibility, "segment phi_t leaves the admissible region", wit);
    }
    const CoefficientDerivatives d = op.derivatives(jet0.x, r, p);
    lin.A = lin.A + op.a(jet0.x, r, p) * w;
    for (int i = 0; i < m; ++i) lin.B(i) += w * (trace_product(d.da_dp[i], hess) + d.db_dp(i));
    lin.C += w * (trace_product(d.da_dr, hess) + d.db_dr);
  }
  return lin;
}

double linearization_identity_residual(const QuasiLinearOperator& op, const Jet2& jet0, const Jet2& jet1,
                                       const Linearization& lin) {
  const double lhs = evaluate(op, jet1) - evaluate(op, jet0);
  const double rhs = trace_product(lin.A, jet1.hess - jet0.hess) + lin.B.dot(jet1.p - jet0.p) +
                     lin.C * (jet1.r - jet0.r);
  return rhs - lhs;
}

Report coefficient_bounds_check(const Linearization& lin, double C_E, const SymMatrix& hess0,
                                const SymMatrix& hess1, double tol) {
  Report rep;
  rep.check = "coefficient-bounds";
  const int n = lin.A.dim();
  const double bc_bound = double(n) * n * C_E * (max_abs_entry(hess0) + max_abs_entry(hess1) + 1.0);
  rep.params = {{"C_E", C_E}, {"n", n}, {"tol", tol}};
  rep.residual = {{"BC_bound", bc_bound}};

  auto fail = [&](std::string msg, nlohmann::json wit) {
    if (rep.passed()) {
      rep.verdict = Verdict::ConclusionFailure;
      rep.message = std::move(msg);
      rep.witness = std::move(wit);
    }
  };
  for (int i = 0; i < n; ++i) {
    const double aii = lin.A(i, i);
    if (aii < 1.0 / C_E - tol || aii > C_E + tol) fail("A^ii outside [1/C_E, C_E]", {{"i", i}, {"j", i}, {"value", aii}});
    for (int j = 0; j < n; ++j) {
      if (std::abs(lin.A(i, j)) > C_E + tol) fail("|A^ij| > C_E", {{"i", i}, {"j", j}, {"value", lin.A(i, j)}});
    }
    if (std::abs(lin.B(i)) > bc_bound + tol) fail("|B^i| exceeds the BC bound", {{"i", i}, {"value", lin.B(i)}});
  }
  if (std::abs(lin.C) > bc_bound + tol) fail("|C| exceeds the BC bound", {{"value", lin.C}});
  rep.residual["max_abs_B"] = n > 0 ? lin.B.cwiseAbs().maxCoeff() : 0.0;
  rep.residual["abs_C"] = std::abs(lin.C);
  return rep;
}

}  // namespace maxlab
