#pragma once

// Quasi-linear operators M[u] = sum a^ij(x,u,Du) D_ij u + b(x,u,Du), their
// admissible regions, ellipticity certificates, and the integral
// linearization M[phi1] - M[phi0] = A:D^2(phi1-phi0) + B.D(phi1-phi0) + C(phi1-phi0).

#include <algorithm>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "maxlab/grid.hpp"
#include "maxlab/report.hpp"
#include "maxlab/symkernel.hpp"

namespace maxlab {

// (x, r, p): a point of the jet space where the coefficients live.
struct JetPoint {
  Vec x;
  double r = 0.0;
  Vec p;
};

// Second-order jet (x, u(x), Du(x), D^2u(x)).
struct Jet2 {
  Vec x;
  double r = 0.0;
  Vec p;
  SymMatrix hess;

  int dim() const { return static_cast<int>(x.size()); }
  JetPoint point() const { return {x, r, p}; }
};

nlohmann::json to_json(const Jet2& j);

using CoeffA = std::function<SymMatrix(const Vec& x, double r, const Vec& p)>;
using CoeffB = std::function<double(const Vec& x, double r, const Vec& p)>;

// (r,p)-derivatives of the coefficients at one jet point.  da_dp[k] is
// the matrix d a^ij / d p_k.
struct CoefficientDerivatives {
  SymMatrix da_dr;
  std::vector<SymMatrix> da_dp;
  double db_dr = 0.0;
  Vec db_dp;
};

using DerivativeEval = std::function<CoefficientDerivatives(const Vec& x, double r, const Vec& p)>;

class AdmissibleRegion {
 public:
  using Predicate = std::function<bool(const Vec& x, double r, const Vec& p)>;

  AdmissibleRegion(int m, Predicate contains, std::string fiber, bool convex_fibers);
  static AdmissibleRegion everywhere(int m);

  int dim() const { return m_; }
  bool contains(const Vec& x, double r, const Vec& p) const { return contains_(x, r, p); }
  bool contains(const JetPoint& q) const { return contains_(q.x, q.r, q.p); }
  const std::string& fiber_description() const { return fiber_; }
  bool convex_fibers() const { return convex_; }

 private:
  int m_;
  Predicate contains_;
  std::string fiber_;
  bool convex_;
};

// Samples `pairs` random member pairs (r,p),(r',p') of the fiber U_x drawn by
// `draw` and reports the first midpoint that falls outside U_x.
Report check_fiber_convexity(const AdmissibleRegion& region, const Vec& x,
                             const std::function<std::pair<double, Vec>(std::mt19937_64&)>& draw,
                             int pairs, std::mt19937_64& rng);

class QuasiLinearOperator {
 public:
  QuasiLinearOperator(std::string name, int m, CoeffA a, CoeffB b, DerivativeEval derivatives = {},
                      double h_fd = 1e-5);

  static QuasiLinearOperator laplacian(int m);

  const std::string& name() const { return name_; }
  int dim() const { return m_; }
  double h_fd() const { return h_fd_; }
  bool has_analytic_derivatives() const { return static_cast<bool>(derivatives_); }

  SymMatrix a(const Vec& x, double r, const Vec& p) const;
  double b(const Vec& x, double r, const Vec& p) const { return b_(x, r, p); }

  // Analytic when supplied, otherwise central differences in (r, p) with
  // step h_fd*(1+|value|).  Never differentiates in x.
  CoefficientDerivatives derivatives(const Vec& x, double r, const Vec& p) const;

  // b -> b - H0, the normalization that reduces to H0 = 0.
  QuasiLinearOperator shifted(double h0) const;

  void attach_region(std::shared_ptr<const AdmissibleRegion> region) { region_ = std::move(region); }
  const AdmissibleRegion* region() const { return region_.get(); }

 private:
  std::string name_;
  int m_;
  CoeffA a_;
  CoeffB b_;
  DerivativeEval derivatives_;
  double h_fd_;
  std::shared_ptr<const AdmissibleRegion> region_;
};

// Linear operator with x-dependent coefficients read from grids:
// a_upper holds a^ij for i <= j in row order, all on one layout.
QuasiLinearOperator table_operator(std::string name, std::vector<GridFunction> a_upper, GridFunction b);

// sum a^ij hess_ij + b at the jet.  Throws an admissibility error when a
// region is attached and the jet lies outside it.
double evaluate(const QuasiLinearOperator& op, const Jet2& jet);

struct EllipticityCertificate {
  bool valid = false;
  double C_E = 0.0;
  std::size_t samples_checked = 0;
  // Smallest C with (1/C) I <= a <= C I over the samples.
  double worst_ratio = 0.0;
  // Largest of |da/dr|, |da/dp_k|, |db/dr|, |db/dp_k|, |b| over the samples.
  double worst_derivative_bound = 0.0;
  nlohmann::json witness = nullptr;

  double required_constant() const { return std::max(worst_ratio, worst_derivative_bound); }
  nlohmann::json to_json() const;
};

EllipticityCertificate certify_ellipticity(const QuasiLinearOperator& op, const AdmissibleRegion& region,
                                           const std::vector<JetPoint>& samples, double C_E_candidate);

struct Linearization {
  SymMatrix A;
  Vec B;
  double C = 0.0;
};

// A, B, C by Gauss-Legendre quadrature along phi_t = (1-t) phi0 + t phi1.
Linearization linearization_coefficients(const QuasiLinearOperator& op, const Jet2& jet0, const Jet2& jet1,
                                         int quadrature_order = 16);

// Right-hand side minus left-hand side of the difference identity.
double linearization_identity_residual(const QuasiLinearOperator& op, const Jet2& jet0, const Jet2& jet1,
                                       const Linearization& lin);

Report coefficient_bounds_check(const Linearization& lin, double C_E, const SymMatrix& hess0,
                                const SymMatrix& hess1, double tol = 1e-10);

}  // namespace maxlab
