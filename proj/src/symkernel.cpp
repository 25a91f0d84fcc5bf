#include "maxlab/symkernel.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "maxlab/error.hpp"

namespace maxlab {

namespace {

void require_same_dim(const SymMatrix& a, const SymMatrix& b) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorKind::Dimension, "symmetric matrices of different dimension",
                {{"lhs", a.dim()}, {"rhs", b.dim()}});
  }
}

}  // namespace

SymMatrix::SymMatrix(int dim) : m_(Mat::Zero(dim, dim)) {
  if (dim < 1) throw Error(ErrorKind::InvalidArgument, "SymMatrix dimension must be >= 1");
}

SymMatrix SymMatrix::from(const Mat& m, double tol) {
  if (m.rows() != m.cols() || m.rows() < 1) {
    throw Error(ErrorKind::Dimension, "matrix is not square");
  }
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (!(asym <= tol * scale)) {
    throw Error(ErrorKind::InvalidArgument, "matrix is not symmetric", {{"asymmetry", asym}});
  }
  SymMatrix s(static_cast<int>(m.rows()));
  s.m_ = 0.5 * (m + m.transpose());
  return s;
}

SymMatrix SymMatrix::identity(int dim, double scale) {
  SymMatrix s(dim);
  s.m_.diagonal().setConstant(scale);
  return s;
}

SymMatrix SymMatrix::diag(std::initializer_list<double> d) {
  Vec v(static_cast<Eigen::Index>(d.size()));
  Eigen::Index i = 0;
  for (double x : d) v(i++) = x;
  return diag(v);
}

SymMatrix SymMatrix::diag(const Vec& d) {
  SymMatrix s(static_cast<int>(d.size()));
  s.m_.diagonal() = d;
  return s;
}

SymMatrix SymMatrix::outer(const Vec& v) {
  SymMatrix s(static_cast<int>(v.size()));
  s.m_ = v * v.transpose();
  return s;
}

SymMatrix SymMatrix::operator+(const SymMatrix& o) const {
  require_same_dim(*this, o);
  SymMatrix s(dim());
  s.m_ = m_ + o.m_;
  return s;
}

SymMatrix SymMatrix::operator-(const SymMatrix& o) const {
  require_same_dim(*this, o);
  SymMatrix s(dim());
  s.m_ = m_ - o.m_;
  return s;
}

SymMatrix SymMatrix::operator*(double k) const {
  SymMatrix s(dim());
  s.m_ = m_ * k;
  return s;
}

Vec eigenvalues(const SymMatrix& a) {
  Eigen::SelfAdjointEigenSolver<Mat> es(a.matrix(), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorKind::Numerical, "symmetric eigen-solver did not converge");
  }
  return es.eigenvalues();
}

SpectralBounds spectral_bounds(const SymMatrix& a) {
  const Vec ev = eigenvalues(a);
  return {ev.minCoeff(), ev.maxCoeff()};
}

bool psd_ordering(const SymMatrix& a, const SymMatrix& b, double tol) {
  require_same_dim(a, b);
  return spectral_bounds(b - a).lambda_min >= -tol;
}

double max_abs_entry(const SymMatrix& a) { return a.matrix().cwiseAbs().maxCoeff(); }

double trace_product(const SymMatrix& a, const SymMatrix& b) {
  require_same_dim(a, b);
  return a.matrix().cwiseProduct(b.matrix()).sum();
}

SymMatrix inverse(const SymMatrix& a, double max_condition) {
  const Vec ev = eigenvalues(a);
  const double big = ev.cwiseAbs().maxCoeff();
  const double small = ev.cwiseAbs().minCoeff();
  if (!(small > 0.0) || big / small > max_condition) {
    throw Error(ErrorKind::Numerical, "matrix is singular or ill-conditioned",
                {{"condition", small > 0.0 ? big / small : INFINITY}});
  }
  return SymMatrix::from(a.matrix().inverse(), 1e-8);
}

double trace_bound_rhs(int n, const TraceBoundConstants& c) {
  return c.c1 * ((n - 1) * c.c2 * c.c3 + c.c4);
}

Report trace_bound_check(const SymMatrix& a, const SymMatrix& b, const TraceBoundConstants& c,
                         double tol) {
  require_same_dim(a, b);
  Report r;
  r.check = "trace-bound";
  r.params = {{"n", a.dim()}, {"c1", c.c1}, {"c2", c.c2}, {"c3", c.c3}, {"c4", c.c4}, {"tol", tol}};
  if (!(c.c1 > 0 && c.c2 > 0 && c.c3 > 0 && c.c4 > 0)) {
    r.verdict = Verdict::HypothesisFailure;
    r.message = "constants must be positive";
    return r;
  }

  const int n = a.dim();
  const SpectralBounds sa = spectral_bounds(a);
  const SpectralBounds sb = spectral_bounds(b);
  const double tr = trace_product(a, b);
  r.residual = {{"lambda_min_A", sa.lambda_min}, {"lambda_max_A", sa.lambda_max},
                {"lambda_min_B", sb.lambda_min}, {"trace_AB", tr}};

  auto fail_hyp = [&](const char* which) {
    r.verdict = Verdict::HypothesisFailure;
    r.message = which;
    return r;
  };
  if (sa.lambda_min < 1.0 / c.c1 - tol) return fail_hyp("A >= (1/c1) I violated");
  if (sa.lambda_max > c.c2 + tol) return fail_hyp("A <= c2 I violated");
  if (sb.lambda_min < -c.c3 - tol) return fail_hyp("B >= -c3 I violated");
  if (tr > c.c4 + tol * (1.0 + std::abs(c.c4))) return fail_hyp("trace(AB) <= c4 violated");

  const double bound = trace_bound_rhs(n, c);
  r.witness = {{"lambda_max_B", sb.lambda_max}};
  r.residual["bound"] = bound;
  r.residual["slack"] = bound - sb.lambda_max;
  // Preconditions pass with slack tol, so the conclusion inherits a tolerance
  // proportional to the constants involved.
  const double ctol = tol * c.c1 * (1.0 + (n - 1) * (c.c2 + c.c3) + c.c4 + n);
  if (sb.lambda_max > bound + ctol) {
    r.verdict = Verdict::ConclusionFailure;
    r.message = "B <= c1((n-1)c2c3 + c4) I violated";
  }
  return r;
}

nlohmann::json to_json(const SymMatrix& a) {
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < a.dim(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int j = 0; j < a.dim(); ++j) row.push_back(a(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::json to_json(const Vec& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

}  // namespace maxlab
