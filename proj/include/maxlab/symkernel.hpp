#pragma once

// Small dense symmetric matrices: the ordering A <= B (B - A positive
// semi-definite), spectral bounds, and the trace-bound lemma that drives the
// Hessian estimates.

#include <initializer_list>
#include <vector>

#include <Eigen/Dense>

#include "maxlab/report.hpp"

namespace maxlab {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double kDefaultPsdTol = 1e-10;

class SymMatrix {
 public:
  SymMatrix() = default;
  explicit SymMatrix(int dim);

  // Accepts a matrix that is symmetric to within `tol` (relative to its max
  // entry) and stores the exact symmetrization.
  static SymMatrix from(const Mat& m, double tol = 1e-12);
  static SymMatrix identity(int dim, double scale = 1.0);
  static SymMatrix zero(int dim) { return SymMatrix(dim); }
  static SymMatrix diag(std::initializer_list<double> d);
  static SymMatrix diag(const Vec& d);
  static SymMatrix outer(const Vec& v);

  int dim() const { return static_cast<int>(m_.rows()); }
  double operator()(int i, int j) const { return m_(i, j); }
  void set(int i, int j, double v) {
    m_(i, j) = v;
    m_(j, i) = v;
  }
  const Mat& matrix() const { return m_; }

  double trace() const { return m_.trace(); }

  SymMatrix operator+(const SymMatrix& o) const;
  SymMatrix operator-(const SymMatrix& o) const;
  SymMatrix operator*(double s) const;
  SymMatrix operator-() const { return *this * -1.0; }

 private:
  Mat m_;
};

inline SymMatrix operator*(double s, const SymMatrix& a) { return a * s; }

struct SpectralBounds {
  double lambda_min = 0.0;
  double lambda_max = 0.0;
};

SpectralBounds spectral_bounds(const SymMatrix& a);
Vec eigenvalues(const SymMatrix& a);

// A <= B iff every eigenvalue of B - A is >= -tol.
bool psd_ordering(const SymMatrix& a, const SymMatrix& b, double tol = kDefaultPsdTol);

// |A| := max_{i,j} |A_ij|
double max_abs_entry(const SymMatrix& a);

// trace(A B) for symmetric A, B.
double trace_product(const SymMatrix& a, const SymMatrix& b);

SymMatrix inverse(const SymMatrix& a, double max_condition = 1e12);

struct TraceBoundConstants {
  double c1 = 1.0;
  double c2 = 1.0;
  double c3 = 1.0;
  double c4 = 1.0;
};

// Checks the matrix lemma: (1/c1) I <= A <= c2 I, B >= -c3 I and
// trace(AB) <= c4 imply B <= c1((n-1) c2 c3 + c4) I.  Precondition violations
// are reported as hypothesis failures; a failed conclusion would falsify the
// lemma.
Report trace_bound_check(const SymMatrix& a, const SymMatrix& b, const TraceBoundConstants& c,
                         double tol = kDefaultPsdTol);

double trace_bound_rhs(int n, const TraceBoundConstants& c);

nlohmann::json to_json(const SymMatrix& a);
nlohmann::json to_json(const Vec& v);

}  // namespace maxlab
