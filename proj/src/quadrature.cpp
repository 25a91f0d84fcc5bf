#include "maxlab/quadrature.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

#include "maxlab/error.hpp"

namespace maxlab {

// Golub-Welsch: the nodes are the eigenvalues of the Jacobi matrix of the
// Legendre recurrence, the weights come from the first eigenvector entries.
QuadratureRule gauss_legendre(int order, double a, double b) {
  if (order < 1 || order > 256) {
    throw Error(ErrorKind::InvalidArgument, "quadrature order must be in [1, 256]", {{"order", order}});
  }
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(order);
  Eigen::VectorXd sub(order > 1 ? order - 1 : 0);
  for (int k = 1; k < order; ++k) sub(k - 1) = k / std::sqrt(4.0 * k * k - 1.0);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);

  QuadratureRule rule;
  rule.nodes.resize(order);
  rule.weights.resize(order);
  const double half = 0.5 * (b - a);
  for (int k = 0; k < order; ++k) {
    // Symmetrize explicitly so that odd moments vanish to rounding.
    const double x = 0.5 * (es.eigenvalues()(k) - es.eigenvalues()(order - 1 - k));
    const double v = es.eigenvectors()(0, k);
    rule.nodes[k] = a + half * (x + 1.0);
    rule.weights[k] = half * 2.0 * v * v;
  }
  return rule;
}

}  // namespace maxlab
