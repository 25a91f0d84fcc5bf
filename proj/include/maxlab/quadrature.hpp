#pragma once

#include <vector>

namespace maxlab {

// Gauss-Legendre nodes and weights mapped onto [a, b].
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

QuadratureRule gauss_legendre(int order, double a = 0.0, double b = 1.0);

template <class F>
double integrate(const QuadratureRule& rule, F&& f) {
  double s = 0.0;
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) s += rule.weights[k] * f(rule.nodes[k]);
  return s;
}

// Composite rule: [a, b] split into `panels` equal pieces.
template <class F>
double integrate_composite(double a, double b, int panels, int order, F&& f) {
  const QuadratureRule ref = gauss_legendre(order, 0.0, 1.0);
  const double w = (b - a) / panels;
  double s = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * w;
    for (std::size_t k = 0; k < ref.nodes.size(); ++k) s += w * ref.weights[k] * f(lo + w * ref.nodes[k]);
  }
  return s;
}

}  // namespace maxlab
