#pragma once

// Fiber metrics and the warped products g = F(t) g_N - dt^2 built on them.
// Coordinates are (x^1..x^k, t): time is always the last coordinate.

#include <string>
#include <vector>

#include "maxlab/symkernel.hpp"

namespace maxlab {

enum class FiberKind { Flat, Hyperbolic, Perturbed };
enum class WarpKind { Unit, Cosine };  // F(t) = 1 or cos^2(t)

const char* to_string(FiberKind k);
FiberKind fiber_kind_from_string(const std::string& s);

// Hyperbolic fibers use the Poincare ball, curvature -1.  Perturbed fibers are
// delta_ij + amplitude * sin(k_ij . x + phase_ij), a generic smooth metric.
struct FiberMetric {
  FiberKind kind = FiberKind::Flat;
  int dim = 1;
  double amplitude = 0.05;

  bool contains(const Vec& x) const;
  SymMatrix metric(const Vec& x) const;
  // d1[a] = d h / dx^a, d2[a][b] = d^2 h / dx^a dx^b.
  std::vector<SymMatrix> d1(const Vec& x) const;
  std::vector<std::vector<SymMatrix>> d2(const Vec& x) const;
  // Riemannian distance; flat and hyperbolic fibers only.
  double distance(const Vec& x, const Vec& y) const;
  std::string describe() const;
};

struct WarpedProduct {
  FiberMetric fiber;
  WarpKind warp = WarpKind::Cosine;

  int n() const { return fiber.dim + 1; }
  double F(double t) const;
  double dF(double t) const;
  double ddF(double t) const;

  bool contains(const Vec& X) const;
  Mat metric(const Vec& X) const;
  std::vector<Mat> d1(const Vec& X) const;
  std::vector<std::vector<Mat>> d2(const Vec& X) const;

  // Spatial block F(t) h(x) and its derivatives in all n coordinates.
  SymMatrix spatial(const Vec& X) const;
  std::vector<SymMatrix> spatial_d1(const Vec& X) const;

  std::string describe() const;
};

}  // namespace maxlab
