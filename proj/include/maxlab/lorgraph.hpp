#pragma once

// Spacelike graphs t = f(x) over Lorentzian charts in normal form
//   g = sum_{i,j<n} g_ij(x, t) dx^i dx^j - dt^2,
// their induced geometry, and the mean-curvature operator
//   H[f] = sum a^ij(x,f,Df) D_ij f + b(x,f,Df).

#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "maxlab/grid.hpp"
#include "maxlab/quasilinear.hpp"
#include "maxlab/warped.hpp"

namespace maxlab {

class MetricChart {
 public:
  using Spatial = std::function<SymMatrix(const Vec& X)>;
  // d/dX^A of [g_ij] for A = 0..n-1 (time last).
  using SpatialDerivatives = std::function<std::vector<SymMatrix>(const Vec& X)>;

  MetricChart(std::string name, int n, Spatial g, SpatialDerivatives dg = {}, double h_fd = 1e-4);

  static MetricChart minkowski(int n);
  static MetricChart warped(const WarpedProduct& w);
  // "minkowski n=3", "ads-strip" / "strip" [dim=k], "warped fiber=hyperbolic dim=2 [warp=cos|unit]".
  static MetricChart parse(const std::string& declaration);

  const std::string& name() const { return name_; }
  int n() const { return n_; }
  double h_fd() const { return h_fd_; }
  bool has_analytic_derivatives() const { return static_cast<bool>(dg_); }

  SymMatrix spatial(const Vec& X) const;
  Mat metric(const Vec& X) const;
  std::vector<SymMatrix> spatial_derivatives(const Vec& X) const;

 private:
  std::string name_;
  int n_;
  Spatial g_;
  SpatialDerivatives dg_;
  double h_fd_;
};

// Gamma^A_{BC} of the full chart metric, flat storage.
struct Christoffel {
  int n = 0;
  std::vector<double> v;

  double operator()(int a, int b, int c) const { return v[(a * n + b) * n + c]; }
  double& operator()(int a, int b, int c) { return v[(a * n + b) * n + c]; }
};

Christoffel christoffels(const MetricChart& chart, const Vec& X);

// Levi-Civita symbols from a full metric and its first derivatives.
Christoffel christoffels_from(const Mat& g, const std::vector<Mat>& dg);

struct GraphGeometry {
  double W = 1.0;
  Vec normal;  // future unit normal, n components
  SymMatrix G;
  SymMatrix V;
  SymMatrix h;
  double H = 0.0;

  nlohmann::json to_json() const;
};

// jet.x in R^{n-1}, jet.r = f(x), jet.p = Df, jet.hess = D^2 f.
GraphGeometry graph_geometry(const MetricChart& chart, const Jet2& jet);

// D_ij f recovered as W h_ij - Gamma^n_ij + V_ij.
SymMatrix hessian_from_geometry(const MetricChart& chart, const Jet2& jet, const GraphGeometry& geo);

struct MeanCurvatureCoefficients {
  SymMatrix a;
  double b = 0.0;
};

MeanCurvatureCoefficients mean_curvature_coefficients(const MetricChart& chart, const Vec& x, double r,
                                                      const Vec& p);

// Mean-curvature operator of a chart, (r,p)-derivatives by finite differences.
QuasiLinearOperator chart_mean_curvature_operator(const MetricChart& chart);

// Minkowski case with analytic (r,p)-derivatives; m = n-1 is the graph dimension.
QuasiLinearOperator flat_mean_curvature_operator(int m);

// (1/m) sum_i D_i(D_i f / sqrt(1 - |Df|^2)), expanded.
double flat_mean_curvature(const Jet2& jet);

// Graph surfaces: analytic jets or a grid with FD jets.
class GraphSurface {
 public:
  using JetFn = std::function<Jet2(const Vec& x)>;
  explicit GraphSurface(JetFn jet) : jet_(std::move(jet)) {}
  static GraphSurface from_grid(std::shared_ptr<const GridFunction> grid);

  Jet2 jet(const Vec& x) const { return jet_(x); }

 private:
  JetFn jet_;
};

struct AdmissibleSet {
  std::shared_ptr<const AdmissibleRegion> region;
  EllipticityCertificate certificate;
  double rho = 0.0;
  double bound = 0.0;
  Vec lower, upper;

  nlohmann::json to_json() const;
};

// U_{rho,B,K} = {x in K, |r| < B, g^ij(x,r) p_i p_j < 1 - rho^2} for the box K.
std::shared_ptr<const AdmissibleRegion> admissible_region(const MetricChart& chart, double rho, double bound,
                                                          const Vec& lower, const Vec& upper);

// Deterministic samples of U_{rho,B,K}: for a fixed rng state the p-samples
// scale with sqrt(1 - rho^2), so certificates are comparable across rho.
std::vector<JetPoint> sample_admissible(const MetricChart& chart, double rho, double bound, const Vec& lower,
                                        const Vec& upper, int count, std::mt19937_64& rng);

// Region plus the smallest constant satisfying (a-est)/(der-bd) on the samples.
AdmissibleSet admissible_set(const MetricChart& chart, const QuasiLinearOperator& op, double rho, double bound,
                             const Vec& lower, const Vec& upper, int samples, std::uint64_t seed);

}  // namespace maxlab
