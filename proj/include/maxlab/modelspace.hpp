#pragma once

// Model spacetimes with computable Lorentzian distance: Minkowski space and
// the warped strip (-pi/2, pi/2) x N with g = -dt^2 + cos^2(t) g_N.  Points
// are (fiber coordinates..., t), time last.
//
// Strip distances use the separability of warped products: a maximal
// geodesic runs over a fiber geodesic, so d(p, q) depends on (t_p, t_q) and
// the fiber distance rho only.  In the conformal time u = asinh(tan t) the
// metric is cos^2(t) (-du^2 + g_N), so p << q iff u_q - u_p > rho, and a
// geodesic with conserved momentum L = cos^2(t) ds/dtau satisfies
//   ds/du = L / sqrt(sech^2 u + L^2),  dtau/du = sech^2 u / sqrt(sech^2 u + L^2).

#include <functional>
#include <random>
#include <string>
#include <vector>

#include "maxlab/curvature.hpp"
#include "maxlab/lorgraph.hpp"
#include "maxlab/report.hpp"
#include "maxlab/warped.hpp"

namespace maxlab {

enum class ModelKind { Minkowski, Strip };

class ModelSpacetime {
 public:
  static ModelSpacetime minkowski(int n);
  static ModelSpacetime strip(const FiberMetric& fiber);
  // "minkowski n=3", "strip [fiber=flat dim=1]", "ads-strip [dim=2]"
  static ModelSpacetime parse(const std::string& declaration);

  ModelKind kind() const { return kind_; }
  int n() const { return n_; }
  int fiber_dim() const { return n_ - 1; }
  const FiberMetric& fiber() const { return fiber_; }
  WarpedProduct warped() const;
  MetricField field() const;
  MetricChart chart() const;
  std::string describe() const;

  bool contains(const Vec& X) const;
  // Distance between the spatial parts: Euclidean or fiber distance.
  double spatial_distance(const Vec& p, const Vec& q) const;
  // t for Minkowski, asinh(tan t) on the strip.
  double conformal_time(double t) const;
  bool chronological(const Vec& p, const Vec& q) const;

 private:
  ModelSpacetime(ModelKind kind, int n, FiberMetric fiber) : kind_(kind), n_(n), fiber_(fiber) {}
  ModelKind kind_;
  int n_;
  FiberMetric fiber_;
};

// d(p, q): supremum of proper time over future causal curves from p to q, 0
// unless p << q.
double lorentz_distance(const ModelSpacetime& model, const Vec& p, const Vec& q);

// Distance in the two-dimensional strip -dt^2 + cos^2(t) ds^2 between
// (0, t1) and (rho, t2).
double strip_distance(double t1, double t2, double rho);

// Closed form on anti-de Sitter space, cos d = sin t1 sin t2 + cos t1 cos t2 cosh rho.
double anti_de_sitter_distance(double t1, double t2, double rho);

// Vertical line s -> (fiber_point, s), a maximizing unit-speed timelike
// geodesic of both models.
struct TimelikeGeodesic {
  Vec fiber_point;
  double s_min = 0.0;
  double s_max = 0.0;
  bool arclength = true;

  Vec at(double s) const;
  nlohmann::json to_json() const;
};

// "center" or "s=<c1>,<c2>,..." (a fiber point).
TimelikeGeodesic parse_line(const ModelSpacetime& model, const std::string& spec);

// Samples g(gamma', gamma') = -1 along the line.
Report check_unit_speed(const ModelSpacetime& model, const TimelikeGeodesic& line, int samples = 16);

struct BusemannValue {
  double value = 0.0;         // extrapolated limit
  std::vector<double> r;      // schedule entries actually used
  std::vector<double> b_r;    // r - d(x, gamma(r)) (or the time-reversed form)
  bool monotone = true;       // b_r nonincreasing to the tolerance
  double max_increase = 0.0;  // largest b_{k+1} - b_k
  bool accelerated = false;   // Aitken step accepted

  nlohmann::json to_json() const;
};

class BusemannEvaluator {
 public:
  // Strip schedule r_k = pi/2 - (pi/4) 2^-k, Minkowski r_k = R0 2^k, k <= k_max.
  BusemannEvaluator(ModelSpacetime model, TimelikeGeodesic line, int k_max = 20, double monotone_tol = 1e-12);

  const ModelSpacetime& model() const { return model_; }
  const TimelikeGeodesic& line() const { return line_; }
  std::vector<double> schedule(const Vec& x) const;

  // b+(x) = lim r - d(x, gamma(r)).
  BusemannValue plus(const Vec& x) const;
  // b-(x) = lim r - d(gamma(-r), x), the Busemann function of the reversed line.
  BusemannValue minus(const Vec& x) const;

 private:
  BusemannValue run(const Vec& x, bool future) const;
  ModelSpacetime model_;
  TimelikeGeodesic line_;
  int k_max_;
  double tol_;
};

// b+(x); throws a numerical error when the tail is not monotone.
double busemann(const ModelSpacetime& model, const TimelikeGeodesic& line, const Vec& x);

struct BusemannSuiteOptions {
  int max_pairs = 1000;
  std::uint64_t seed = 0;
  double tol = 1e-6;           // reverse-Lipschitz and b+ + b- >= 0 slack
  double equality_tol = 2e-3;  // |b+ + b-| on the splitting region
};

// Reverse Lipschitz b(q) >= b(p) + d(p, q) on sampled chronological pairs,
// b+ + b- >= 0 pointwise with equality on the strip, and tail monotonicity.
Report busemann_inequality_suite(const BusemannEvaluator& eval, const std::vector<Vec>& points,
                                 const BusemannSuiteOptions& opt = {});

// Geodesics by classical RK4 in the chart.
struct GeodesicPoint {
  Vec X;
  Vec V;
};
std::vector<GeodesicPoint> integrate_geodesic(const MetricField& metric, const Vec& X0, const Vec& V0, double s_end,
                                              int steps);

// Geodesic together with Jacobi fields J_k (variations of the initial data
// with J_k(0) = J0.col(k), J_k'(0) = W0.col(k)), from the linearized
// geodesic equation with analytic or FD Christoffel derivatives.
struct JacobiSolution {
  GeodesicPoint end;
  Mat J;  // columns J_k(s_end)
};
JacobiSolution integrate_jacobi(const MetricField& metric, const Vec& X0, const Vec& V0, const Mat& J0, const Mat& W0,
                                double s_end, int steps);

struct SphereResult {
  Vec base;
  Vec eta;
  double r = 0.0;
  Vec centre;
  Jet2 jet;  // graph t = f(x) of S_{eta,r} at the base
  GraphGeometry geometry;
  double expected_H = 0.0;  // -cot(r) on the strip, -1/r in Minkowski

  nlohmann::json to_json() const;
};

// Past geodesic sphere S = {p : d(p, exp(r eta)) = r} through `base`, as a
// graph over the spatial coordinates, with its geometry at the base from
// Richardson-extrapolated finite differences of step h.
SphereResult geodesic_sphere(const ModelSpacetime& model, const Vec& base, const Vec& eta, double r, double h = 2e-3);

// t = f(x) on the sphere through the root of d((x, t), centre) = r.
double sphere_graph(const ModelSpacetime& model, const Vec& centre, double r, const Vec& x, double t_guess);

struct SplittingOptions {
  std::vector<double> y;  // grid of slice coordinates (1-dim fiber) per axis
  std::vector<double> t;
  double cubic = 0.2;     // slice chart x = y + cubic y^3, componentwise
  int steps_per_unit = 400;
  double tol = 1e-6;
};

// Phi(y, t) = exp(t n(y)) from the slice {t = 0}; analytic (Jacobi) and FD
// pullbacks compared with -dt^2 + cos^2(t) g_N, FD order under refinement,
// exactness on t = 0 and an injectivity scan.
Report splitting_map_check(const ModelSpacetime& model, const SplittingOptions& opt);

// t + pi/2 on the strip.
double cosmological_time(const ModelSpacetime& model, const Vec& q);

// Supremum of d(p, q) over sampled past points p with t_p down to -pi/2 + t_floor.
double cosmological_time_estimate(const ModelSpacetime& model, const Vec& q, int time_samples = 24,
                                  int fiber_samples = 5, double t_floor = 1e-4);

}  // namespace maxlab
