#include "maxlab/lorgraph.hpp"

#include <cmath>

#include "maxlab/declaration.hpp"
#include "maxlab/error.hpp"

namespace maxlab {

namespace {

nlohmann::json point_json(const Vec& x, double r, const Vec& p) {
  return {{"x", to_json(x)}, {"r", r}, {"p", to_json(p)}};
}

Vec join(const Vec& x, double t) {
  Vec X(x.size() + 1);
  X << x, t;
  return X;
}

}  // namespace

MetricChart::MetricChart(std::string name, int n, Spatial g, SpatialDerivatives dg, double h_fd)
    : name_(std::move(name)), n_(n), g_(std::move(g)), dg_(std::move(dg)), h_fd_(h_fd) {
  if (n < 2) throw Error(ErrorKind::InvalidArgument, "chart dimension must be >= 2");
  if (!g_) throw Error(ErrorKind::InvalidArgument, "chart needs a spatial metric evaluator");
}

MetricChart MetricChart::minkowski(int n) {
  return MetricChart(
      "minkowski n=" + std::to_string(n), n, [n](const Vec&) { return SymMatrix::identity(n - 1); },
      [n](const Vec&) { return std::vector<SymMatrix>(n, SymMatrix::zero(n - 1)); });
}

MetricChart MetricChart::warped(const WarpedProduct& w) {
  return MetricChart(
      w.describe(), w.n(), [w](const Vec& X) { return w.spatial(X); },
      [w](const Vec& X) { return w.spatial_d1(X); });
}

MetricChart MetricChart::parse(const std::string& declaration) {
  Declaration d(declaration);
  if (d.name() == "minkowski") {
    const int n = d.take_int("n", 3);
    if (n < 2) throw Error(ErrorKind::Config, "minkowski needs n >= 2");
    d.finish();
    return minkowski(n);
  }
  if (d.name() == "ads-strip" || d.name() == "strip" || d.name() == "warped") {
    const bool ads = d.name() == "ads-strip";
    const WarpedProduct w = take_warped(d, ads ? FiberKind::Hyperbolic : FiberKind::Flat, ads ? 2 : 1, WarpKind::Cosine);
    d.finish();
    return warped(w);
  }
  throw Error(ErrorKind::Config, "unknown chart '" + d.name() + "' (expected minkowski, strip, ads-strip or warped)",
              {{"declaration", declaration}});
}

SymMatrix MetricChart::spatial(const Vec& X) const {
  if (X.size() != n_) throw Error(ErrorKind::Dimension, "chart point has wrong dimension");
  return g_(X);
}

Mat MetricChart::metric(const Vec& X) const {
  Mat g = Mat::Zero(n_, n_);
  g.topLeftCorner(n_ - 1, n_ - 1) = spatial(X).matrix();
  g(n_ - 1, n_ - 1) = -1.0;
  return g;
}

std::vector<SymMatrix> MetricChart::spatial_derivatives(const Vec& X) const {
  if (dg_) return dg_(X);
  std::vector<SymMatrix> out;
  out.reserve(n_);
  for (int a = 0; a < n_; ++a) {
    Vec xp = X, xm = X;
    xp(a) += h_fd_;
    xm(a) -= h_fd_;
    out.push_back((spatial(xp) - spatial(xm)) * (0.5 / h_fd_));
  }
  return out;
}

Christoffel christoffels_from(const Mat& g, const std::vector<Mat>& dg) {
  const int n = static_cast<int>(g.rows());
  const Eigen::FullPivLU<Mat> lu(g);
  if (!lu.isInvertible()) throw Error(ErrorKind::Numerical, "metric is not invertible");
  const Mat ginv = lu.inverse();
  Christoffel gam{n, std::vector<double>(n * n * n, 0.0)};
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = b; c < n; ++c) {
        double s = 0.0;
        for (int d = 0; d < n; ++d) s += ginv(a, d) * (dg[b](d, c) + dg[c](d, b) - dg[d](b, c));
        gam(a, b, c) = 0.5 * s;
        gam(a, c, b) = 0.5 * s;
      }
  return gam;
}

Christoffel christoffels(const MetricChart& chart, const Vec& X) {
  const int n = chart.n();
  std::vector<Mat> dg;
  for (const SymMatrix& d : chart.spatial_derivatives(X)) {
    Mat m = Mat::Zero(n, n);
    m.topLeftCorner(n - 1, n - 1) = d.matrix();
    dg.push_back(std::move(m));
  }
  return christoffels_from(chart.metric(X), dg);
}

namespace {

struct GraphData {
  SymMatrix g, ginv, G, Ginv, V;
  Christoffel gam;
  double W = 1.0;
};

GraphData graph_data(const MetricChart& chart, const Vec& x, double r, const Vec& p) {
  const int m = chart.n() - 1;
  if (x.size() != m || p.size() != m) {
    throw Error(ErrorKind::Dimension, "graph jet must live in the (n-1)-dim chart slice", {{"n", chart.n()}});
  }
  GraphData d;
  const Vec X = join(x, r);
  d.g = chart.spatial(X);
  d.ginv = inverse(d.g);
  const double w2 = 1.0 - p.dot(d.ginv.matrix() * p);
  if (!(w2 > 0.0)) {
    nlohmann::json wit = point_json(x, r, p);
    wit["W2"] = w2;
    throw Error(ErrorKind::NotSpacelike, "graph is not spacelike: W^2 <= 0", wit);
  }
  d.W = std::sqrt(w2);
  d.G = d.g - SymMatrix::outer(p);
  d.Ginv = inverse(d.G);
  d.gam = christoffels(chart, X);
  const int n = chart.n() - 1;  // index of the time coordinate
  d.V = SymMatrix(m);
  for (int i = 0; i < m; ++i)
    for (int j = i; j < m; ++j) {
      double s = 0.0;
      for (int k = 0; k < m; ++k) {
        s += d.gam(k, i, j) * p(k) + d.gam(k, i, n) * p(k) * p(j) + d.gam(k, j, n) * p(k) * p(i);
      }
      d.V.set(i, j, s);
    }
  return d;
}

}  // namespace

nlohmann::json GraphGeometry::to_json() const {
  return {{"W", W}, {"normal", maxlab::to_json(normal)}, {"G", maxlab::to_json(G)},
          {"V", maxlab::to_json(V)}, {"h", maxlab::to_json(h)}, {"H", H}};
}

GraphGeometry graph_geometry(const MetricChart& chart, const Jet2& jet) {
  const GraphData d = graph_data(chart, jet.x, jet.r, jet.p);
  const int m = chart.n() - 1;
  GraphGeometry geo;
  geo.W = d.W;
  geo.G = d.G;
  geo.V = d.V;
  geo.h = SymMatrix(m);
  for (int i = 0; i < m; ++i)
    for (int j = i; j < m; ++j) geo.h.set(i, j, (jet.hess(i, j) + d.gam(m, i, j) - d.V(i, j)) / d.W);
  geo.H = trace_product(d.Ginv, geo.h) / m;
  geo.normal = Vec(m + 1);
  geo.normal.head(m) = d.ginv.matrix() * jet.p / d.W;
  geo.normal(m) = 1.0 / d.W;
  return geo;
}

SymMatrix hessian_from_geometry(const MetricChart& chart, const Jet2& jet, const GraphGeometry& geo) {
  const int m = chart.n() - 1;
  const Christoffel gam = christoffels(chart, join(jet.x, jet.r));
  SymMatrix out(m);
  for (int i = 0; i < m; ++i)
    for (int j = i; j < m; ++j) out.set(i, j, geo.W * geo.h(i, j) - gam(m, i, j) + geo.V(i, j));
  return out;
}

MeanCurvatureCoefficients mean_curvature_coefficients(const MetricChart& chart, const Vec& x, double r,
                                                      const Vec& p) {
  const GraphData d = graph_data(chart, x, r, p);
  const int m = chart.n() - 1;
  const double k = 1.0 / (m * d.W);
  double b = 0.0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) b += d.Ginv(i, j) * (d.gam(m, i, j) - d.V(i, j));
  return {d.Ginv * k, b * k};
}

QuasiLinearOperator chart_mean_curvature_operator(const MetricChart& chart) {
  auto shared = std::make_shared<const MetricChart>(chart);
  return QuasiLinearOperator(
      "chart-mean-curvature", chart.n() - 1,
      [shared](const Vec& x, double r, const Vec& p) { return mean_curvature_coefficients(*shared, x, r, p).a; },
      [shared](const Vec& x, double r, const Vec& p) { return mean_curvature_coefficients(*shared, x, r, p).b; });
}

namespace {

double flat_W(const Vec& x, double r, const Vec& p) {
  const double w2 = 1.0 - p.squaredNorm();
  if (!(w2 > 0.0)) {
    nlohmann::json wit = point_json(x, r, p);
    wit["W2"] = w2;
    throw Error(ErrorKind::NotSpacelike, "graph is not spacelike: |Df| >= 1", wit);
  }
  return std::sqrt(w2);
}

}  // namespace

QuasiLinearOperator flat_mean_curvature_operator(int m) {
  // a = (I + p p^T / W^2) / (m W) = I/(mW) + p p^T/(m W^3), b = 0.
  CoeffA a = [m](const Vec& x, double r, const Vec& p) {
    const double W = flat_W(x, r, p);
    SymMatrix out = SymMatrix::identity(m, 1.0 / (m * W));
    return out + SymMatrix::outer(p) * (1.0 / (m * W * W * W));
  };
  CoeffB b = [](const Vec&, double, const Vec&) { return 0.0; };
  DerivativeEval d = [m](const Vec& x, double r, const Vec& p) {
    const double W = flat_W(x, r, p);
    const double W3 = W * W * W, W5 = W3 * W * W;
    CoefficientDerivatives out;
    out.da_dr = SymMatrix::zero(m);
    out.db_dp = Vec::Zero(m);
    for (int k = 0; k < m; ++k) {
      Mat dk = Mat::Identity(m, m) * (p(k) / (m * W3));
      Mat ek = Mat::Zero(m, m);
      ek.row(k) += p.transpose();
      ek.col(k) += p;
      dk += ek / (m * W3);
      dk += p * p.transpose() * (3.0 * p(k) / (m * W5));
      out.da_dp.push_back(SymMatrix::from(dk));
    }
    return out;
  };
  return QuasiLinearOperator("flat-mean-curvature", m, std::move(a), std::move(b), std::move(d));
}

double flat_mean_curvature(const Jet2& jet) {
  const int m = jet.dim();
  const double W = flat_W(jet.x, jet.r, jet.p);
  const Mat& hs = jet.hess.matrix();
  return (hs.trace() / W + jet.p.dot(hs * jet.p) / (W * W * W)) / m;
}

GraphSurface GraphSurface::from_grid(std::shared_ptr<const GridFunction> grid) {
  return GraphSurface([grid](const Vec& x) {
    const Vec s = ((x - grid->origin()).array() / grid->spacing().array()).matrix();
    std::vector<int> idx(grid->dims());
    for (int k = 0; k < grid->dims(); ++k) {
      idx[k] = static_cast<int>(std::lround(s(k)));
      if (std::abs(s(k) - idx[k]) > 1e-9 || idx[k] < 0 || idx[k] >= grid->shape()[k]) {
        throw Error(ErrorKind::Domain, "grid surfaces are evaluated at grid nodes only", {{"x", to_json(x)}});
      }
    }
    const std::size_t f = grid->flat(idx);
    return Jet2{grid->node(f), (*grid)[f], grid->gradient(f), grid->hessian(f)};
  });
}

nlohmann::json AdmissibleSet::to_json() const {
  return {{"rho", rho}, {"B", bound}, {"lower", maxlab::to_json(lower)}, {"upper", maxlab::to_json(upper)},
          {"fiber", region->fiber_description()}, {"certificate", certificate.to_json()}};
}

std::shared_ptr<const AdmissibleRegion> admissible_region(const MetricChart& chart, double rho, double bound,
                                                          const Vec& lower, const Vec& upper) {
  if (!(rho > 0.0 && rho < 1.0)) throw Error(ErrorKind::InvalidArgument, "rho must lie in (0, 1)", {{"rho", rho}});
  if (!(bound > 0.0)) throw Error(ErrorKind::InvalidArgument, "B must be positive");
  const int m = chart.n() - 1;
  if (lower.size() != m || upper.size() != m) throw Error(ErrorKind::Dimension, "box K has wrong dimension");
  auto shared = std::make_shared<const MetricChart>(chart);
  const double cap = 1.0 - rho * rho;
  AdmissibleRegion::Predicate pred = [shared, cap, bound, lower, upper](const Vec& x, double r, const Vec& p) {
    if (x.size() != lower.size() || p.size() != lower.size()) return false;
    if ((x.array() < lower.array()).any() || (x.array() > upper.array()).any()) return false;
    if (!(std::abs(r) < bound)) return false;
    try {
      const SymMatrix g = shared->spatial(join(x, r));
      return p.dot(g.matrix().ldlt().solve(p)) < cap;
    } catch (const Error&) {
      return false;
    }
  };
  std::ostringstream desc;
  desc << "U_x = {|r| < " << bound << ", g^ij p_i p_j < 1 - " << rho << "^2}";
  return std::make_shared<const AdmissibleRegion>(m, std::move(pred), desc.str(), true);
}

std::vector<JetPoint> sample_admissible(const MetricChart& chart, double rho, double bound, const Vec& lower,
                                        const Vec& upper, int count, std::mt19937_64& rng) {
  const int m = chart.n() - 1;
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double scale = std::sqrt(1.0 - rho * rho) * (1.0 - 1e-9);
  std::vector<JetPoint> out;
  out.reserve(count);
  for (int s = 0; s < count; ++s) {
    JetPoint q;
    q.x = Vec(m);
    for (int k = 0; k < m; ++k) q.x(k) = lower(k) + (upper(k) - lower(k)) * uni(rng);
    q.r = bound * (2.0 * uni(rng) - 1.0) * (1.0 - 1e-12);
    Vec dir(m);
    for (int k = 0; k < m; ++k) dir(k) = gauss(rng);
    dir /= std::max(dir.norm(), 1e-300);
    // Every other sample sits in the outer shell where ellipticity degrades.
    const double u = uni(rng);
    const double radius = (s % 2 == 0) ? std::pow(u, 1.0 / m) : 0.99 + 0.01 * u;
    const Eigen::LLT<Mat> llt(chart.spatial(join(q.x, q.r)).matrix());
    q.p = llt.matrixL() * (dir * (scale * radius));
    out.push_back(std::move(q));
  }
  return out;
}

AdmissibleSet admissible_set(const MetricChart& chart, const QuasiLinearOperator& op, double rho, double bound,
                             const Vec& lower, const Vec& upper, int samples, std::uint64_t seed) {
  AdmissibleSet set;
  set.region = admissible_region(chart, rho, bound, lower, upper);
  set.rho = rho;
  set.bound = bound;
  set.lower = lower;
  set.upper = upper;
  std::mt19937_64 rng(seed);
  const auto pts = sample_admissible(chart, rho, bound, lower, upper, samples, rng);
  set.certificate = certify_ellipticity(op, *set.region, pts, INFINITY);
  set.certificate.C_E = set.certificate.required_constant();
  return set;
}

}  // namespace maxlab
