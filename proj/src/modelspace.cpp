#include "maxlab/modelspace.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/tools/roots.hpp>

#include "maxlab/declaration.hpp"
#include "maxlab/error.hpp"
#include "maxlab/quadrature.hpp"

namespace maxlab {

namespace {

constexpr double kHalfPi = M_PI / 2.0;

Vec spatial_part(const Vec& X) { return X.head(X.size() - 1); }
double time_of(const Vec& X) { return X(X.size() - 1); }

Vec make_point(const Vec& x, double t) {
  Vec X(x.size() + 1);
  X << x, t;
  return X;
}

template <class F>
double solve_bracketed(F f, double lo, double hi, double flo, double fhi, const char* what) {
  boost::uintmax_t iters = 200;
  const auto root = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, boost::math::tools::eps_tolerance<double>(53),
                                                      iters);
  if (iters >= 200) throw Error(ErrorKind::Numerical, std::string(what) + ": root finder did not converge");
  return 0.5 * (root.first + root.second);
}

// d_e Gamma^a_bc for e = 0..n-1.
std::vector<Christoffel> christoffel_derivatives(const MetricField& m, const Vec& X) {
  const int n = m.n();
  const Mat ginv = m.inverse(X);
  const auto g1 = m.d1(X);
  const auto g2 = m.d2(X);
  std::vector<Christoffel> out;
  for (int e = 0; e < n; ++e) {
    const Mat dginv = -ginv * g1[e] * ginv;
    Christoffel c{n, std::vector<double>(n * n * n, 0.0)};
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int cc = 0; cc < n; ++cc) {
          double s = 0.0;
          for (int d = 0; d < n; ++d) {
            const double T = g1[b](d, cc) + g1[cc](d, b) - g1[d](b, cc);
            const double dT = g2[e][b](d, cc) + g2[e][cc](d, b) - g2[e][d](b, cc);
            s += dginv(a, d) * T + ginv(a, d) * dT;
          }
          c(a, b, cc) = 0.5 * s;
        }
    out.push_back(std::move(c));
  }
  return out;
}

Vec geodesic_acceleration(const Christoffel& G, const Vec& V) {
  const int n = G.n;
  Vec A = Vec::Zero(n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c) A(a) -= G(a, b, c) * V(b) * V(c);
  return A;
}

// Richardson-extrapolated centered-difference jet of a scalar function.
Jet2 fd_jet(const std::function<double(const Vec&)>& f, const Vec& x0, double h) {
  const int m = static_cast<int>(x0.size());
  const double f0 = f(x0);
  auto stencil = [&](double s, Vec& grad, Mat& hess) {
    grad = Vec::Zero(m);
    hess = Mat::Zero(m, m);
    std::vector<double> fp(m), fm(m);
    for (int i = 0; i < m; ++i) {
      Vec xp = x0, xm = x0;
      xp(i) += s;
      xm(i) -= s;
      fp[i] = f(xp);
      fm[i] = f(xm);
      grad(i) = (fp[i] - fm[i]) / (2.0 * s);
      hess(i, i) = (fp[i] - 2.0 * f0 + fm[i]) / (s * s);
    }
    for (int i = 0; i < m; ++i)
      for (int j = i + 1; j < m; ++j) {
        Vec a = x0, b = x0, c = x0, d = x0;
        a(i) += s, a(j) += s;
        b(i) += s, b(j) -= s;
        c(i) -= s, c(j) += s;
        d(i) -= s, d(j) -= s;
        hess(i, j) = hess(j, i) = (f(a) - f(b) - f(c) + f(d)) / (4.0 * s * s);
      }
  };
  Vec g1, g2;
  Mat H1, H2;
  stencil(h, g1, H1);
  stencil(0.5 * h, g2, H2);
  return Jet2{x0, f0, (4.0 * g2 - g1) / 3.0, SymMatrix::from((4.0 * H2 - H1) / 3.0, 1e-9)};
}

}  // namespace

// ---------------------------------------------------------------- models

ModelSpacetime ModelSpacetime::minkowski(int n) {
  if (n < 2) throw Error(ErrorKind::InvalidArgument, "minkowski needs n >= 2");
  FiberMetric flat;
  flat.kind = FiberKind::Flat;
  flat.dim = n - 1;
  return ModelSpacetime(ModelKind::Minkowski, n, flat);
}

ModelSpacetime ModelSpacetime::strip(const FiberMetric& fiber) {
  if (fiber.dim < 1) throw Error(ErrorKind::InvalidArgument, "strip fiber dimension must be >= 1");
  return ModelSpacetime(ModelKind::Strip, fiber.dim + 1, fiber);
}

ModelSpacetime ModelSpacetime::parse(const std::string& declaration) {
  Declaration d(declaration);
  if (d.name() == "minkowski") {
    const int n = d.take_int("n", 3);
    d.finish();
    if (n < 2) throw Error(ErrorKind::Config, "minkowski needs n >= 2");
    return minkowski(n);
  }
  if (d.name() == "strip" || d.name() == "ads-strip") {
    const bool ads = d.name() == "ads-strip";
    FiberMetric f;
    f.kind = fiber_kind_from_string(d.take("fiber", ads ? "hyperbolic" : "flat"));
    f.dim = d.take_int("dim", ads ? 2 : 1);
    f.amplitude = d.take_double("amplitude", 0.05);
    d.finish();
    if (f.dim < 1) throw Error(ErrorKind::Config, "fiber dim must be >= 1");
    return strip(f);
  }
  throw Error(ErrorKind::Config, "unknown model '" + d.name() + "' (expected minkowski, strip or ads-strip)",
              {{"declaration", declaration}});
}

WarpedProduct ModelSpacetime::warped() const {
  WarpedProduct w;
  w.fiber = fiber_;
  w.warp = kind_ == ModelKind::Strip ? WarpKind::Cosine : WarpKind::Unit;
  return w;
}

MetricField ModelSpacetime::field() const {
  return kind_ == ModelKind::Minkowski ? MetricField::minkowski(n_) : MetricField::warped(warped());
}

MetricChart ModelSpacetime::chart() const {
  return kind_ == ModelKind::Minkowski ? MetricChart::minkowski(n_) : MetricChart::warped(warped());
}

std::string ModelSpacetime::describe() const {
  if (kind_ == ModelKind::Minkowski) return "minkowski n=" + std::to_string(n_);
  return "strip " + warped().describe();
}

bool ModelSpacetime::contains(const Vec& X) const {
  if (X.size() != n_ || !X.allFinite()) return false;
  if (kind_ == ModelKind::Minkowski) return true;
  return std::abs(time_of(X)) < kHalfPi && fiber_.contains(spatial_part(X));
}

double ModelSpacetime::spatial_distance(const Vec& p, const Vec& q) const {
  if (!contains(p) || !contains(q)) {
    throw Error(ErrorKind::Domain, "point outside the model", {{"p", to_json(p)}, {"q", to_json(q)}});
  }
  if (kind_ == ModelKind::Minkowski) return (spatial_part(p) - spatial_part(q)).norm();
  return fiber_.distance(spatial_part(p), spatial_part(q));
}

double ModelSpacetime::conformal_time(double t) const {
  return kind_ == ModelKind::Minkowski ? t : std::asinh(std::tan(t));
}

bool ModelSpacetime::chronological(const Vec& p, const Vec& q) const {
  const double du = conformal_time(time_of(q)) - conformal_time(time_of(p));
  return du > 0.0 && du > spatial_distance(p, q);
}

// -------------------------------------------------------------- distance

double strip_distance(double t1, double t2, double rho) {
  if (!(std::abs(t1) < kHalfPi && std::abs(t2) < kHalfPi)) {
    throw Error(ErrorKind::Domain, "strip times must lie in (-pi/2, pi/2)", {{"t1", t1}, {"t2", t2}});
  }
  if (!(rho >= 0.0)) throw Error(ErrorKind::InvalidArgument, "fiber distance must be nonnegative", {{"rho", rho}});
  if (t2 <= t1) return 0.0;
  if (rho == 0.0) return t2 - t1;
  const double u1 = std::asinh(std::tan(t1)), u2 = std::asinh(std::tan(t2));
  const double du = u2 - u1;
  if (rho >= du) return 0.0;

  // Nodes in u with sech^2 precomputed; panels of width <= 1 keep the
  // poles of the integrands (at imaginary distance ~pi/2) harmless.
  const int panels = std::max(2, static_cast<int>(std::ceil(du)));
  const QuadratureRule ref = gauss_legendre(20, 0.0, 1.0);
  const double w = du / panels;
  std::vector<double> sech2, weight;
  sech2.reserve(panels * ref.nodes.size());
  for (int p = 0; p < panels; ++p)
    for (std::size_t k = 0; k < ref.nodes.size(); ++k) {
      const double c = 1.0 / std::cosh(u1 + w * (p + ref.nodes[k]));
      sech2.push_back(c * c);
      weight.push_back(w * ref.weights[k]);
    }
  // With L = tan(theta): ds/du = sin / sqrt(sin^2 + cos^2 sech^2), dtau/du = cos sech^2 / sqrt(...).
  auto delta_s = [&](double th) {
    const double s = std::sin(th), c = std::cos(th);
    double acc = 0.0;
    for (std::size_t k = 0; k < sech2.size(); ++k) acc += weight[k] * s / std::sqrt(s * s + c * c * sech2[k]);
    return acc - rho;
  };
  const double theta = solve_bracketed(delta_s, 0.0, kHalfPi, -rho, du - rho, "strip distance");
  const double s = std::sin(theta), c = std::cos(theta);
  double tau = 0.0;
  for (std::size_t k = 0; k < sech2.size(); ++k) tau += weight[k] * c * sech2[k] / std::sqrt(s * s + c * c * sech2[k]);
  return tau;
}

double anti_de_sitter_distance(double t1, double t2, double rho) {
  if (t2 <= t1) return 0.0;
  const double du = std::asinh(std::tan(t2)) - std::asinh(std::tan(t1));
  if (rho >= du) return 0.0;
  const double c = std::sin(t1) * std::sin(t2) + std::cos(t1) * std::cos(t2) * std::cosh(rho);
  return std::acos(std::clamp(c, -1.0, 1.0));
}

double lorentz_distance(const ModelSpacetime& model, const Vec& p, const Vec& q) {
  const double rho = model.spatial_distance(p, q);
  const double t1 = time_of(p), t2 = time_of(q);
  if (model.kind() == ModelKind::Minkowski) {
    const double dt = t2 - t1;
    if (!(dt > rho)) return 0.0;
    return std::sqrt((dt - rho) * (dt + rho));
  }
  return strip_distance(t1, t2, rho);
}

// ------------------------------------------------------------- lines

Vec TimelikeGeodesic::at(double s) const { return make_point(fiber_point, s); }

nlohmann::json TimelikeGeodesic::to_json() const {
  return {{"fiber_point", maxlab::to_json(fiber_point)}, {"s_min", s_min}, {"s_max", s_max}, {"arclength", arclength}};
}

TimelikeGeodesic parse_line(const ModelSpacetime& model, const std::string& spec) {
  TimelikeGeodesic line;
  line.fiber_point = Vec::Zero(model.fiber_dim());
  if (spec != "center") {
    if (spec.rfind("s=", 0) != 0) {
      throw Error(ErrorKind::Config, "line must be 'center' or 's=<c1>,<c2>,...', got '" + spec + "'");
    }
    std::stringstream ss(spec.substr(2));
    std::string tok;
    std::vector<double> c;
    while (std::getline(ss, tok, ',')) {
      try {
        c.push_back(std::stod(tok));
      } catch (const std::exception&) {
        throw Error(ErrorKind::Config, "bad line coordinate '" + tok + "'");
      }
    }
    if (static_cast<int>(c.size()) != model.fiber_dim()) {
      throw Error(ErrorKind::Config, "line point needs " + std::to_string(model.fiber_dim()) + " coordinates");
    }
    line.fiber_point = Eigen::Map<Vec>(c.data(), static_cast<Eigen::Index>(c.size()));
  }
  if (model.kind() == ModelKind::Strip) {
    if (!model.fiber().contains(line.fiber_point)) throw Error(ErrorKind::Config, "line point outside the fiber");
    line.s_min = -kHalfPi;
    line.s_max = kHalfPi;
  } else {
    line.s_min = -std::numeric_limits<double>::infinity();
    line.s_max = std::numeric_limits<double>::infinity();
  }
  return line;
}

Report check_unit_speed(const ModelSpacetime& model, const TimelikeGeodesic& line, int samples) {
  Report rep;
  rep.check = "unit-speed";
  const MetricField g = model.field();
  const double lo = std::max(line.s_min, -1.4), hi = std::min(line.s_max, 1.4);
  double worst = 0.0;
  for (int k = 0; k < samples; ++k) {
    const double s = lo + (hi - lo) * (k + 0.5) / samples;
    const double h = 1e-5;
    const Vec v = (line.at(s + h) - line.at(s - h)) / (2.0 * h);
    worst = std::max(worst, std::abs(v.dot(g.g(line.at(s)) * v) + 1.0));
  }
  rep.residual = {{"max_deviation", worst}};
  if (line.arclength && worst > 1e-8) {
    rep.verdict = Verdict::ConclusionFailure;
    rep.message = "line is not unit speed";
  }
  return rep;
}

// ------------------------------------------------------------ Busemann

nlohmann::json BusemannValue::to_json() const {
  return {{"value", value}, {"r", r}, {"b_r", b_r}, {"monotone", monotone},
          {"max_increase", max_increase}, {"accelerated", accelerated}};
}

BusemannEvaluator::BusemannEvaluator(ModelSpacetime model, TimelikeGeodesic line, int k_max, double monotone_tol)
    : model_(std::move(model)), line_(std::move(line)), k_max_(k_max), tol_(monotone_tol) {
  if (k_max < 2) throw Error(ErrorKind::InvalidArgument, "Busemann schedule needs k_max >= 2");
  if (line_.fiber_point.size() != model_.fiber_dim()) throw Error(ErrorKind::Dimension, "line lives in another model");
}

std::vector<double> BusemannEvaluator::schedule(const Vec& x) const {
  std::vector<double> r;
  if (model_.kind() == ModelKind::Strip) {
    for (int k = 0; k <= k_max_; ++k) r.push_back(kHalfPi - (M_PI / 4.0) * std::ldexp(1.0, -k));
  } else {
    const double R0 = 1.0 + std::abs(time_of(x)) + spatial_part(x).norm();
    for (int k = 0; k <= k_max_; ++k) r.push_back(R0 * std::ldexp(1.0, k));
  }
  return r;
}

BusemannValue BusemannEvaluator::run(const Vec& x, bool future) const {
  if (!model_.contains(x)) throw Error(ErrorKind::Domain, "point outside the model", {{"x", to_json(x)}});
  BusemannValue out;
  const double t = time_of(x);
  for (double r : schedule(x)) {
    const Vec target = line_.at(future ? r : -r);
    const Vec& from = future ? x : target;
    const Vec& to = future ? target : x;
    if (!model_.chronological(from, to)) continue;
    double b;
    if (model_.kind() == ModelKind::Minkowski) {
      // r - sqrt(T^2 - rho^2) = +-t + rho^2 / (T + d) with T = r -+ t, no cancellation.
      const double rho = model_.spatial_distance(x, target);
      const double T = future ? r - t : r + t;
      const double d = std::sqrt((T - rho) * (T + rho));
      b = (future ? t : -t) + rho * rho / (T + d);
    } else {
      b = r - lorentz_distance(model_, from, to);
    }
    out.r.push_back(r);
    out.b_r.push_back(b);
  }
  if (out.b_r.empty()) {
    throw Error(ErrorKind::Numerical, "point is not chronologically related to the line along the schedule",
                {{"x", to_json(x)}});
  }
  for (std::size_t k = 1; k < out.b_r.size(); ++k) {
    const double inc = out.b_r[k] - out.b_r[k - 1];
    out.max_increase = std::max(out.max_increase, inc);
    if (inc > tol_) out.monotone = false;
  }
  out.value = out.b_r.back();
  const std::size_t m = out.b_r.size();
  if (m >= 3) {
    const double d0 = out.b_r[m - 2] - out.b_r[m - 3], d1 = out.b_r[m - 1] - out.b_r[m - 2];
    if (d0 != 0.0) {
      const double q = d1 / d0;
      // Accept only a geometric tail; otherwise the last value stands.
      if (q > 0.0 && q < 0.9) {
        const double corr = d1 * q / (1.0 - q);
        if (std::abs(corr) <= 10.0 * std::abs(d1)) {
          out.value += corr;
          out.accelerated = true;
        }
      }
    }
  }
  return out;
}

BusemannValue BusemannEvaluator::plus(const Vec& x) const { return run(x, true); }
BusemannValue BusemannEvaluator::minus(const Vec& x) const { return run(x, false); }

double busemann(const ModelSpacetime& model, const TimelikeGeodesic& line, const Vec& x) {
  const BusemannValue v = BusemannEvaluator(model, line).plus(x);
  if (!v.monotone) {
    throw Error(ErrorKind::Numerical, "Busemann tail is not monotone", {{"x", to_json(x)}, {"max_increase", v.max_increase}});
  }
  return v.value;
}

Report busemann_inequality_suite(const BusemannEvaluator& eval, const std::vector<Vec>& points,
                                 const BusemannSuiteOptions& opt) {
  Report rep;
  rep.check = "busemann-inequalities";
  rep.params = {{"model", eval.model().describe()}, {"line", eval.line().to_json()}, {"points", points.size()},
                {"max_pairs", opt.max_pairs}, {"seed", opt.seed}, {"tol", opt.tol}, {"equality_tol", opt.equality_tol}};
  const std::size_t N = points.size();
  std::vector<double> bp(N), bm(N);
  bool monotone = true;
  double worst_sum = 0.0, worst_eq = 0.0, max_increase = 0.0;
  std::size_t worst_sum_at = 0, worst_eq_at = 0, mono_at = 0;
  for (std::size_t i = 0; i < N; ++i) {
    const BusemannValue p = eval.plus(points[i]);
    const BusemannValue m = eval.minus(points[i]);
    bp[i] = p.value;
    bm[i] = m.value;
    if (!(p.monotone && m.monotone) && monotone) {
      monotone = false;
      mono_at = i;
    }
    max_increase = std::max({max_increase, p.max_increase, m.max_increase});
    const double s = bp[i] + bm[i];
    if (-s > worst_sum) {
      worst_sum = -s;
      worst_sum_at = i;
    }
    if (std::abs(s) > worst_eq) {
      worst_eq = std::abs(s);
      worst_eq_at = i;
    }
  }

  std::mt19937_64 rng(opt.seed);
  std::uniform_int_distribution<std::size_t> pick(0, N == 0 ? 0 : N - 1);
  int checked = 0, violations = 0;
  double worst_lip = 0.0;
  nlohmann::json lip_witness = nullptr;
  const bool exhaustive = N * N <= static_cast<std::size_t>(opt.max_pairs);
  const std::size_t total = exhaustive ? N * N : static_cast<std::size_t>(opt.max_pairs);
  for (std::size_t k = 0; k < total && N > 1; ++k) {
    const std::size_t i = exhaustive ? k / N : pick(rng);
    const std::size_t j = exhaustive ? k % N : pick(rng);
    if (i == j || !eval.model().chronological(points[i], points[j])) continue;
    const double d = lorentz_distance(eval.model(), points[i], points[j]);
    ++checked;
    const double v1 = bp[i] + d - bp[j];  // b+(q) >= b+(p) + d(p,q)
    const double v2 = bm[j] + d - bm[i];  // b-(q) <= b-(p) - d(p,q)
    const double v = std::max(v1, v2);
    if (v > opt.tol) ++violations;
    if (v > worst_lip) {
      worst_lip = v;
      lip_witness = {{"p", to_json(points[i])}, {"q", to_json(points[j])}, {"d", d}};
    }
  }
  rep.residual = {{"pairs_checked", checked},
                  {"lipschitz_violations", violations},
                  {"worst_lipschitz_excess", worst_lip},
                  {"worst_negative_sum", worst_sum},
                  {"max_abs_sum", worst_eq},
                  {"max_tail_increase", max_increase}};
  if (!monotone) {
    rep.verdict = Verdict::NumericalQuality;
    rep.message = "b_r is not monotone along the schedule";
    rep.witness = {{"point", to_json(points[mono_at])}};
  } else if (violations > 0) {
    rep.verdict = Verdict::ConclusionFailure;
    rep.message = "reverse Lipschitz inequality violated";
    rep.witness = lip_witness;
  } else if (worst_sum > opt.tol) {
    rep.verdict = Verdict::ConclusionFailure;
    rep.message = "b+ + b- < 0";
    rep.witness = {{"point", to_json(points[worst_sum_at])}};
  } else if (worst_eq > opt.equality_tol) {
    rep.verdict = Verdict::ConclusionFailure;
    rep.message = "b+ + b- != 0 on the splitting region";
    rep.witness = {{"point", to_json(points[worst_eq_at])}};
  }
  return rep;
}

// ------------------------------------------------------------ geodesics

std::vector<GeodesicPoint> integrate_geodesic(const MetricField& metric, const Vec& X0, const Vec& V0, double s_end,
                                              int steps) {
  if (steps < 1) throw Error(ErrorKind::InvalidArgument, "steps must be positive");
  const double h = s_end / steps;
  auto acc = [&](const Vec& X, const Vec& V) { return geodesic_acceleration(christoffels_from(metric.g(X), metric.d1(X)), V); };
  std::vector<GeodesicPoint> path{{X0, V0}};
  Vec X = X0, V = V0;
  for (int k = 0; k < steps; ++k) {
    const Vec k1x = V, k1v = acc(X, V);
    const Vec k2x = V + 0.5 * h * k1v, k2v = acc(X + 0.5 * h * k1x, V + 0.5 * h * k1v);
    const Vec k3x = V + 0.5 * h * k2v, k3v = acc(X + 0.5 * h * k2x, V + 0.5 * h * k2v);
    const Vec k4x = V + h * k3v, k4v = acc(X + h * k3x, V + h * k3v);
    X += h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
    V += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    if (!X.allFinite()) throw Error(ErrorKind::Numerical, "geodesic integration diverged", {{"step", k}});
    path.push_back({X, V});
  }
  return path;
}

JacobiSolution integrate_jacobi(const MetricField& metric, const Vec& X0, const Vec& V0, const Mat& J0, const Mat& W0,
                                double s_end, int steps) {
  const int n = metric.n();
  const int k = static_cast<int>(J0.cols());
  if (steps < 1) throw Error(ErrorKind::InvalidArgument, "steps must be positive");
  if (J0.rows() != n || W0.rows() != n || W0.cols() != k) throw Error(ErrorKind::Dimension, "Jacobi data has wrong shape");
  struct State {
    Vec X, V;
    Mat J, W;
  };
  auto deriv = [&](const State& s) {
    const Christoffel G = christoffels_from(metric.g(s.X), metric.d1(s.X));
    const auto dG = christoffel_derivatives(metric, s.X);
    State d{s.V, geodesic_acceleration(G, s.V), s.W, Mat::Zero(n, k)};
    for (int col = 0; col < k; ++col)
      for (int a = 0; a < n; ++a) {
        double v = 0.0;
        for (int b = 0; b < n; ++b)
          for (int c = 0; c < n; ++c) {
            double dg = 0.0;
            for (int e = 0; e < n; ++e) dg += dG[e](a, b, c) * s.J(e, col);
            v -= dg * s.V(b) * s.V(c) + 2.0 * G(a, b, c) * s.V(b) * s.W(c, col);
          }
        d.W(a, col) = v;
      }
    return d;
  };
  auto axpy = [](const State& s, double h, const State& d) {
    return State{s.X + h * d.X, s.V + h * d.V, s.J + h * d.J, s.W + h * d.W};
  };
  const double h = s_end / steps;
  State s{X0, V0, J0, W0};
  for (int step = 0; step < steps; ++step) {
    const State k1 = deriv(s);
    const State k2 = deriv(axpy(s, 0.5 * h, k1));
    const State k3 = deriv(axpy(s, 0.5 * h, k2));
    const State k4 = deriv(axpy(s, h, k3));
    s.X += h / 6.0 * (k1.X + 2.0 * k2.X + 2.0 * k3.X + k4.X);
    s.V += h / 6.0 * (k1.V + 2.0 * k2.V + 2.0 * k3.V + k4.V);
    s.J += h / 6.0 * (k1.J + 2.0 * k2.J + 2.0 * k3.J + k4.J);
    s.W += h / 6.0 * (k1.W + 2.0 * k2.W + 2.0 * k3.W + k4.W);
    if (!s.X.allFinite() || !s.J.allFinite()) throw Error(ErrorKind::Numerical, "Jacobi integration diverged");
  }
  return JacobiSolution{{s.X, s.V}, s.J};
}

// -------------------------------------------------------------- spheres

nlohmann::json SphereResult::to_json() const {
  return {{"base", maxlab::to_json(base)},
          {"eta", maxlab::to_json(eta)},
          {"r", r},
          {"centre", maxlab::to_json(centre)},
          {"jet", maxlab::to_json(jet)},
          {"geometry", geometry.to_json()},
          {"H", geometry.H},
          {"expected_H", expected_H},
          {"deviation", geometry.H - expected_H}};
}

double sphere_graph(const ModelSpacetime& model, const Vec& centre, double r, const Vec& x, double t_guess) {
  const Vec xc = spatial_part(centre);
  const double tc = time_of(centre);
  const Vec probe = make_point(x, std::min(t_guess, tc));
  const double rho = model.spatial_distance(probe, centre);
  // Latest chronological time below the centre: u = u_c - rho.
  double t_hi;
  if (model.kind() == ModelKind::Minkowski) {
    t_hi = tc - rho;
  } else {
    t_hi = std::atan(std::sinh(model.conformal_time(tc) - rho));
  }
  auto F = [&](double t) { return lorentz_distance(model, make_point(x, t), centre) - r; };
  const double floor = model.kind() == ModelKind::Strip ? -kHalfPi + 1e-12 : -std::numeric_limits<double>::infinity();
  double t_lo = std::min(t_guess, t_hi) - 0.05;
  double step = 0.05;
  double f_lo = F(std::max(t_lo, floor));
  while (f_lo <= 0.0) {
    if (t_lo <= floor) throw Error(ErrorKind::Numerical, "sphere graph: no bracket", {{"x", to_json(x)}});
    step *= 2.0;
    t_lo = std::max(t_lo - step, floor);
    f_lo = F(t_lo);
  }
  return solve_bracketed(F, t_lo, t_hi, f_lo, -r, "sphere graph");
}

SphereResult geodesic_sphere(const ModelSpacetime& model, const Vec& base, const Vec& eta, double r, double h) {
  if (!model.contains(base)) throw Error(ErrorKind::Domain, "base point outside the model", {{"base", to_json(base)}});
  if (eta.size() != model.n()) throw Error(ErrorKind::Dimension, "eta has wrong dimension");
  const MetricField g = model.field();
  const double norm = eta.dot(g.g(base) * eta);
  if (std::abs(norm + 1.0) > 1e-10 || time_of(eta) <= 0.0) {
    throw Error(ErrorKind::InvalidArgument, "eta must be a future unit timelike vector", {{"g(eta,eta)", norm}});
  }
  if (!(r > 0.0 && (model.kind() == ModelKind::Minkowski || r < kHalfPi))) {
    throw Error(ErrorKind::Domain, "sphere radius out of range", {{"r", r}});
  }
  SphereResult out;
  out.base = base;
  out.eta = eta;
  out.r = r;
  if (model.kind() == ModelKind::Minkowski) {
    out.centre = base + r * eta;
    out.expected_H = -1.0 / r;
  } else {
    // Near t = +-pi/2 the metric degenerates: the chart error may surface as a
    // Domain error (fiber) or a Numerical one (singular metric).
    try {
      const auto path = integrate_geodesic(g, base, eta, r, std::max(400, static_cast<int>(4000 * r)));
      const bool inside = std::all_of(path.begin(), path.end(), [&](const GeodesicPoint& q) { return model.contains(q.X); });
      out.centre = inside ? path.back().X : Vec();
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Domain && e.kind() != ErrorKind::Numerical) throw;
      out.centre = Vec();
    }
    if (out.centre.size() == 0 || !model.contains(out.centre)) {
      throw Error(ErrorKind::Domain, "the geodesic s -> exp(s eta) leaves the chart before s = r", {{"r", r}});
    }
    out.expected_H = -1.0 / std::tan(r);
  }
  const double t0 = time_of(base);
  auto f = [&](const Vec& x) { return sphere_graph(model, out.centre, r, x, t0); };
  out.jet = fd_jet(f, spatial_part(base), h);
  out.geometry = graph_geometry(model.chart(), out.jet);
  return out;
}

// ------------------------------------------------------------ splitting

Report splitting_map_check(const ModelSpacetime& model, const SplittingOptions& opt) {
  Report rep;
  rep.check = "splitting-pullback";
  if (model.kind() != ModelKind::Strip) throw Error(ErrorKind::InvalidArgument, "splitting check runs on the strip");
  const int k = model.fiber_dim();
  const int n = model.n();
  if (opt.y.size() < 3 || opt.t.size() < 3) throw Error(ErrorKind::InvalidArgument, "splitting grid needs >= 3 nodes per axis");
  rep.params = {{"model", model.describe()}, {"y", opt.y}, {"t", opt.t}, {"cubic", opt.cubic},
                {"steps_per_unit", opt.steps_per_unit}, {"tol", opt.tol}};
  const MetricField g = model.field();
  const FiberMetric& N = model.fiber();

  auto slice = [&](const Vec& y) { return Vec(y + opt.cubic * y.cwiseProduct(y).cwiseProduct(y)); };
  auto slice_jac = [&](const Vec& y) { return Mat((Vec::Ones(k) + 3.0 * opt.cubic * y.cwiseProduct(y)).asDiagonal()); };
  auto steps_for = [&](double t) { return std::max(8, static_cast<int>(std::ceil(std::abs(t) * opt.steps_per_unit))); };
  auto phi = [&](const Vec& y, double t) -> Vec {
    const Vec X0 = make_point(slice(y), 0.0);
    if (t == 0.0) return X0;
    return integrate_geodesic(g, X0, Vec::Unit(n, n - 1), t, steps_for(t)).back().X;
  };
  auto expected = [&](const Vec& y, double t) {
    Mat E = Mat::Zero(n, n);
    const Mat D = slice_jac(y);
    E.topLeftCorner(k, k) = std::cos(t) * std::cos(t) * D.transpose() * N.metric(slice(y)).matrix() * D;
    E(n - 1, n - 1) = -1.0;
    return E;
  };

  // Grid points: tensor grid of opt.y on every fiber axis, times opt.t.
  std::vector<Vec> ys;
  {
    std::vector<int> idx(k, 0);
    const int ny = static_cast<int>(opt.y.size());
    for (;;) {
      Vec y(k);
      for (int a = 0; a < k; ++a) y(a) = opt.y[idx[a]];
      ys.push_back(y);
      int a = k - 1;
      while (a >= 0 && ++idx[a] == ny) idx[a--] = 0;
      if (a < 0) break;
    }
  }

  double analytic = 0.0, t0_err = 0.0;
  nlohmann::json analytic_at = nullptr;
  std::vector<Vec> images;
  for (const Vec& y : ys)
    for (double t : opt.t) {
      const Vec X0 = make_point(slice(y), 0.0);
      Mat J0 = Mat::Zero(n, k);
      J0.topRows(k) = slice_jac(y);
      Mat D(n, n);
      Vec X;
      if (t == 0.0) {
        X = X0;
        D.leftCols(k) = J0;
        D.col(n - 1) = Vec::Unit(n, n - 1);
      } else {
        const JacobiSolution js = integrate_jacobi(g, X0, Vec::Unit(n, n - 1), J0, Mat::Zero(n, k), t, steps_for(t));
        X = js.end.X;
        D.leftCols(k) = js.J;
        D.col(n - 1) = js.end.V;
      }
      images.push_back(X);
      const double err = (D.transpose() * g.g(X) * D - expected(y, t)).cwiseAbs().maxCoeff();
      if (t == 0.0) t0_err = std::max(t0_err, err);
      if (err > analytic) {
        analytic = err;
        analytic_at = {{"y", to_json(y)}, {"t", t}};
      }
    }

  // FD pullback at interior nodes with steps (hy, ht) and (hy/2, ht/2).
  auto spacing = [](const std::vector<double>& v) {
    double h = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < v.size(); ++i) h = std::min(h, v[i] - v[i - 1]);
    return h;
  };
  const double hy = spacing(opt.y), ht = spacing(opt.t);
  auto fd_error = [&](double sy, double st) {
    double worst = 0.0;
    for (const Vec& y : ys)
      for (std::size_t j = 1; j + 1 < opt.t.size(); ++j) {
        const double t = opt.t[j];
        Mat D(n, n);
        for (int a = 0; a < k; ++a) {
          Vec yp = y, ym = y;
          yp(a) += sy;
          ym(a) -= sy;
          D.col(a) = (phi(yp, t) - phi(ym, t)) / (2.0 * sy);
        }
        D.col(n - 1) = (phi(y, t + st) - phi(y, t - st)) / (2.0 * st);
        worst = std::max(worst, (D.transpose() * g.g(phi(y, t)) * D - expected(y, t)).cwiseAbs().maxCoeff());
      }
    return worst;
  };
  const double e1 = fd_error(hy, ht), e2 = fd_error(0.5 * hy, 0.5 * ht);
  const bool fd_exact = e1 < 1e-11;
  const double order = fd_exact ? 2.0 : std::log2(e1 / std::max(e2, 1e-300));

  double min_sep = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < images.size(); ++i)
    for (std::size_t j = i + 1; j < images.size(); ++j) min_sep = std::min(min_sep, (images[i] - images[j]).norm());
  const double sep_tol = 1e-3 * std::min(hy, ht);

  rep.residual = {{"analytic_max_error", analytic}, {"t0_max_error", t0_err},     {"fd_error_h", e1},
                  {"fd_error_h_half", e2},          {"fd_observed_order", order}, {"min_image_separation", min_sep},
                  {"separation_tol", sep_tol}};
  rep.witness = {{"analytic_worst", analytic_at}};
  std::string why;
  if (analytic > opt.tol) why = "analytic pullback deviates from -dt^2 + cos^2(t) g_N";
  else if (t0_err > 1e-12) why = "pullback on the slice t = 0 is not the identity";
  else if (!fd_exact && order < 1.8) why = "FD pullback error does not refine at second order";
  else if (!(min_sep > sep_tol)) why = "normal exponential map is not injective on the grid";
  if (!why.empty()) {
    rep.verdict = Verdict::ConclusionFailure;
    rep.message = why;
  }
  return rep;
}

// ----------------------------------------------------- cosmological time

double cosmological_time(const ModelSpacetime& model, const Vec& q) {
  if (model.kind() != ModelKind::Strip) {
    throw Error(ErrorKind::Domain, "cosmological time is infinite in Minkowski space");
  }
  if (!model.contains(q)) throw Error(ErrorKind::Domain, "point outside the strip", {{"q", to_json(q)}});
  return time_of(q) + kHalfPi;
}

double cosmological_time_estimate(const ModelSpacetime& model, const Vec& q, int time_samples, int fiber_samples,
                                  double t_floor) {
  if (model.kind() != ModelKind::Strip) throw Error(ErrorKind::Domain, "cosmological time is infinite in Minkowski space");
  if (time_samples < 2 || fiber_samples < 1) throw Error(ErrorKind::InvalidArgument, "need >= 2 time samples");
  const Vec xq = spatial_part(q);
  const double tq = time_of(q);
  const double lo = -kHalfPi + t_floor;
  double best = 0.0;
  for (int i = 0; i < time_samples; ++i) {
    // Clustered toward the past boundary, which is where the supremum lives.
    const double s = static_cast<double>(i) / (time_samples - 1);
    const double tp = lo + (tq - lo) * s * s;
    for (int a = 0; a < model.fiber_dim(); ++a)
      for (int j = -fiber_samples; j <= fiber_samples; ++j) {
        Vec xp = xq;
        xp(a) += 0.1 * j / fiber_samples;
        if (!model.fiber().contains(xp)) continue;
        best = std::max(best, lorentz_distance(model, make_point(xp, tp), q));
      }
  }
  return best;
}

}  // namespace maxlab
