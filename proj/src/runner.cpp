#include "maxlab/runner.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>

#include "maxlab/curvature.hpp"
#include "maxlab/declaration.hpp"
#include "maxlab/error.hpp"
#include "maxlab/lorgraph.hpp"
#include "maxlab/modelspace.hpp"
#include "maxlab/principle.hpp"

namespace maxlab {

namespace {

using json = nlohmann::json;

Error field_error(const std::string& key, const std::string& what) {
  return Error(ErrorKind::Config, "field '" + key + "': " + what, {{"field", key}});
}

double parse_number(const std::string& key, const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw field_error(key, "expected a number, got '" + s + "'");
  }
  if (used != s.size()) throw field_error(key, "expected a number, got '" + s + "'");
  return v;
}

// Rational text such as "1/3" or "0.333" as a double.
double rational_value(const std::string& key, const std::string& s) {
  const auto slash = s.find('/');
  if (slash == std::string::npos) return parse_number(key, s);
  const double den = parse_number(key, s.substr(slash + 1));
  if (den == 0.0) throw field_error(key, "zero denominator");
  return parse_number(key, s.substr(0, slash)) / den;
}

// Typed access to request fields with defaults, echoing what was used and
// rejecting leftovers.
class Params {
 public:
  explicit Params(const json& j) : j_(j.is_null() ? json::object() : j) {
    if (!j_.is_object()) throw Error(ErrorKind::Config, "request must be a JSON object");
  }

  bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }

  const json& raw(const std::string& key) {
    used_.insert(key);
    return j_.at(key);
  }

  double num(const std::string& key, double fallback) {
    const double v = has(key) ? to_num(key, raw(key)) : fallback;
    echo_[key] = v;
    return v;
  }

  int integer(const std::string& key, int fallback) {
    const double v = num(key, fallback);
    if (v != std::floor(v) || std::abs(v) > 1e9) throw field_error(key, "expected an integer");
    echo_[key] = static_cast<int>(v);
    return static_cast<int>(v);
  }

  std::string str(const std::string& key, const std::string& fallback) {
    std::string v = fallback;
    if (has(key)) {
      const json& r = raw(key);
      if (r.is_string()) v = r.get<std::string>();
      else if (r.is_number()) v = r.dump();
      else throw field_error(key, "expected a string");
    }
    echo_[key] = v;
    return v;
  }

  bool flag(const std::string& key, bool fallback) {
    bool v = fallback;
    if (has(key)) {
      const json& r = raw(key);
      if (r.is_boolean()) v = r.get<bool>();
      else if (r.is_string() && (r == "true" || r == "false")) v = r == "true";
      else throw field_error(key, "expected true or false");
    }
    echo_[key] = v;
    return v;
  }

  // A list of numbers, given as an array or a comma-separated string.
  std::vector<double> nums(const std::string& key, const std::vector<double>& fallback) {
    std::vector<double> v = fallback;
    if (has(key)) {
      v.clear();
      const json& r = raw(key);
      if (r.is_array()) {
        for (const json& e : r) v.push_back(to_num(key, e));
      } else if (r.is_string()) {
        std::stringstream ss(r.get<std::string>());
        std::string tok;
        while (std::getline(ss, tok, ',')) v.push_back(rational_value(key, trim(tok)));
      } else if (r.is_number()) {
        v.push_back(r.get<double>());
      } else {
        throw field_error(key, "expected a list of numbers");
      }
    }
    echo_[key] = v;
    return v;
  }

  Vec vec(const std::string& key, const Vec& fallback, int dim) {
    std::vector<double> d(fallback.data(), fallback.data() + fallback.size());
    d = nums(key, d);
    if (static_cast<int>(d.size()) != dim) {
      throw field_error(key, "expected " + std::to_string(dim) + " components, got " + std::to_string(d.size()));
    }
    return Eigen::Map<Vec>(d.data(), dim);
  }

  // [lo, hi, count] -> count points, symmetric in lo and hi.
  std::vector<double> linspace(const std::string& key, const std::vector<double>& fallback) {
    const std::vector<double> s = nums(key, fallback);
    if (s.size() != 3 || s[2] < 2 || s[2] != std::floor(s[2]) || !(s[1] > s[0])) {
      throw field_error(key, "expected [lo, hi, count] with lo < hi and count >= 2");
    }
    const int n = static_cast<int>(s[2]);
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) {
      const double u = static_cast<double>(i) / (n - 1);
      out[i] = s[0] * (1.0 - u) + s[1] * u;
    }
    return out;
  }

  void note(const std::string& key, json v) { echo_[key] = std::move(v); }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!used_.count(it.key()) && !it.value().is_null()) throw field_error(it.key(), "unknown parameter");
    }
  }

  const json& echo() const { return echo_; }

 private:
  static std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t");
    const auto b = s.find_last_not_of(" \t");
    return a == std::string::npos ? "" : s.substr(a, b - a + 1);
  }

  static double to_num(const std::string& key, const json& r) {
    if (r.is_number()) return r.get<double>();
    if (r.is_string()) return rational_value(key, r.get<std::string>());
    throw field_error(key, "expected a number");
  }

  json j_;
  std::set<std::string> used_;
  json echo_ = json::object();
};

struct Outcome {
  std::vector<Report> checks;
  json ledger = nullptr;
  json data = json::object();
  std::string table;
};

std::string csv_number(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

// Points from an inline array of coordinate lists or from the nodes of a grid CSV.
std::vector<Vec> take_points(Params& p, const std::string& key, int dim, const std::vector<Vec>& fallback) {
  if (!p.has(key)) {
    json echo = json::array();
    for (const Vec& v : fallback) echo.push_back(to_json(v));
    p.note(key, echo);
    return fallback;
  }
  const json& r = p.raw(key);
  std::vector<Vec> out;
  if (r.is_string()) {
    const std::string path = r.get<std::string>();
    const GridFunction g = GridFunction::load_csv(path);
    if (g.dims() != dim) throw field_error(key, "grid has " + std::to_string(g.dims()) + " axes, expected " + std::to_string(dim));
    for (std::size_t k = 0; k < g.size(); ++k) out.push_back(g.node(k));
    p.note(key, path);
    return out;
  }
  if (!r.is_array()) throw field_error(key, "expected a list of points or a grid CSV path");
  for (const json& e : r) {
    if (!e.is_array() || static_cast<int>(e.size()) != dim) {
      throw field_error(key, "each point needs " + std::to_string(dim) + " coordinates");
    }
    Vec v(dim);
    for (int a = 0; a < dim; ++a) {
      if (!e[a].is_number()) throw field_error(key, "coordinates must be numbers");
      v(a) = e[a].get<double>();
    }
    out.push_back(v);
  }
  p.note(key, r);
  return out;
}

template <class F>
auto config_guard(const std::string& key, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Config) throw Error(ErrorKind::Config, "field '" + key + "': " + e.what(), {{"field", key}});
    throw;
  }
}

Report make_check(std::string name, json params = json::object()) {
  Report r;
  r.check = std::move(name);
  r.params = std::move(params);
  return r;
}

Report fail(Report r, Verdict v, std::string message, json witness = json::object()) {
  r.verdict = v;
  r.message = std::move(message);
  r.witness = std::move(witness);
  return r;
}

// ---------------------------------------------------------------- constants

Outcome run_constants(Params& p, std::uint64_t) {
  const int m = p.integer("m", 2);
  const std::string ce = p.str("ce", "1");
  const std::string cs = p.str("cs", "0");
  const std::string r0 = p.str("r0", "1/3");
  std::optional<double> alpha;
  std::optional<std::string> alpha_text;
  if (p.has("alpha")) {
    alpha_text = p.str("alpha", "");
    alpha = rational_value("alpha", *alpha_text);
  }
  Outcome out;
  ConstantLedger L = derive_constants(m, rational_value("ce", ce), rational_value("cs", cs), rational_value("r0", r0), alpha);
  Report rep = make_check("constant-ledger");
  try {
    L.exact = derive_constants_exact(m, ce, cs, r0, alpha_text);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Config) throw;
    rep.message = std::string("exact ledger unavailable: ") + e.what();
  }
  out.ledger = L.to_json();
  out.checks.push_back(rep);
  return out;
}

// ---------------------------------------------------------- verify-operator

QuasiLinearOperator chart_operator(const MetricChart& chart, const std::string& kind) {
  const int m = chart.n() - 1;
  if (kind == "laplacian") return QuasiLinearOperator::laplacian(m);
  if (kind != "mean-curvature") throw field_error("operator", "expected mean-curvature or laplacian, got '" + kind + "'");
  return chart.name().rfind("minkowski", 0) == 0 ? flat_mean_curvature_operator(m) : chart_mean_curvature_operator(chart);
}

Outcome run_verify_operator(Params& p, std::uint64_t seed) {
  const std::string decl = p.str("chart", "minkowski n=3");
  const MetricChart chart = config_guard("chart", [&] { return MetricChart::parse(decl); });
  const int m = chart.n() - 1;
  QuasiLinearOperator op = chart_operator(chart, p.str("operator", "mean-curvature"));
  const double rho = p.num("rho", 0.5);
  const double bound = p.num("bound", 2.0);
  const Vec lo = p.vec("lower", Vec::Constant(m, -1.0), m);
  const Vec hi = p.vec("upper", Vec::Constant(m, 1.0), m);
  const int samples = p.integer("samples", 2000);
  const int pairs = p.integer("pairs", 200);
  const int order = p.integer("quadrature_order", 16);
  const double C_S = p.num("cs", 0.0);
  const double r0 = p.num("r0", 1.0 / 3.0);
  const double identity_tol = p.num("identity_tol", 1e-8);
  const int convexity_pairs = p.integer("convexity_pairs", 200);

  Outcome out;
  const AdmissibleSet set = admissible_set(chart, op, rho, bound, lo, hi, samples, seed);
  op.attach_region(set.region);
  const double C_E = std::max(1.0, set.certificate.required_constant());
  Report cert = make_check("ellipticity-certificate");
  cert.residual = set.to_json();
  if (!set.certificate.valid) cert = fail(cert, Verdict::ConclusionFailure, "sampled coefficients violate the bounds", set.certificate.witness);
  out.checks.push_back(cert);
  out.ledger = derive_constants(m, C_E, C_S, r0).to_json();

  std::mt19937_64 rng(seed ^ 0x5eedULL);
  const Vec mid = 0.5 * (lo + hi);
  auto draw = [&](const Vec& x) {
    return [&chart, rho, bound, x](std::mt19937_64& g) {
      const JetPoint q = sample_admissible(chart, rho, bound, x, x, 1, g).front();
      return std::make_pair(q.r, q.p);
    };
  };
  out.checks.push_back(check_fiber_convexity(*set.region, mid, draw(mid), convexity_pairs, rng));

  // Linearization identity and coefficient bounds on random admissible jet pairs.
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  auto random_hess = [&] {
    Mat h(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j <= i; ++j) h(i, j) = h(j, i) = unit(rng);
    return SymMatrix::from(h);
  };
  const std::vector<JetPoint> pts = sample_admissible(chart, rho, bound, lo, hi, 2 * pairs, rng);
  Report ident = make_check("linearization-identity", {{"quadrature_order", order}, {"tol", identity_tol}});
  std::vector<Report> bounds;
  double worst = 0.0, worst_refined = 0.0;
  int used = 0;
  json worst_at = nullptr;
  for (int k = 0; k < pairs; ++k) {
    const JetPoint& a = pts[2 * k];
    const JetPoint& b = pts[2 * k + 1];
    if (!set.region->contains(a.x, b.r, b.p)) continue;
    const Jet2 j0{a.x, a.r, a.p, random_hess()};
    const Jet2 j1{a.x, b.r, b.p, random_hess()};
    const Linearization lin = linearization_coefficients(op, j0, j1, order);
    const double res = std::abs(linearization_identity_residual(op, j0, j1, lin));
    ++used;
    if (res > identity_tol) {
      // Separates quadrature error (poles of W^-1 near the path) from a broken identity.
      const Linearization fine = linearization_coefficients(op, j0, j1, 2 * order);
      worst_refined = std::max(worst_refined, std::abs(linearization_identity_residual(op, j0, j1, fine)));
    }
    if (res > worst) {
      worst = res;
      worst_at = {{"jet0", to_json(j0)}, {"jet1", to_json(j1)}};
    }
    Report b_rep = coefficient_bounds_check(lin, C_E, j0.hess, j1.hess);
    if (!b_rep.passed()) bounds.push_back(b_rep);
  }
  ident.residual = {{"pairs", used}, {"max_abs_residual", worst}, {"max_abs_residual_doubled_order", worst_refined}};
  if (worst > identity_tol) {
    ident = worst_refined <= identity_tol
                ? fail(ident, Verdict::NumericalQuality, "quadrature order too low for this region", worst_at)
                : fail(ident, Verdict::ConclusionFailure, "difference identity residual above tolerance", worst_at);
  }
  out.checks.push_back(ident);
  Report cb = bounds.empty() ? make_check("coefficient-bounds") : combine("coefficient-bounds", {bounds.front()});
  cb.residual["pairs"] = used;
  cb.residual["failures"] = bounds.size();
  out.checks.push_back(cb);
  return out;
}

// ------------------------------------------------------------ max-principle

Outcome run_max_principle(Params& p, std::uint64_t seed) {
  const std::string name = p.str("instance", "plane-vs-hyperboloid");
  std::optional<MaxPrincipleInstance> inst;
  if (name == "plane-vs-hyperboloid") {
    inst = plane_vs_hyperboloid_instance(p.integer("nodes", 41), seed);
  } else if (name == "identical-hyperboloid") {
    inst = identical_hyperboloid_instance(p.integer("nodes", 41));
  } else if (name == "fabricated-strict-gap") {
    inst = fabricated_strict_gap_instance(p.integer("nodes", 21));
  } else if (name == "grid") {
    if (!p.has("u0") || !p.has("u1")) throw field_error("u0", "grid instances need u0 and u1 CSV paths");
    auto u0 = std::make_shared<GridFunction>(GridFunction::load_csv(p.str("u0", "")));
    auto u1 = std::make_shared<GridFunction>(GridFunction::load_csv(p.str("u1", "")));
    const int m = u0->dims();
    const std::string decl = p.str("chart", "minkowski n=" + std::to_string(m + 1));
    const MetricChart chart = config_guard("chart", [&] { return MetricChart::parse(decl); });
    if (chart.n() != m + 1) throw field_error("chart", "chart dimension does not match the grids");
    if (!p.has("ce")) throw field_error("ce", "grid instances need the ellipticity constant");
    inst = MaxPrincipleInstance{"grid",
                                chart_operator(chart, p.str("operator", "mean-curvature")),
                                *u0,
                                *u1,
                                grid_supplier(u0),
                                grid_supplier(u1),
                                p.num("ce", 1.0),
                                p.num("cs", 0.0),
                                p.num("H0", 0.0),
                                p.integer("quadrature_order", 16),
                                p.num("tol", 1e-9)};
  } else {
    throw field_error("instance", "unknown instance '" + name +
                                      "' (plane-vs-hyperboloid, identical-hyperboloid, fabricated-strict-gap, grid)");
  }
  Outcome out;
  Report rep = contradiction_report(*inst);
  if (rep.params.contains("ledger")) out.ledger = rep.params["ledger"];
  out.checks.push_back(rep);
  return out;
}

// ----------------------------------------------------------- graph-geometry

Outcome run_graph_geometry(Params& p, std::uint64_t seed) {
  const std::string decl = p.str("chart", "minkowski n=3");
  const MetricChart chart = config_guard("chart", [&] { return MetricChart::parse(decl); });
  const int m = chart.n() - 1;
  const std::string surface = p.str("surface", "hyperboloid");
  std::function<Jet2(const Vec&)> jet;
  std::vector<Vec> points;
  if (surface == "hyperboloid" || surface == "plane") {
    const double height = p.num("height", 0.0);
    if (surface == "hyperboloid") {
      jet = [height](const Vec& x) {
        const double r = std::sqrt(1.0 + x.squaredNorm());
        const Vec g = x / r;
        return Jet2{x, r + height, g, SymMatrix::from((Mat::Identity(x.size(), x.size()) - g * g.transpose()) / r)};
      };
    } else {
      jet = [height](const Vec& x) {
        return Jet2{x, height, Vec::Zero(x.size()), SymMatrix::zero(static_cast<int>(x.size()))};
      };
    }
    if (p.has("points")) {
      points = take_points(p, "points", m, {});
    } else {
      const int count = p.integer("count", 100);
      const Vec lo = p.vec("lower", Vec::Constant(m, -1.0), m);
      const Vec hi = p.vec("upper", Vec::Constant(m, 1.0), m);
      std::mt19937_64 rng(seed);
      std::uniform_real_distribution<double> u(0.0, 1.0);
      for (int k = 0; k < count; ++k) {
        Vec x(m);
        for (int a = 0; a < m; ++a) x(a) = lo(a) + (hi(a) - lo(a)) * u(rng);
        points.push_back(x);
      }
    }
  } else if (surface == "grid") {
    auto grid = std::make_shared<GridFunction>(GridFunction::load_csv(p.str("surface_csv", "")));
    if (grid->dims() != m) throw field_error("surface_csv", "grid dimension does not match the chart");
    const GraphSurface s = GraphSurface::from_grid(grid);
    jet = [s](const Vec& x) { return s.jet(x); };
    for (std::size_t k = 0; k < grid->size(); ++k)
      if (grid->interior(k)) points.push_back(grid->node(k));
  } else {
    throw field_error("surface", "expected hyperboloid, plane or grid, got '" + surface + "'");
  }
  std::optional<double> expect;
  if (p.has("expect_H")) expect = p.num("expect_H", 0.0);
  const double tol = p.num("tol", 1e-8);

  Outcome out;
  Report rep = make_check("graph-geometry");
  std::ostringstream table;
  for (int a = 0; a < m; ++a) table << "x" << a + 1 << ',';
  table << "f,W,H\n";
  double worst = 0.0, worst_round = 0.0;
  json worst_at = nullptr;
  for (const Vec& x : points) {
    const Jet2 j = jet(x);
    const GraphGeometry geo = graph_geometry(chart, j);
    const SymMatrix back = hessian_from_geometry(chart, j, geo);
    worst_round = std::max(worst_round, max_abs_entry(back - j.hess));
    for (int a = 0; a < m; ++a) table << csv_number(x(a)) << ',';
    table << csv_number(j.r) << ',' << csv_number(geo.W) << ',' << csv_number(geo.H) << '\n';
    if (expect && std::abs(geo.H - *expect) > worst) {
      worst = std::abs(geo.H - *expect);
      worst_at = {{"x", to_json(x)}, {"H", geo.H}};
    }
  }
  rep.params = {{"points", points.size()}};
  rep.residual = {{"hessian_roundtrip", worst_round}};
  if (expect) {
    rep.residual["max_abs_H_deviation"] = worst;
    if (worst > tol) rep = fail(rep, Verdict::ConclusionFailure, "mean curvature deviates from the expected value", worst_at);
  }
  out.checks.push_back(rep);
  out.table = table.str();
  return out;
}

// ------------------------------------------------------------------ busemann

ModelSpacetime take_model(Params& p, const std::string& fallback) {
  const std::string decl = p.str("model", fallback);
  return config_guard("model", [&] { return ModelSpacetime::parse(decl); });
}

Outcome run_busemann(Params& p, std::uint64_t seed) {
  const ModelSpacetime model = take_model(p, "strip");
  const std::string line_spec = p.str("line", "center");
  const TimelikeGeodesic line = config_guard("line", [&] { return parse_line(model, line_spec); });
  const int n = model.n();
  std::vector<Vec> points;
  if (p.has("points")) {
    points = take_points(p, "points", n, {});
  } else {
    const std::vector<double> xs = p.linspace("x", {-1.0, 1.0, 20});
    const std::vector<double> ts = p.linspace("t", {-1.2, 1.2, 20});
    std::vector<int> idx(n - 1, 0);
    for (;;) {
      for (double t : ts) {
        Vec X(n);
        for (int a = 0; a + 1 < n; ++a) X(a) = xs[idx[a]];
        X(n - 1) = t;
        points.push_back(X);
      }
      int a = n - 2;
      while (a >= 0 && ++idx[a] == static_cast<int>(xs.size())) idx[a--] = 0;
      if (a < 0) break;
    }
  }
  BusemannSuiteOptions opt;
  opt.seed = seed;
  opt.max_pairs = p.integer("max_pairs", 1000);
  opt.tol = p.num("tol", 1e-6);
  opt.equality_tol = p.num("equality_tol", 2e-3);
  const double t_tol = p.num("t_tol", 1e-3);
  const BusemannEvaluator eval(model, line, p.integer("k_max", 20), p.num("monotone_tol", 1e-12));

  Outcome out;
  out.checks.push_back(check_unit_speed(model, line));
  out.checks.push_back(busemann_inequality_suite(eval, points, opt));

  Report level = make_check("busemann-level-sets", {{"t_tol", t_tol}});
  std::ostringstream table;
  for (int a = 0; a + 1 < n; ++a) table << "x" << a + 1 << ',';
  table << "t,b_plus,b_minus,b_sum,accelerated,schedule_used,b_r\n";
  double worst = 0.0;
  json worst_at = nullptr;
  for (const Vec& X : points) {
    const BusemannValue bp = eval.plus(X);
    const BusemannValue bm = eval.minus(X);
    const double dev = std::abs(bp.value - X(n - 1));
    if (dev > worst) {
      worst = dev;
      worst_at = {{"point", to_json(X)}, {"b_plus", bp.value}};
    }
    for (int a = 0; a < n; ++a) table << csv_number(X(a)) << ',';
    table << csv_number(bp.value) << ',' << csv_number(bm.value) << ',' << csv_number(bp.value + bm.value) << ','
          << (bp.accelerated ? 1 : 0) << ',' << bp.b_r.size() << ',';
    for (std::size_t k = 0; k < bp.b_r.size(); ++k) table << (k ? ";" : "") << csv_number(bp.b_r[k]);
    table << '\n';
  }
  level.residual = {{"max_abs_b_plus_minus_t", worst}, {"points", points.size()}};
  if (worst > t_tol) level = fail(level, Verdict::ConclusionFailure, "b+ differs from the time function", worst_at);
  out.checks.push_back(level);
  out.table = table.str();
  return out;
}

// ------------------------------------------------------------------- spheres

Outcome run_spheres(Params& p, std::uint64_t) {
  const ModelSpacetime model = take_model(p, "strip");
  const int n = model.n();
  const std::vector<double> radii = p.nums("radii", {M_PI / 6.0, M_PI / 4.0, M_PI / 3.0});
  const Vec base = p.vec("base", Vec::Zero(n), n);
  const Vec tilt = p.vec("tilt", Vec::Zero(n - 1), n - 1);
  const double h = p.num("h", 2e-3);
  const double tol = p.num("tol", 1e-4);
  const double bound_tol = p.num("bound_tol", 1e-6);
  if (!model.contains(base)) throw field_error("base", "base point lies outside the model");

  // eta = (tilt, tau) normalized to g(eta, eta) = -1, future pointing.
  const Mat g = model.field().g(base);
  Vec eta(n);
  eta << tilt, 0.0;
  const double space = eta.dot(g * eta);
  eta(n - 1) = std::sqrt(1.0 + space);
  const bool constant_curvature = model.kind() == ModelKind::Minkowski || model.fiber().kind == FiberKind::Hyperbolic ||
                                  (model.fiber().kind == FiberKind::Flat && model.fiber_dim() == 1);

  Outcome out;
  Report eq = make_check("sphere-mean-curvature", {{"tol", tol}, {"constant_curvature", constant_curvature}});
  Report bd = make_check("sphere-mean-curvature-bound", {{"tol", bound_tol}});
  std::ostringstream table;
  table << "r,H,expected_H,deviation\n";
  json spheres = json::array();
  double worst_eq = 0.0, worst_bd = 0.0;
  for (double r : radii) {
    const SphereResult s = geodesic_sphere(model, base, eta, r, h);
    spheres.push_back(s.to_json());
    const double dev = s.geometry.H - s.expected_H;
    table << csv_number(r) << ',' << csv_number(s.geometry.H) << ',' << csv_number(s.expected_H) << ','
          << csv_number(dev) << '\n';
    if (std::abs(dev) > worst_eq) {
      worst_eq = std::abs(dev);
      if (constant_curvature && worst_eq > tol) eq = fail(eq, Verdict::ConclusionFailure, "H differs from the model value", {{"r", r}, {"H", s.geometry.H}});
    }
    if (-dev > worst_bd) {
      worst_bd = -dev;
      if (worst_bd > bound_tol) bd = fail(bd, Verdict::ConclusionFailure, "H below the comparison bound", {{"r", r}, {"H", s.geometry.H}});
    }
  }
  eq.residual = {{"max_abs_deviation", worst_eq}};
  bd.residual = {{"max_violation", worst_bd}};
  if (constant_curvature) out.checks.push_back(eq);
  out.checks.push_back(bd);
  out.data["spheres"] = spheres;
  out.table = table.str();
  return out;
}

// ----------------------------------------------------------------- splitting

Outcome run_splitting(Params& p, std::uint64_t) {
  const ModelSpacetime model = take_model(p, "strip");
  if (model.kind() != ModelKind::Strip) throw field_error("model", "splitting runs on the strip models");
  SplittingOptions opt;
  opt.y = p.linspace("y", {-0.6, 0.6, 7});
  opt.t = p.linspace("t", {-0.9, 0.9, 7});
  opt.cubic = p.num("cubic", 0.2);
  opt.steps_per_unit = p.integer("steps_per_unit", 400);
  opt.tol = p.num("tol", 1e-6);
  const int n = model.n();
  Vec q0 = Vec::Zero(n);
  q0(n - 1) = 0.4;
  const std::vector<Vec> tq = take_points(p, "time_points", n, {q0});
  const double time_tol = p.num("time_tol", 1e-3);

  Outcome out;
  out.checks.push_back(splitting_map_check(model, opt));

  Report ct = make_check("cosmological-time", {{"tol", time_tol}});
  double worst = 0.0;
  json rows = json::array();
  for (const Vec& q : tq) {
    const double exact = cosmological_time(model, q);
    const double est = cosmological_time_estimate(model, q);
    rows.push_back({{"q", to_json(q)}, {"tau", exact}, {"estimate", est}});
    if (std::abs(exact - est) > worst) {
      worst = std::abs(exact - est);
      if (worst > time_tol) ct = fail(ct, Verdict::ConclusionFailure, "sampled supremum misses t + pi/2", {{"q", to_json(q)}});
    }
  }
  ct.residual = {{"max_abs_error", worst}, {"points", rows}};
  out.checks.push_back(ct);
  return out;
}

// ---------------------------------------------------------- curvature, weyl

MetricField take_metric(Params& p, const std::string& fallback, std::string* text) {
  *text = p.str("metric", fallback);
  const std::string t = *text;
  return config_guard("metric", [&] { return MetricField::parse(t); });
}

std::vector<Vec> default_points(const MetricField& f) {
  Vec a = Vec::Zero(f.n());
  Vec b = Vec::Constant(f.n(), 0.1);
  b(f.n() - 1) = 0.3;
  return {a, b};
}

Outcome run_curvature(Params& p, std::uint64_t seed) {
  std::string text;
  const MetricField f = take_metric(p, "ads-strip dim=3", &text);
  const int n = f.n();
  const std::vector<Vec> pts = take_points(p, "points", n, default_points(f));
  const double tol = p.num("tol", 1e-6);
  const double bianchi_tol = p.num("bianchi_tol", 1e-6);
  const int planes = p.integer("planes", 50);
  const Declaration d(text);
  const bool cos_warp = d.name() == "ads-strip" || d.name() == "strip" ||
                        (d.name() == "warped" && text.find("warp=unit") == std::string::npos);
  std::optional<double> ric_tt;
  if (p.has("expect_ricci_tt")) ric_tt = p.num("expect_ricci_tt", 0.0);
  else if (cos_warp) ric_tt = n - 1.0;
  const bool riemannian = d.name() == "riemannian" || d.name() == "sphere";

  Outcome out;
  Report sym = make_check("riemann-symmetries", {{"tol", tol}});
  Report bi = make_check("bianchi-identities", {{"tol", bianchi_tol}});
  Report rt = make_check("ricci-time-time", {{"tol", tol}});
  if (ric_tt) rt.params["expected"] = *ric_tt;
  Report schur = make_check("schur-residual", {{"planes", planes}});
  std::mt19937_64 rng(seed);
  json bundles = json::array();
  double w_sym = 0.0, w_b1 = 0.0, w_b2 = 0.0, w_rt = 0.0;
  json schur_rows = json::array();
  for (const Vec& x : pts) {
    const CurvatureBundle b = curvature(f, x, tol);
    json jb = b.to_json();
    jb["x"] = to_json(x);
    bundles.push_back(jb);
    w_sym = std::max(w_sym, b.symmetry_residual);
    const BianchiResiduals br = bianchi_residuals(f, x);
    w_b1 = std::max(w_b1, br.first);
    w_b2 = std::max(w_b2, br.second);
    if (ric_tt) w_rt = std::max(w_rt, std::abs(b.ricci(n - 1, n - 1) - *ric_tt));
    if (riemannian && n >= 3) schur_rows.push_back(schur_residual(f, x, planes, rng).to_json());
  }
  sym.residual = {{"max_relative", w_sym}};
  if (w_sym > tol) sym = fail(sym, Verdict::NumericalQuality, "pair symmetries violated beyond tolerance");
  bi.residual = {{"first", w_b1}, {"second", w_b2}};
  if (std::max(w_b1, w_b2) > bianchi_tol) bi = fail(bi, Verdict::NumericalQuality, "Bianchi residual above tolerance");
  out.checks.push_back(sym);
  out.checks.push_back(bi);
  if (ric_tt) {
    rt.residual = {{"max_abs_deviation", w_rt}};
    if (w_rt > tol) rt = fail(rt, Verdict::ConclusionFailure, "Ric(d_t, d_t) differs from the expected value");
    out.checks.push_back(rt);
  }
  if (!schur_rows.empty()) {
    schur.residual = {{"points", schur_rows}};
    out.checks.push_back(schur);
  }
  out.data["bundles"] = bundles;
  return out;
}

std::optional<FiberMetric> take_fiber(Params& p, const std::string& key) {
  if (!p.has(key)) return std::nullopt;
  const std::string text = p.str(key, "");
  return config_guard(key, [&] {
    Declaration d(text);
    FiberMetric f;
    f.kind = fiber_kind_from_string(d.name());
    f.dim = d.take_int("dim", 3);
    f.amplitude = d.take_double("amplitude", 0.05);
    d.finish();
    return f;
  });
}

Outcome run_weyl(Params& p, std::uint64_t) {
  std::string text;
  const MetricField f = take_metric(p, "ads-strip dim=3", &text);
  const int n = f.n();
  const std::vector<Vec> pts = take_points(p, "points", n, default_points(f));
  const bool expect_zero = p.flag("expect_zero", false);
  const double tol = p.num("tol", 1e-6);
  const double lambda = p.num("lambda", 2.0);
  const double conformal_tol = p.num("conformal_tol", 1e-8);
  const std::string factor = p.str("factor", "constant");
  ConformalFactor cf;
  if (factor == "constant") cf = ConformalFactor::constant(lambda);
  else if (factor == "secant") cf = ConformalFactor::secant_of_time(n);
  else throw field_error("factor", "expected constant or secant");
  const std::optional<FiberMetric> product = take_fiber(p, "product_fiber");
  const bool strip_check = p.flag("strip_conformal", false);
  const double decomposition_tol = p.num("decomposition_tol", 1e-8);

  Outcome out;
  Report wz = make_check("weyl-norm", {{"expect_zero", expect_zero}, {"tol", tol}});
  double worst = 0.0, trace = 0.0;
  json norms = json::array();
  for (const Vec& x : pts) {
    const CurvatureBundle b = curvature(f, x);
    const double w2 = weyl_norm_sq(b);
    norms.push_back({{"x", to_json(x)}, {"weyl_norm_sq", w2}});
    worst = std::max(worst, std::abs(w2));
    trace = std::max(trace, weyl_trace_residual(b));
  }
  wz.residual = {{"max_abs_norm_sq", worst}, {"trace_residual", trace}, {"points", norms}};
  if (expect_zero && worst > tol) wz = fail(wz, Verdict::ConclusionFailure, "Weyl tensor does not vanish");
  out.checks.push_back(wz);

  std::vector<Report> conf;
  for (const Vec& x : pts) conf.push_back(conformal_transform_check(f, cf, x, conformal_tol));
  Report c = combine("conformal-transform", conf);
  c.params = {{"factor", factor}, {"lambda", lambda}, {"tol", conformal_tol}};
  out.checks.push_back(c);

  if (product) {
    const int N = product->dim + 1;
    const double a = p.num("a", -1.0 / (N - 2));
    const double b = p.num("b", 1.0 / ((N - 1.0) * (N - 2.0)));
    const bool scalar_factor = p.flag("scalar_factor", true);
    Vec x = Vec::Constant(N, 0.1);
    x = p.vec("product_point", x, N);
    out.checks.push_back(product_norm_decomposition(*product, x, a, b, scalar_factor, decomposition_tol));
    if (strip_check) out.checks.push_back(strip_conformal_product_check(*product, x));
  } else if (strip_check) {
    throw field_error("strip_conformal", "needs product_fiber");
  }
  return out;
}

using Handler = Outcome (*)(Params&, std::uint64_t);

const std::map<std::string, Handler>& handlers() {
  static const std::map<std::string, Handler> h = {
      {"constants", run_constants},       {"verify-operator", run_verify_operator},
      {"max-principle", run_max_principle}, {"graph-geometry", run_graph_geometry},
      {"busemann", run_busemann},         {"spheres", run_spheres},
      {"splitting", run_splitting},       {"curvature", run_curvature},
      {"weyl", run_weyl}};
  return h;
}

}  // namespace

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names = {"constants", "verify-operator", "max-principle",
                                                 "graph-geometry", "busemann", "spheres",
                                                 "splitting", "curvature", "weyl"};
  return names;
}

RunResult run_scenario(const std::string& subcommand, const nlohmann::json& request) {
  const auto it = handlers().find(subcommand);
  if (it == handlers().end()) {
    throw Error(ErrorKind::Config, "unknown subcommand '" + subcommand + "'", {{"field", "subcommand"}});
  }
  json params = request.is_null() ? json::object() : request;
  if (!params.is_object()) throw Error(ErrorKind::Config, "request must be a JSON object");
  std::uint64_t seed = 0;
  if (params.contains("seed")) {
    const json& s = params["seed"];
    if (s.is_number_unsigned()) seed = s.get<std::uint64_t>();
    else if (s.is_number_integer() && s.get<std::int64_t>() >= 0) seed = static_cast<std::uint64_t>(s.get<std::int64_t>());
    else if (s.is_string()) seed = static_cast<std::uint64_t>(parse_number("seed", s.get<std::string>()));
    else throw field_error("seed", "expected a nonnegative integer");
    params.erase("seed");
  }
  std::string scenario = subcommand;
  if (params.contains("scenario")) {
    if (!params["scenario"].is_string()) throw field_error("scenario", "expected a string");
    scenario = params["scenario"].get<std::string>();
    params.erase("scenario");
  }

  Params p(params);
  Outcome o = it->second(p, seed);
  p.finish();

  const Report all = combine(subcommand, o.checks);
  RunResult r;
  r.report = {{"schema", kReportSchemaVersion},
              {"scenario", scenario},
              {"subcommand", subcommand},
              {"seed", seed},
              {"params", p.echo()},
              {"ledger", o.ledger},
              {"verdict", std::string(to_string(all.verdict))},
              {"message", all.message},
              {"checks", all.residual["parts"]}};
  if (!o.data.empty()) r.report["data"] = o.data;
  r.table_csv = std::move(o.table);
  r.exit_code = all.verdict == Verdict::ConclusionFailure ? 1 : 0;
  return r;
}

}  // namespace maxlab
