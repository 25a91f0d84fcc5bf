#include "maxlab/warped.hpp"

#include <cmath>

#include "maxlab/error.hpp"

namespace maxlab {

namespace {

// Wave vector and phase of the perturbation in entry (i, j), symmetric in i, j.
double wave(int i, int j, int a) {
  const int lo = std::min(i, j), hi = std::max(i, j);
  return 0.5 + 0.5 * ((lo + 2 * hi + 3 * a) % 3) + 0.25 * (lo == hi);
}
double phase(int i, int j) { return 0.3 * (i + j) + 0.7 * std::min(i, j); }

double perturb_arg(const Vec& x, int i, int j) {
  double s = phase(i, j);
  for (int a = 0; a < x.size(); ++a) s += wave(i, j, a) * x(a);
  return s;
}

void require_dim(const Vec& x, int d, const char* what) {
  if (x.size() != d) throw Error(ErrorKind::Dimension, what, {{"expected", d}, {"got", x.size()}});
}

}  // namespace

const char* to_string(FiberKind k) {
  switch (k) {
    case FiberKind::Flat: return "flat";
    case FiberKind::Hyperbolic: return "hyperbolic";
    case FiberKind::Perturbed: return "perturbed";
  }
  return "unknown";
}

FiberKind fiber_kind_from_string(const std::string& s) {
  if (s == "flat") return FiberKind::Flat;
  if (s == "hyperbolic") return FiberKind::Hyperbolic;
  if (s == "perturbed") return FiberKind::Perturbed;
  throw Error(ErrorKind::Config, "unknown fiber kind '" + s + "' (expected flat, hyperbolic or perturbed)");
}

bool FiberMetric::contains(const Vec& x) const {
  if (x.size() != dim) return false;
  return kind != FiberKind::Hyperbolic || x.squaredNorm() < 1.0;
}

SymMatrix FiberMetric::metric(const Vec& x) const {
  require_dim(x, dim, "fiber point has wrong dimension");
  switch (kind) {
    case FiberKind::Flat: return SymMatrix::identity(dim);
    case FiberKind::Hyperbolic: {
      const double q = 1.0 - x.squaredNorm();
      if (!(q > 0.0)) throw Error(ErrorKind::Domain, "point outside the Poincare ball");
      return SymMatrix::identity(dim, 4.0 / (q * q));
    }
    case FiberKind::Perturbed: {
      SymMatrix h = SymMatrix::identity(dim);
      for (int i = 0; i < dim; ++i)
        for (int j = i; j < dim; ++j) h.set(i, j, h(i, j) + amplitude * std::sin(perturb_arg(x, i, j)));
      return h;
    }
  }
  return SymMatrix::identity(dim);
}

std::vector<SymMatrix> FiberMetric::d1(const Vec& x) const {
  require_dim(x, dim, "fiber point has wrong dimension");
  std::vector<SymMatrix> out(dim, SymMatrix::zero(dim));
  if (kind == FiberKind::Hyperbolic) {
    const double q = 1.0 - x.squaredNorm();
    for (int a = 0; a < dim; ++a) out[a] = SymMatrix::identity(dim, 16.0 * x(a) / (q * q * q));
  } else if (kind == FiberKind::Perturbed) {
    for (int a = 0; a < dim; ++a)
      for (int i = 0; i < dim; ++i)
        for (int j = i; j < dim; ++j) out[a].set(i, j, amplitude * wave(i, j, a) * std::cos(perturb_arg(x, i, j)));
  }
  return out;
}

std::vector<std::vector<SymMatrix>> FiberMetric::d2(const Vec& x) const {
  require_dim(x, dim, "fiber point has wrong dimension");
  std::vector<std::vector<SymMatrix>> out(dim, std::vector<SymMatrix>(dim, SymMatrix::zero(dim)));
  if (kind == FiberKind::Hyperbolic) {
    const double q = 1.0 - x.squaredNorm();
    const double q3 = q * q * q;
    for (int a = 0; a < dim; ++a)
      for (int b = 0; b < dim; ++b) {
        const double v = 16.0 * (a == b) / q3 + 96.0 * x(a) * x(b) / (q3 * q);
        out[a][b] = SymMatrix::identity(dim, v);
      }
  } else if (kind == FiberKind::Perturbed) {
    for (int a = 0; a < dim; ++a)
      for (int b = 0; b < dim; ++b)
        for (int i = 0; i < dim; ++i)
          for (int j = i; j < dim; ++j)
            out[a][b].set(i, j, -amplitude * wave(i, j, a) * wave(i, j, b) * std::sin(perturb_arg(x, i, j)));
  }
  return out;
}

double FiberMetric::distance(const Vec& x, const Vec& y) const {
  require_dim(x, dim, "fiber point has wrong dimension");
  require_dim(y, dim, "fiber point has wrong dimension");
  switch (kind) {
    case FiberKind::Flat: return (x - y).norm();
    case FiberKind::Hyperbolic: {
      const double qx = 1.0 - x.squaredNorm(), qy = 1.0 - y.squaredNorm();
      if (!(qx > 0.0 && qy > 0.0)) throw Error(ErrorKind::Domain, "point outside the Poincare ball");
      // acosh(1 + z) written to stay accurate for small z.
      const double z = 2.0 * (x - y).squaredNorm() / (qx * qy);
      return std::log1p(z + std::sqrt(z * (z + 2.0)));
    }
    case FiberKind::Perturbed: break;
  }
  throw Error(ErrorKind::InvalidArgument, "no closed-form distance on a perturbed fiber");
}

std::string FiberMetric::describe() const {
  std::string s = std::string(to_string(kind)) + " dim=" + std::to_string(dim);
  if (kind == FiberKind::Perturbed) s += " amplitude=" + std::to_string(amplitude);
  return s;
}

double WarpedProduct::F(double t) const { return warp == WarpKind::Unit ? 1.0 : std::cos(t) * std::cos(t); }
double WarpedProduct::dF(double t) const { return warp == WarpKind::Unit ? 0.0 : -std::sin(2.0 * t); }
double WarpedProduct::ddF(double t) const { return warp == WarpKind::Unit ? 0.0 : -2.0 * std::cos(2.0 * t); }

bool WarpedProduct::contains(const Vec& X) const {
  if (X.size() != n()) return false;
  const double t = X(n() - 1);
  if (warp == WarpKind::Cosine && !(std::abs(t) < M_PI / 2)) return false;
  return fiber.contains(X.head(fiber.dim));
}

SymMatrix WarpedProduct::spatial(const Vec& X) const {
  require_dim(X, n(), "spacetime point has wrong dimension");
  return fiber.metric(X.head(fiber.dim)) * F(X(n() - 1));
}

std::vector<SymMatrix> WarpedProduct::spatial_d1(const Vec& X) const {
  require_dim(X, n(), "spacetime point has wrong dimension");
  const Vec x = X.head(fiber.dim);
  const double t = X(n() - 1);
  std::vector<SymMatrix> out;
  for (const SymMatrix& d : fiber.d1(x)) out.push_back(d * F(t));
  out.push_back(fiber.metric(x) * dF(t));
  return out;
}

Mat WarpedProduct::metric(const Vec& X) const {
  Mat g = Mat::Zero(n(), n());
  g.topLeftCorner(fiber.dim, fiber.dim) = spatial(X).matrix();
  g(n() - 1, n() - 1) = -1.0;
  return g;
}

std::vector<Mat> WarpedProduct::d1(const Vec& X) const {
  std::vector<Mat> out;
  for (const SymMatrix& s : spatial_d1(X)) {
    Mat m = Mat::Zero(n(), n());
    m.topLeftCorner(fiber.dim, fiber.dim) = s.matrix();
    out.push_back(std::move(m));
  }
  return out;
}

std::vector<std::vector<Mat>> WarpedProduct::d2(const Vec& X) const {
  require_dim(X, n(), "spacetime point has wrong dimension");
  const int k = fiber.dim;
  const Vec x = X.head(k);
  const double t = X(n() - 1);
  const auto h1 = fiber.d1(x);
  const auto h2 = fiber.d2(x);
  const SymMatrix h = fiber.metric(x);
  std::vector<std::vector<Mat>> out(n(), std::vector<Mat>(n(), Mat::Zero(n(), n())));
  for (int a = 0; a < n(); ++a)
    for (int b = 0; b < n(); ++b) {
      Mat block;
      if (a < k && b < k) {
        block = h2[a][b].matrix() * F(t);
      } else if (a < k) {
        block = h1[a].matrix() * dF(t);
      } else if (b < k) {
        block = h1[b].matrix() * dF(t);
      } else {
        block = h.matrix() * ddF(t);
      }
      out[a][b].topLeftCorner(k, k) = block;
    }
  return out;
}

std::string WarpedProduct::describe() const {
  return std::string(warp == WarpKind::Cosine ? "-dt^2 + cos^2(t) g_N" : "-dt^2 + g_N") + ", N: " + fiber.describe();
}

}  // namespace maxlab
