#include "maxlab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "maxlab/error.hpp"

namespace maxlab {

GridFunction::GridFunction(std::vector<int> shape, Vec origin, Vec spacing, std::vector<double> values)
    : shape_(std::move(shape)), origin_(std::move(origin)), spacing_(std::move(spacing)) {
  const int d = static_cast<int>(shape_.size());
  if (d < 1 || origin_.size() != d || spacing_.size() != d) {
    throw Error(ErrorKind::Dimension, "grid shape, origin and spacing disagree in dimension");
  }
  std::size_t total = 1;
  for (int k = 0; k < d; ++k) {
    if (shape_[k] < 1) throw Error(ErrorKind::InvalidArgument, "grid shape entries must be positive");
    if (!(spacing_(k) > 0.0)) throw Error(ErrorKind::InvalidArgument, "grid spacing must be positive");
    total *= static_cast<std::size_t>(shape_[k]);
  }
  strides_.assign(d, 1);
  for (int k = d - 2; k >= 0; --k) strides_[k] = strides_[k + 1] * shape_[k + 1];
  if (values.empty()) values.assign(total, 0.0);
  if (values.size() != total) {
    throw Error(ErrorKind::Dimension, "grid value count does not match shape",
                {{"expected", total}, {"got", values.size()}});
  }
  for (std::size_t i = 0; i < total; ++i) {
    if (!std::isfinite(values[i])) throw Error(ErrorKind::Numerical, "non-finite grid value", {{"index", i}});
  }
  values_ = std::move(values);
}

GridFunction GridFunction::sample(std::vector<int> shape, Vec origin, Vec spacing,
                                  const std::function<double(const Vec&)>& f) {
  GridFunction g(std::move(shape), std::move(origin), std::move(spacing));
  for (std::size_t i = 0; i < g.size(); ++i) g.values_[i] = f(g.node(i));
  return g;
}

std::vector<int> GridFunction::index(std::size_t flat) const {
  std::vector<int> idx(shape_.size());
  for (std::size_t k = 0; k < shape_.size(); ++k) {
    idx[k] = static_cast<int>(flat / strides_[k]);
    flat %= strides_[k];
  }
  return idx;
}

std::size_t GridFunction::flat(const std::vector<int>& idx) const {
  std::size_t f = 0;
  for (std::size_t k = 0; k < shape_.size(); ++k) f += strides_[k] * static_cast<std::size_t>(idx[k]);
  return f;
}

Vec GridFunction::node(std::size_t flat) const {
  const std::vector<int> idx = index(flat);
  Vec x(dims());
  for (int k = 0; k < dims(); ++k) x(k) = origin_(k) + idx[k] * spacing_(k);
  return x;
}

Vec GridFunction::upper() const {
  Vec u(dims());
  for (int k = 0; k < dims(); ++k) u(k) = origin_(k) + (shape_[k] - 1) * spacing_(k);
  return u;
}

bool GridFunction::interior(std::size_t flat, int width) const {
  const std::vector<int> idx = index(flat);
  for (int k = 0; k < dims(); ++k) {
    if (idx[k] < width || idx[k] > shape_[k] - 1 - width) return false;
  }
  return true;
}

bool GridFunction::same_layout(const GridFunction& o) const {
  return shape_ == o.shape_ && origin_ == o.origin_ && spacing_ == o.spacing_;
}

Vec GridFunction::gradient(std::size_t flat) const {
  if (!interior(flat)) throw Error(ErrorKind::Domain, "gradient stencil needs an interior node", {{"index", flat}});
  Vec g(dims());
  for (int k = 0; k < dims(); ++k) {
    g(k) = (values_[flat + strides_[k]] - values_[flat - strides_[k]]) / (2.0 * spacing_(k));
  }
  return g;
}

SymMatrix GridFunction::hessian(std::size_t flat) const {
  if (!interior(flat)) throw Error(ErrorKind::Domain, "Hessian stencil needs an interior node", {{"index", flat}});
  SymMatrix h(dims());
  for (int i = 0; i < dims(); ++i) {
    const std::size_t si = strides_[i];
    h.set(i, i, (values_[flat + si] - 2.0 * values_[flat] + values_[flat - si]) / (spacing_(i) * spacing_(i)));
    for (int j = i + 1; j < dims(); ++j) {
      const std::size_t sj = strides_[j];
      const double v = values_[flat + si + sj] - values_[flat + si - sj] - values_[flat - si + sj] +
                       values_[flat - si - sj];
      h.set(i, j, v / (4.0 * spacing_(i) * spacing_(j)));
    }
  }
  return h;
}

double GridFunction::interpolate(const Vec& x) const {
  if (x.size() != dims()) throw Error(ErrorKind::Dimension, "interpolation point has wrong dimension");
  const int d = dims();
  std::vector<int> base(d);
  std::vector<double> frac(d);
  for (int k = 0; k < d; ++k) {
    if (shape_[k] == 1) {
      base[k] = 0;
      frac[k] = 0.0;
      continue;
    }
    double s = (x(k) - origin_(k)) / spacing_(k);
    s = std::clamp(s, 0.0, double(shape_[k] - 1));
    base[k] = std::min(static_cast<int>(std::floor(s)), shape_[k] - 2);
    frac[k] = s - base[k];
  }
  double acc = 0.0;
  for (int corner = 0; corner < (1 << d); ++corner) {
    double w = 1.0;
    std::vector<int> idx = base;
    for (int k = 0; k < d; ++k) {
      if (corner & (1 << k)) {
        if (shape_[k] == 1) {
          w = 0.0;
          break;
        }
        idx[k] += 1;
        w *= frac[k];
      } else {
        w *= 1.0 - frac[k];
      }
    }
    if (w != 0.0) acc += w * values_[flat(idx)];
  }
  return acc;
}

void GridFunction::write_csv(std::ostream& os) const {
  os << std::setprecision(17);
  os << "# maxlab-grid v1\n# dims: " << dims() << "\n# shape:";
  for (int s : shape_) os << ' ' << s;
  os << "\n# origin:";
  for (int k = 0; k < dims(); ++k) os << ' ' << origin_(k);
  os << "\n# spacing:";
  for (int k = 0; k < dims(); ++k) os << ' ' << spacing_(k);
  os << '\n';
  for (double v : values_) os << v << '\n';
}

GridFunction GridFunction::read_csv(std::istream& is) {
  std::string line;
  int lineno = 0;
  int dims = -1;
  std::vector<int> shape;
  std::vector<double> origin, spacing, values;
  bool magic = false;

  auto fail = [&](const std::string& what) {
    throw Error(ErrorKind::Io, "grid CSV line " + std::to_string(lineno) + ": " + what, {{"line", lineno}});
  };
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream ss(line.substr(1));
      std::string key;
      ss >> key;
      if (key == "maxlab-grid") {
        magic = true;
      } else if (key == "dims:") {
        ss >> dims;
      } else if (key == "shape:") {
        for (int v; ss >> v;) shape.push_back(v);
      } else if (key == "origin:") {
        for (double v; ss >> v;) origin.push_back(v);
      } else if (key == "spacing:") {
        for (double v; ss >> v;) spacing.push_back(v);
      }
      continue;
    }
    std::istringstream ss(line);
    double v;
    if (!(ss >> v)) fail("expected a numeric value");
    values.push_back(v);
  }
  if (!magic) fail("missing '# maxlab-grid v1' header");
  if (dims < 1 || static_cast<int>(shape.size()) != dims || static_cast<int>(origin.size()) != dims ||
      static_cast<int>(spacing.size()) != dims) {
    fail("inconsistent dims/shape/origin/spacing header");
  }
  return GridFunction(shape, Eigen::Map<Vec>(origin.data(), dims), Eigen::Map<Vec>(spacing.data(), dims),
                      std::move(values));
}

void GridFunction::save_csv(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::Io, "cannot write grid file " + path);
  write_csv(os);
}

GridFunction GridFunction::load_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorKind::Io, "cannot open grid file " + path);
  return read_csv(is);
}

}  // namespace maxlab
