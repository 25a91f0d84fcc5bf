#pragma once

// Nodal values on an axis-aligned rectangular grid, the discrete stand-in for
// u0, u1 and for tabulated coefficients.
//
// CSV layout:
//   # maxlab-grid v1
//   # dims: 2
//   # shape: 41 41
//   # origin: -1 -1
//   # spacing: 0.05 0.05
//   <one value per line, row-major, last index fastest>

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "maxlab/symkernel.hpp"

namespace maxlab {

class GridFunction {
 public:
  GridFunction() = default;
  GridFunction(std::vector<int> shape, Vec origin, Vec spacing, std::vector<double> values = {});

  static GridFunction sample(std::vector<int> shape, Vec origin, Vec spacing,
                             const std::function<double(const Vec&)>& f);

  int dims() const { return static_cast<int>(shape_.size()); }
  const std::vector<int>& shape() const { return shape_; }
  const Vec& origin() const { return origin_; }
  const Vec& spacing() const { return spacing_; }
  std::size_t size() const { return values_.size(); }
  const std::vector<double>& values() const { return values_; }

  double operator[](std::size_t flat) const { return values_[flat]; }
  double& operator[](std::size_t flat) { return values_[flat]; }

  std::vector<int> index(std::size_t flat) const;
  std::size_t flat(const std::vector<int>& idx) const;
  Vec node(std::size_t flat) const;
  Vec lower() const { return origin_; }
  Vec upper() const;

  // True when every axis index is at least `width` away from the boundary.
  bool interior(std::size_t flat, int width = 1) const;
  bool same_layout(const GridFunction& o) const;

  // Centered second-order stencils; interior nodes only.
  Vec gradient(std::size_t flat) const;
  SymMatrix hessian(std::size_t flat) const;

  // Multilinear interpolation, clamped to the grid box.
  double interpolate(const Vec& x) const;

  void write_csv(std::ostream& os) const;
  static GridFunction read_csv(std::istream& is);
  void save_csv(const std::string& path) const;
  static GridFunction load_csv(const std::string& path);

 private:
  std::vector<int> shape_;
  Vec origin_;
  Vec spacing_;
  std::vector<double> values_;
  std::vector<std::size_t> strides_;
};

}  // namespace maxlab
