#pragma once

#include <random>

#include "maxlab/symkernel.hpp"

namespace maxlab::testing {

inline Mat random_orthogonal(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Mat m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = g(rng);
  Eigen::HouseholderQR<Mat> qr(m);
  return qr.householderQ();
}

// Q diag(eigs) Q^T with a random orthogonal Q.
inline SymMatrix random_symmetric(const Vec& eigs, std::mt19937_64& rng) {
  const Mat q = random_orthogonal(static_cast<int>(eigs.size()), rng);
  return SymMatrix::from(q * eigs.asDiagonal() * q.transpose(), 1e-9);
}

inline Vec uniform_vec(int n, double lo, double hi, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(lo, hi);
  Vec v(n);
  for (int i = 0; i < n; ++i) v(i) = u(rng);
  return v;
}

}  // namespace maxlab::testing
