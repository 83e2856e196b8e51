// SPDX-License-Identifier: MIT
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "gotd/common.hpp"
#include "gotd/kernels.hpp"
#include "gotd/models.hpp"

namespace gotd::test {

inline DenseTensor rand_tensor(const std::vector<std::size_t>& dims, Rng& rng,
                               double lo = 0.0, double hi = 1.0) {
  DenseTensor x(dims);
  for (auto& v : x.values()) v = rng.uniform(lo, hi);
  return x;
}

inline Matrix rand_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng,
                          double lo = 0.0, double hi = 1.0) {
  Matrix m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = rng.uniform(lo, hi);
  return m;
}

inline double rel_err(const DenseTensor& a, const DenseTensor& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    num += d * d;
    den += b[i] * b[i];
  }
  return den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
}

inline double rel_err(const Matrix& a, const Matrix& b) {
  const double den = b.norm();
  return den > 0.0 ? (a - b).norm() / den : (a - b).norm();
}

inline double rel_err(const Vector& a, const Vector& b) {
  const double den = b.norm();
  return den > 0.0 ? (a - b).norm() / den : (a - b).norm();
}

/// Reference MTTKRP: materializes the full Khatri-Rao product. Test oracle
/// only; the library kernel must agree with it without ever forming this.
inline Matrix naive_mttkrp(const DenseTensor& x,
                           const std::vector<Matrix>& factors, std::size_t n) {
  const int d = static_cast<int>(factors.size());
  Matrix kr;
  bool first = true;
  for (int k = d - 1; k >= 0; --k) {
    if (k == static_cast<int>(n)) continue;
    kr = first ? factors[static_cast<std::size_t>(k)]
               : khatri_rao(kr, factors[static_cast<std::size_t>(k)]);
    first = false;
  }
  if (first) kr = Matrix::Ones(1, factors[n].cols());
  return matricize(x, n) * kr;
}

/// Element-by-element CP reconstruction straight from the sum-of-outer-
/// products definition; independent of the library's slab-based kernel.
inline DenseTensor naive_reconstruct_cp(const KruskalModel& m) {
  DenseTensor out(m.dims());
  const std::size_t d = m.order();
  const Eigen::Index rank = m.rank();
  std::vector<std::size_t> idx(d, 0);
  for (std::size_t flat = 0; flat < out.size(); ++flat) {
    double s = 0.0;
    for (Eigen::Index r = 0; r < rank; ++r) {
      double p = 1.0;
      for (std::size_t k = 0; k < d; ++k)
        p *= m.factors[k](static_cast<Eigen::Index>(idx[k]), r);
      s += p;
    }
    out[flat] = s;
    for (std::size_t k = 0; k < d; ++k) {
      if (++idx[k] < out.dim(k)) break;
      idx[k] = 0;
    }
  }
  return out;
}

/// Central finite difference of a scalar function of a vector.
inline Vector fd_gradient(const std::function<double(const Vector&)>& f,
                          const Vector& v, double h = 1e-6) {
  Vector g(v.size());
  Vector p = v;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    p(i) = v(i) + h;
    const double fp = f(p);
    p(i) = v(i) - h;
    const double fm = f(p);
    p(i) = v(i);
    g(i) = (fp - fm) / (2.0 * h);
  }
  return g;
}

}  // namespace gotd::test
