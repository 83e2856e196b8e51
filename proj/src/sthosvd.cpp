// SPDX-License-Identifier: MIT
#include "gotd/sthosvd.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>

namespace gotd {

namespace {

// Gram matrix of the mode-n unfolding, accumulated slab by slab so the
// unfolding itself is never materialized.
Matrix mode_gram(const DenseTensor& y, std::size_t n) {
  const auto& dims = y.dims();
  const std::size_t in = dims[n];
  std::size_t left = 1;
  for (std::size_t m = 0; m < n; ++m) left *= dims[m];
  const std::size_t right = y.size() / (left * in);

  Matrix g = Matrix::Zero(static_cast<Eigen::Index>(in),
                          static_cast<Eigen::Index>(in));
  for (std::size_t p = 0; p < right; ++p) {
    Eigen::Map<const Matrix> slab(y.data() + p * left * in,
                                  static_cast<Eigen::Index>(left),
                                  static_cast<Eigen::Index>(in));
    g.noalias() += slab.transpose() * slab;
  }
  return g;
}

// Fixes the eigenvector sign so the entry of largest magnitude is positive.
void canonicalize_sign(Matrix& u) {
  for (Eigen::Index c = 0; c < u.cols(); ++c) {
    Eigen::Index imax = 0;
    u.col(c).cwiseAbs().maxCoeff(&imax);
    if (u(imax, c) < 0.0) u.col(c) = -u.col(c);
  }
}

}  // namespace

TuckerModel sthosvd(const DenseTensor& x, const SthosvdConfig& cfg) {
  const std::size_t d = x.order();
  const bool tolerance_mode = cfg.ranks.empty();
  if (tolerance_mode) {
    GOTD_CHECK(cfg.tolerance > 0.0 && cfg.tolerance < 1.0,
               "sthosvd: tolerance must lie in (0,1)");
  } else {
    GOTD_CHECK(cfg.ranks.size() == d, "sthosvd: need one rank per mode");
    for (std::size_t k = 0; k < d; ++k) {
      GOTD_CHECK(cfg.ranks[k] >= 1, "sthosvd: ranks must be positive");
      GOTD_CHECK(cfg.ranks[k] <= x.dim(k),
                 "sthosvd: rank exceeds the mode size");
    }
  }
  const double norm_x_sq = frob_norm_sq(x);
  GOTD_CHECK_NUMERIC(norm_x_sq > 0.0, "sthosvd: input tensor is zero");

  std::vector<std::size_t> order = cfg.mode_order;
  if (order.empty()) {
    order.resize(d);
    for (std::size_t k = 0; k < d; ++k) order[k] = k;
  }
  GOTD_CHECK(order.size() == d, "sthosvd: mode order must list every mode");

  const double budget =
      tolerance_mode ? cfg.tolerance * cfg.tolerance * norm_x_sq / d : 0.0;

  TuckerModel model;
  model.factors.resize(d);
  DenseTensor y = x;
  for (std::size_t n : order) {
    GOTD_CHECK(n < d, "sthosvd: mode order entry out of range");
    const std::size_t in = y.dim(n);
    Eigen::SelfAdjointEigenSolver<Matrix> es(mode_gram(y, n));
    GOTD_CHECK_NUMERIC(es.info() == Eigen::Success,
                       "sthosvd: eigendecomposition failed");
    const Vector& raw = es.eigenvalues();  // ascending

    // Gram eigenvalues below the decomposition's own noise floor carry no
    // energy; treating them as exact zeros keeps exactly-low-rank inputs at
    // their true rank.
    const double floor = static_cast<double>(in) *
                         std::numeric_limits<double>::epsilon() *
                         std::max(raw(static_cast<Eigen::Index>(in - 1)), 0.0);
    std::vector<double> ev(in);
    for (std::size_t i = 0; i < in; ++i) {
      const double v = raw(static_cast<Eigen::Index>(i));
      ev[i] = v <= floor ? 0.0 : v;
    }

    std::size_t discarded = 0;
    if (tolerance_mode) {
      double sum = 0.0;
      while (discarded + 1 < in) {
        const double next = sum + ev[discarded];
        if (next > budget) break;
        sum = next;
        ++discarded;
      }
      // Ties at the truncation boundary round the rank up.
      while (discarded > 0 && ev[discarded - 1] == ev[discarded] &&
             ev[discarded] > 0.0)
        --discarded;
    } else {
      discarded = in - cfg.ranks[n];
    }
    const std::size_t rank = in - discarded;

    Matrix u(in, rank);
    for (std::size_t c = 0; c < rank; ++c)
      u.col(static_cast<Eigen::Index>(c)) =
          es.eigenvectors().col(static_cast<Eigen::Index>(in - 1 - c));
    canonicalize_sign(u);
    model.factors[n] = u;
    y = ttm(y, u.transpose(), n);
  }
  model.core = std::move(y);
  model.validate();
  return model;
}

}  // namespace gotd
