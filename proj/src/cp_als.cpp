// SPDX-License-Identifier: MIT
#include "gotd/cp_als.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>

#include "gotd/linalg.hpp"

namespace gotd {

Matrix solve_spsd(const Matrix& s, const Matrix& b, bool* ridged) {
  Eigen::LLT<Matrix> llt(s);
  if (llt.info() == Eigen::Success) return llt.solve(b);

  if (ridged) *ridged = true;
  const double ridge = 1e-12 * s.trace();
  Matrix sr = s;
  sr.diagonal().array() += ridge;
  Eigen::LLT<Matrix> llt2(sr);
  if (llt2.info() == Eigen::Success) return llt2.solve(b);

  // Extremely ill-conditioned even after the ridge: spectral pseudo-inverse.
  Eigen::SelfAdjointEigenSolver<Matrix> es(sr);
  const auto& ev = es.eigenvalues();
  const double cut = 1e-14 * std::max(ev.cwiseAbs().maxCoeff(), 1e-300);
  Vector inv = Vector::Zero(ev.size());
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (ev(i) > cut) inv(i) = 1.0 / ev(i);
  return es.eigenvectors() * inv.asDiagonal() *
         (es.eigenvectors().transpose() * b);
}

namespace {

double cp_residual_sq(const DenseTensor& x, const std::vector<Matrix>& factors,
                      DenseTensor& scratch) {
  cp_reconstruct_add(factors, 1.0, false, scratch);
  double s = 0.0;
  const double* xv = x.data();
  const double* mv = scratch.data();
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dd = xv[i] - mv[i];
    s += dd * dd;
  }
  return s;
}

}  // namespace

CpAlsResult cp_als(const DenseTensor& x, const AlsConfig& cfg) {
  GOTD_CHECK(cfg.rank >= 1, "cp_als: rank must be at least 1");
  GOTD_CHECK(cfg.fit_tolerance >= 0.0, "cp_als: fit tolerance must be >= 0");
  GOTD_CHECK(cfg.max_iterations >= 1, "cp_als: need at least one iteration");
  const double norm_x = frob_norm(x);
  GOTD_CHECK_NUMERIC(norm_x > 0.0, "cp_als: input tensor is zero");

  const std::size_t d = x.order();
  const Eigen::Index rank = cfg.rank;

  CpAlsResult result;
  Rng rng(cfg.init_seed);
  std::vector<Matrix>& factors = result.model.factors;
  factors.resize(d);
  std::vector<Matrix> grams(d);
  for (std::size_t k = 0; k < d; ++k) {
    Matrix& f = factors[k];
    f.resize(static_cast<Eigen::Index>(x.dim(k)), rank);
    for (Eigen::Index c = 0; c < rank; ++c)
      for (Eigen::Index r = 0; r < f.rows(); ++r) f(r, c) = rng.uniform();
    grams[k] = f.transpose() * f;
  }

  DenseTensor scratch(x.dims());
  double res_sq = cp_residual_sq(x, factors, scratch);
  double fit_prev = 0.0;
  for (std::size_t iter = 0; iter < cfg.max_iterations; ++iter) {
    for (std::size_t n = 0; n < d; ++n) {
      Matrix rhs = mttkrp(x, factors, n);
      Matrix gamma = Matrix::Ones(rank, rank);
      for (std::size_t k = 0; k < d; ++k)
        if (k != n) gamma.array() *= grams[k].array();
      Matrix candidate =
          solve_spsd(gamma, rhs.transpose(), &result.gram_ridge_applied)
              .transpose();
      candidate.swap(factors[n]);
      const double res_sq_new = cp_residual_sq(x, factors, scratch);
      if (res_sq_new <= res_sq) {
        res_sq = res_sq_new;
        grams[n] = factors[n].transpose() * factors[n];
      } else {
        // Regularized solve of a singular system moved uphill; keep the
        // previous factor so the fit stays monotone.
        candidate.swap(factors[n]);
      }
    }

    const double fit = 1.0 - std::sqrt(res_sq) / norm_x;
    result.fit_history.push_back(fit);

    if (iter > 0 && std::abs(fit - fit_prev) < cfg.fit_tolerance) break;
    fit_prev = fit;
  }

  // Normalize columns, absorbing the scales into mode 0.
  for (Eigen::Index r = 0; r < rank; ++r) {
    double lambda = 1.0;
    for (std::size_t k = 0; k < d; ++k) {
      const double nrm = factors[k].col(r).norm();
      if (nrm > 0.0) factors[k].col(r) /= nrm;
      lambda *= nrm;
    }
    factors[0].col(r) *= lambda;
  }
  return result;
}

}  // namespace gotd
