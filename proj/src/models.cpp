// SPDX-License-Identifier: MIT
#include "gotd/models.hpp"

namespace gotd {

std::vector<std::size_t> KruskalModel::dims() const {
  std::vector<std::size_t> d(factors.size());
  for (std::size_t k = 0; k < factors.size(); ++k)
    d[k] = static_cast<std::size_t>(factors[k].rows());
  return d;
}

void KruskalModel::validate() const {
  GOTD_CHECK(!factors.empty(), "CP model needs at least one factor");
  const Eigen::Index r = factors[0].cols();
  GOTD_CHECK(r >= 1, "CP rank must be at least 1");
  for (const auto& f : factors)
    GOTD_CHECK(f.cols() == r, "CP factors must share a column count");
}

std::vector<std::size_t> TuckerModel::dims() const {
  std::vector<std::size_t> d(factors.size());
  for (std::size_t k = 0; k < factors.size(); ++k)
    d[k] = static_cast<std::size_t>(factors[k].rows());
  return d;
}

void TuckerModel::validate() const {
  GOTD_CHECK(!factors.empty(), "Tucker model needs at least one factor");
  GOTD_CHECK(core.order() == factors.size(),
             "Tucker core order must match the factor count");
  for (std::size_t k = 0; k < factors.size(); ++k)
    GOTD_CHECK(static_cast<std::size_t>(factors[k].cols()) == core.dim(k),
               "Tucker factor columns must match the core dimension");
}

void cp_reconstruct_add(const std::vector<Matrix>& factors, double scale,
                        bool accumulate, DenseTensor& out) {
  const std::size_t d = factors.size();
  const Eigen::Index rank = factors[0].cols();
  const std::size_t i0 = static_cast<std::size_t>(factors[0].rows());

  std::vector<std::size_t> rest_modes;
  for (std::size_t k = 1; k < d; ++k) rest_modes.push_back(k);
  FactorRowProduct rest(factors, rest_modes, rank);

  double* v = out.data();
  const std::size_t slabs = out.size() / i0;
  for (std::size_t c = 0; c < slabs; ++c) {
    Eigen::Map<Vector> slab(v + c * i0, static_cast<Eigen::Index>(i0));
    if (accumulate)
      slab.noalias() += scale * (factors[0] * rest.value().matrix());
    else
      slab.noalias() = scale * (factors[0] * rest.value().matrix());
    rest.advance();
  }
}

DenseTensor reconstruct_cp(const KruskalModel& m) {
  m.validate();
  DenseTensor out(m.dims());
  cp_reconstruct_add(m.factors, 1.0, false, out);
  return out;
}

DenseTensor reconstruct_tucker(const TuckerModel& m) {
  m.validate();
  DenseTensor y = m.core;
  for (std::size_t k = 0; k < m.factors.size(); ++k)
    y = ttm(y, m.factors[k], k);
  return y;
}

DenseTensor cp_direction(const KruskalModel& m, const std::vector<Matrix>& w) {
  GOTD_CHECK(w.size() == m.factors.size(),
             "cp_direction: one perturbation per mode required");
  DenseTensor out(m.dims());
  std::vector<Matrix> work = m.factors;
  for (std::size_t k = 0; k < m.factors.size(); ++k) {
    work[k] = w[k];
    cp_reconstruct_add(work, 1.0, k > 0, out);
    work[k] = m.factors[k];
  }
  return out;
}

DenseTensor tucker_direction(const TuckerModel& m, const DenseTensor& w_core,
                             const std::vector<Matrix>& w_factors) {
  GOTD_CHECK(w_factors.size() == m.factors.size(),
             "tucker_direction: one perturbation per mode required");
  const std::size_t d = m.factors.size();

  TuckerModel term{w_core, m.factors};
  DenseTensor out = reconstruct_tucker(term);
  for (std::size_t k = 0; k < d; ++k) {
    DenseTensor y = m.core;
    for (std::size_t j = 0; j < d; ++j)
      y = ttm(y, j == k ? w_factors[j] : m.factors[j], j);
    const double* src = y.data();
    double* dst = out.data();
    for (std::size_t i = 0; i < out.size(); ++i) dst[i] += src[i];
  }
  return out;
}

}  // namespace gotd
