// SPDX-License-Identifier: MIT
#include "gotd/scaling.hpp"

#include <cmath>

namespace gotd {

namespace {

// Applies op(value, variable_index) over every entry of x.
template <typename Op>
void for_each_by_variable(const DenseTensor& x, std::size_t variable_mode,
                          Op&& op) {
  GOTD_CHECK(variable_mode < x.order(), "scaling: variable mode out of range");
  std::size_t lv = 1;
  for (std::size_t m = 0; m < variable_mode; ++m) lv *= x.dim(m);
  const std::size_t nv = x.dim(variable_mode);
  const std::size_t high = x.size() / (lv * nv);
  const double* v = x.data();
  std::size_t flat = 0;
  for (std::size_t h = 0; h < high; ++h)
    for (std::size_t var = 0; var < nv; ++var)
      for (std::size_t l = 0; l < lv; ++l, ++flat) op(v[flat], var);
}

}  // namespace

ScalingInfo compute_scaling(const DenseTensor& x, std::size_t variable_mode) {
  GOTD_CHECK(variable_mode < x.order(), "scaling: variable mode out of range");
  const std::size_t nv = x.dim(variable_mode);
  const double count = static_cast<double>(x.size() / nv);

  ScalingInfo s;
  s.variable_mode = variable_mode;
  s.mu = Vector::Zero(static_cast<Eigen::Index>(nv));
  s.sigma = Vector::Zero(static_cast<Eigen::Index>(nv));

  for_each_by_variable(x, variable_mode, [&](double v, std::size_t var) {
    s.mu(static_cast<Eigen::Index>(var)) += v;
  });
  s.mu /= count;
  for_each_by_variable(x, variable_mode, [&](double v, std::size_t var) {
    const double d = v - s.mu(static_cast<Eigen::Index>(var));
    s.sigma(static_cast<Eigen::Index>(var)) += d * d;
  });
  for (Eigen::Index i = 0; i < s.sigma.size(); ++i) {
    const double sd = std::sqrt(s.sigma(i) / count);
    s.sigma(i) = sd < 1e-14 ? 1.0 : sd;
  }
  return s;
}

DenseTensor apply_scaling(const DenseTensor& x, const ScalingInfo& s) {
  GOTD_CHECK(s.variable_mode < x.order() &&
                 x.dim(s.variable_mode) == static_cast<std::size_t>(s.mu.size()),
             "scaling: variable mode size mismatch");
  DenseTensor out(x.dims());
  double* o = out.data();
  std::size_t flat = 0;
  for_each_by_variable(x, s.variable_mode, [&](double v, std::size_t var) {
    o[flat++] = (v - s.mu(static_cast<Eigen::Index>(var))) /
                s.sigma(static_cast<Eigen::Index>(var));
  });
  return out;
}

DenseTensor unscale(const DenseTensor& x_scaled, const ScalingInfo& s) {
  GOTD_CHECK(s.variable_mode < x_scaled.order() &&
                 x_scaled.dim(s.variable_mode) ==
                     static_cast<std::size_t>(s.mu.size()),
             "scaling: variable mode size mismatch");
  DenseTensor out(x_scaled.dims());
  double* o = out.data();
  std::size_t flat = 0;
  for_each_by_variable(x_scaled, s.variable_mode,
                       [&](double v, std::size_t var) {
                         o[flat++] = s.sigma(static_cast<Eigen::Index>(var)) * v +
                                     s.mu(static_cast<Eigen::Index>(var));
                       });
  return out;
}

void chain_scale(DenseTensor& z, const ScalingInfo& s) {
  GOTD_CHECK(s.variable_mode < z.order() &&
                 z.dim(s.variable_mode) == static_cast<std::size_t>(s.mu.size()),
             "scaling: variable mode size mismatch");
  double* o = z.data();
  std::size_t flat = 0;
  for_each_by_variable(z, s.variable_mode, [&](double, std::size_t var) {
    o[flat++] *= s.sigma(static_cast<Eigen::Index>(var));
  });
}

}  // namespace gotd
