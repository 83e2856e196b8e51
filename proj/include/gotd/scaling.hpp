// SPDX-License-Identifier: MIT
#pragma once

#include "gotd/kernels.hpp"

namespace gotd {

/// Per-variable affine scaling x_tilde = (x - mu(v)) / sigma(v) along one
/// tensor mode.
struct ScalingInfo {
  std::size_t variable_mode = 0;
  Vector mu;     // per-variable shift
  Vector sigma;  // per-variable scale, strictly positive

  static ScalingInfo identity(std::size_t variable_mode, std::size_t nvars) {
    ScalingInfo s;
    s.variable_mode = variable_mode;
    s.mu = Vector::Zero(static_cast<Eigen::Index>(nvars));
    s.sigma = Vector::Ones(static_cast<Eigen::Index>(nvars));
    return s;
  }

  bool is_identity() const {
    return mu.isZero(0.0) && (sigma.array() == 1.0).all();
  }
};

/// mu(v) = mean of variable slice v, sigma(v) = population standard
/// deviation; sigma below 1e-14 (constant slice) is replaced by 1.
ScalingInfo compute_scaling(const DenseTensor& x, std::size_t variable_mode);

/// (x - mu(v)) / sigma(v), elementwise along the variable mode. Works on any
/// tensor whose variable mode matches the scaling (full tensors and time
/// slices alike).
DenseTensor apply_scaling(const DenseTensor& x, const ScalingInfo& s);

/// sigma(v) * x_tilde + mu(v): the unscaling map S.
DenseTensor unscale(const DenseTensor& x_scaled, const ScalingInfo& s);

/// Chain-rule factor for derivative tensors taken in unscaled variables:
/// multiplies every entry by sigma(v). In place; z is a time slice.
void chain_scale(DenseTensor& z, const ScalingInfo& s);

}  // namespace gotd
