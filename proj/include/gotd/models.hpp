// SPDX-License-Identifier: MIT
#pragma once

#include <vector>

#include "gotd/kernels.hpp"

namespace gotd {

/// Rank-R CP model [[A^0, ..., A^{d-1}]]; factor k is I_k x R. Weight-free:
/// column scales live in the factors themselves.
struct KruskalModel {
  std::vector<Matrix> factors;

  std::size_t order() const { return factors.size(); }
  Eigen::Index rank() const { return factors.empty() ? 0 : factors[0].cols(); }
  std::vector<std::size_t> dims() const;
  void validate() const;
};

/// Tucker model [[G; A^0, ..., A^{d-1}]]; core is R_0 x ... x R_{d-1} and
/// factor k is I_k x R_k.
struct TuckerModel {
  DenseTensor core;
  std::vector<Matrix> factors;

  std::size_t order() const { return factors.size(); }
  std::vector<std::size_t> dims() const;
  std::vector<std::size_t> ranks() const { return core.dims(); }
  void validate() const;
};

/// M(i_0,...,i_{d-1}) = sum_r prod_k A^k(i_k, r).
DenseTensor reconstruct_cp(const KruskalModel& m);

/// out (+)= scale * [[factors]]. Shared by reconstruction and the CP
/// Gauss-Newton directional derivative.
void cp_reconstruct_add(const std::vector<Matrix>& factors, double scale,
                        bool accumulate, DenseTensor& out);

/// Sequential n-mode products of the core with every factor.
DenseTensor reconstruct_tucker(const TuckerModel& m);

/// Directional derivative of the CP reconstruction along per-mode factor
/// perturbations W: sum_k [[A^0,...,W^k,...,A^{d-1}]].
DenseTensor cp_direction(const KruskalModel& m, const std::vector<Matrix>& w);

/// Directional derivative of the Tucker reconstruction along core and factor
/// perturbations: W_G x_0 A^0 ... + sum_k G x_0 A^0 ... x_k W^k ...
DenseTensor tucker_direction(const TuckerModel& m, const DenseTensor& w_core,
                             const std::vector<Matrix>& w_factors);

}  // namespace gotd
