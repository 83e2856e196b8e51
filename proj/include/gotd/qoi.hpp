// SPDX-License-Identifier: MIT
#pragma once

#include <functional>
#include <string>
#include <vector>

#include "gotd/dense_tensor.hpp"

namespace gotd {

/// A scalar functional g(X_t) over time slices of an (unscaled) tensor,
/// together with its derivative tensor dg/dm for one slice. Evaluators take
/// the full tensor plus a 0-based time index; the derivative result has the
/// dimensions of one time slice (last mode dropped).
struct QoIDefinition {
  std::string name;
  std::vector<std::size_t> time_set;  // sorted 0-based time indices
  std::function<double(const DenseTensor&, std::size_t)> evaluate;
  std::function<DenseTensor(const DenseTensor&, std::size_t)> derivative;
};

/// g(X_t) = coefficient * sum over all spatial positions and the selected
/// variables of X(..., v, t). Linear; the derivative is constant.
QoIDefinition make_variable_sum_qoi(std::string name,
                                    std::size_t variable_mode,
                                    std::vector<std::size_t> var_indices,
                                    double coefficient,
                                    std::vector<std::size_t> time_set);

/// g(X_t) = sum over spatial positions of D * (Ux^2 + Uy^2), where D is the
/// sum of the density variables and Ux/Uy are the velocity variables.
QoIDefinition make_kinetic_energy_qoi(std::string name,
                                      std::size_t variable_mode,
                                      std::vector<std::size_t> density_vars,
                                      std::size_t ux_var, std::size_t uy_var,
                                      std::vector<std::size_t> time_set);

/// sum_{t in time_set} (g(X_t) - g(M_t))^2.
double qoi_residual_sq(const QoIDefinition& q, const DenseTensor& x,
                       const DenseTensor& m);

}  // namespace gotd
