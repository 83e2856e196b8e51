// SPDX-License-Identifier: MIT
#pragma once

#include <array>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "gotd/hex_mesh.hpp"
#include "gotd/kernels.hpp"
#include "gotd/qoi.hpp"

namespace gotd {

/// Nodal-to-quadrature interpolation plus weights for one hexahedral cell.
/// det_jac returns the reference-map Jacobian determinant at every
/// quadrature point from the element's 8 nodal coordinates.
struct QuadratureRule {
  Matrix interp;                // N_qp x N_n
  std::vector<double> weights;  // length N_qp
  std::function<std::vector<double>(const std::array<double, 8>&,
                                    const std::array<double, 8>&,
                                    const std::array<double, 8>&)>
      det_jac;
};

/// Trilinear basis with first-order (2x2x2) Gauss quadrature: N_n = N_qp = 8,
/// unit weights, interpolation matrix A1 (x) A1 (x) A1 with
/// A1 = [[1+1/sqrt(3), 1-1/sqrt(3)], [1-1/sqrt(3), 1+1/sqrt(3)]] / 2.
QuadratureRule trilinear_rule();

/// Pointwise integrand f(u) over a fixed-length variable vector u, with its
/// derivative df/du.
struct FeIntegrand {
  std::string name;
  std::function<double(const double* u, std::size_t nvars)> f;
  std::function<void(const double* u, std::size_t nvars, double* df)> df;
};

FeIntegrand fe_unit_integrand();                 // f = 1 (volume)
FeIntegrand fe_first_var_integrand();            // f = u[0]
FeIntegrand fe_internal_energy_integrand();      // vars = (rho*e); f = u[0]
// vars = (rho, m...); f = |m|^2 / (2 rho), guarded below rho_min.
FeIntegrand fe_kinetic_energy_integrand(double rho_min = 1e-12);
FeIntegrand fe_magnetic_energy_integrand(double mu0 = 1.0);  // f = |B|^2/(2 mu0)
FeIntegrand fe_momentum_integrand();             // f = |m|^2

struct FeQoIResult {
  std::vector<double> g;  // one integral value per requested time
  DenseTensor z;          // dg/dX, full tensor shape, zero outside vars/times
};

/// Finite-element evaluation of g(t) = integral of f(u) over the mesh and of
/// the derivative tensor Z, for a 5-way tensor (3 spatial modes, variables,
/// time). vars and times are 0-based indices into modes 3 and 4.
FeQoIResult fe_qoi_eval(const DenseTensor& x, const FeIntegrand& integrand,
                        const HexMesh& mesh, const QuadratureRule& rule,
                        const std::vector<std::size_t>& vars,
                        const std::vector<std::size_t>& times);

/// Wraps the finite-element evaluation as a QoIDefinition over the time set.
QoIDefinition make_fe_qoi(std::string name, FeIntegrand integrand,
                          std::shared_ptr<const HexMesh> mesh,
                          QuadratureRule rule, std::vector<std::size_t> vars,
                          std::vector<std::size_t> time_set);

}  // namespace gotd
