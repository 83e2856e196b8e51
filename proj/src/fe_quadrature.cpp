// SPDX-License-Identifier: MIT
#include "gotd/fe_quadrature.hpp"

#include <cmath>

namespace gotd {

namespace {

constexpr double kGauss = 0.57735026918962576450914878050196;  // 1/sqrt(3)

// Reference coordinate of local index bit b: 0 -> -1, 1 -> +1.
inline double ref_sign(std::size_t l, std::size_t axis) {
  return ((l >> axis) & 1) ? 1.0 : -1.0;
}

// Trilinear map Jacobian determinant at one reference point.
double trilinear_det(const std::array<double, 8>& x,
                     const std::array<double, 8>& y,
                     const std::array<double, 8>& z, double xi, double eta,
                     double zeta) {
  Eigen::Matrix3d j = Eigen::Matrix3d::Zero();
  const double ref[3] = {xi, eta, zeta};
  for (std::size_t k = 0; k < 8; ++k) {
    double shape[3];  // (1 + s_a * ref_a) / 2 per axis
    for (std::size_t a = 0; a < 3; ++a)
      shape[a] = 0.5 * (1.0 + ref_sign(k, a) * ref[a]);
    for (std::size_t b = 0; b < 3; ++b) {
      double dn = 0.5 * ref_sign(k, b);
      for (std::size_t a = 0; a < 3; ++a)
        if (a != b) dn *= shape[a];
      j(0, static_cast<Eigen::Index>(b)) += x[k] * dn;
      j(1, static_cast<Eigen::Index>(b)) += y[k] * dn;
      j(2, static_cast<Eigen::Index>(b)) += z[k] * dn;
    }
  }
  return j.determinant();
}

}  // namespace

QuadratureRule trilinear_rule() {
  Matrix a1(2, 2);
  a1 << 0.5 * (1.0 + kGauss), 0.5 * (1.0 - kGauss), 0.5 * (1.0 - kGauss),
      0.5 * (1.0 + kGauss);

  QuadratureRule rule;
  rule.interp.resize(8, 8);
  for (std::size_t q = 0; q < 8; ++q)
    for (std::size_t n = 0; n < 8; ++n) {
      double v = 1.0;
      for (std::size_t axis = 0; axis < 3; ++axis)
        v *= a1(static_cast<Eigen::Index>((q >> axis) & 1),
                static_cast<Eigen::Index>((n >> axis) & 1));
      rule.interp(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(n)) =
          v;
    }
  rule.weights.assign(8, 1.0);
  rule.det_jac = [](const std::array<double, 8>& x,
                    const std::array<double, 8>& y,
                    const std::array<double, 8>& z) {
    std::vector<double> b(8);
    for (std::size_t q = 0; q < 8; ++q)
      b[q] = trilinear_det(x, y, z, ref_sign(q, 0) * kGauss,
                           ref_sign(q, 1) * kGauss, ref_sign(q, 2) * kGauss);
    return b;
  };
  return rule;
}

FeIntegrand fe_unit_integrand() {
  FeIntegrand fi;
  fi.name = "unit";
  fi.f = [](const double*, std::size_t) { return 1.0; };
  fi.df = [](const double*, std::size_t n, double* d) {
    for (std::size_t i = 0; i < n; ++i) d[i] = 0.0;
  };
  return fi;
}

FeIntegrand fe_first_var_integrand() {
  FeIntegrand fi;
  fi.name = "first-var";
  fi.f = [](const double* u, std::size_t) { return u[0]; };
  fi.df = [](const double*, std::size_t n, double* d) {
    d[0] = 1.0;
    for (std::size_t i = 1; i < n; ++i) d[i] = 0.0;
  };
  return fi;
}

FeIntegrand fe_internal_energy_integrand() {
  FeIntegrand fi = fe_first_var_integrand();
  fi.name = "internal-energy";
  return fi;
}

FeIntegrand fe_kinetic_energy_integrand(double rho_min) {
  FeIntegrand fi;
  fi.name = "kinetic-energy";
  fi.f = [rho_min](const double* u, std::size_t n) {
    GOTD_CHECK_NUMERIC(u[0] > rho_min,
                       "kinetic-energy integrand: density at or below rho_min");
    double m2 = 0.0;
    for (std::size_t i = 1; i < n; ++i) m2 += u[i] * u[i];
    return m2 / (2.0 * u[0]);
  };
  fi.df = [rho_min](const double* u, std::size_t n, double* d) {
    GOTD_CHECK_NUMERIC(u[0] > rho_min,
                       "kinetic-energy integrand: density at or below rho_min");
    double m2 = 0.0;
    for (std::size_t i = 1; i < n; ++i) m2 += u[i] * u[i];
    d[0] = -m2 / (2.0 * u[0] * u[0]);
    for (std::size_t i = 1; i < n; ++i) d[i] = u[i] / u[0];
  };
  return fi;
}

FeIntegrand fe_magnetic_energy_integrand(double mu0) {
  FeIntegrand fi;
  fi.name = "magnetic-energy";
  fi.f = [mu0](const double* u, std::size_t n) {
    double b2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) b2 += u[i] * u[i];
    return b2 / (2.0 * mu0);
  };
  fi.df = [mu0](const double* u, std::size_t n, double* d) {
    for (std::size_t i = 0; i < n; ++i) d[i] = u[i] / mu0;
  };
  return fi;
}

FeIntegrand fe_momentum_integrand() {
  FeIntegrand fi;
  fi.name = "momentum";
  fi.f = [](const double* u, std::size_t n) {
    double m2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) m2 += u[i] * u[i];
    return m2;
  };
  fi.df = [](const double* u, std::size_t n, double* d) {
    for (std::size_t i = 0; i < n; ++i) d[i] = 2.0 * u[i];
  };
  return fi;
}

namespace {

// Shared element loop; writes the Z contributions through `scatter`, which
// receives (node tensor index triple, var position, time position, value).
template <typename Scatter>
void fe_eval_core(const DenseTensor& x, const FeIntegrand& integrand,
                  const HexMesh& mesh, const QuadratureRule& rule,
                  const std::vector<std::size_t>& vars,
                  const std::vector<std::size_t>& times, std::vector<double>& g,
                  Scatter&& scatter) {
  GOTD_CHECK(x.order() == 5,
             "fe_qoi_eval: tensor must have 3 spatial modes, variables, time");
  const auto& dims = x.dims();
  mesh.validate({dims[0], dims[1], dims[2]});
  GOTD_CHECK(!vars.empty(), "fe_qoi_eval: variable list is empty");
  GOTD_CHECK(!times.empty(), "fe_qoi_eval: time list is empty");
  for (std::size_t v : vars)
    GOTD_CHECK(v < dims[3], "fe_qoi_eval: variable index out of range");
  for (std::size_t t : times)
    GOTD_CHECK(t < dims[4], "fe_qoi_eval: time index out of range");

  const std::size_t nqp = static_cast<std::size_t>(rule.interp.rows());
  const std::size_t nn = static_cast<std::size_t>(rule.interp.cols());
  GOTD_CHECK(nn == 8, "fe_qoi_eval: rule must use 8 nodes per hexahedron");
  GOTD_CHECK(rule.weights.size() == nqp,
             "fe_qoi_eval: weight count does not match quadrature points");

  const std::size_t nv = vars.size(), nt = times.size();
  const std::size_t var_stride = dims[0] * dims[1] * dims[2];
  const std::size_t time_stride = var_stride * dims[3];

  g.assign(nt, 0.0);
  Matrix nodal(nn, nv * nt);   // U_(1): node-major rows, (var,time) columns
  Matrix at_qp(nqp, nv * nt);  // V_(1) = A * U_(1)
  std::vector<double> u(nv), dfu(nv);
  std::vector<double> deriv(nqp * nv * nt);

  for (std::size_t e = 0; e < mesh.element_count(); ++e) {
    const auto& conn = mesh.elements[e];
    std::array<double, 8> ex, ey, ez;
    std::array<std::size_t, 8> node_flat;
    for (std::size_t k = 0; k < 8; ++k) {
      const std::size_t nidx = conn[k];
      ex[k] = mesh.x[nidx];
      ey[k] = mesh.y[nidx];
      ez[k] = mesh.z[nidx];
      const auto& ti = mesh.tensor_ind[nidx];
      node_flat[k] = ti[0] + dims[0] * (ti[1] + dims[1] * ti[2]);
    }

    const std::vector<double> b = rule.det_jac(ex, ey, ez);
    GOTD_CHECK(b.size() == nqp, "fe_qoi_eval: det_jac length mismatch");
    for (std::size_t q = 0; q < nqp; ++q)
      GOTD_CHECK_NUMERIC(
          b[q] > 0.0, "fe_qoi_eval: non-invertible map in element " +
                          std::to_string(e));

    for (std::size_t k = 0; k < 8; ++k)
      for (std::size_t s = 0; s < nt; ++s)
        for (std::size_t a = 0; a < nv; ++a)
          nodal(static_cast<Eigen::Index>(k),
                static_cast<Eigen::Index>(a + nv * s)) =
              x[node_flat[k] + vars[a] * var_stride + times[s] * time_stride];

    at_qp.noalias() = rule.interp * nodal;

    for (std::size_t q = 0; q < nqp; ++q) {
      const double wb = rule.weights[q] * b[q];
      for (std::size_t s = 0; s < nt; ++s) {
        for (std::size_t a = 0; a < nv; ++a)
          u[a] = at_qp(static_cast<Eigen::Index>(q),
                       static_cast<Eigen::Index>(a + nv * s));
        g[s] += wb * integrand.f(u.data(), nv);
        integrand.df(u.data(), nv, dfu.data());
        for (std::size_t a = 0; a < nv; ++a)
          deriv[q + nqp * (a + nv * s)] = dfu[a];
      }
    }

    for (std::size_t k = 0; k < 8; ++k) {
      for (std::size_t q = 0; q < nqp; ++q) {
        const double c = rule.weights[q] * b[q] *
                         rule.interp(static_cast<Eigen::Index>(q),
                                     static_cast<Eigen::Index>(k));
        if (c == 0.0) continue;
        for (std::size_t s = 0; s < nt; ++s)
          for (std::size_t a = 0; a < nv; ++a)
            scatter(node_flat[k], a, s, c * deriv[q + nqp * (a + nv * s)]);
      }
    }
  }
}

}  // namespace

FeQoIResult fe_qoi_eval(const DenseTensor& x, const FeIntegrand& integrand,
                        const HexMesh& mesh, const QuadratureRule& rule,
                        const std::vector<std::size_t>& vars,
                        const std::vector<std::size_t>& times) {
  FeQoIResult out;
  out.z = DenseTensor(x.dims());
  const auto& dims = x.dims();
  const std::size_t var_stride = dims[0] * dims[1] * dims[2];
  const std::size_t time_stride = var_stride * dims[3];
  double* zv = out.z.data();
  fe_eval_core(x, integrand, mesh, rule, vars, times, out.g,
               [&](std::size_t node_flat, std::size_t a, std::size_t s,
                   double v) {
                 zv[node_flat + vars[a] * var_stride +
                    times[s] * time_stride] += v;
               });
  return out;
}

QoIDefinition make_fe_qoi(std::string name, FeIntegrand integrand,
                          std::shared_ptr<const HexMesh> mesh,
                          QuadratureRule rule, std::vector<std::size_t> vars,
                          std::vector<std::size_t> time_set) {
  GOTD_CHECK(mesh != nullptr, "make_fe_qoi: mesh is required");
  GOTD_CHECK(!time_set.empty(), "make_fe_qoi: time set must be nonempty");

  QoIDefinition q;
  q.name = std::move(name);
  q.time_set = std::move(time_set);
  q.evaluate = [integrand, mesh, rule, vars](const DenseTensor& x,
                                             std::size_t t) -> double {
    std::vector<double> g;
    fe_eval_core(x, integrand, *mesh, rule, vars, {t}, g,
                 [](std::size_t, std::size_t, std::size_t, double) {});
    return g[0];
  };
  q.derivative = [integrand, mesh, rule, vars](const DenseTensor& x,
                                               std::size_t t) -> DenseTensor {
    const auto& dims = x.dims();
    DenseTensor z({dims[0], dims[1], dims[2], dims[3]});
    const std::size_t var_stride = dims[0] * dims[1] * dims[2];
    double* zv = z.data();
    std::vector<double> g;
    fe_eval_core(x, integrand, *mesh, rule, vars, {t}, g,
                 [&](std::size_t node_flat, std::size_t a, std::size_t,
                     double v) { zv[node_flat + vars[a] * var_stride] += v; });
    return z;
  };
  return q;
}

}  // namespace gotd
