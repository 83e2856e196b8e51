// SPDX-License-Identifier: MIT
#include "gotd/qoi.hpp"

#include <algorithm>

namespace gotd {

namespace {

// Geometry of one time slice relative to a variable mode: the slice splits
// into (low, variable, high) blocks with strides (1, lv, lv*nv).
struct SliceShape {
  std::size_t lv;      // stride of the variable mode within a slice
  std::size_t nv;      // variable mode size
  std::size_t high;    // product of slice modes above the variable mode
  std::size_t slab;    // total slice size
  std::size_t offset;  // flat offset of the requested time slab
};

SliceShape slice_shape(const DenseTensor& x, std::size_t variable_mode,
                       std::size_t t) {
  const std::size_t d = x.order();
  GOTD_CHECK(d >= 2, "QoI evaluation needs a time mode");
  GOTD_CHECK(variable_mode + 1 < d,
             "QoI variable mode must precede the time mode");
  const std::size_t tau = x.dims().back();
  GOTD_CHECK(t < tau, "QoI time index out of range");

  SliceShape s;
  s.slab = x.size() / tau;
  s.lv = 1;
  for (std::size_t m = 0; m < variable_mode; ++m) s.lv *= x.dim(m);
  s.nv = x.dim(variable_mode);
  s.high = s.slab / (s.lv * s.nv);
  s.offset = t * s.slab;
  return s;
}

std::vector<std::size_t> slice_dims(const DenseTensor& x) {
  return {x.dims().begin(), x.dims().end() - 1};
}

void check_sorted_times(const std::vector<std::size_t>& time_set) {
  GOTD_CHECK(!time_set.empty(), "QoI time set must be nonempty");
  GOTD_CHECK(std::is_sorted(time_set.begin(), time_set.end()),
             "QoI time set must be sorted");
}

}  // namespace

QoIDefinition make_variable_sum_qoi(std::string name,
                                    std::size_t variable_mode,
                                    std::vector<std::size_t> var_indices,
                                    double coefficient,
                                    std::vector<std::size_t> time_set) {
  GOTD_CHECK(!var_indices.empty(),
             "variable-sum QoI needs at least one variable");
  check_sorted_times(time_set);

  QoIDefinition q;
  q.name = std::move(name);
  q.time_set = std::move(time_set);
  q.evaluate = [variable_mode, var_indices, coefficient](
                   const DenseTensor& x, std::size_t t) -> double {
    const SliceShape s = slice_shape(x, variable_mode, t);
    const double* v = x.data() + s.offset;
    double g = 0.0;
    for (std::size_t h = 0; h < s.high; ++h) {
      for (std::size_t var : var_indices) {
        GOTD_CHECK(var < s.nv, "variable-sum QoI variable out of range");
        const double* base = v + (h * s.nv + var) * s.lv;
        for (std::size_t l = 0; l < s.lv; ++l) g += base[l];
      }
    }
    return coefficient * g;
  };
  q.derivative = [variable_mode, var_indices, coefficient](
                     const DenseTensor& x, std::size_t t) -> DenseTensor {
    const SliceShape s = slice_shape(x, variable_mode, t);
    DenseTensor z(slice_dims(x));
    double* zv = z.data();
    for (std::size_t h = 0; h < s.high; ++h) {
      for (std::size_t var : var_indices) {
        GOTD_CHECK(var < s.nv, "variable-sum QoI variable out of range");
        double* base = zv + (h * s.nv + var) * s.lv;
        for (std::size_t l = 0; l < s.lv; ++l) base[l] = coefficient;
      }
    }
    return z;
  };
  return q;
}

QoIDefinition make_kinetic_energy_qoi(std::string name,
                                      std::size_t variable_mode,
                                      std::vector<std::size_t> density_vars,
                                      std::size_t ux_var, std::size_t uy_var,
                                      std::vector<std::size_t> time_set) {
  GOTD_CHECK(!density_vars.empty(),
             "kinetic-energy QoI needs density variables");
  GOTD_CHECK(ux_var != uy_var,
             "kinetic-energy QoI velocity variables must differ");
  for (std::size_t v : density_vars) {
    GOTD_CHECK(v != ux_var && v != uy_var,
               "kinetic-energy QoI velocity variable overlaps density set");
  }
  check_sorted_times(time_set);

  QoIDefinition q;
  q.name = std::move(name);
  q.time_set = std::move(time_set);
  q.evaluate = [variable_mode, density_vars, ux_var, uy_var](
                   const DenseTensor& x, std::size_t t) -> double {
    const SliceShape s = slice_shape(x, variable_mode, t);
    GOTD_CHECK(ux_var < s.nv && uy_var < s.nv,
               "kinetic-energy QoI variable out of range");
    const double* v = x.data() + s.offset;
    double g = 0.0;
    for (std::size_t h = 0; h < s.high; ++h) {
      const std::size_t hb = h * s.nv * s.lv;
      for (std::size_t l = 0; l < s.lv; ++l) {
        double dens = 0.0;
        for (std::size_t dv : density_vars) {
          GOTD_CHECK(dv < s.nv, "kinetic-energy QoI variable out of range");
          dens += v[hb + dv * s.lv + l];
        }
        const double ux = v[hb + ux_var * s.lv + l];
        const double uy = v[hb + uy_var * s.lv + l];
        g += dens * (ux * ux + uy * uy);
      }
    }
    return g;
  };
  q.derivative = [variable_mode, density_vars, ux_var, uy_var](
                     const DenseTensor& x, std::size_t t) -> DenseTensor {
    const SliceShape s = slice_shape(x, variable_mode, t);
    GOTD_CHECK(ux_var < s.nv && uy_var < s.nv,
               "kinetic-energy QoI variable out of range");
    const double* v = x.data() + s.offset;
    DenseTensor z(slice_dims(x));
    double* zv = z.data();
    for (std::size_t h = 0; h < s.high; ++h) {
      const std::size_t hb = h * s.nv * s.lv;
      for (std::size_t l = 0; l < s.lv; ++l) {
        double dens = 0.0;
        for (std::size_t dv : density_vars) {
          GOTD_CHECK(dv < s.nv, "kinetic-energy QoI variable out of range");
          dens += v[hb + dv * s.lv + l];
        }
        const double ux = v[hb + ux_var * s.lv + l];
        const double uy = v[hb + uy_var * s.lv + l];
        const double speed_sq = ux * ux + uy * uy;
        for (std::size_t dv : density_vars) zv[hb + dv * s.lv + l] = speed_sq;
        zv[hb + ux_var * s.lv + l] = 2.0 * dens * ux;
        zv[hb + uy_var * s.lv + l] = 2.0 * dens * uy;
      }
    }
    return z;
  };
  return q;
}

double qoi_residual_sq(const QoIDefinition& q, const DenseTensor& x,
                       const DenseTensor& m) {
  GOTD_CHECK(x.dims() == m.dims(),
             "qoi_residual_sq: tensors must share dimensions");
  double s = 0.0;
  for (std::size_t t : q.time_set) {
    const double d = q.evaluate(x, t) - q.evaluate(m, t);
    s += d * d;
  }
  return s;
}

}  // namespace gotd
