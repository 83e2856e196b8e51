// SPDX-License-Identifier: MIT
#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "gotd/kernels.hpp"

namespace gotd {

struct OptConfig {
  std::size_t max_outer_iterations = 20;
  std::size_t lbfgs_memory = 5;
  std::size_t tcg_max_iterations = 100;  // additionally capped by dimension
  double tcg_rel_tol = -1.0;  // <0 selects the min(0.5, sqrt(|g|)) rule
  double grad_floor = 1e-12;  // early-exit only; the budget rules
  double accept_threshold = 0.1;         // ratio below this rejects the step
  double expand_threshold = 0.75;        // ratio above this grows the radius
  double shrink_factor = 0.25;
  double expand_factor = 2.5;
  double max_radius_factor = 1e6;  // times the initial radius
  double wolfe_c1 = 1e-4;
  double wolfe_c2 = 0.9;
};

/// One accepted iterate (plus the initial point at iteration 0).
struct TraceRecord {
  std::size_t iteration = 0;
  double f = 0.0;
  double grad_norm = 0.0;
  double fro_term = 0.0;
  std::vector<double> qoi_terms;
  double step_norm = 0.0;
  std::size_t tcg_iterations = 0;
  bool accepted = true;
};

struct Trace {
  std::vector<TraceRecord> records;
  bool line_search_failed = false;
};

struct OptResult {
  Vector v;
  double f = 0.0;
  Trace trace;
};

using Objective = std::function<double(const Vector&)>;
using GradientFn = std::function<Vector(const Vector&)>;
using HessVecFn = std::function<Vector(const Vector&, const Vector&)>;
/// Builds the preconditioner at a point; the returned closure applies its
/// inverse to a residual. Null means identity.
using PrecondBuildFn =
    std::function<std::function<Vector(const Vector&)>(const Vector&)>;
/// Optional per-record term breakdown: (Frobenius term, per-QoI sums).
using TermProbeFn =
    std::function<std::pair<double, std::vector<double>>(const Vector&)>;

/// Limited-memory BFGS with a strong-Wolfe line search. Runs the fixed
/// iteration budget unless the gradient floor is hit; a failed line search
/// terminates gracefully with the flag set in the trace.
OptResult lbfgs_minimize(const Objective& f, const GradientFn& grad,
                         const Vector& v0, const OptConfig& cfg,
                         const TermProbeFn& probe = nullptr);

/// Trust-region Newton with a preconditioned Steihaug-Toint truncated-CG
/// inner solve; the trust region is measured in the preconditioner norm.
OptResult tr_newton_minimize(const Objective& f, const GradientFn& grad,
                             const HessVecFn& hvp,
                             const PrecondBuildFn& precond, const Vector& v0,
                             const OptConfig& cfg,
                             const TermProbeFn& probe = nullptr);

}  // namespace gotd
