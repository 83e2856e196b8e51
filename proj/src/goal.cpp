// SPDX-License-Identifier: MIT
#include "gotd/goal.hpp"

#include <cstring>

namespace gotd {

std::size_t CpLayout::param_count() const {
  std::size_t n = 0;
  for (std::size_t d : dims) n += d * static_cast<std::size_t>(rank);
  return n;
}

std::size_t TuckerLayout::param_count() const {
  std::size_t n = 1;
  for (std::size_t r : ranks) n *= r;
  for (std::size_t k = 0; k < dims.size(); ++k) n += dims[k] * ranks[k];
  return n;
}

Vector flatten_cp(const KruskalModel& m) {
  std::size_t total = 0;
  for (const auto& f : m.factors) total += static_cast<std::size_t>(f.size());
  Vector v(static_cast<Eigen::Index>(total));
  Eigen::Index at = 0;
  for (const auto& f : m.factors) {
    std::memcpy(v.data() + at, f.data(), sizeof(double) * f.size());
    at += f.size();
  }
  return v;
}

KruskalModel unflatten_cp(const Vector& v, const CpLayout& layout) {
  GOTD_CHECK(static_cast<std::size_t>(v.size()) == layout.param_count(),
             "parameter vector does not match the CP layout");
  KruskalModel m;
  Eigen::Index at = 0;
  for (std::size_t d : layout.dims) {
    Matrix f(static_cast<Eigen::Index>(d), layout.rank);
    std::memcpy(f.data(), v.data() + at, sizeof(double) * f.size());
    at += f.size();
    m.factors.push_back(std::move(f));
  }
  return m;
}

Vector flatten_tucker(const TuckerModel& m) {
  std::size_t total = m.core.size();
  for (const auto& f : m.factors) total += static_cast<std::size_t>(f.size());
  Vector v(static_cast<Eigen::Index>(total));
  std::memcpy(v.data(), m.core.data(), sizeof(double) * m.core.size());
  Eigen::Index at = static_cast<Eigen::Index>(m.core.size());
  for (const auto& f : m.factors) {
    std::memcpy(v.data() + at, f.data(), sizeof(double) * f.size());
    at += f.size();
  }
  return v;
}

TuckerModel unflatten_tucker(const Vector& v, const TuckerLayout& layout) {
  GOTD_CHECK(static_cast<std::size_t>(v.size()) == layout.param_count(),
             "parameter vector does not match the Tucker layout");
  TuckerModel m;
  m.core = DenseTensor(layout.ranks);
  std::memcpy(m.core.data(), v.data(), sizeof(double) * m.core.size());
  Eigen::Index at = static_cast<Eigen::Index>(m.core.size());
  for (std::size_t k = 0; k < layout.dims.size(); ++k) {
    Matrix f(static_cast<Eigen::Index>(layout.dims[k]),
             static_cast<Eigen::Index>(layout.ranks[k]));
    std::memcpy(f.data(), v.data() + at, sizeof(double) * f.size());
    at += f.size();
    m.factors.push_back(std::move(f));
  }
  return m;
}

WeightChoice choose_weights(const DenseTensor& x_scaled,
                            const ScalingInfo& scaling,
                            const DenseTensor& m0_recon_scaled,
                            const std::vector<QoIDefinition>& qois) {
  GOTD_CHECK(x_scaled.dims() == m0_recon_scaled.dims(),
             "choose_weights: data and model dimensions differ");
  const DenseTensor x_unscaled = unscale(x_scaled, scaling);
  const DenseTensor m0_unscaled = unscale(m0_recon_scaled, scaling);

  WeightChoice wc;
  double fro = 0.0;
  for (std::size_t i = 0; i < x_scaled.size(); ++i) {
    const double d = x_scaled[i] - m0_recon_scaled[i];
    fro += d * d;
  }
  wc.fro_at_init = fro;
  GOTD_CHECK_NUMERIC(fro > 0.0,
                     "choose_weights: initial model reproduces the data; the "
                     "tensor-term weight is undefined");

  for (std::size_t q = 0; q < qois.size(); ++q) {
    const double sse = qoi_residual_sq(qois[q], x_unscaled, m0_unscaled);
    if (sse < 1e-30) {
      wc.dropped.push_back(qois[q].name);
    } else {
      wc.kept.push_back(q);
      wc.qoi_sse_at_init.push_back(sse);
    }
  }

  const double inv_terms = 1.0 / static_cast<double>(wc.kept.size() + 1);
  wc.alpha.push_back(inv_terms / fro);
  for (double sse : wc.qoi_sse_at_init) wc.alpha.push_back(inv_terms / sse);
  return wc;
}

std::size_t GoalProblem::param_count() const {
  return kind == ModelKind::cp ? cp_layout.param_count()
                               : tucker_layout.param_count();
}

void GoalProblem::validate() const {
  GOTD_CHECK(alpha.size() == qois.size() + 1,
             "goal problem: need one weight per term");
  for (double a : alpha)
    GOTD_CHECK(a > 0.0, "goal problem: weights must be positive");
  const auto& dims =
      kind == ModelKind::cp ? cp_layout.dims : tucker_layout.dims;
  GOTD_CHECK(dims == x_scaled.dims(),
             "goal problem: layout does not match the data tensor");
  GOTD_CHECK(targets.size() == qois.size(),
             "goal problem: target cache size mismatch");
  const std::size_t tau = x_scaled.dims().back();
  for (std::size_t q = 0; q < qois.size(); ++q) {
    GOTD_CHECK(targets[q].size() == qois[q].time_set.size(),
               "goal problem: target cache size mismatch");
    for (std::size_t t : qois[q].time_set)
      GOTD_CHECK(t < tau, "goal problem: QoI time index out of range");
  }
}

namespace {

std::vector<std::vector<double>> qoi_targets(
    const DenseTensor& x_unscaled, const std::vector<QoIDefinition>& qois) {
  std::vector<std::vector<double>> targets(qois.size());
  for (std::size_t q = 0; q < qois.size(); ++q) {
    targets[q].reserve(qois[q].time_set.size());
    for (std::size_t t : qois[q].time_set)
      targets[q].push_back(qois[q].evaluate(x_unscaled, t));
  }
  return targets;
}

GoalProblem assemble(DenseTensor x_scaled, ScalingInfo scaling,
                     std::vector<QoIDefinition> qois,
                     const DenseTensor& m0_recon, ModelKind kind,
                     CpLayout cp_layout, TuckerLayout tucker_layout) {
  WeightChoice wc = choose_weights(x_scaled, scaling, m0_recon, qois);
  GoalProblem p;
  p.scaling = std::move(scaling);
  p.kind = kind;
  p.cp_layout = std::move(cp_layout);
  p.tucker_layout = std::move(tucker_layout);
  p.alpha = wc.alpha;
  p.dropped_qois = wc.dropped;
  for (std::size_t idx : wc.kept) p.qois.push_back(std::move(qois[idx]));
  const DenseTensor x_unscaled = unscale(x_scaled, p.scaling);
  p.targets = qoi_targets(x_unscaled, p.qois);
  p.x_scaled = std::move(x_scaled);
  p.validate();
  return p;
}

}  // namespace

GoalProblem make_goal_problem(DenseTensor x_scaled, ScalingInfo scaling,
                              std::vector<QoIDefinition> qois,
                              const KruskalModel& m0) {
  CpLayout layout{m0.dims(), m0.rank()};
  GOTD_CHECK(layout.dims == x_scaled.dims(),
             "goal problem: initial model does not match the data tensor");
  return assemble(std::move(x_scaled), std::move(scaling), std::move(qois),
                  reconstruct_cp(m0), ModelKind::cp, std::move(layout), {});
}

GoalProblem make_goal_problem(DenseTensor x_scaled, ScalingInfo scaling,
                              std::vector<QoIDefinition> qois,
                              const TuckerModel& m0) {
  TuckerLayout layout{m0.dims(), m0.ranks()};
  GOTD_CHECK(layout.dims == x_scaled.dims(),
             "goal problem: initial model does not match the data tensor");
  return assemble(std::move(x_scaled), std::move(scaling), std::move(qois),
                  reconstruct_tucker(m0), ModelKind::tucker, {},
                  std::move(layout));
}

GoalProblem make_goal_problem_with_weights(DenseTensor x_scaled,
                                           ScalingInfo scaling,
                                           std::vector<QoIDefinition> qois,
                                           ModelKind kind, CpLayout cp_layout,
                                           TuckerLayout tucker_layout,
                                           std::vector<double> alpha) {
  GoalProblem p;
  p.scaling = std::move(scaling);
  p.kind = kind;
  p.cp_layout = std::move(cp_layout);
  p.tucker_layout = std::move(tucker_layout);
  p.alpha = std::move(alpha);
  p.qois = std::move(qois);
  const DenseTensor x_unscaled = unscale(x_scaled, p.scaling);
  p.targets = qoi_targets(x_unscaled, p.qois);
  p.x_scaled = std::move(x_scaled);
  p.validate();
  return p;
}

Vector Preconditioner::apply(const Vector& r) const {
  if (kind == ModelKind::tucker) return r.cwiseQuotient(diag);
  Vector out(r.size());
  Eigen::Index at = 0;
  for (std::size_t n = 0; n < dims.size(); ++n) {
    const Eigen::Index rows = static_cast<Eigen::Index>(dims[n]);
    Eigen::Map<const Matrix> block(r.data() + at, rows, rank);
    Eigen::Map<Matrix> solved(out.data() + at, rows, rank);
    solved = mode_chol[n].solve(block.transpose()).transpose();
    at += rows * rank;
  }
  return out;
}

GoalEvaluator::GoalEvaluator(const GoalProblem& problem) : problem_(&problem) {
  problem.validate();
}

const GoalEvaluator::State& GoalEvaluator::state_at(const Vector& v,
                                                    bool need_derivs) {
  GOTD_CHECK(static_cast<std::size_t>(v.size()) == problem_->param_count(),
             "goal evaluator: parameter vector layout mismatch");
  const bool same =
      cache_valid_ && cache_.v.size() == v.size() &&
      std::memcmp(cache_.v.data(), v.data(), sizeof(double) * v.size()) == 0;
  if (!same) {
    cache_valid_ = false;
    State s;
    s.v = v;
    if (problem_->kind == ModelKind::cp) {
      s.cp = unflatten_cp(v, problem_->cp_layout);
      s.recon_scaled = reconstruct_cp(s.cp);
    } else {
      s.tucker = unflatten_tucker(v, problem_->tucker_layout);
      s.recon_scaled = reconstruct_tucker(s.tucker);
    }
    s.recon_unscaled = unscale(s.recon_scaled, problem_->scaling);
    GOTD_CHECK_NUMERIC(std::isfinite(frob_norm_sq(s.recon_scaled)),
                       "goal evaluator: reconstruction is not finite");

    double fro = 0.0;
    for (std::size_t i = 0; i < s.recon_scaled.size(); ++i) {
      const double d = problem_->x_scaled[i] - s.recon_scaled[i];
      fro += d * d;
    }
    s.fro = fro;

    s.values.resize(problem_->qois.size());
    s.residuals.resize(problem_->qois.size());
    for (std::size_t q = 0; q < problem_->qois.size(); ++q) {
      const auto& qoi = problem_->qois[q];
      s.values[q].reserve(qoi.time_set.size());
      s.residuals[q].reserve(qoi.time_set.size());
      for (std::size_t i = 0; i < qoi.time_set.size(); ++i) {
        const double g = qoi.evaluate(s.recon_unscaled, qoi.time_set[i]);
        s.values[q].push_back(g);
        s.residuals[q].push_back(problem_->targets[q][i] - g);
      }
    }
    cache_ = std::move(s);
    cache_valid_ = true;
  }

  if (need_derivs && !cache_.derivs_ready) {
    cache_.z.assign(problem_->qois.size(), {});
    for (std::size_t q = 0; q < problem_->qois.size(); ++q) {
      const auto& qoi = problem_->qois[q];
      cache_.z[q].reserve(qoi.time_set.size());
      for (std::size_t t : qoi.time_set) {
        DenseTensor zt = qoi.derivative(cache_.recon_unscaled, t);
        chain_scale(zt, problem_->scaling);
        cache_.z[q].push_back(std::move(zt));
      }
    }
    cache_.derivs_ready = true;
  }
  return cache_;
}

double GoalEvaluator::objective(const Vector& v) {
  const State& s = state_at(v, false);
  double f = problem_->alpha[0] * s.fro;
  for (std::size_t q = 0; q < problem_->qois.size(); ++q) {
    double sse = 0.0;
    for (double r : s.residuals[q]) sse += r * r;
    f += problem_->alpha[q + 1] * sse;
  }
  return f;
}

std::pair<double, std::vector<double>> GoalEvaluator::term_breakdown(
    const Vector& v) {
  const State& s = state_at(v, false);
  std::vector<double> sse(problem_->qois.size(), 0.0);
  for (std::size_t q = 0; q < problem_->qois.size(); ++q)
    for (double r : s.residuals[q]) sse[q] += r * r;
  return {s.fro, std::move(sse)};
}

std::vector<std::vector<double>> GoalEvaluator::qoi_values(const Vector& v) {
  return state_at(v, false).values;
}

Vector GoalEvaluator::project(const DenseTensor& e, const State& s) const {
  Vector out(static_cast<Eigen::Index>(problem_->param_count()));
  if (problem_->kind == ModelKind::cp) {
    Eigen::Index at = 0;
    for (std::size_t n = 0; n < s.cp.factors.size(); ++n) {
      Matrix block = mttkrp(e, s.cp.factors, n);
      std::memcpy(out.data() + at, block.data(),
                  sizeof(double) * block.size());
      at += block.size();
    }
    return out;
  }

  const auto& factors = s.tucker.factors;
  const std::size_t d = factors.size();
  // prefix(k) = E x_0 A^0t ... x_{k-1} A^{k-1}t; factor block n applies the
  // remaining suffix modes to prefix(n), the core block is prefix(d).
  Eigen::Index at = static_cast<Eigen::Index>(s.tucker.core.size());
  DenseTensor prefix = e;
  for (std::size_t n = 0; n < d; ++n) {
    DenseTensor t = prefix;
    for (std::size_t j = n + 1; j < d; ++j)
      t = ttm(t, factors[j].transpose(), j);
    Matrix block =
        matricize(t, n) * matricize(s.tucker.core, n).transpose();
    std::memcpy(out.data() + at, block.data(), sizeof(double) * block.size());
    at += block.size();
    prefix = ttm(prefix, factors[n].transpose(), n);
  }
  std::memcpy(out.data(), prefix.data(), sizeof(double) * prefix.size());
  return out;
}

Vector GoalEvaluator::gradient(const Vector& v) {
  const State& s = state_at(v, true);
  const double a0 = problem_->alpha[0];

  DenseTensor e(problem_->x_scaled.dims());
  double* ev = e.data();
  for (std::size_t i = 0; i < e.size(); ++i)
    ev[i] = 2.0 * a0 * (s.recon_scaled[i] - problem_->x_scaled[i]);

  const std::size_t tau = problem_->x_scaled.dims().back();
  const std::size_t slab = problem_->x_scaled.size() / tau;
  for (std::size_t q = 0; q < problem_->qois.size(); ++q) {
    const double aq = problem_->alpha[q + 1];
    const auto& times = problem_->qois[q].time_set;
    for (std::size_t i = 0; i < times.size(); ++i) {
      const double coeff = -2.0 * aq * s.residuals[q][i];
      const double* zv = s.z[q][i].data();
      double* dst = ev + times[i] * slab;
      for (std::size_t j = 0; j < slab; ++j) dst[j] += coeff * zv[j];
    }
  }
  return project(e, s);
}

Vector GoalEvaluator::gn_hess_vec(const Vector& v, const Vector& w) {
  const State& s = state_at(v, true);
  GOTD_CHECK(w.size() == v.size(),
             "goal evaluator: direction vector layout mismatch");
  const double a0 = problem_->alpha[0];

  DenseTensor dir(problem_->x_scaled.dims());
  if (problem_->kind == ModelKind::cp) {
    KruskalModel wm = unflatten_cp(w, problem_->cp_layout);
    dir = cp_direction(s.cp, wm.factors);
  } else {
    TuckerModel wm = unflatten_tucker(w, problem_->tucker_layout);
    dir = tucker_direction(s.tucker, wm.core, wm.factors);
  }

  DenseTensor e(problem_->x_scaled.dims());
  double* ev = e.data();
  for (std::size_t i = 0; i < e.size(); ++i) ev[i] = 2.0 * a0 * dir[i];

  const std::size_t tau = problem_->x_scaled.dims().back();
  const std::size_t slab = problem_->x_scaled.size() / tau;
  for (std::size_t q = 0; q < problem_->qois.size(); ++q) {
    const double aq = problem_->alpha[q + 1];
    const auto& times = problem_->qois[q].time_set;
    for (std::size_t i = 0; i < times.size(); ++i) {
      const double* zv = s.z[q][i].data();
      const double* dv = dir.data() + times[i] * slab;
      double ip = 0.0;
      for (std::size_t j = 0; j < slab; ++j) ip += zv[j] * dv[j];
      const double coeff = 2.0 * aq * ip;
      double* dst = ev + times[i] * slab;
      for (std::size_t j = 0; j < slab; ++j) dst[j] += coeff * zv[j];
    }
  }
  return project(e, s);
}

Preconditioner GoalEvaluator::build_preconditioner(const Vector& v) {
  const State& s = state_at(v, false);
  Preconditioner p;
  p.kind = problem_->kind;

  if (problem_->kind == ModelKind::cp) {
    const auto& factors = s.cp.factors;
    const std::size_t d = factors.size();
    p.dims = problem_->cp_layout.dims;
    p.rank = problem_->cp_layout.rank;
    std::vector<Matrix> grams(d);
    for (std::size_t k = 0; k < d; ++k)
      grams[k] = factors[k].transpose() * factors[k];
    for (std::size_t n = 0; n < d; ++n) {
      Matrix gamma = Matrix::Ones(p.rank, p.rank);
      for (std::size_t k = 0; k < d; ++k)
        if (k != n) gamma.array() *= grams[k].array();
      Eigen::LLT<Matrix> llt(gamma);
      if (llt.info() != Eigen::Success) {
        gamma.diagonal().array() += 1e-12 * gamma.trace();
        llt.compute(gamma);
        GOTD_CHECK_NUMERIC(llt.info() == Eigen::Success,
                           "preconditioner: Cholesky failed after ridge");
      }
      p.mode_chol.push_back(std::move(llt));
    }
    return p;
  }

  const auto& factors = s.tucker.factors;
  const DenseTensor& core = s.tucker.core;
  const std::size_t d = factors.size();
  std::vector<Matrix> grams(d);
  for (std::size_t k = 0; k < d; ++k)
    grams[k] = factors[k].transpose() * factors[k];

  p.diag.resize(static_cast<Eigen::Index>(problem_->param_count()));
  // Core block diagonal: products of Gram diagonals over the core index.
  MultiIndex walk(core.dims());
  for (std::size_t flat = 0; flat < core.size(); ++flat) {
    double dval = 1.0;
    for (std::size_t k = 0; k < d; ++k)
      dval *= grams[k](static_cast<Eigen::Index>(walk.digit(k)),
                       static_cast<Eigen::Index>(walk.digit(k)));
    p.diag(static_cast<Eigen::Index>(flat)) = dval;
    walk.advance();
  }
  // Factor blocks: diag of G_(n) (kron of other Grams) G_(n)^T, each entry
  // repeated down its column of the factor.
  Eigen::Index at = static_cast<Eigen::Index>(core.size());
  for (std::size_t n = 0; n < d; ++n) {
    DenseTensor wcore = core;
    for (std::size_t k = 0; k < d; ++k)
      if (k != n) wcore = ttm(wcore, grams[k], k);
    const std::size_t rn = core.dim(n);
    Vector diag_n = Vector::Zero(static_cast<Eigen::Index>(rn));
    const std::size_t stride_n = core.stride(n);
    for (std::size_t flat = 0; flat < core.size(); ++flat) {
      const std::size_t digit = (flat / stride_n) % rn;
      diag_n(static_cast<Eigen::Index>(digit)) += core[flat] * wcore[flat];
    }
    const std::size_t in = problem_->tucker_layout.dims[n];
    for (std::size_t r = 0; r < rn; ++r)
      for (std::size_t i = 0; i < in; ++i)
        p.diag(at + static_cast<Eigen::Index>(r * in + i)) =
            diag_n(static_cast<Eigen::Index>(r));
    at += static_cast<Eigen::Index>(rn * in);
  }
  p.diag = p.diag.cwiseMax(1e-14);
  return p;
}

}  // namespace gotd
