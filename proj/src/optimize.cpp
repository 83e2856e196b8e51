// SPDX-License-Identifier: MIT
#include "gotd/optimize.hpp"

#include <cmath>
#include <deque>

#include "gotd/common.hpp"

namespace gotd {

namespace {

TraceRecord make_record(std::size_t iter, double f, double grad_norm,
                        double step_norm, std::size_t tcg_iters,
                        const TermProbeFn& probe, const Vector& v) {
  TraceRecord r;
  r.iteration = iter;
  r.f = f;
  r.grad_norm = grad_norm;
  r.step_norm = step_norm;
  r.tcg_iterations = tcg_iters;
  r.accepted = true;
  if (probe) {
    auto [fro, qoi] = probe(v);
    r.fro_term = fro;
    r.qoi_terms = std::move(qoi);
  }
  return r;
}

struct LineSearchResult {
  double alpha = 0.0;
  double f = 0.0;
  Vector g;
  bool ok = false;
};

// Strong-Wolfe line search (bracket then zoom). phi(a) = f(v + a*d).
LineSearchResult wolfe_search(const Objective& f, const GradientFn& grad,
                              const Vector& v, double f0, const Vector& g0,
                              const Vector& d, double c1, double c2) {
  LineSearchResult out;
  const double dphi0 = g0.dot(d);
  if (!(dphi0 < 0.0)) return out;  // not a descent direction

  const auto phi = [&](double a) { return f(v + a * d); };
  const auto dphi = [&](double a, Vector& g_out) {
    g_out = grad(v + a * d);
    return g_out.dot(d);
  };

  auto zoom = [&](double lo, double hi, double f_lo) -> LineSearchResult {
    LineSearchResult z;
    Vector g_trial;
    for (int i = 0; i < 50; ++i) {
      const double a = 0.5 * (lo + hi);
      const double fa = phi(a);
      if (fa > f0 + c1 * a * dphi0 || fa >= f_lo) {
        hi = a;
      } else {
        const double da = dphi(a, g_trial);
        if (std::abs(da) <= -c2 * dphi0) {
          z.alpha = a;
          z.f = fa;
          z.g = std::move(g_trial);
          z.ok = true;
          return z;
        }
        if (da * (hi - lo) >= 0.0) hi = lo;
        lo = a;
        f_lo = fa;
      }
      if (std::abs(hi - lo) < 1e-16 * std::max(1.0, std::abs(lo))) break;
    }
    return z;
  };

  double a_prev = 0.0, f_prev = f0;
  double a = 1.0;
  Vector g_trial;
  for (int i = 0; i < 30; ++i) {
    const double fa = phi(a);
    if (fa > f0 + c1 * a * dphi0 || (i > 0 && fa >= f_prev))
      return zoom(a_prev, a, f_prev);
    const double da = dphi(a, g_trial);
    if (std::abs(da) <= -c2 * dphi0) {
      out.alpha = a;
      out.f = fa;
      out.g = std::move(g_trial);
      out.ok = true;
      return out;
    }
    if (da >= 0.0) return zoom(a, a_prev, fa);
    a_prev = a;
    f_prev = fa;
    a *= 2.0;
    if (a > 1e12) break;
  }
  return out;
}

}  // namespace

OptResult lbfgs_minimize(const Objective& f, const GradientFn& grad,
                         const Vector& v0, const OptConfig& cfg,
                         const TermProbeFn& probe) {
  OptResult res;
  res.v = v0;
  res.f = f(res.v);
  Vector g = grad(res.v);
  res.trace.records.push_back(
      make_record(0, res.f, g.norm(), 0.0, 0, probe, res.v));

  std::deque<Vector> s_hist, y_hist;
  std::deque<double> rho_hist;

  for (std::size_t iter = 1; iter <= cfg.max_outer_iterations; ++iter) {
    if (g.norm() <= cfg.grad_floor) break;

    // Two-loop recursion.
    Vector q = g;
    std::vector<double> a_coef(s_hist.size());
    for (std::size_t i = s_hist.size(); i-- > 0;) {
      a_coef[i] = rho_hist[i] * s_hist[i].dot(q);
      q -= a_coef[i] * y_hist[i];
    }
    if (!s_hist.empty()) {
      const double gamma =
          s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
      q *= gamma;
    }
    for (std::size_t i = 0; i < s_hist.size(); ++i) {
      const double b = rho_hist[i] * y_hist[i].dot(q);
      q += (a_coef[i] - b) * s_hist[i];
    }
    Vector d = -q;
    if (!(d.dot(g) < 0.0)) d = -g;

    LineSearchResult ls =
        wolfe_search(f, grad, res.v, res.f, g, d, cfg.wolfe_c1, cfg.wolfe_c2);
    if (!ls.ok) {
      res.trace.line_search_failed = true;
      break;
    }

    Vector step = ls.alpha * d;
    Vector y = ls.g - g;
    const double sy = step.dot(y);
    if (sy > 1e-14 * step.norm() * y.norm()) {
      s_hist.push_back(step);
      y_hist.push_back(std::move(y));
      rho_hist.push_back(1.0 / sy);
      if (s_hist.size() > cfg.lbfgs_memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    }

    res.v += step;
    res.f = ls.f;
    g = std::move(ls.g);
    res.trace.records.push_back(
        make_record(iter, res.f, g.norm(), step.norm(), 0, probe, res.v));
  }
  return res;
}

namespace {

struct TcgResult {
  Vector s;
  std::size_t iterations = 0;
  bool hit_boundary = false;
};

// Preconditioned Steihaug-Toint truncated CG for min g's + s'Hs/2 subject to
// ||s||_P <= delta, where apply() solves with P. The P-norm quantities are
// tracked by the standard recurrences, so P itself is never applied.
TcgResult steihaug_tcg(const Vector& g, const std::function<Vector(const Vector&)>& hvp,
                       const std::function<Vector(const Vector&)>& apply,
                       double delta, std::size_t max_iters, double tol) {
  TcgResult out;
  out.s = Vector::Zero(g.size());
  Vector r = g;
  Vector z = apply(r);
  Vector d = -z;
  double rz = r.dot(z);
  GOTD_CHECK_NUMERIC(std::isfinite(rz),
                     "tcg: preconditioned residual is not finite");

  double e_pe = 0.0;   // <s, s>_P
  double e_pd = 0.0;   // <s, d>_P
  double d_pd = rz;    // <d, d>_P
  const double delta_sq = delta * delta;

  const auto to_boundary = [&](double from_e_pe, double from_e_pd,
                               double from_d_pd) {
    // positive root of ||s + sigma d||_P = delta
    const double disc = std::max(
        from_e_pd * from_e_pd + from_d_pd * (delta_sq - from_e_pe), 0.0);
    return (-from_e_pd + std::sqrt(disc)) / from_d_pd;
  };

  for (std::size_t j = 0; j < max_iters; ++j) {
    ++out.iterations;
    Vector hd = hvp(d);
    GOTD_CHECK_NUMERIC(hd.allFinite(),
                       "tcg: Hessian-vector product is not finite");
    const double dhd = d.dot(hd);
    if (dhd <= 0.0) {
      out.s += to_boundary(e_pe, e_pd, d_pd) * d;
      out.hit_boundary = true;
      return out;
    }
    const double alpha = rz / dhd;
    const double e_pe_next = e_pe + 2.0 * alpha * e_pd + alpha * alpha * d_pd;
    if (e_pe_next >= delta_sq) {
      out.s += to_boundary(e_pe, e_pd, d_pd) * d;
      out.hit_boundary = true;
      return out;
    }
    out.s += alpha * d;
    r += alpha * hd;
    if (r.norm() <= tol) return out;
    z = apply(r);
    const double rz_next = r.dot(z);
    const double beta = rz_next / rz;
    e_pd = beta * (e_pd + alpha * d_pd);
    e_pe = e_pe_next;
    d_pd = rz_next + beta * beta * d_pd;
    d = -z + beta * d;
    rz = rz_next;
  }
  return out;
}

}  // namespace

OptResult tr_newton_minimize(const Objective& f, const GradientFn& grad,
                             const HessVecFn& hvp,
                             const PrecondBuildFn& precond, const Vector& v0,
                             const OptConfig& cfg, const TermProbeFn& probe) {
  OptResult res;
  res.v = v0;
  res.f = f(res.v);
  Vector g = grad(res.v);
  res.trace.records.push_back(
      make_record(0, res.f, g.norm(), 0.0, 0, probe, res.v));

  double delta = std::max(v0.norm() / 10.0, 1.0);
  const double delta_max = cfg.max_radius_factor * delta;
  const std::size_t dim = static_cast<std::size_t>(v0.size());
  const std::size_t tcg_cap = std::min(cfg.tcg_max_iterations, dim);

  for (std::size_t iter = 1; iter <= cfg.max_outer_iterations; ++iter) {
    const double gnorm = g.norm();
    if (gnorm <= cfg.grad_floor) break;

    std::function<Vector(const Vector&)> apply;
    if (precond) apply = precond(res.v);
    if (!apply) apply = [](const Vector& r) { return r; };

    const double tol =
        gnorm * (cfg.tcg_rel_tol >= 0.0 ? cfg.tcg_rel_tol
                                        : std::min(0.5, std::sqrt(gnorm)));
    TcgResult tcg = steihaug_tcg(
        g, [&](const Vector& w) { return hvp(res.v, w); }, apply, delta,
        tcg_cap, tol);

    Vector hs = hvp(res.v, tcg.s);
    GOTD_CHECK_NUMERIC(hs.allFinite(),
                       "trust-region: Hessian-vector product is not finite");
    const double pred = -(g.dot(tcg.s) + 0.5 * tcg.s.dot(hs));
    if (!(pred > 0.0)) {
      delta *= cfg.shrink_factor;
      continue;
    }

    const double f_new = f(res.v + tcg.s);
    const double rho = (res.f - f_new) / pred;
    if (!(rho >= cfg.accept_threshold) || !(f_new < res.f)) {
      delta *= cfg.shrink_factor;
      continue;
    }

    res.v += tcg.s;
    res.f = f_new;
    g = grad(res.v);
    if (rho > cfg.expand_threshold && tcg.hit_boundary)
      delta = std::min(cfg.expand_factor * delta, delta_max);
    res.trace.records.push_back(make_record(
        iter, res.f, g.norm(), tcg.s.norm(), tcg.iterations, probe, res.v));
  }
  return res;
}

}  // namespace gotd
