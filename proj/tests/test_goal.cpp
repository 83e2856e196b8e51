// SPDX-License-Identifier: MIT
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "goal_support.hpp"

using namespace gotd;
using namespace gotd::test;

TEST_CASE("compute_scaling: mean and population standard deviation") {
  // Variable mode of size 2; slice 0 holds {1,3}, slice 1 is constant 5.
  DenseTensor x({2, 2, 1}, {1, 3, 5, 5});
  ScalingInfo s = compute_scaling(x, 1);
  CHECK(s.mu(0) == doctest::Approx(2.0));
  CHECK(s.sigma(0) == doctest::Approx(1.0));
  CHECK(s.mu(1) == doctest::Approx(5.0));
  CHECK(s.sigma(1) == 1.0);  // constant slice forced to 1
}

TEST_CASE("apply_scaling then unscale is the identity") {
  Rng rng(1);
  DenseTensor x = rand_tensor({4, 3, 5, 2}, rng, -2.0, 7.0);
  ScalingInfo s = compute_scaling(x, 2);
  DenseTensor back = unscale(apply_scaling(x, s), s);
  CHECK(rel_err(back, x) < 1e-13);
}

TEST_CASE("unscale and chain_scale arithmetic") {
  ScalingInfo s;
  s.variable_mode = 0;
  s.mu = Vector::Constant(1, 3.0);
  s.sigma = Vector::Constant(1, 2.0);
  DenseTensor m({1, 1}, {1.0});
  CHECK(unscale(m, s)[0] == 5.0);
  DenseTensor z({1}, {7.0});
  chain_scale(z, s);
  CHECK(z[0] == 14.0);

  ScalingInfo id = ScalingInfo::identity(0, 1);
  DenseTensor m2({1, 1}, {1.25});
  CHECK(unscale(m2, id)[0] == 1.25);
  DenseTensor z2({1}, {7.0});
  chain_scale(z2, id);
  CHECK(z2[0] == 7.0);
}

TEST_CASE("QoI of an unscaled reconstruction matches the dense oracle") {
  TestProblem tp = build_cp_test_problem({5, 4, 4, 3}, 2, 42, true);
  GoalEvaluator ev(tp.problem);
  Rng rng(2);
  Vector v(static_cast<Eigen::Index>(tp.problem.param_count()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.uniform(0.3, 1.3);

  KruskalModel m = unflatten_cp(v, tp.problem.cp_layout);
  DenseTensor dense_unscaled = unscale(reconstruct_cp(m), tp.problem.scaling);
  auto values = ev.qoi_values(v);
  for (std::size_t q = 0; q < tp.problem.qois.size(); ++q) {
    const auto& qoi = tp.problem.qois[q];
    for (std::size_t i = 0; i < qoi.time_set.size(); ++i) {
      const double want = qoi.evaluate(dense_unscaled, qoi.time_set[i]);
      CHECK(values[q][i] ==
            doctest::Approx(want).epsilon(1e-12));
    }
  }
}

TEST_CASE("choose_weights: worked example and equal contributions") {
  // Two spatial points, one variable, two times; everything exact dyadic.
  DenseTensor x({2, 1, 1, 2}, {1.0, 1.0, 1.0, 1.0});
  DenseTensor m0({2, 1, 1, 2}, {1.25, 1.0, 1.0, 1.5});
  // fro = 0.0625 + 0.25 = 0.3125; variable-sum residuals are -0.25 and -0.5,
  // so the QoI term is also 0.3125.
  QoIDefinition q = make_variable_sum_qoi("s", 2, {0}, 1.0, {0, 1});
  ScalingInfo id = ScalingInfo::identity(2, 1);
  WeightChoice wc = choose_weights(x, id, m0, {q});
  CHECK(wc.fro_at_init == doctest::Approx(0.3125));
  CHECK(wc.qoi_sse_at_init[0] == doctest::Approx(0.3125));
  CHECK(wc.alpha[0] == doctest::Approx(1.0 / (2.0 * 0.3125)));
  CHECK(wc.alpha[1] == doctest::Approx(1.0 / (2.0 * 0.3125)));
  CHECK(wc.dropped.empty());
  // Each weighted term contributes 1/(Q+1).
  CHECK(wc.alpha[0] * wc.fro_at_init == doctest::Approx(0.5));
  CHECK(wc.alpha[1] * wc.qoi_sse_at_init[0] == doctest::Approx(0.5));

  // With a second QoI of identical residual the three terms are 1/3 each.
  QoIDefinition q2 = make_variable_sum_qoi("s2", 2, {0}, 1.0, {0, 1});
  WeightChoice wc3 = choose_weights(x, id, m0, {q, q2});
  CHECK(wc3.alpha[0] * wc3.fro_at_init == doctest::Approx(1.0 / 3));
  CHECK(wc3.alpha[1] * wc3.qoi_sse_at_init[0] == doctest::Approx(1.0 / 3));
  CHECK(wc3.alpha[2] * wc3.qoi_sse_at_init[1] == doctest::Approx(1.0 / 3));
}

TEST_CASE("objective at the initial model is 1 under the weight rule") {
  for (int nq = 1; nq <= 3; ++nq) {
    TestProblem tp = build_cp_test_problem({6, 5, 4, 7}, 3, 7 + nq, true, nq);
    GoalEvaluator ev(tp.problem);
    CHECK(std::abs(ev.objective(tp.v0) - 1.0) <= 1e-12);
  }
  TestProblem tt =
      build_tucker_test_problem({6, 5, 4, 7}, {2, 2, 2, 3}, 11, true);
  GoalEvaluator ev(tt.problem);
  CHECK(std::abs(ev.objective(tt.v0) - 1.0) <= 1e-12);
}

TEST_CASE("choose_weights drops a QoI already preserved at the initial model") {
  Rng rng(3);
  DenseTensor x = rand_tensor({3, 3, 4, 2}, rng, 0.1, 1.1);
  DenseTensor m0 = x;
  // Perturb the model only in variable 3, leaving variable-0 sums intact.
  for (std::size_t t = 0; t < 2; ++t)
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j) m0.at({i, j, 3, t}) += 0.1;
  QoIDefinition preserved = make_variable_sum_qoi("kept-exact", 2, {0}, 1.0,
                                                  {0, 1});
  QoIDefinition active = make_variable_sum_qoi("active", 2, {3}, 1.0, {0, 1});
  ScalingInfo id = ScalingInfo::identity(2, 4);
  WeightChoice wc = choose_weights(x, id, m0, {preserved, active});
  REQUIRE(wc.dropped.size() == 1);
  CHECK(wc.dropped[0] == "kept-exact");
  REQUIRE(wc.kept.size() == 1);
  CHECK(wc.kept[0] == 1);
  // Effective Q = 1: both weighted terms contribute 1/2 each.
  CHECK(wc.alpha[0] * wc.fro_at_init == doctest::Approx(0.5));
  CHECK(wc.alpha[1] * wc.qoi_sse_at_init[0] == doctest::Approx(0.5));
}

TEST_CASE("objective vanishes when the model reproduces the data exactly") {
  Rng rng(4);
  KruskalModel m{{rand_matrix(3, 2, rng), rand_matrix(2, 2, rng),
                  rand_matrix(4, 2, rng), rand_matrix(3, 2, rng)}};
  DenseTensor x = reconstruct_cp(m);
  ScalingInfo id = ScalingInfo::identity(2, 4);
  auto qois = standard_qois(2, 3);
  GoalProblem p = make_goal_problem_with_weights(
      x, id, qois, ModelKind::cp, CpLayout{m.dims(), 2}, {}, {1.0, 1.0, 1.0});
  GoalEvaluator ev(p);
  const Vector v = flatten_cp(m);
  CHECK(ev.objective(v) == 0.0);
  CHECK(ev.gradient(v).norm() == 0.0);
}

namespace {

double naive_objective(const GoalProblem& p, const Vector& v) {
  DenseTensor recon =
      p.kind == ModelKind::cp
          ? naive_reconstruct_cp(unflatten_cp(v, p.cp_layout))
          : reconstruct_tucker(unflatten_tucker(v, p.tucker_layout));
  double fro = 0.0;
  for (std::size_t i = 0; i < p.x_scaled.size(); ++i) {
    const double d = p.x_scaled[i] - recon[i];
    fro += d * d;
  }
  DenseTensor un = unscale(recon, p.scaling);
  double f = p.alpha[0] * fro;
  for (std::size_t q = 0; q < p.qois.size(); ++q) {
    double sse = 0.0;
    for (std::size_t i = 0; i < p.qois[q].time_set.size(); ++i) {
      const double d = p.targets[q][i] -
                       p.qois[q].evaluate(un, p.qois[q].time_set[i]);
      sse += d * d;
    }
    f += p.alpha[q + 1] * sse;
  }
  return f;
}

Vector random_point(const GoalProblem& p, Rng& rng) {
  Vector v(static_cast<Eigen::Index>(p.param_count()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.uniform(0.3, 1.3);
  return v;
}

}  // namespace

TEST_CASE("evaluator rejects parameter vectors with the wrong layout") {
  TestProblem tp = build_cp_test_problem({5, 4, 4, 3}, 2, 19, false);
  GoalEvaluator ev(tp.problem);
  Vector bad(tp.v0.size() + 1);
  bad.setZero();
  CHECK_THROWS_AS(ev.objective(bad), ConfigError);
  CHECK_THROWS_AS(ev.gradient(bad), ConfigError);
  Vector bad_dir(tp.v0.size() - 1);
  bad_dir.setZero();
  CHECK_THROWS_AS(ev.gn_hess_vec(tp.v0, bad_dir), ConfigError);
}

TEST_CASE("objective matches a from-scratch evaluator on random problems") {
  TestProblem tc = build_cp_test_problem({5, 4, 4, 3}, 2, 21, true);
  TestProblem tt = build_tucker_test_problem({5, 4, 4, 3}, {2, 2, 2, 2}, 22,
                                             true);
  Rng rng(5);
  for (const TestProblem* tp : {&tc, &tt}) {
    GoalEvaluator ev(tp->problem);
    for (int i = 0; i < 3; ++i) {
      Vector v = random_point(tp->problem, rng);
      const double want = naive_objective(tp->problem, v);
      CHECK(std::abs(ev.objective(v) - want) <= 1e-12 * std::abs(want));
    }
  }
}

TEST_CASE("objective decomposition reproduces the weighted term sum") {
  TestProblem tp = build_cp_test_problem({5, 4, 4, 3}, 2, 33, true, 3);
  GoalEvaluator ev(tp.problem);
  Rng rng(6);
  Vector v = random_point(tp.problem, rng);
  auto [fro, sse] = ev.term_breakdown(v);
  double total = tp.problem.alpha[0] * fro;
  for (std::size_t q = 0; q < sse.size(); ++q)
    total += tp.problem.alpha[q + 1] * sse[q];
  CHECK(std::abs(ev.objective(v) - total) <= 1e-12 * std::abs(total));
}

TEST_CASE("gradient matches central finite differences") {
  struct Config {
    bool tucker;
    bool scaled;
    int nqois;
  };
  const std::vector<Config> configs = {
      {false, true, 2}, {false, false, 1}, {false, true, 3},
      {true, true, 2},  {true, false, 3},
  };
  Rng rng(7);
  std::uint64_t seed = 100;
  for (const auto& c : configs) {
    TestProblem tp =
        c.tucker ? build_tucker_test_problem({6, 5, 4, 7}, {2, 2, 2, 3},
                                             seed++, c.scaled, c.nqois)
                 : build_cp_test_problem({6, 5, 4, 7}, 3, seed++, c.scaled,
                                         c.nqois);
    GoalEvaluator ev(tp.problem);
    Vector v = random_point(tp.problem, rng);
    Vector g = ev.gradient(v);
    Vector fd = fd_gradient([&](const Vector& p) { return ev.objective(p); },
                            v, 1e-6);
    CHECK(rel_err(g, fd) <= 1e-6);
  }
}

TEST_CASE("with no QoIs the gradient reduces to the classic formulas") {
  Rng rng(8);
  // CP: 2(A Gamma - MTTKRP(X)) per mode.
  {
    DenseTensor x = rand_tensor({5, 4, 3}, rng, -1.0, 1.0);
    CpLayout layout{{5, 4, 3}, 3};
    GoalProblem p = make_goal_problem_with_weights(
        x, ScalingInfo::identity(1, 4), {}, ModelKind::cp, layout, {}, {0.35});
    GoalEvaluator ev(p);
    Vector v = random_point(p, rng);
    Vector g = ev.gradient(v);

    KruskalModel m = unflatten_cp(v, layout);
    std::vector<Matrix> grams(3);
    for (int k = 0; k < 3; ++k)
      grams[k] = m.factors[k].transpose() * m.factors[k];
    Vector want(v.size());
    Eigen::Index at = 0;
    for (std::size_t n = 0; n < 3; ++n) {
      Matrix gamma = Matrix::Ones(3, 3);
      for (std::size_t k = 0; k < 3; ++k)
        if (k != n) gamma.array() *= grams[k].array();
      Matrix block =
          2.0 * 0.35 * (m.factors[n] * gamma - naive_mttkrp(x, m.factors, n));
      std::copy(block.data(), block.data() + block.size(), want.data() + at);
      at += block.size();
    }
    CHECK(rel_err(g, want) <= 1e-12);
  }
  // Tucker: -2 * projections of U = X - M through factors and core.
  {
    DenseTensor x = rand_tensor({5, 4, 3}, rng, -1.0, 1.0);
    TuckerLayout layout{{5, 4, 3}, {2, 3, 2}};
    GoalProblem p = make_goal_problem_with_weights(x,
                                                   ScalingInfo::identity(1, 4),
                                                   {}, ModelKind::tucker, {},
                                                   layout, {0.8});
    GoalEvaluator ev(p);
    Vector v = random_point(p, rng);
    Vector g = ev.gradient(v);

    TuckerModel m = unflatten_tucker(v, layout);
    DenseTensor recon = reconstruct_tucker(m);
    DenseTensor u(x.dims());
    for (std::size_t i = 0; i < x.size(); ++i) u[i] = x[i] - recon[i];

    Vector want(v.size());
    DenseTensor ucore = u;
    for (std::size_t k = 0; k < 3; ++k)
      ucore = ttm(ucore, m.factors[k].transpose(), k);
    Eigen::Index at = 0;
    for (std::size_t i = 0; i < ucore.size(); ++i)
      want(at++) = -2.0 * 0.8 * ucore[i];
    for (std::size_t n = 0; n < 3; ++n) {
      DenseTensor t = u;
      for (std::size_t j = 0; j < 3; ++j)
        if (j != n) t = ttm(t, m.factors[j].transpose(), j);
      Matrix block = -2.0 * 0.8 * matricize(t, n) *
                     matricize(m.core, n).transpose();
      std::copy(block.data(), block.data() + block.size(), want.data() + at);
      at += block.size();
    }
    CHECK(rel_err(g, want) <= 1e-12);
  }
}

TEST_CASE("Gauss-Newton Hessian-vector products match the Jacobian oracle") {
  TestProblem tc = build_cp_test_problem({6, 5, 4, 7}, 3, 51, true);
  TestProblem tt =
      build_tucker_test_problem({6, 5, 4, 7}, {2, 2, 2, 3}, 52, true);
  Rng rng(9);
  for (const TestProblem* tp : {&tc, &tt}) {
    GoalEvaluator ev(tp->problem);
    Vector v = random_point(tp->problem, rng);
    Matrix j = fd_jacobian(tp->problem, v, 1e-6);
    for (int trial = 0; trial < 4; ++trial) {
      Vector w(v.size());
      for (Eigen::Index i = 0; i < w.size(); ++i)
        w(i) = rng.uniform(-1.0, 1.0);
      Vector hw = ev.gn_hess_vec(v, w);
      Vector want = 2.0 * (j.transpose() * (j * w));
      CHECK(rel_err(hw, want) <= 1e-5);
    }
  }
}

TEST_CASE("Gauss-Newton operator is symmetric and positive semi-definite") {
  TestProblem tp = build_cp_test_problem({5, 4, 4, 3}, 2, 61, true);
  GoalEvaluator ev(tp.problem);
  Rng rng(10);
  Vector v = random_point(tp.problem, rng);
  for (int trial = 0; trial < 100; ++trial) {
    Vector u(v.size()), w(v.size());
    for (Eigen::Index i = 0; i < u.size(); ++i) {
      u(i) = rng.uniform(-1.0, 1.0);
      w(i) = rng.uniform(-1.0, 1.0);
    }
    Vector hu = ev.gn_hess_vec(v, u);
    Vector hw = ev.gn_hess_vec(v, w);
    CHECK(std::abs(u.dot(hw) - hu.dot(w)) <= 1e-10 * u.norm() * w.norm());
    CHECK(w.dot(hw) >= -1e-10 * w.squaredNorm());
  }
  // H applied to zero is zero.
  CHECK(ev.gn_hess_vec(v, Vector::Zero(v.size())).norm() == 0.0);
}

TEST_CASE("CP preconditioner: identity on orthonormal factors, solve check") {
  // Orthonormal columns in every mode make each Hadamard Gram the identity.
  std::vector<std::size_t> dims = {4, 4, 4};
  CpLayout layout{dims, 2};
  Rng rng(11);
  DenseTensor x = rand_tensor(dims, rng);
  GoalProblem p = make_goal_problem_with_weights(
      x, ScalingInfo::identity(1, 4), {}, ModelKind::cp, layout, {}, {1.0});
  GoalEvaluator ev(p);

  KruskalModel m;
  for (int k = 0; k < 3; ++k) {
    Matrix a = rand_matrix(4, 2, rng, -1.0, 1.0);
    Eigen::HouseholderQR<Matrix> qr(a);
    Matrix q = qr.householderQ() * Matrix::Identity(4, 2);
    m.factors.push_back(q);
  }
  Vector v = flatten_cp(m);
  Preconditioner pre = ev.build_preconditioner(v);
  Vector r(v.size());
  for (Eigen::Index i = 0; i < r.size(); ++i) r(i) = rng.uniform(-1.0, 1.0);
  CHECK(rel_err(pre.apply(r), r) <= 1e-12);

  // General factors: apply(block * w) recovers w.
  Vector v2 = random_point(p, rng);
  Preconditioner pre2 = ev.build_preconditioner(v2);
  KruskalModel m2 = unflatten_cp(v2, layout);
  std::vector<Matrix> grams(3);
  for (int k = 0; k < 3; ++k)
    grams[k] = m2.factors[k].transpose() * m2.factors[k];
  Vector w(v.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = rng.uniform(-1.0, 1.0);
  Vector rhs(v.size());
  Eigen::Index at = 0;
  for (std::size_t n = 0; n < 3; ++n) {
    Matrix gamma = Matrix::Ones(2, 2);
    for (std::size_t k = 0; k < 3; ++k)
      if (k != n) gamma.array() *= grams[k].array();
    Eigen::Map<const Matrix> wb(w.data() + at, 4, 2);
    Eigen::Map<Matrix> rb(rhs.data() + at, 4, 2);
    rb = wb * gamma;  // (Gamma (x) I) vec(W)
    at += 8;
  }
  CHECK(rel_err(pre2.apply(rhs), w) <= 1e-10);
}

TEST_CASE("Tucker preconditioner diagonal matches operator probing") {
  std::vector<std::size_t> dims = {4, 3, 3};
  TuckerLayout layout{dims, {2, 2, 2}};
  Rng rng(12);
  DenseTensor x = rand_tensor(dims, rng);
  // Frobenius-only problem with weight 1/2 so the GN operator is exactly
  // J^T J (the factor 2 from the sum-of-squares convention cancels).
  GoalProblem p = make_goal_problem_with_weights(
      x, ScalingInfo::identity(1, 3), {}, ModelKind::tucker, {}, layout, {0.5});
  GoalEvaluator ev(p);
  Vector v = random_point(p, rng);
  Preconditioner pre = ev.build_preconditioner(v);
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    Vector e = Vector::Zero(v.size());
    e(i) = 1.0;
    const double want = ev.gn_hess_vec(v, e)(i);  // diagonal of J^T J
    CHECK(pre.diag(i) == doctest::Approx(want).epsilon(1e-6));
  }
}

TEST_CASE("a point preserving all QoIs at unchanged loss scores 1/(Q+1)") {
  // Exact dyadic data: model reconstruction plus a perturbation whose
  // variable sums cancel exactly in floating point.
  KruskalModel m{{Matrix::Ones(2, 1), Matrix::Ones(2, 1), Matrix::Ones(2, 1),
                  Matrix::Ones(2, 1)}};
  m.factors[0] << 1.0, 2.0;
  m.factors[3] << 1.0, 0.5;
  DenseTensor x = reconstruct_cp(m);
  // Perturb variable 0 at two spatial positions with canceling +/- 0.25.
  for (std::size_t t = 0; t < 2; ++t) {
    x.at({0, 0, 0, t}) += 0.25;
    x.at({1, 0, 0, t}) -= 0.25;
  }
  QoIDefinition q = make_variable_sum_qoi("sum0", 2, {0}, 1.0, {0, 1});
  ScalingInfo id = ScalingInfo::identity(2, 2);
  const double fro0 = 4.0 * 0.25 * 0.25;  // the perturbation energy
  GoalProblem p = make_goal_problem_with_weights(
      x, id, {q}, ModelKind::cp, CpLayout{{2, 2, 2, 2}, 1}, {},
      {1.0 / (2.0 * fro0), 1.0});
  GoalEvaluator ev(p);
  const Vector v = flatten_cp(m);
  auto [fro, sse] = ev.term_breakdown(v);
  CHECK(fro == fro0);      // Frobenius term unchanged by the QoI match
  CHECK(sse[0] == 0.0);    // QoI residuals exactly zero
  CHECK(std::abs(ev.objective(v) - 0.5) <= 1e-12);  // 1/(Q+1) with Q = 1
}
