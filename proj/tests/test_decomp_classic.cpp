// SPDX-License-Identifier: MIT
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gotd/cp_als.hpp"
#include "gotd/sthosvd.hpp"
#include "support.hpp"

using namespace gotd;
using namespace gotd::test;

TEST_CASE("cp_als recovers an exact rank-1 tensor") {
  Rng rng(1);
  Matrix a = rand_matrix(6, 1, rng, 0.1, 1.1);
  Matrix b = rand_matrix(5, 1, rng, 0.1, 1.1);
  Matrix c = rand_matrix(4, 1, rng, 0.1, 1.1);
  DenseTensor x = reconstruct_cp(KruskalModel{{a, b, c}});

  AlsConfig cfg;
  cfg.rank = 1;
  cfg.fit_tolerance = 1e-12;
  cfg.max_iterations = 100;
  cfg.init_seed = 99;
  CpAlsResult res = cp_als(x, cfg);
  CHECK(frob_err(x, reconstruct_cp(res.model)) <= 1e-8);
}

TEST_CASE("cp_als fit history is non-decreasing") {
  Rng rng(2);
  DenseTensor x = rand_tensor({4, 3, 5}, rng);
  AlsConfig cfg;
  cfg.rank = 3;
  cfg.fit_tolerance = 0.0;  // run the full budget
  cfg.max_iterations = 40;
  cfg.init_seed = 7;
  CpAlsResult res = cp_als(x, cfg);
  REQUIRE(res.fit_history.size() > 1);
  for (std::size_t i = 1; i < res.fit_history.size(); ++i)
    CHECK(res.fit_history[i] >= res.fit_history[i - 1] - 1e-12);
}

TEST_CASE("cp_als accepts ranks above the mode sizes and flags the ridge") {
  Rng rng(3);
  DenseTensor x = rand_tensor({4, 3, 5}, rng);
  AlsConfig cfg;
  cfg.rank = 60;
  cfg.fit_tolerance = 0.0;
  cfg.max_iterations = 5;
  cfg.init_seed = 11;
  CpAlsResult res = cp_als(x, cfg);
  CHECK(res.gram_ridge_applied);
  for (std::size_t i = 1; i < res.fit_history.size(); ++i)
    CHECK(res.fit_history[i] >= res.fit_history[i - 1] - 1e-12);
}

TEST_CASE("cp_als is bitwise deterministic under a fixed seed") {
  Rng rng(4);
  DenseTensor x = rand_tensor({3, 4, 2}, rng);
  AlsConfig cfg;
  cfg.rank = 2;
  cfg.max_iterations = 20;
  cfg.init_seed = 1234;
  CpAlsResult r1 = cp_als(x, cfg);
  CpAlsResult r2 = cp_als(x, cfg);
  REQUIRE(r1.fit_history.size() == r2.fit_history.size());
  for (std::size_t k = 0; k < 3; ++k)
    CHECK(r1.model.factors[k] == r2.model.factors[k]);
  CHECK(r1.fit_history == r2.fit_history);
}

TEST_CASE("cp_als rejects rank 0 and the zero tensor") {
  DenseTensor x({2, 2}, {1, 2, 3, 4});
  AlsConfig cfg;
  cfg.rank = 0;
  CHECK_THROWS_AS(cp_als(x, cfg), ConfigError);
  cfg.rank = 1;
  DenseTensor z({2, 2});
  CHECK_THROWS_AS(cp_als(z, cfg), NumericError);
}

TEST_CASE("sthosvd reproduces an exact rank-(1,1,1) tensor") {
  Rng rng(5);
  Matrix a = rand_matrix(6, 1, rng, 0.1, 1.1);
  Matrix b = rand_matrix(5, 1, rng, 0.1, 1.1);
  Matrix c = rand_matrix(4, 1, rng, 0.1, 1.1);
  DenseTensor x = reconstruct_cp(KruskalModel{{a, b, c}});

  SthosvdConfig cfg;
  cfg.tolerance = 1e-8;
  TuckerModel m = sthosvd(x, cfg);
  CHECK(m.ranks() == std::vector<std::size_t>({1, 1, 1}));
  CHECK(frob_err(x, reconstruct_tucker(m)) <= 1e-12);
}

TEST_CASE("sthosvd satisfies the error tolerance it was given") {
  Rng rng(6);
  for (double eps : {0.5, 0.1, 0.01}) {
    DenseTensor x = rand_tensor({6, 5, 4}, rng, -1.0, 1.0);
    SthosvdConfig cfg;
    cfg.tolerance = eps;
    TuckerModel m = sthosvd(x, cfg);
    CHECK(frob_err(x, reconstruct_tucker(m)) <= eps);
  }
}

TEST_CASE("sthosvd factors are orthonormal and reproduce the core") {
  Rng rng(7);
  DenseTensor x = rand_tensor({6, 5, 4, 3}, rng, -1.0, 1.0);
  SthosvdConfig cfg;
  cfg.tolerance = 0.2;
  TuckerModel m = sthosvd(x, cfg);
  for (const auto& f : m.factors) {
    Matrix gram = f.transpose() * f;
    CHECK((gram - Matrix::Identity(f.cols(), f.cols())).norm() <= 1e-12);
  }
  // Core equals the projection of X onto the factor spaces.
  DenseTensor proj = x;
  for (std::size_t k = 0; k < 4; ++k)
    proj = ttm(proj, m.factors[k].transpose(), k);
  CHECK(rel_err(proj, m.core) <= 1e-12);
}

TEST_CASE("sthosvd explicit ranks and validation") {
  Rng rng(8);
  DenseTensor x = rand_tensor({6, 5, 4}, rng);
  SthosvdConfig cfg;
  cfg.ranks = {2, 3, 2};
  TuckerModel m = sthosvd(x, cfg);
  CHECK(m.ranks() == cfg.ranks);

  cfg.ranks = {2, 6, 2};  // exceeds mode 1
  CHECK_THROWS_AS(sthosvd(x, cfg), ConfigError);

  cfg.ranks.clear();
  cfg.tolerance = 1.5;
  CHECK_THROWS_AS(sthosvd(x, cfg), ConfigError);
  cfg.tolerance = 0.0;
  CHECK_THROWS_AS(sthosvd(x, cfg), ConfigError);
}

TEST_CASE("sthosvd honors a custom mode processing order") {
  Rng rng(9);
  DenseTensor x = rand_tensor({5, 4, 3}, rng, -1.0, 1.0);
  SthosvdConfig cfg;
  cfg.tolerance = 0.3;
  cfg.mode_order = {2, 0, 1};
  TuckerModel m = sthosvd(x, cfg);
  CHECK(frob_err(x, reconstruct_tucker(m)) <= 0.3);
  for (const auto& f : m.factors) {
    Matrix gram = f.transpose() * f;
    CHECK((gram - Matrix::Identity(f.cols(), f.cols())).norm() <= 1e-12);
  }
}
