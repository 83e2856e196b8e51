// SPDX-License-Identifier: MIT
#pragma once

#include <cstdint>
#include <vector>

#include "gotd/models.hpp"

namespace gotd {

struct AlsConfig {
  Eigen::Index rank = 1;
  double fit_tolerance = 1e-4;     // stop on change in fit below this
  std::size_t max_iterations = 100;
  std::uint64_t init_seed = 0;
};

struct CpAlsResult {
  KruskalModel model;
  std::vector<double> fit_history;  // fit = 1 - ||X-M||_F / ||X||_F per sweep
  bool gram_ridge_applied = false;  // a least-squares Gram went singular
};

/// Alternating least squares for the rank-R CP model. Factors are initialized
/// i.i.d. uniform(0,1) from the seeded generator; after convergence every
/// factor column is 2-norm-normalized with the norms absorbed into mode 0.
CpAlsResult cp_als(const DenseTensor& x, const AlsConfig& cfg);

}  // namespace gotd
