// SPDX-License-Identifier: MIT
#pragma once

#include <cstdint>
#include <vector>

#include "gotd/models.hpp"

namespace gotd {

/// Synthetic low-rank-plus-noise tensor: the reconstruction of a seeded CP
/// model with uniform(0,1) factor entries, plus Gaussian noise scaled so its
/// expected Frobenius norm is `noise` times the low-rank part's norm.
struct SynthSpec {
  std::vector<std::size_t> dims;
  Eigen::Index rank = 1;
  double noise = 0.0;
  std::uint64_t seed = 0;
};

DenseTensor synth_generate(const SynthSpec& spec);

}  // namespace gotd
