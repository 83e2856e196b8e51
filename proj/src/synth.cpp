// SPDX-License-Identifier: MIT
#include "gotd/synth.hpp"

#include <cmath>

namespace gotd {

DenseTensor synth_generate(const SynthSpec& spec) {
  GOTD_CHECK(!spec.dims.empty(), "synth: dimensions are required");
  GOTD_CHECK(spec.rank >= 1, "synth: rank must be at least 1");
  GOTD_CHECK(spec.noise >= 0.0, "synth: noise level must be nonnegative");

  Rng rng(spec.seed);
  KruskalModel truth;
  for (std::size_t d : spec.dims) {
    Matrix f(static_cast<Eigen::Index>(d), spec.rank);
    for (Eigen::Index c = 0; c < f.cols(); ++c)
      for (Eigen::Index r = 0; r < f.rows(); ++r) f(r, c) = rng.uniform();
    truth.factors.push_back(std::move(f));
  }
  DenseTensor x = reconstruct_cp(truth);
  if (spec.noise > 0.0) {
    const double scale = spec.noise * frob_norm(x) /
                         std::sqrt(static_cast<double>(x.size()));
    for (auto& v : x.values()) v += scale * rng.normal();
  }
  return x;
}

}  // namespace gotd
