// SPDX-License-Identifier: MIT
#pragma once

#include <vector>

#include "gotd/models.hpp"

namespace gotd {

/// Rank selection for ST-HOSVD: either explicit per-mode ranks, or a relative
/// Frobenius error tolerance in (0,1) with the eigenvalue budget split
/// eps^2 ||X||_F^2 / d across modes.
struct SthosvdConfig {
  std::vector<std::size_t> ranks;       // non-empty selects explicit mode
  double tolerance = 0.0;               // used when ranks is empty
  std::vector<std::size_t> mode_order;  // empty = 0,...,d-1
};

/// Sequentially truncated HOSVD via Gram-matrix eigendecompositions. In
/// tolerance mode the returned model satisfies ||X - M||_F / ||X||_F <= eps.
/// Factors have orthonormal columns; the core is the projected tensor.
TuckerModel sthosvd(const DenseTensor& x, const SthosvdConfig& cfg);

}  // namespace gotd
