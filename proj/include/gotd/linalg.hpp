// SPDX-License-Identifier: MIT
#pragma once

#include "gotd/kernels.hpp"

namespace gotd {

/// Solves S * X = B for symmetric positive semi-definite S. Tries a plain
/// Cholesky first; on numerical failure re-solves with a ridge of
/// 1e-12 * trace(S) (symmetric pseudo-inverse route for rank-deficient S).
/// Sets *ridged when the fallback fired.
Matrix solve_spsd(const Matrix& s, const Matrix& b, bool* ridged = nullptr);

}  // namespace gotd
