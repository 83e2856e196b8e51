// SPDX-License-Identifier: MIT
#pragma once

#include <Eigen/Dense>
#include <vector>

#include "gotd/dense_tensor.hpp"

namespace gotd {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Mode-n matricization: rows index mode n, columns run over the remaining
/// modes with the lowest mode varying fastest.
Matrix matricize(const DenseTensor& x, std::size_t n);

/// Inverse of matricize: folds an I_n x (prod of other dims) matrix back into
/// a tensor with the given dimensions.
DenseTensor fold(const Matrix& m, std::size_t n,
                 const std::vector<std::size_t>& dims);

/// n-mode product Y = X x_n A, defined by Y_(n) = A * X_(n).
DenseTensor ttm(const DenseTensor& x, const Matrix& a, std::size_t n);

/// Column-wise Kronecker product; column r is kron(A(:,r), B(:,r)) with the
/// second operand varying fastest.
Matrix khatri_rao(const Matrix& a, const Matrix& b);

/// X_(n) * (A^{d-1} kr ... kr A^{n+1} kr A^{n-1} kr ... kr A^0), computed by
/// streaming over the unfolded tensor with per-mode running row products;
/// no Khatri-Rao matrix is ever materialized.
Matrix mttkrp(const DenseTensor& x, const std::vector<Matrix>& factors,
              std::size_t n);

double frob_norm(const DenseTensor& x);
double frob_norm_sq(const DenseTensor& x);

/// ||X - M||_F / ||X||_F; throws when ||X||_F == 0.
double frob_err(const DenseTensor& x, const DenseTensor& m);

/// Slice at index t of the last (time) mode; result drops that mode.
DenseTensor time_slice(const DenseTensor& x, std::size_t t);

/// Running row-product over a set of factor matrices driven by a multi-index
/// walk (lowest listed mode fastest). value() is the elementwise product of
/// factors[modes[j]].row(digit_j) over all listed modes.
class FactorRowProduct {
 public:
  FactorRowProduct(const std::vector<Matrix>& factors,
                   std::vector<std::size_t> modes, Eigen::Index rank);

  const Eigen::ArrayXd& value() const { return partials_[0]; }
  void reset();
  void advance();

 private:
  void recompute_from(std::size_t level);

  const std::vector<Matrix>* factors_;
  std::vector<std::size_t> modes_;
  std::vector<std::size_t> digits_;
  std::vector<std::size_t> sizes_;
  std::vector<Eigen::ArrayXd> partials_;  // partials_[j] = prod over j..end
};

}  // namespace gotd
