// SPDX-License-Identifier: MIT
#pragma once

#include <cstddef>
#include <initializer_list>
#include <numeric>
#include <vector>

#include "gotd/common.hpp"

namespace gotd {

/// Dense d-way array of doubles. Values are stored flat with the mode-0
/// index varying fastest (column-major linearization):
///   offset(i_0,...,i_{d-1}) = sum_k i_k * prod_{m<k} dims[m].
class DenseTensor {
 public:
  DenseTensor() = default;

  explicit DenseTensor(std::vector<std::size_t> dims)
      : dims_(std::move(dims)), values_(checked_size(dims_), 0.0) {}

  DenseTensor(std::vector<std::size_t> dims, std::vector<double> values)
      : dims_(std::move(dims)), values_(std::move(values)) {
    GOTD_CHECK(values_.size() == checked_size(dims_),
               "tensor value count does not match dimensions");
  }

  const std::vector<std::size_t>& dims() const { return dims_; }
  std::size_t order() const { return dims_.size(); }
  std::size_t dim(std::size_t k) const { return dims_[k]; }
  std::size_t size() const { return values_.size(); }

  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }
  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

  double& operator[](std::size_t flat) { return values_[flat]; }
  double operator[](std::size_t flat) const { return values_[flat]; }

  /// Flat offset of a multi-index (0-based).
  std::size_t offset(const std::vector<std::size_t>& idx) const {
    std::size_t off = 0, stride = 1;
    for (std::size_t k = 0; k < dims_.size(); ++k) {
      off += idx[k] * stride;
      stride *= dims_[k];
    }
    return off;
  }

  double at(const std::vector<std::size_t>& idx) const {
    return values_[offset(idx)];
  }
  double& at(const std::vector<std::size_t>& idx) {
    return values_[offset(idx)];
  }

  /// prod_{m<k} dims[m].
  std::size_t stride(std::size_t k) const {
    std::size_t s = 1;
    for (std::size_t m = 0; m < k; ++m) s *= dims_[m];
    return s;
  }

  void set_zero() { std::fill(values_.begin(), values_.end(), 0.0); }

  static std::size_t checked_size(const std::vector<std::size_t>& dims) {
    GOTD_CHECK(!dims.empty(), "tensor must have at least one mode");
    std::size_t n = 1;
    for (std::size_t d : dims) {
      GOTD_CHECK(d >= 1, "tensor dimensions must be positive");
      GOTD_CHECK(n <= SIZE_MAX / d, "tensor dimensions overflow");
      n *= d;
    }
    return n;
  }

 private:
  std::vector<std::size_t> dims_;
  std::vector<double> values_;
};

/// Walks the multi-index of a subset of modes in flat (mode-0 fastest) order.
/// Used by kernels that stream over composite left/right index blocks.
class MultiIndex {
 public:
  explicit MultiIndex(std::vector<std::size_t> dims)
      : dims_(std::move(dims)), idx_(dims_.size(), 0) {}

  const std::vector<std::size_t>& indices() const { return idx_; }
  std::size_t digit(std::size_t k) const { return idx_[k]; }

  /// Advances to the next multi-index; returns the highest mode whose digit
  /// changed (the carry length), or dims_.size() when the walk wraps around.
  std::size_t advance() {
    for (std::size_t k = 0; k < dims_.size(); ++k) {
      if (++idx_[k] < dims_[k]) return k;
      idx_[k] = 0;
    }
    return dims_.size();
  }

 private:
  std::vector<std::size_t> dims_;
  std::vector<std::size_t> idx_;
};

}  // namespace gotd
