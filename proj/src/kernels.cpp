// SPDX-License-Identifier: MIT
#include "gotd/kernels.hpp"

#include <cmath>

namespace gotd {

namespace {

std::size_t left_size(const std::vector<std::size_t>& dims, std::size_t n) {
  std::size_t l = 1;
  for (std::size_t m = 0; m < n; ++m) l *= dims[m];
  return l;
}

std::size_t right_size(const std::vector<std::size_t>& dims, std::size_t n) {
  std::size_t r = 1;
  for (std::size_t m = n + 1; m < dims.size(); ++m) r *= dims[m];
  return r;
}

}  // namespace

FactorRowProduct::FactorRowProduct(const std::vector<Matrix>& factors,
                                   std::vector<std::size_t> modes,
                                   Eigen::Index rank)
    : factors_(&factors), modes_(std::move(modes)) {
  digits_.assign(modes_.size(), 0);
  sizes_.resize(modes_.size());
  for (std::size_t j = 0; j < modes_.size(); ++j)
    sizes_[j] = static_cast<std::size_t>((*factors_)[modes_[j]].rows());
  partials_.assign(modes_.size() + 1, Eigen::ArrayXd::Ones(rank));
  recompute_from(modes_.size());
}

void FactorRowProduct::recompute_from(std::size_t level) {
  for (std::size_t j = level; j-- > 0;) {
    partials_[j] = (*factors_)[modes_[j]]
                       .row(static_cast<Eigen::Index>(digits_[j]))
                       .transpose()
                       .array() *
                   partials_[j + 1];
  }
}

void FactorRowProduct::reset() {
  std::fill(digits_.begin(), digits_.end(), 0);
  recompute_from(modes_.size());
}

void FactorRowProduct::advance() {
  for (std::size_t j = 0; j < modes_.size(); ++j) {
    if (++digits_[j] < sizes_[j]) {
      recompute_from(j + 1);
      return;
    }
    digits_[j] = 0;
  }
  recompute_from(modes_.size());  // wrapped around
}

Matrix matricize(const DenseTensor& x, std::size_t n) {
  GOTD_CHECK(n < x.order(), "matricize: mode out of range");
  const auto& dims = x.dims();
  const std::size_t in = dims[n];
  const std::size_t left = left_size(dims, n);
  const std::size_t right = right_size(dims, n);

  Matrix out(in, left * right);
  const double* v = x.data();
  for (std::size_t p = 0; p < right; ++p) {
    for (std::size_t i = 0; i < in; ++i) {
      const double* src = v + left * (i + in * p);
      for (std::size_t l = 0; l < left; ++l)
        out(static_cast<Eigen::Index>(i),
            static_cast<Eigen::Index>(l + p * left)) = src[l];
    }
  }
  return out;
}

DenseTensor fold(const Matrix& m, std::size_t n,
                 const std::vector<std::size_t>& dims) {
  GOTD_CHECK(n < dims.size(), "fold: mode out of range");
  const std::size_t in = dims[n];
  const std::size_t left = left_size(dims, n);
  const std::size_t right = right_size(dims, n);
  GOTD_CHECK(static_cast<std::size_t>(m.rows()) == in &&
                 static_cast<std::size_t>(m.cols()) == left * right,
             "fold: matrix shape does not match target dimensions");

  DenseTensor out(dims);
  double* v = out.data();
  for (std::size_t p = 0; p < right; ++p) {
    for (std::size_t i = 0; i < in; ++i) {
      double* dst = v + left * (i + in * p);
      for (std::size_t l = 0; l < left; ++l)
        dst[l] = m(static_cast<Eigen::Index>(i),
                   static_cast<Eigen::Index>(l + p * left));
    }
  }
  return out;
}

DenseTensor ttm(const DenseTensor& x, const Matrix& a, std::size_t n) {
  GOTD_CHECK(n < x.order(), "ttm: mode out of range");
  const auto& dims = x.dims();
  GOTD_CHECK(static_cast<std::size_t>(a.cols()) == dims[n],
             "ttm: matrix columns must match tensor mode size");

  const std::size_t in = dims[n];
  const std::size_t jn = static_cast<std::size_t>(a.rows());
  std::vector<std::size_t> out_dims = dims;
  out_dims[n] = jn;
  DenseTensor y(out_dims);

  if (n == 0) {
    // Y_(0) = A * X_(0), and the mode-0 unfolding is the flat layout itself.
    Eigen::Map<const Matrix> xm(x.data(), in, x.size() / in);
    Eigen::Map<Matrix> ym(y.data(), jn, y.size() / jn);
    ym.noalias() = a * xm;
    return y;
  }

  const std::size_t left = left_size(dims, n);
  const std::size_t right = right_size(dims, n);
  for (std::size_t p = 0; p < right; ++p) {
    Eigen::Map<const Matrix> xs(x.data() + p * left * in,
                                static_cast<Eigen::Index>(left),
                                static_cast<Eigen::Index>(in));
    Eigen::Map<Matrix> ys(y.data() + p * left * jn,
                          static_cast<Eigen::Index>(left),
                          static_cast<Eigen::Index>(jn));
    ys.noalias() = xs * a.transpose();
  }
  return y;
}

Matrix khatri_rao(const Matrix& a, const Matrix& b) {
  GOTD_CHECK(a.cols() == b.cols(),
             "khatri_rao: operands must have the same column count");
  const Eigen::Index ma = a.rows(), mb = b.rows(), r = a.cols();
  Matrix out(ma * mb, r);
  for (Eigen::Index c = 0; c < r; ++c)
    for (Eigen::Index i = 0; i < ma; ++i)
      for (Eigen::Index j = 0; j < mb; ++j)
        out(i * mb + j, c) = a(i, c) * b(j, c);
  return out;
}

Matrix mttkrp(const DenseTensor& x, const std::vector<Matrix>& factors,
              std::size_t n) {
  const std::size_t d = x.order();
  const auto& dims = x.dims();
  GOTD_CHECK(factors.size() == d, "mttkrp: need one factor per mode");
  GOTD_CHECK(n < d, "mttkrp: mode out of range");
  const Eigen::Index rank = factors[0].cols();
  for (std::size_t k = 0; k < d; ++k) {
    GOTD_CHECK(factors[k].cols() == rank,
               "mttkrp: factors must share a column count");
    if (k != n)
      GOTD_CHECK(static_cast<std::size_t>(factors[k].rows()) == dims[k],
                 "mttkrp: factor rows must match tensor dimensions");
  }

  const std::size_t in = dims[n];
  const std::size_t left = left_size(dims, n);
  std::vector<std::size_t> left_modes(n), right_modes;
  for (std::size_t k = 0; k < n; ++k) left_modes[k] = k;
  for (std::size_t k = n + 1; k < d; ++k) right_modes.push_back(k);

  FactorRowProduct wl(factors, left_modes, rank);
  FactorRowProduct wr(factors, right_modes, rank);

  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(in), rank);
  const std::size_t right = right_size(dims, n);
  const double* v = x.data();
  Eigen::ArrayXd acc(rank);
  std::size_t base = 0;
  for (std::size_t p = 0; p < right; ++p) {
    for (std::size_t i = 0; i < in; ++i) {
      acc.setZero();
      wl.reset();
      for (std::size_t l = 0; l < left; ++l) {
        acc += v[base + l] * wl.value();
        wl.advance();
      }
      out.row(static_cast<Eigen::Index>(i)).transpose().array() +=
          acc * wr.value();
      base += left;
    }
    wr.advance();
  }
  return out;
}

double frob_norm_sq(const DenseTensor& x) {
  double s = 0.0;
  for (double v : x.values()) s += v * v;
  return s;
}

double frob_norm(const DenseTensor& x) { return std::sqrt(frob_norm_sq(x)); }

double frob_err(const DenseTensor& x, const DenseTensor& m) {
  GOTD_CHECK(x.dims() == m.dims(), "frob_err: tensors must share dimensions");
  double num = 0.0, den = 0.0;
  const double* xv = x.data();
  const double* mv = m.data();
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = xv[i] - mv[i];
    num += d * d;
    den += xv[i] * xv[i];
  }
  GOTD_CHECK_NUMERIC(den > 0.0, "frob_err: reference tensor has zero norm");
  return std::sqrt(num / den);
}

DenseTensor time_slice(const DenseTensor& x, std::size_t t) {
  GOTD_CHECK(x.order() >= 2, "time_slice: tensor needs a time mode");
  const std::size_t tau = x.dims().back();
  GOTD_CHECK(t < tau, "time_slice: time index out of range");
  std::vector<std::size_t> sdims(x.dims().begin(), x.dims().end() - 1);
  const std::size_t slab = x.size() / tau;
  DenseTensor out(sdims);
  std::copy(x.data() + t * slab, x.data() + (t + 1) * slab, out.data());
  return out;
}

}  // namespace gotd
