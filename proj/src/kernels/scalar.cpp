// Copyright The Atlas Authors.
// SPDX-License-Identifier: Apache-2.0

#include "atlas/kernels.hpp"

namespace atlas::kernels::detail {

namespace {

void affine_scalar(const double* w, const double* bias, const double* x, std::size_t rows,
                   std::size_t cols, double* out) {
  for (std::size_t c = 0; c < cols; ++c) out[c] = bias[c];
  for (std::size_t d = 0; d < rows; ++d) {
    const double xd = x[d];
    const double* row = w + d * cols;
    for (std::size_t c = 0; c < cols; ++c) {
      const double prod = xd * row[c];
      out[c] = out[c] + prod;
    }
  }
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double prod = alpha * x[i];
    y[i] = y[i] + prod;
  }
}

void divide_scalar(double* x, std::size_t n, double divisor) {
  for (std::size_t i = 0; i < n; ++i) x[i] /= divisor;
}

double max_scalar(const double* x, std::size_t n) {
  double m = x[0];
  for (std::size_t i = 1; i < n; ++i)
    if (x[i] > m) m = x[i];
  return m;
}

std::size_t count_below_scalar(const double* x, std::size_t n, double threshold) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) count += x[i] < threshold ? 1 : 0;
  return count;
}

std::size_t select_at_least_scalar(const double* x, std::size_t n, double threshold,
                                   std::uint32_t* out) {
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (x[i] >= threshold) out[k++] = static_cast<std::uint32_t>(i);
  return k;
}

constexpr KernelTable kScalar{Isa::Scalar,  affine_scalar,      axpy_scalar,
                              divide_scalar, max_scalar,        count_below_scalar,
                              select_at_least_scalar};

}  // namespace

const KernelTable& scalar_table() noexcept { return kScalar; }

}  // namespace atlas::kernels::detail
