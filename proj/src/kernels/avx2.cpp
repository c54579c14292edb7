// Copyright The Atlas Authors.
// SPDX-License-Identifier: Apache-2.0

// AVX2 variants. This translation unit is the only one built with -mavx2 and
// is reached exclusively through the dispatch table after a CPU check.

#include <immintrin.h>

#include "atlas/kernels.hpp"

namespace atlas::kernels::detail {

namespace {

constexpr std::size_t kLanes = 4;

void affine_avx2(const double* w, const double* bias, const double* x, std::size_t rows,
                 std::size_t cols, double* out) {
  const std::size_t vec_end = cols - cols % kLanes;
  std::size_t c = 0;
  for (; c < vec_end; c += kLanes) {
    __m256d acc = _mm256_loadu_pd(bias + c);
    for (std::size_t d = 0; d < rows; ++d) {
      const __m256d xd = _mm256_set1_pd(x[d]);
      acc = _mm256_add_pd(acc, _mm256_mul_pd(xd, _mm256_loadu_pd(w + d * cols + c)));
    }
    _mm256_storeu_pd(out + c, acc);
  }
  for (; c < cols; ++c) {
    double acc = bias[c];
    for (std::size_t d = 0; d < rows; ++d) {
      const double prod = x[d] * w[d * cols + c];
      acc = acc + prod;
    }
    out[c] = acc;
  }
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d a = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const __m256d prod = _mm256_mul_pd(a, _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
  }
  for (; i < n; ++i) {
    const double prod = alpha * x[i];
    y[i] = y[i] + prod;
  }
}

void divide_avx2(double* x, std::size_t n, double divisor) {
  const __m256d d = _mm256_set1_pd(divisor);
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) _mm256_storeu_pd(x + i, _mm256_div_pd(_mm256_loadu_pd(x + i), d));
  for (; i < n; ++i) x[i] /= divisor;
}

double max_avx2(const double* x, std::size_t n) {
  if (n < kLanes) {
    double m = x[0];
    for (std::size_t i = 1; i < n; ++i)
      if (x[i] > m) m = x[i];
    return m;
  }
  __m256d m = _mm256_loadu_pd(x);
  std::size_t i = kLanes;
  for (; i + kLanes <= n; i += kLanes) m = _mm256_max_pd(m, _mm256_loadu_pd(x + i));
  alignas(32) double lanes[kLanes];
  _mm256_store_pd(lanes, m);
  double best = lanes[0];
  for (std::size_t l = 1; l < kLanes; ++l)
    if (lanes[l] > best) best = lanes[l];
  for (; i < n; ++i)
    if (x[i] > best) best = x[i];
  return best;
}

std::size_t count_below_avx2(const double* x, std::size_t n, double threshold) {
  const __m256d t = _mm256_set1_pd(threshold);
  std::size_t count = 0;
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    const int mask = _mm256_movemask_pd(_mm256_cmp_pd(_mm256_loadu_pd(x + i), t, _CMP_LT_OQ));
    count += static_cast<std::size_t>(__builtin_popcount(static_cast<unsigned>(mask)));
  }
  for (; i < n; ++i) count += x[i] < threshold ? 1 : 0;
  return count;
}

std::size_t select_at_least_avx2(const double* x, std::size_t n, double threshold,
                                 std::uint32_t* out) {
  const __m256d t = _mm256_set1_pd(threshold);
  std::size_t k = 0;
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    unsigned mask = static_cast<unsigned>(
        _mm256_movemask_pd(_mm256_cmp_pd(_mm256_loadu_pd(x + i), t, _CMP_GE_OQ)));
    while (mask != 0) {
      const unsigned bit = static_cast<unsigned>(__builtin_ctz(mask));
      out[k++] = static_cast<std::uint32_t>(i + bit);
      mask &= mask - 1;
    }
  }
  for (; i < n; ++i)
    if (x[i] >= threshold) out[k++] = static_cast<std::uint32_t>(i);
  return k;
}

constexpr KernelTable kAvx2{Isa::Avx2,  affine_avx2,      axpy_avx2,
                            divide_avx2, max_avx2,        count_below_avx2,
                            select_at_least_avx2};

}  // namespace

const KernelTable& avx2_table() noexcept { return kAvx2; }

}  // namespace atlas::kernels::detail
