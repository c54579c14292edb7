// Copyright The Atlas Authors.
// SPDX-License-Identifier: Apache-2.0

// Data-parallel inner loops with a scalar reference and SIMD variants chosen at
// runtime. Every variant is bit-identical to the scalar reference: reductions
// only use exact operations (max, compare, count) and the affine kernel keeps
// the scalar per-element accumulation order without fused multiply-add.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace atlas::kernels {

enum class Isa : std::uint8_t { Scalar, Avx2 };

std::string_view to_string(Isa isa) noexcept;

struct KernelTable {
  Isa isa;
  /// out[c] = bias[c] + sum_d x[d] * w[d*cols + c], accumulated in d order.
  void (*affine)(const double* w, const double* bias, const double* x, std::size_t rows,
                 std::size_t cols, double* out);
  /// y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  /// x[i] /= divisor
  void (*divide)(double* x, std::size_t n, double divisor);
  /// Largest element; n >= 1, entries not NaN.
  double (*max)(const double* x, std::size_t n);
  /// #{i : x[i] < threshold}
  std::size_t (*count_below)(const double* x, std::size_t n, double threshold);
  /// Writes ascending indices i with x[i] >= threshold; returns how many.
  std::size_t (*select_at_least)(const double* x, std::size_t n, double threshold,
                                 std::uint32_t* out);
};

bool supported(Isa isa) noexcept;
/// Table for one ISA; throws atlas::Error if the CPU or build lacks it.
const KernelTable& table(Isa isa);
/// Table used by the library. Best supported ISA unless overridden by
/// `select` or the ATLAS_ISA environment variable (scalar|avx2).
const KernelTable& active() noexcept;
void select(Isa isa);

namespace detail {
const KernelTable& scalar_table() noexcept;
#if defined(ATLAS_HAVE_AVX2_KERNELS)
const KernelTable& avx2_table() noexcept;
#endif
}  // namespace detail

// Span front-ends over the active table.

inline void affine(std::span<const double> w, std::span<const double> bias,
                   std::span<const double> x, std::span<double> out) {
  active().affine(w.data(), bias.data(), x.data(), x.size(), out.size(), out.data());
}
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  active().axpy(alpha, x.data(), y.data(), y.size());
}
inline void divide(std::span<double> x, double divisor) {
  active().divide(x.data(), x.size(), divisor);
}
inline double max(std::span<const double> x) { return active().max(x.data(), x.size()); }
inline std::size_t count_below(std::span<const double> x, double threshold) {
  return active().count_below(x.data(), x.size(), threshold);
}
inline std::size_t select_at_least(std::span<const double> x, double threshold,
                                   std::span<std::uint32_t> out) {
  return active().select_at_least(x.data(), x.size(), threshold, out.data());
}

}  // namespace atlas::kernels
