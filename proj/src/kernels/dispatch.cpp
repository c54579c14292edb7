// Copyright The Atlas Authors.
// SPDX-License-Identifier: Apache-2.0

#include <atomic>
#include <cstdlib>
#include <string>

#include "atlas/error.hpp"
#include "atlas/kernels.hpp"

namespace atlas::kernels {

std::string_view to_string(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
  }
  return "?";
}

bool supported(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar: return true;
    case Isa::Avx2:
#if defined(ATLAS_HAVE_AVX2_KERNELS)
      return __builtin_cpu_supports("avx2") != 0;
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& table(Isa isa) {
  if (!supported(isa))
    throw Error("kernel ISA '" + std::string(to_string(isa)) + "' is not available on this CPU");
#if defined(ATLAS_HAVE_AVX2_KERNELS)
  if (isa == Isa::Avx2) return detail::avx2_table();
#endif
  return detail::scalar_table();
}

namespace {

const KernelTable* initial_table() noexcept {
  if (const char* env = std::getenv("ATLAS_ISA")) {
    const std::string_view want(env);
    if (want == "scalar") return &detail::scalar_table();
    if (want == "avx2" && supported(Isa::Avx2)) return &table(Isa::Avx2);
  }
  if (supported(Isa::Avx2)) return &table(Isa::Avx2);
  return &detail::scalar_table();
}

std::atomic<const KernelTable*>& current() noexcept {
  static std::atomic<const KernelTable*> ptr{initial_table()};
  return ptr;
}

}  // namespace

const KernelTable& active() noexcept { return *current().load(std::memory_order_acquire); }

void select(Isa isa) { current().store(&table(isa), std::memory_order_release); }

}  // namespace atlas::kernels
