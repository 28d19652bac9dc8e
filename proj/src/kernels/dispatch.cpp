// Copyright 2026 The UniMatte Authors.
// Licensed under the Apache License, Version 2.0.

#include <atomic>
#include <cstdlib>
#include <string_view>

#include "unimatte/kernels.hpp"

namespace unimatte::kernels {

#if !defined(UNIMATTE_HAVE_AVX2_TU)
const KernelTable* avx2_table() { return nullptr; }
#endif
#if !defined(UNIMATTE_HAVE_NEON_TU)
const KernelTable* neon_table() { return nullptr; }
#endif

namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* detect() {
  if (const char* env = std::getenv("UNIMATTE_KERNELS"); env && std::string_view(env) == "scalar")
    return &scalar_table();
  if (auto* t = table_for(Isa::avx2)) return t;
  if (auto* t = table_for(Isa::neon)) return t;
  return &scalar_table();
}

std::atomic<const KernelTable*>& slot() {
  static std::atomic<const KernelTable*> current{detect()};
  return current;
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    case Isa::neon: return "neon";
  }
  return "unknown";
}

const KernelTable* table_for(Isa isa) {
  switch (isa) {
    case Isa::scalar: return &scalar_table();
    case Isa::avx2: return cpu_has_avx2() ? avx2_table() : nullptr;
    case Isa::neon: return neon_table();
  }
  return nullptr;
}

const KernelTable& active() { return *slot().load(std::memory_order_acquire); }

Isa set_active(Isa isa) {
  const KernelTable* t = table_for(isa);
  if (!t) t = &scalar_table();
  return slot().exchange(t, std::memory_order_acq_rel)->isa;
}

}  // namespace unimatte::kernels
