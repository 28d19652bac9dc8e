// Copyright 2026 The UniMatte Authors.
// Licensed under the Apache License, Version 2.0.

#pragma once

// Data-parallel inner loops used by the convolution layers, the compositing
// routine and the metrics. Every kernel has a scalar reference version; ISA
// variants (AVX2+FMA on x86-64, NEON on AArch64) are selected once at startup
// from CPUID. The environment variable UNIMATTE_KERNELS=scalar forces the
// reference path.

#include <cstddef>
#include <string_view>

namespace unimatte::kernels {

enum class Isa { scalar, avx2, neon };

std::string_view isa_name(Isa isa);

/// Row-major dense kernels. All matrices carry an explicit leading dimension.
struct KernelTable {
  Isa isa;

  /// y[i] += a * x[i]
  void (*axpy)(std::size_t n, double a, const double* x, double* y);

  /// sum_i x[i] * y[i]
  double (*dot)(std::size_t n, const double* x, const double* y);

  /// C[m x n] (+)= A[m x k] * B[k x n]
  void (*gemm_nn)(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t lda,
                  const double* b, std::size_t ldb, double* c, std::size_t ldc, bool accumulate);

  /// C[m x n] (+)= A[m x k] * B[n x k]^T
  void (*gemm_nt)(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t lda,
                  const double* b, std::size_t ldb, double* c, std::size_t ldc, bool accumulate);

  /// C[m x n] (+)= A[k x m]^T * B[k x n]
  void (*gemm_tn)(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t lda,
                  const double* b, std::size_t ldb, double* c, std::size_t ldc, bool accumulate);

  /// out[i] = alpha[i] * fg[i] + (1 - alpha[i]) * bg[i]
  void (*blend)(std::size_t n, const double* fg, const double* bg, const double* alpha,
                double* out);

  /// sum_i |x[i] - y[i]|
  double (*abs_diff_sum)(std::size_t n, const double* x, const double* y);
};

/// The table chosen for this process (initialized on first use).
const KernelTable& active();

/// Reference implementations, always available.
const KernelTable& scalar_table();

/// Table for a specific ISA, or nullptr when the CPU or build lacks it.
const KernelTable* table_for(Isa isa);

/// Override the active table (tests and benchmarks). Returns the previous ISA.
Isa set_active(Isa isa);

// Per-ISA tables; defined only in translation units built for that ISA.
const KernelTable* avx2_table();
const KernelTable* neon_table();

}  // namespace unimatte::kernels
