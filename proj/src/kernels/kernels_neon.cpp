// Copyright 2026 The UniMatte Authors.
// Licensed under the Apache License, Version 2.0.

// AArch64 NEON variants (float64x2). Advanced SIMD is architectural on
// AArch64, so no runtime probe is needed beyond the compile-time target.

#include <arm_neon.h>

#include <cmath>

#include "unimatte/kernels.hpp"

namespace unimatte::kernels {
namespace {

void axpy_neon(std::size_t n, double a, const double* x, double* y) {
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] += a * x[i];
}

double dot_neon(std::size_t n, const double* x, const double* y) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(x + i), vld1q_f64(y + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(x + i + 2), vld1q_f64(y + i + 2));
  }
  double s = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

void gemm_nn_neon(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t lda,
                  const double* b, std::size_t ldb, double* c, std::size_t ldc, bool accumulate) {
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * ldc;
    if (!accumulate)
      for (std::size_t j = 0; j < n; ++j) crow[j] = 0.0;
    for (std::size_t p = 0; p < k; ++p) axpy_neon(n, a[i * lda + p], b + p * ldb, crow);
  }
}

void gemm_nt_neon(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t lda,
                  const double* b, std::size_t ldb, double* c, std::size_t ldc, bool accumulate) {
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double s = dot_neon(k, a + i * lda, b + j * ldb);
      c[i * ldc + j] = accumulate ? c[i * ldc + j] + s : s;
    }
}

void gemm_tn_neon(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t lda,
                  const double* b, std::size_t ldb, double* c, std::size_t ldc, bool accumulate) {
  if (!accumulate)
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) c[i * ldc + j] = 0.0;
  for (std::size_t p = 0; p < k; ++p)
    for (std::size_t i = 0; i < m; ++i) axpy_neon(n, a[p * lda + i], b + p * ldb, c + i * ldc);
}

void blend_neon(std::size_t n, const double* fg, const double* bg, const double* alpha,
                double* out) {
  const float64x2_t one = vdupq_n_f64(1.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t a = vld1q_f64(alpha + i);
    const float64x2_t r = vaddq_f64(vmulq_f64(a, vld1q_f64(fg + i)),
                                    vmulq_f64(vsubq_f64(one, a), vld1q_f64(bg + i)));
    vst1q_f64(out + i, r);
  }
  for (; i < n; ++i) out[i] = alpha[i] * fg[i] + (1.0 - alpha[i]) * bg[i];
}

double abs_diff_sum_neon(std::size_t n, const double* x, const double* y) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) acc = vaddq_f64(acc, vabdq_f64(vld1q_f64(x + i), vld1q_f64(y + i)));
  double s = vaddvq_f64(acc);
  for (; i < n; ++i) s += std::fabs(x[i] - y[i]);
  return s;
}

}  // namespace

const KernelTable* neon_table() {
  static const KernelTable table{Isa::neon,   axpy_neon,    dot_neon,  gemm_nn_neon,
                                 gemm_nt_neon, gemm_tn_neon, blend_neon, abs_diff_sum_neon};
  return &table;
}

}  // namespace unimatte::kernels
