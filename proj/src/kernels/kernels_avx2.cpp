// Copyright 2026 The UniMatte Authors.
// Licensed under the Apache License, Version 2.0.

// AVX2 + FMA variants. This translation unit is compiled with -mavx2 -mfma;
// nothing here may run before dispatch has confirmed CPU support.

#include <immintrin.h>

#include <cmath>

#include "unimatte/kernels.hpp"

namespace unimatte::kernels {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

void axpy_avx2(std::size_t n, double a, const double* x, double* y) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256d y0 = _mm256_loadu_pd(y + i);
    __m256d y1 = _mm256_loadu_pd(y + i + 4);
    y0 = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), y0);
    y1 = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i + 4), y1);
    _mm256_storeu_pd(y + i, y0);
    _mm256_storeu_pd(y + i + 4, y1);
  }
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] += a * x[i];
}

double dot_avx2(std::size_t n, const double* x, const double* y) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4)
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

// C row += sum over four rows of B, each scaled by a broadcast coefficient.
inline void fma4_row(std::size_t n, double a0, double a1, double a2, double a3, const double* b0,
                     const double* b1, const double* b2, const double* b3, double* c) {
  const __m256d v0 = _mm256_set1_pd(a0);
  const __m256d v1 = _mm256_set1_pd(a1);
  const __m256d v2 = _mm256_set1_pd(a2);
  const __m256d v3 = _mm256_set1_pd(a3);
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    __m256d acc = _mm256_loadu_pd(c + j);
    acc = _mm256_fmadd_pd(v0, _mm256_loadu_pd(b0 + j), acc);
    acc = _mm256_fmadd_pd(v1, _mm256_loadu_pd(b1 + j), acc);
    acc = _mm256_fmadd_pd(v2, _mm256_loadu_pd(b2 + j), acc);
    acc = _mm256_fmadd_pd(v3, _mm256_loadu_pd(b3 + j), acc);
    _mm256_storeu_pd(c + j, acc);
  }
  for (; j < n; ++j) c[j] += a0 * b0[j] + a1 * b1[j] + a2 * b2[j] + a3 * b3[j];
}

void gemm_nn_avx2(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t lda,
                  const double* b, std::size_t ldb, double* c, std::size_t ldc, bool accumulate) {
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * ldc;
    const double* arow = a + i * lda;
    if (!accumulate)
      for (std::size_t j = 0; j < n; ++j) crow[j] = 0.0;
    std::size_t p = 0;
    for (; p + 4 <= k; p += 4)
      fma4_row(n, arow[p], arow[p + 1], arow[p + 2], arow[p + 3], b + p * ldb, b + (p + 1) * ldb,
               b + (p + 2) * ldb, b + (p + 3) * ldb, crow);
    for (; p < k; ++p) axpy_avx2(n, arow[p], b + p * ldb, crow);
  }
}

void gemm_nt_avx2(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t lda,
                  const double* b, std::size_t ldb, double* c, std::size_t ldc, bool accumulate) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* arow = a + i * lda;
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
      const double* b0 = b + j * ldb;
      const double* b1 = b0 + ldb;
      const double* b2 = b1 + ldb;
      const double* b3 = b2 + ldb;
      __m256d s0 = _mm256_setzero_pd(), s1 = _mm256_setzero_pd();
      __m256d s2 = _mm256_setzero_pd(), s3 = _mm256_setzero_pd();
      std::size_t p = 0;
      for (; p + 4 <= k; p += 4) {
        const __m256d av = _mm256_loadu_pd(arow + p);
        s0 = _mm256_fmadd_pd(av, _mm256_loadu_pd(b0 + p), s0);
        s1 = _mm256_fmadd_pd(av, _mm256_loadu_pd(b1 + p), s1);
        s2 = _mm256_fmadd_pd(av, _mm256_loadu_pd(b2 + p), s2);
        s3 = _mm256_fmadd_pd(av, _mm256_loadu_pd(b3 + p), s3);
      }
      double r0 = hsum(s0), r1 = hsum(s1), r2 = hsum(s2), r3 = hsum(s3);
      for (; p < k; ++p) {
        r0 += arow[p] * b0[p];
        r1 += arow[p] * b1[p];
        r2 += arow[p] * b2[p];
        r3 += arow[p] * b3[p];
      }
      double* cr = c + i * ldc + j;
      if (accumulate) {
        cr[0] += r0, cr[1] += r1, cr[2] += r2, cr[3] += r3;
      } else {
        cr[0] = r0, cr[1] = r1, cr[2] = r2, cr[3] = r3;
      }
    }
    for (; j < n; ++j) {
      const double s = dot_avx2(k, arow, b + j * ldb);
      c[i * ldc + j] = accumulate ? c[i * ldc + j] + s : s;
    }
  }
}

void gemm_tn_avx2(std::size_t m, std::size_t n, std::size_t k, const double* a, std::size_t lda,
                  const double* b, std::size_t ldb, double* c, std::size_t ldc, bool accumulate) {
  if (!accumulate)
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) c[i * ldc + j] = 0.0;
  std::size_t p = 0;
  for (; p + 4 <= k; p += 4) {
    const double* a0 = a + p * lda;
    const double* a1 = a0 + lda;
    const double* a2 = a1 + lda;
    const double* a3 = a2 + lda;
    const double* b0 = b + p * ldb;
    for (std::size_t i = 0; i < m; ++i)
      fma4_row(n, a0[i], a1[i], a2[i], a3[i], b0, b0 + ldb, b0 + 2 * ldb, b0 + 3 * ldb,
               c + i * ldc);
  }
  for (; p < k; ++p) {
    const double* arow = a + p * lda;
    for (std::size_t i = 0; i < m; ++i) axpy_avx2(n, arow[i], b + p * ldb, c + i * ldc);
  }
}

void blend_avx2(std::size_t n, const double* fg, const double* bg, const double* alpha,
                double* out) {
  const __m256d one = _mm256_set1_pd(1.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d a = _mm256_loadu_pd(alpha + i);
    const __m256d f = _mm256_loadu_pd(fg + i);
    const __m256d g = _mm256_loadu_pd(bg + i);
    // Same expression tree as the reference, no contraction: a*f + (1-a)*g.
    const __m256d r = _mm256_add_pd(_mm256_mul_pd(a, f), _mm256_mul_pd(_mm256_sub_pd(one, a), g));
    _mm256_storeu_pd(out + i, r);
  }
  for (; i < n; ++i) out[i] = alpha[i] * fg[i] + (1.0 - alpha[i]) * bg[i];
}

double abs_diff_sum_avx2(std::size_t n, const double* x, const double* y) {
  const __m256d sign = _mm256_set1_pd(-0.0);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
    acc = _mm256_add_pd(acc, _mm256_andnot_pd(sign, d));
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += std::fabs(x[i] - y[i]);
  return s;
}

}  // namespace

const KernelTable* avx2_table() {
  static const KernelTable table{Isa::avx2,   axpy_avx2,    dot_avx2,  gemm_nn_avx2,
                                 gemm_nt_avx2, gemm_tn_avx2, blend_avx2, abs_diff_sum_avx2};
  return &table;
}

}  // namespace unimatte::kernels
