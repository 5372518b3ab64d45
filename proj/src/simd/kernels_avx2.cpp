// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.
#include <immintrin.h>

#include "dumbbell/simd/kernels.hpp"

namespace dumbbell::simd {

namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d s0 = _mm256_setzero_pd();
  __m256d s1 = _mm256_setzero_pd();
  __m256d s2 = _mm256_setzero_pd();
  __m256d s3 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    s0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), s0);
    s1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), s1);
    s2 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 8), _mm256_loadu_pd(b + i + 8), s2);
    s3 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 12), _mm256_loadu_pd(b + i + 12), s3);
  }
  for (; i + 4 <= n; i += 4) s0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), s0);
  double s = hsum(_mm256_add_pd(_mm256_add_pd(s0, s1), _mm256_add_pd(s2, s3)));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    _mm256_storeu_pd(y + i + 4, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4)));
  }
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

// Four columns per sweep so z is streamed once per group.
void project_avx2(const double* V, std::size_t ld, std::size_t m, const double* z, std::size_t n, double* c) {
  std::size_t j = 0;
  for (; j + 4 <= m; j += 4) {
    const double* v0 = V + j * ld;
    const double* v1 = v0 + ld;
    const double* v2 = v1 + ld;
    const double* v3 = v2 + ld;
    __m256d s0 = _mm256_setzero_pd();
    __m256d s1 = _mm256_setzero_pd();
    __m256d s2 = _mm256_setzero_pd();
    __m256d s3 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
      const __m256d zz = _mm256_loadu_pd(z + i);
      s0 = _mm256_fmadd_pd(_mm256_loadu_pd(v0 + i), zz, s0);
      s1 = _mm256_fmadd_pd(_mm256_loadu_pd(v1 + i), zz, s1);
      s2 = _mm256_fmadd_pd(_mm256_loadu_pd(v2 + i), zz, s2);
      s3 = _mm256_fmadd_pd(_mm256_loadu_pd(v3 + i), zz, s3);
    }
    double r0 = hsum(s0), r1 = hsum(s1), r2 = hsum(s2), r3 = hsum(s3);
    for (; i < n; ++i) {
      r0 += v0[i] * z[i];
      r1 += v1[i] * z[i];
      r2 += v2[i] * z[i];
      r3 += v3[i] * z[i];
    }
    c[j] = r0;
    c[j + 1] = r1;
    c[j + 2] = r2;
    c[j + 3] = r3;
  }
  for (; j < m; ++j) c[j] = dot_avx2(V + j * ld, z, n);
}

void subtract_combination_avx2(const double* V, std::size_t ld, std::size_t m, const double* c, std::size_t n,
                               double* w) {
  std::size_t j = 0;
  for (; j + 4 <= m; j += 4) {
    const double* v0 = V + j * ld;
    const double* v1 = v0 + ld;
    const double* v2 = v1 + ld;
    const double* v3 = v2 + ld;
    const __m256d c0 = _mm256_set1_pd(-c[j]);
    const __m256d c1 = _mm256_set1_pd(-c[j + 1]);
    const __m256d c2 = _mm256_set1_pd(-c[j + 2]);
    const __m256d c3 = _mm256_set1_pd(-c[j + 3]);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
      __m256d acc = _mm256_loadu_pd(w + i);
      acc = _mm256_fmadd_pd(c0, _mm256_loadu_pd(v0 + i), acc);
      acc = _mm256_fmadd_pd(c1, _mm256_loadu_pd(v1 + i), acc);
      acc = _mm256_fmadd_pd(c2, _mm256_loadu_pd(v2 + i), acc);
      acc = _mm256_fmadd_pd(c3, _mm256_loadu_pd(v3 + i), acc);
      _mm256_storeu_pd(w + i, acc);
    }
    for (; i < n; ++i) w[i] -= c[j] * v0[i] + c[j + 1] * v1[i] + c[j + 2] * v2[i] + c[j + 3] * v3[i];
  }
  for (; j < m; ++j) axpy_avx2(-c[j], V + j * ld, w, n);
}

void outer_accumulate16_avx2(const double* A, const double* B, std::size_t rows, double weight, double* K) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* a = A + r * 16;
    const double* b = B + r * 16;
    const __m256d b0 = _mm256_loadu_pd(b);
    const __m256d b1 = _mm256_loadu_pd(b + 4);
    const __m256d b2 = _mm256_loadu_pd(b + 8);
    const __m256d b3 = _mm256_loadu_pd(b + 12);
    for (std::size_t i = 0; i < 16; ++i) {
      const double ai = weight * a[i];
      if (ai == 0.0) continue;
      const __m256d va = _mm256_set1_pd(ai);
      double* k = K + i * 16;
      _mm256_storeu_pd(k, _mm256_fmadd_pd(va, b0, _mm256_loadu_pd(k)));
      _mm256_storeu_pd(k + 4, _mm256_fmadd_pd(va, b1, _mm256_loadu_pd(k + 4)));
      _mm256_storeu_pd(k + 8, _mm256_fmadd_pd(va, b2, _mm256_loadu_pd(k + 8)));
      _mm256_storeu_pd(k + 12, _mm256_fmadd_pd(va, b3, _mm256_loadu_pd(k + 12)));
    }
  }
}

constexpr KernelTable kAvx2{Isa::Avx2,          "avx2",
                            &dot_avx2,          &axpy_avx2,
                            &project_avx2,      &subtract_combination_avx2,
                            &outer_accumulate16_avx2};

}  // namespace

const KernelTable* avx2_kernels() { return &kAvx2; }

}  // namespace dumbbell::simd
