#include "fairimpute/simd.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

namespace fairimpute::simd::detail {

namespace {

#define FAIRIMPUTE_AVX2 __attribute__((target("avx2")))

// Same fold order as the scalar reference: lanes k and k+4 first, then pairs.
FAIRIMPUTE_AVX2 inline double fold(__m256d lo, __m256d hi) {
  alignas(32) double t[4];
  _mm256_store_pd(t, _mm256_add_pd(lo, hi));
  return (t[0] + t[1]) + (t[2] + t[3]);
}

FAIRIMPUTE_AVX2 double dot_avx2(const double* a, const double* b,
                                std::size_t n) {
  __m256d lo = _mm256_setzero_pd();
  __m256d hi = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    lo = _mm256_add_pd(lo, _mm256_mul_pd(_mm256_loadu_pd(a + i),
                                         _mm256_loadu_pd(b + i)));
    hi = _mm256_add_pd(hi, _mm256_mul_pd(_mm256_loadu_pd(a + i + 4),
                                         _mm256_loadu_pd(b + i + 4)));
  }
  double total = fold(lo, hi);
  for (; i < n; ++i) total += a[i] * b[i];
  return total;
}

FAIRIMPUTE_AVX2 double weighted_dot_avx2(const double* w, const double* a,
                                         const double* b, std::size_t n) {
  __m256d lo = _mm256_setzero_pd();
  __m256d hi = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256d wa0 =
        _mm256_mul_pd(_mm256_loadu_pd(w + i), _mm256_loadu_pd(a + i));
    const __m256d wa1 =
        _mm256_mul_pd(_mm256_loadu_pd(w + i + 4), _mm256_loadu_pd(a + i + 4));
    lo = _mm256_add_pd(lo, _mm256_mul_pd(wa0, _mm256_loadu_pd(b + i)));
    hi = _mm256_add_pd(hi, _mm256_mul_pd(wa1, _mm256_loadu_pd(b + i + 4)));
  }
  double total = fold(lo, hi);
  for (; i < n; ++i) total += (w[i] * a[i]) * b[i];
  return total;
}

FAIRIMPUTE_AVX2 double sum_avx2(const double* a, std::size_t n) {
  __m256d lo = _mm256_setzero_pd();
  __m256d hi = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    lo = _mm256_add_pd(lo, _mm256_loadu_pd(a + i));
    hi = _mm256_add_pd(hi, _mm256_loadu_pd(a + i + 4));
  }
  double total = fold(lo, hi);
  for (; i < n; ++i) total += a[i];
  return total;
}

FAIRIMPUTE_AVX2 double sum_sq_diff_avx2(const double* a, const double* b,
                                        std::size_t n) {
  __m256d lo = _mm256_setzero_pd();
  __m256d hi = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256d d0 =
        _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    const __m256d d1 =
        _mm256_sub_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4));
    lo = _mm256_add_pd(lo, _mm256_mul_pd(d0, d0));
    hi = _mm256_add_pd(hi, _mm256_mul_pd(d1, d1));
  }
  double total = fold(lo, hi);
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    total += d * d;
  }
  return total;
}

FAIRIMPUTE_AVX2 void axpy_avx2(double alpha, const double* x, double* y,
                               std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d prod = _mm256_mul_pd(va, _mm256_loadu_pd(x + i));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), prod));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

#undef FAIRIMPUTE_AVX2

}  // namespace

const KernelTable kAvx2Kernels = {
    dot_avx2, weighted_dot_avx2, sum_avx2, sum_sq_diff_avx2, axpy_avx2,
};

}  // namespace fairimpute::simd::detail

#endif
