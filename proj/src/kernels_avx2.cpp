// AVX2+FMA kernel variants. This translation unit is compiled with
// -mavx2 -mfma and must only be entered after a runtime CPU check.

#include "fedfolio/kernels.hpp"

#if defined(FEDFOLIO_HAVE_AVX2)

#include <immintrin.h>

namespace fedfolio::kernels {

namespace {

inline double reduce_add_f64x4(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  __m128d s = _mm_add_pd(lo, hi);
  __m128d shuf = _mm_unpackhi_pd(s, s);
  return _mm_cvtsd_f64(_mm_add_sd(s, shuf));
}

}  // namespace

double dot_avx2(const double* x, const double* y, std::size_t n) {
  std::size_t n8 = n - (n & 7u);
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  for (std::size_t i = 0; i < n8; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i),
                           acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4),
                           _mm256_loadu_pd(y + i + 4), acc1);
  }
  double result = reduce_add_f64x4(_mm256_add_pd(acc0, acc1));
  for (std::size_t i = n8; i < n; ++i) {
    result += x[i] * y[i];
  }
  return result;
}

double sum_avx2(const double* x, std::size_t n) {
  std::size_t n4 = n - (n & 3u);
  __m256d acc = _mm256_setzero_pd();
  for (std::size_t i = 0; i < n4; i += 4) {
    acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  }
  double result = reduce_add_f64x4(acc);
  for (std::size_t i = n4; i < n; ++i) {
    result += x[i];
  }
  return result;
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
  std::size_t n4 = n - (n & 3u);
  __m256d va = _mm256_set1_pd(a);
  for (std::size_t i = 0; i < n4; i += 4) {
    __m256d vy = _mm256_loadu_pd(y + i);
    vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
    _mm256_storeu_pd(y + i, vy);
  }
  for (std::size_t i = n4; i < n; ++i) {
    y[i] += a * x[i];
  }
}

void matvec_avx2(const double* m, const double* x, double* y, std::size_t rows,
                 std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    y[r] = dot_avx2(m + r * cols, x, cols);
  }
}

}  // namespace fedfolio::kernels

#endif  // FEDFOLIO_HAVE_AVX2
