// AVX2 lane, compiled with -mavx2 for this translation unit only. No FMA:
// separate mul+add keeps results bit-identical to the scalar lane, and the
// 4-lane horizontal reduce matches the scalar lane's (a0+a1)+(a2+a3) order.

#include "caslearn/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#include <immintrin.h>

namespace caslearn::kern {
namespace {

inline double hsum4(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  __m128d lo_s = _mm_add_sd(lo, _mm_unpackhi_pd(lo, lo));  // a0+a1
  __m128d hi_s = _mm_add_sd(hi, _mm_unpackhi_pd(hi, hi));  // a2+a3
  return _mm_cvtsd_f64(_mm_add_sd(lo_s, hi_s));
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d xv = _mm256_loadu_pd(x + i);
    __m256d yv = _mm256_loadu_pd(y + i);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(xv, yv));
  }
  double r = hsum4(acc);
  for (; i < n; ++i) r += x[i] * y[i];
  return r;
}

void axpy_avx2(double* y, double a, const double* x, std::size_t n) {
  __m256d av = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d yv = _mm256_loadu_pd(y + i);
    __m256d xv = _mm256_loadu_pd(x + i);
    _mm256_storeu_pd(y + i, _mm256_add_pd(yv, _mm256_mul_pd(av, xv)));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void add_avx2(double* dst, const double* a, const double* b, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(dst + i, _mm256_add_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) dst[i] = a[i] + b[i];
}

void sub_avx2(double* dst, const double* a, const double* b, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(dst + i, _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) dst[i] = a[i] - b[i];
}

void mul_avx2(double* dst, const double* a, const double* b, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(dst + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) dst[i] = a[i] * b[i];
}

void scale_avx2(double* dst, const double* a, double s, std::size_t n) {
  __m256d sv = _mm256_set1_pd(s);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(dst + i, _mm256_mul_pd(sv, _mm256_loadu_pd(a + i)));
  for (; i < n; ++i) dst[i] = s * a[i];
}

double sum_avx2(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  double r = hsum4(acc);
  for (; i < n; ++i) r += x[i];
  return r;
}

}  // namespace

const Ops& avx2_ops() {
  static const Ops ops = {dot_avx2, axpy_avx2, add_avx2, sub_avx2,
                          mul_avx2, scale_avx2, sum_avx2};
  return ops;
}

bool avx2_compiled() { return true; }

}  // namespace caslearn::kern

#else  // non-x86: the dispatcher never asks for this lane

namespace caslearn::kern {
const Ops& avx2_ops() { return scalar_ops(); }
bool avx2_compiled() { return false; }
}  // namespace caslearn::kern

#endif
