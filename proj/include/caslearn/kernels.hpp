// kernels.hpp
//   Dense double-precision inner loops behind the tensor engine: one scalar
//   reference lane and one AVX2 lane, selected at runtime. Both lanes use the
//   same blocked accumulation order (4 independent accumulators, combined as
//   (a0+a1)+(a2+a3), then the tail in element order), so their results are
//   bit-identical and runs reproduce regardless of which lane is active.

#pragma once

#include <cstddef>

namespace caslearn::kern {

struct Ops {
  // r = sum_i x[i]*y[i]
  double (*dot)(const double* x, const double* y, std::size_t n);
  // y[i] += a*x[i]
  void (*axpy)(double* y, double a, const double* x, std::size_t n);
  // dst[i] = a[i] + b[i]
  void (*add)(double* dst, const double* a, const double* b, std::size_t n);
  // dst[i] = a[i] - b[i]
  void (*sub)(double* dst, const double* a, const double* b, std::size_t n);
  // dst[i] = a[i] * b[i]
  void (*mul)(double* dst, const double* a, const double* b, std::size_t n);
  // dst[i] = s * a[i]
  void (*scale)(double* dst, const double* a, double s, std::size_t n);
  // r = sum_i x[i]
  double (*sum)(const double* x, std::size_t n);
};

enum class Lane { scalar, avx2 };

const Ops& scalar_ops();
bool avx2_available();   // compiled in and supported by this CPU
const Ops& avx2_ops();   // valid only if avx2_available()

// Active lane: picked once at startup (AVX2 when available, else scalar);
// the CASLEARN_KERNELS environment variable ("scalar"/"avx2") and
// force_lane() override it, mainly for the equivalence tests.
const Ops& active();
Lane active_lane();
void force_lane(Lane lane);

}  // namespace caslearn::kern
