// Scalar reference lane. The reductions use the same 4-accumulator blocking
// as the AVX2 lane; keep the two files in sync when changing either.

#include "caslearn/kernels.hpp"

namespace caslearn::kern {
namespace {

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    a0 += x[i] * y[i];
    a1 += x[i + 1] * y[i + 1];
    a2 += x[i + 2] * y[i + 2];
    a3 += x[i + 3] * y[i + 3];
  }
  double r = (a0 + a1) + (a2 + a3);
  for (; i < n; ++i) r += x[i] * y[i];
  return r;
}

void axpy_scalar(double* y, double a, const double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void add_scalar(double* dst, const double* a, const double* b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] = a[i] + b[i];
}

void sub_scalar(double* dst, const double* a, const double* b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] = a[i] - b[i];
}

void mul_scalar(double* dst, const double* a, const double* b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] = a[i] * b[i];
}

void scale_scalar(double* dst, const double* a, double s, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] = s * a[i];
}

double sum_scalar(const double* x, std::size_t n) {
  double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    a0 += x[i];
    a1 += x[i + 1];
    a2 += x[i + 2];
    a3 += x[i + 3];
  }
  double r = (a0 + a1) + (a2 + a3);
  for (; i < n; ++i) r += x[i];
  return r;
}

}  // namespace

const Ops& scalar_ops() {
  static const Ops ops = {dot_scalar, axpy_scalar, add_scalar, sub_scalar,
                          mul_scalar, scale_scalar, sum_scalar};
  return ops;
}

}  // namespace caslearn::kern
