#include "sid/kernels.hpp"

namespace sid::kernels {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double sum_scalar(const double* a, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i];
  return s;
}

double sumsq_scalar(const double* a, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * a[i];
  return s;
}

double max_scalar(const double* a, std::size_t n) {
  double m = a[0];
  for (std::size_t i = 1; i < n; ++i)
    if (a[i] > m) m = a[i];
  return m;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void axpy_sq_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i] * x[i];
}

void mul_scalar(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void scale_scalar(double alpha, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

double quad_diag_scalar(const double* x, const double* mean,
                        const double* inv_var, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = x[i] - mean[i];
    s += d * d * inv_var[i];
  }
  return s;
}

}  // namespace

namespace detail {
Ops scalar_ops = {dot_scalar,     sum_scalar, sumsq_scalar,
                  max_scalar,     axpy_scalar, axpy_sq_scalar,
                  mul_scalar,     scale_scalar, quad_diag_scalar};
}  // namespace detail

}  // namespace sid::kernels
