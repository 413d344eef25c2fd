#ifndef SID_KERNELS_HPP
#define SID_KERNELS_HPP

#include <cstddef>

// Arithmetic inner loops shared by feature extraction and model training.
// A scalar reference implementation always exists; an AVX2+FMA variant is
// selected at runtime when the CPU supports it. The two are equivalence
// tested against each other. SID_KERNELS=scalar|avx2 in the environment
// forces a backend.
namespace sid::kernels {

enum class Impl { Auto, Scalar, Avx2 };

// Selects a backend. Impl::Auto re-probes the CPU. Throws ConfigError if a
// forced backend is unavailable.
void set_impl(Impl impl);
const char* active_impl_name();
bool avx2_available();

double dot(const double* a, const double* b, std::size_t n);
double sum(const double* a, std::size_t n);
double sumsq(const double* a, std::size_t n);
double max_val(const double* a, std::size_t n);

// y[i] += alpha * x[i]
void axpy(double alpha, const double* x, double* y, std::size_t n);
// y[i] += alpha * x[i]^2
void axpy_sq(double alpha, const double* x, double* y, std::size_t n);
// out[i] = a[i] * b[i]
void mul(const double* a, const double* b, double* out, std::size_t n);
void scale(double alpha, double* x, std::size_t n);
// sum_i (x[i] - mean[i])^2 * inv_var[i] — the diagonal Gaussian exponent.
double quad_diag(const double* x, const double* mean, const double* inv_var,
                 std::size_t n);

namespace detail {
struct Ops {
  double (*dot)(const double*, const double*, std::size_t);
  double (*sum)(const double*, std::size_t);
  double (*sumsq)(const double*, std::size_t);
  double (*max_val)(const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  void (*axpy_sq)(double, const double*, double*, std::size_t);
  void (*mul)(const double*, const double*, double*, std::size_t);
  void (*scale)(double, double*, std::size_t);
  double (*quad_diag)(const double*, const double*, const double*,
                      std::size_t);
};
extern Ops scalar_ops;
#ifdef SIDKIT_BUILD_AVX2
extern Ops avx2_ops;
#endif
}  // namespace detail

}  // namespace sid::kernels

#endif  // SID_KERNELS_HPP
