#include "sid/kernels.hpp"

#include <cstdlib>
#include <cstring>

#include "sid/errors.hpp"

namespace sid::kernels {
namespace {

using detail::Ops;

bool cpu_has_avx2() {
#if defined(SIDKIT_BUILD_AVX2) && defined(__GNUC__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const Ops* pick_auto() {
#ifdef SIDKIT_BUILD_AVX2
  if (const char* env = std::getenv("SID_KERNELS")) {
    if (std::strcmp(env, "scalar") == 0) return &detail::scalar_ops;
    if (std::strcmp(env, "avx2") == 0 && cpu_has_avx2())
      return &detail::avx2_ops;
    return &detail::scalar_ops;
  }
  if (cpu_has_avx2()) return &detail::avx2_ops;
#endif
  return &detail::scalar_ops;
}

const Ops* g_ops = pick_auto();

}  // namespace

bool avx2_available() { return cpu_has_avx2(); }

void set_impl(Impl impl) {
  switch (impl) {
    case Impl::Auto:
      g_ops = pick_auto();
      return;
    case Impl::Scalar:
      g_ops = &detail::scalar_ops;
      return;
    case Impl::Avx2:
#ifdef SIDKIT_BUILD_AVX2
      if (cpu_has_avx2()) {
        g_ops = &detail::avx2_ops;
        return;
      }
#endif
      throw ConfigError("AVX2 kernels not available on this CPU/build");
  }
}

const char* active_impl_name() {
#ifdef SIDKIT_BUILD_AVX2
  if (g_ops == &detail::avx2_ops) return "avx2";
#endif
  return "scalar";
}

double dot(const double* a, const double* b, std::size_t n) {
  return g_ops->dot(a, b, n);
}
double sum(const double* a, std::size_t n) { return g_ops->sum(a, n); }
double sumsq(const double* a, std::size_t n) { return g_ops->sumsq(a, n); }
double max_val(const double* a, std::size_t n) { return g_ops->max_val(a, n); }
void axpy(double alpha, const double* x, double* y, std::size_t n) {
  g_ops->axpy(alpha, x, y, n);
}
void axpy_sq(double alpha, const double* x, double* y, std::size_t n) {
  g_ops->axpy_sq(alpha, x, y, n);
}
void mul(const double* a, const double* b, double* out, std::size_t n) {
  g_ops->mul(a, b, out, n);
}
void scale(double alpha, double* x, std::size_t n) {
  g_ops->scale(alpha, x, n);
}
double quad_diag(const double* x, const double* mean, const double* inv_var,
                 std::size_t n) {
  return g_ops->quad_diag(x, mean, inv_var, n);
}

}  // namespace sid::kernels
