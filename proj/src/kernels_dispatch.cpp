#include "fedfolio/kernels.hpp"

namespace fedfolio::kernels {

bool cpu_supports_avx2() {
#if defined(FEDFOLIO_HAVE_AVX2)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

namespace {

dot_fn select_dot() {
#if defined(FEDFOLIO_HAVE_AVX2)
  if (cpu_supports_avx2()) return &dot_avx2;
#endif
  return &dot_scalar;
}

sum_fn select_sum() {
#if defined(FEDFOLIO_HAVE_AVX2)
  if (cpu_supports_avx2()) return &sum_avx2;
#endif
  return &sum_scalar;
}

axpy_fn select_axpy() {
#if defined(FEDFOLIO_HAVE_AVX2)
  if (cpu_supports_avx2()) return &axpy_avx2;
#endif
  return &axpy_scalar;
}

matvec_fn select_matvec() {
#if defined(FEDFOLIO_HAVE_AVX2)
  if (cpu_supports_avx2()) return &matvec_avx2;
#endif
  return &matvec_scalar;
}

}  // namespace

const dot_fn dot = select_dot();
const sum_fn sum = select_sum();
const axpy_fn axpy = select_axpy();
const matvec_fn matvec = select_matvec();

const char* active_backend() {
  return cpu_supports_avx2() ? "avx2" : "scalar";
}

}  // namespace fedfolio::kernels
