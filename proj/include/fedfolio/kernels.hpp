#pragma once

#include <cstddef>

// Dense double-precision kernels used by the estimators and solvers.
// Each kernel has a scalar reference implementation and, on x86-64, an
// AVX2+FMA variant. The dispatched entry points are resolved once at
// startup from CPU feature detection; scalar and vector variants are
// equivalence-tested against each other.
namespace fedfolio::kernels {

using dot_fn = double (*)(const double*, const double*, std::size_t);
using sum_fn = double (*)(const double*, std::size_t);
using axpy_fn = void (*)(double, const double*, double*, std::size_t);
using matvec_fn = void (*)(const double*, const double*, double*, std::size_t,
                           std::size_t);

// Scalar reference kernels.
double dot_scalar(const double* x, const double* y, std::size_t n);
double sum_scalar(const double* x, std::size_t n);
void axpy_scalar(double a, const double* x, double* y, std::size_t n);
// y = M x with M row-major (rows x cols).
void matvec_scalar(const double* m, const double* x, double* y,
                   std::size_t rows, std::size_t cols);

#if defined(FEDFOLIO_HAVE_AVX2)
double dot_avx2(const double* x, const double* y, std::size_t n);
double sum_avx2(const double* x, std::size_t n);
void axpy_avx2(double a, const double* x, double* y, std::size_t n);
void matvec_avx2(const double* m, const double* x, double* y, std::size_t rows,
                 std::size_t cols);
#endif

bool cpu_supports_avx2();

// Dispatched entry points. Bound once, before main().
extern const dot_fn dot;
extern const sum_fn sum;
extern const axpy_fn axpy;
extern const matvec_fn matvec;

// Name of the backend the dispatcher selected: "avx2" or "scalar".
const char* active_backend();

}  // namespace fedfolio::kernels
