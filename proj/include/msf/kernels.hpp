#ifndef MSF_KERNELS_HPP
#define MSF_KERNELS_HPP

#include <cstddef>
#include <string>

// Vector kernels under the forward recursion. Every hot update in the
// recursion is of the form y += a*x + b*z over a contiguous block (the
// per-tuple gradient / Hessian slices), so one fused kernel plus a scale
// kernel covers the whole inner loop. Scalar reference implementations are
// always compiled; on x86-64 an AVX2+FMA variant is selected at runtime.

namespace msf::kernels {

// y[i] += a * x[i] + b * z[i]
void fma2_scalar(double* y, const double* x, double a, const double* z, double b, std::size_t n);

// y[i] += a * x[i]
void axpy_scalar(double* y, const double* x, double a, std::size_t n);

// y[i] *= a
void scale_scalar(double* y, double a, std::size_t n);

double sum_scalar(const double* x, std::size_t n);

// Neumaier-compensated sum; used where 1e-12-level trust is required.
double sum_compensated(const double* x, std::size_t n);

using Fma2Fn = void (*)(double*, const double*, double, const double*, double, std::size_t);
using AxpyFn = void (*)(double*, const double*, double, std::size_t);
using ScaleFn = void (*)(double*, double, std::size_t);
using SumFn = double (*)(const double*, std::size_t);

// Dispatched entry points (function pointers resolved once at startup).
extern const Fma2Fn fma2;
extern const AxpyFn axpy;
extern const ScaleFn scale;
extern const SumFn sum;

// "scalar", "avx2", or "neon" -- whichever the dispatcher picked.
const std::string& active_variant();

#if defined(MSF_HAVE_AVX2_TU)
void fma2_avx2(double* y, const double* x, double a, const double* z, double b, std::size_t n);
void axpy_avx2(double* y, const double* x, double a, std::size_t n);
void scale_avx2(double* y, double a, std::size_t n);
double sum_avx2(const double* x, std::size_t n);
#endif
#if defined(MSF_HAVE_NEON_TU)
void fma2_neon(double* y, const double* x, double a, const double* z, double b, std::size_t n);
void axpy_neon(double* y, const double* x, double a, std::size_t n);
void scale_neon(double* y, double a, std::size_t n);
double sum_neon(const double* x, std::size_t n);
#endif

}  // namespace msf::kernels

#endif
