#include "msf/kernels.hpp"

#include <cmath>

namespace msf::kernels {

void fma2_scalar(double* y, const double* x, double a, const double* z, double b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i] + b * z[i];
}

void axpy_scalar(double* y, const double* x, double a, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scale_scalar(double* y, double a, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] *= a;
}

double sum_scalar(const double* x, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i];
  return s;
}

double sum_compensated(const double* x, std::size_t n) {
  double s = 0.0, c = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double t = s + x[i];
    if (std::abs(s) >= std::abs(x[i]))
      c += (s - t) + x[i];
    else
      c += (x[i] - t) + s;
    s = t;
  }
  return s + c;
}

namespace {

struct Dispatch {
  Fma2Fn fma2 = fma2_scalar;
  AxpyFn axpy = axpy_scalar;
  ScaleFn scale = scale_scalar;
  SumFn sum = sum_scalar;
  std::string variant = "scalar";

  Dispatch() {
#if defined(MSF_HAVE_AVX2_TU)
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) {
      fma2 = fma2_avx2;
      axpy = axpy_avx2;
      scale = scale_avx2;
      sum = sum_avx2;
      variant = "avx2";
    }
#elif defined(MSF_HAVE_NEON_TU)
    fma2 = fma2_neon;
    axpy = axpy_neon;
    scale = scale_neon;
    sum = sum_neon;
    variant = "neon";
#endif
  }
};

const Dispatch& dispatch() {
  static const Dispatch d;
  return d;
}

}  // namespace

const Fma2Fn fma2 = dispatch().fma2;
const AxpyFn axpy = dispatch().axpy;
const ScaleFn scale = dispatch().scale;
const SumFn sum = dispatch().sum;

const std::string& active_variant() { return dispatch().variant; }

}  // namespace msf::kernels
