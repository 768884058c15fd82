#include "msf/kernels.hpp"

#include <arm_neon.h>

namespace msf::kernels {

void fma2_neon(double* y, const double* x, double a, const double* z, double b, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(a);
  const float64x2_t vb = vdupq_n_f64(b);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t vy = vld1q_f64(y + i);
    vy = vfmaq_f64(vy, va, vld1q_f64(x + i));
    vy = vfmaq_f64(vy, vb, vld1q_f64(z + i));
    vst1q_f64(y + i, vy);
  }
  for (; i < n; ++i) y[i] += a * x[i] + b * z[i];
}

void axpy_neon(double* y, const double* x, double a, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t vy = vld1q_f64(y + i);
    vy = vfmaq_f64(vy, va, vld1q_f64(x + i));
    vst1q_f64(y + i, vy);
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void scale_neon(double* y, double a, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vmulq_f64(va, vld1q_f64(y + i)));
  for (; i < n; ++i) y[i] *= a;
}

double sum_neon(const double* x, std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) acc = vaddq_f64(acc, vld1q_f64(x + i));
  double s = vgetq_lane_f64(acc, 0) + vgetq_lane_f64(acc, 1);
  for (; i < n; ++i) s += x[i];
  return s;
}

}  // namespace msf::kernels
