// NEON kernels (AArch64, where Advanced SIMD is baseline). Two float64x2
// registers hold lanes {0,1} and {2,3} of the four-lane reduction layout.

#include <arm_neon.h>

#include "adascale/kernels/kernels.hpp"

namespace adascale::kernels {
namespace {

double dot_neon(const double* x, const double* y, std::size_t n) {
  float64x2_t lo = vdupq_n_f64(0.0);
  float64x2_t hi = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    lo = vaddq_f64(lo, vmulq_f64(vld1q_f64(x + i), vld1q_f64(y + i)));
    hi = vaddq_f64(hi, vmulq_f64(vld1q_f64(x + i + 2), vld1q_f64(y + i + 2)));
  }
  double s = (vgetq_lane_f64(lo, 0) + vgetq_lane_f64(hi, 0)) +
             (vgetq_lane_f64(lo, 1) + vgetq_lane_f64(hi, 1));
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

double sq_norm_neon(const double* x, std::size_t n) { return dot_neon(x, x, n); }

void axpy_neon(double a, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), vmulq_f64(va, vld1q_f64(x + i))));
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void scale_add_neon(double a, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(y + i, vaddq_f64(vmulq_f64(va, vld1q_f64(y + i)), vld1q_f64(x + i)));
  }
  for (; i < n; ++i) y[i] = a * y[i] + x[i];
}

void sub_neon(const double* x, const double* y, double* z, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(z + i, vsubq_f64(vld1q_f64(x + i), vld1q_f64(y + i)));
  for (; i < n; ++i) z[i] = x[i] - y[i];
}

void add_neon(const double* x, double* y, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] += x[i];
}

void scale_neon(double a, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vmulq_f64(vld1q_f64(y + i), va));
  for (; i < n; ++i) y[i] *= a;
}

constexpr KernelTable kNeon{Isa::neon,     dot_neon, sq_norm_neon, axpy_neon,
                            scale_add_neon, sub_neon, add_neon,     scale_neon};

}  // namespace

const KernelTable* neon_table() { return &kNeon; }

}  // namespace adascale::kernels
