#include "fairimpute/simd.hpp"

#if defined(__aarch64__)

#include <arm_neon.h>

namespace fairimpute::simd::detail {

namespace {

// q0..q3 hold lanes {0,1}, {2,3}, {4,5}, {6,7} of the scalar reference.
inline double fold(float64x2_t q0, float64x2_t q1, float64x2_t q2,
                   float64x2_t q3) {
  const float64x2_t t01 = vaddq_f64(q0, q2);
  const float64x2_t t23 = vaddq_f64(q1, q3);
  return (vgetq_lane_f64(t01, 0) + vgetq_lane_f64(t01, 1)) +
         (vgetq_lane_f64(t23, 0) + vgetq_lane_f64(t23, 1));
}

double dot_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t q[4] = {vdupq_n_f64(0.0), vdupq_n_f64(0.0), vdupq_n_f64(0.0),
                      vdupq_n_f64(0.0)};
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    for (int k = 0; k < 4; ++k) {
      q[k] = vaddq_f64(q[k], vmulq_f64(vld1q_f64(a + i + 2 * k),
                                       vld1q_f64(b + i + 2 * k)));
    }
  }
  double total = fold(q[0], q[1], q[2], q[3]);
  for (; i < n; ++i) total += a[i] * b[i];
  return total;
}

double weighted_dot_neon(const double* w, const double* a, const double* b,
                         std::size_t n) {
  float64x2_t q[4] = {vdupq_n_f64(0.0), vdupq_n_f64(0.0), vdupq_n_f64(0.0),
                      vdupq_n_f64(0.0)};
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    for (int k = 0; k < 4; ++k) {
      const float64x2_t wa =
          vmulq_f64(vld1q_f64(w + i + 2 * k), vld1q_f64(a + i + 2 * k));
      q[k] = vaddq_f64(q[k], vmulq_f64(wa, vld1q_f64(b + i + 2 * k)));
    }
  }
  double total = fold(q[0], q[1], q[2], q[3]);
  for (; i < n; ++i) total += (w[i] * a[i]) * b[i];
  return total;
}

double sum_neon(const double* a, std::size_t n) {
  float64x2_t q[4] = {vdupq_n_f64(0.0), vdupq_n_f64(0.0), vdupq_n_f64(0.0),
                      vdupq_n_f64(0.0)};
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    for (int k = 0; k < 4; ++k) q[k] = vaddq_f64(q[k], vld1q_f64(a + i + 2 * k));
  }
  double total = fold(q[0], q[1], q[2], q[3]);
  for (; i < n; ++i) total += a[i];
  return total;
}

double sum_sq_diff_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t q[4] = {vdupq_n_f64(0.0), vdupq_n_f64(0.0), vdupq_n_f64(0.0),
                      vdupq_n_f64(0.0)};
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    for (int k = 0; k < 4; ++k) {
      const float64x2_t d =
          vsubq_f64(vld1q_f64(a + i + 2 * k), vld1q_f64(b + i + 2 * k));
      q[k] = vaddq_f64(q[k], vmulq_f64(d, d));
    }
  }
  double total = fold(q[0], q[1], q[2], q[3]);
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    total += d * d;
  }
  return total;
}

void axpy_neon(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), vmulq_f64(va, vld1q_f64(x + i))));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

}  // namespace

const KernelTable kNeonKernels = {
    dot_neon, weighted_dot_neon, sum_neon, sum_sq_diff_neon, axpy_neon,
};

}  // namespace fairimpute::simd::detail

#endif
