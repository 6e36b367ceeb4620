#include "fairimpute/simd.hpp"

namespace fairimpute::simd::detail {

namespace {

constexpr std::size_t kLanes = 8;

// Lane k of the vector variants holds acc[k] and acc[k + 4]; they are folded
// first, then the four halves pairwise.
double fold(const double (&acc)[kLanes]) {
  const double t0 = acc[0] + acc[4];
  const double t1 = acc[1] + acc[5];
  const double t2 = acc[2] + acc[6];
  const double t3 = acc[3] + acc[7];
  return (t0 + t1) + (t2 + t3);
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc[kLanes] = {};
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    for (std::size_t k = 0; k < kLanes; ++k) acc[k] += a[i + k] * b[i + k];
  }
  double total = fold(acc);
  for (; i < n; ++i) total += a[i] * b[i];
  return total;
}

double weighted_dot_scalar(const double* w, const double* a, const double* b,
                           std::size_t n) {
  double acc[kLanes] = {};
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    for (std::size_t k = 0; k < kLanes; ++k) {
      acc[k] += (w[i + k] * a[i + k]) * b[i + k];
    }
  }
  double total = fold(acc);
  for (; i < n; ++i) total += (w[i] * a[i]) * b[i];
  return total;
}

double sum_scalar(const double* a, std::size_t n) {
  double acc[kLanes] = {};
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    for (std::size_t k = 0; k < kLanes; ++k) acc[k] += a[i + k];
  }
  double total = fold(acc);
  for (; i < n; ++i) total += a[i];
  return total;
}

double sum_sq_diff_scalar(const double* a, const double* b, std::size_t n) {
  double acc[kLanes] = {};
  std::size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    for (std::size_t k = 0; k < kLanes; ++k) {
      const double d = a[i + k] - b[i + k];
      acc[k] += d * d;
    }
  }
  double total = fold(acc);
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    total += d * d;
  }
  return total;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

}  // namespace

const KernelTable kScalarKernels = {
    dot_scalar, weighted_dot_scalar, sum_scalar, sum_sq_diff_scalar,
    axpy_scalar,
};

}  // namespace fairimpute::simd::detail
