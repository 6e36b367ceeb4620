#pragma once

// Data-parallel reductions used by the regression and metric code.
//
// Every kernel has a scalar reference and vectorised variants (AVX2 on x86-64,
// NEON on AArch64). The scalar reference accumulates into eight interleaved
// partial sums and combines them in a fixed order, which is exactly what the
// vector variants do lane-wise, so all variants return bit-identical results.

#include <cstddef>
#include <span>
#include <string_view>

namespace fairimpute::simd {

enum class Isa { kScalar, kAvx2, kNeon };

std::string_view isa_name(Isa isa);

/// True when the running CPU (and the build) supports `isa`.
bool isa_available(Isa isa);

/// The variant currently used by the dispatching entry points below.
Isa active_isa();

/// Forces a variant. Throws PreconditionError if it is not available.
void set_active_isa(Isa isa);

/// Best variant available on this CPU; chosen at first use.
Isa detect_best_isa();

struct KernelTable {
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*weighted_dot)(const double* w, const double* a, const double* b,
                         std::size_t n);
  double (*sum)(const double* a, std::size_t n);
  double (*sum_sq_diff)(const double* a, const double* b, std::size_t n);
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
};

const KernelTable& kernels_for(Isa isa);

// Dispatching entry points. Lengths of paired spans must match.
double dot(std::span<const double> a, std::span<const double> b);
/// sum_i (w_i * a_i) * b_i
double weighted_dot(std::span<const double> w, std::span<const double> a,
                    std::span<const double> b);
double sum(std::span<const double> a);
/// sum_i (a_i - b_i)^2
double sum_sq_diff(std::span<const double> a, std::span<const double> b);
/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);

namespace detail {
extern const KernelTable kScalarKernels;
#if defined(__x86_64__) || defined(_M_X64)
extern const KernelTable kAvx2Kernels;
#endif
#if defined(__aarch64__)
extern const KernelTable kNeonKernels;
#endif
}  // namespace detail

}  // namespace fairimpute::simd
