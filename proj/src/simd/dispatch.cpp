#include <atomic>
#include <string>

#include "fairimpute/errors.hpp"
#include "fairimpute/simd.hpp"

namespace fairimpute::simd {

namespace {

std::atomic<int>& active_slot() {
  static std::atomic<int> slot{static_cast<int>(detect_best_isa())};
  return slot;
}

void check_lengths(std::size_t a, std::size_t b) {
  if (a != b) {
    throw PreconditionError("simd kernel: span lengths differ (" +
                            std::to_string(a) + " vs " + std::to_string(b) +
                            ")");
  }
}

const KernelTable& active() {
  return kernels_for(static_cast<Isa>(active_slot().load(std::memory_order_relaxed)));
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return "scalar";
    case Isa::kAvx2:
      return "avx2";
    case Isa::kNeon:
      return "neon";
  }
  return "unknown";
}

bool isa_available(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return true;
    case Isa::kAvx2:
#if defined(__x86_64__) || defined(_M_X64)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
    case Isa::kNeon:
#if defined(__aarch64__)
      return true;
#else
      return false;
#endif
  }
  return false;
}

Isa detect_best_isa() {
  if (isa_available(Isa::kAvx2)) return Isa::kAvx2;
  if (isa_available(Isa::kNeon)) return Isa::kNeon;
  return Isa::kScalar;
}

Isa active_isa() {
  return static_cast<Isa>(active_slot().load(std::memory_order_relaxed));
}

void set_active_isa(Isa isa) {
  if (!isa_available(isa)) {
    throw PreconditionError("simd: instruction set '" +
                            std::string(isa_name(isa)) +
                            "' is not available on this CPU");
  }
  active_slot().store(static_cast<int>(isa), std::memory_order_relaxed);
}

const KernelTable& kernels_for(Isa isa) {
  switch (isa) {
#if defined(__x86_64__) || defined(_M_X64)
    case Isa::kAvx2:
      return detail::kAvx2Kernels;
#endif
#if defined(__aarch64__)
    case Isa::kNeon:
      return detail::kNeonKernels;
#endif
    default:
      return detail::kScalarKernels;
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  check_lengths(a.size(), b.size());
  return active().dot(a.data(), b.data(), a.size());
}

double weighted_dot(std::span<const double> w, std::span<const double> a,
                    std::span<const double> b) {
  check_lengths(w.size(), a.size());
  check_lengths(a.size(), b.size());
  return active().weighted_dot(w.data(), a.data(), b.data(), a.size());
}

double sum(std::span<const double> a) {
  return active().sum(a.data(), a.size());
}

double sum_sq_diff(std::span<const double> a, std::span<const double> b) {
  check_lengths(a.size(), b.size());
  return active().sum_sq_diff(a.data(), b.data(), a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  check_lengths(x.size(), y.size());
  active().axpy(alpha, x.data(), y.data(), x.size());
}

}  // namespace fairimpute::simd
