#pragma once

#include <cstdint>
#include <initializer_list>

namespace fairimpute {

/// Mixes one 64-bit word (SplitMix64 finaliser).
std::uint64_t mix64(std::uint64_t x);

/// Derives an independent child seed from a parent seed and a path of stream
/// identifiers. Identical paths give identical seeds on every platform.
std::uint64_t derive_seed(std::uint64_t parent,
                          std::initializer_list<std::uint64_t> path);

/// xoshiro256++ seeded through SplitMix64. Every sampling routine here is
/// written out explicitly so results do not depend on the standard library's
/// distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Standard normal via the Marsaglia polar method.
  double normal();
  bool bernoulli(double p) { return uniform() < p; }
  /// Uniform integer on [0, bound). bound must be positive.
  std::uint64_t below(std::uint64_t bound);

 private:
  std::uint64_t s_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace fairimpute
