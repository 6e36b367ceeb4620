#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "fairimpute/rng.hpp"

using namespace fairimpute;

TEST_CASE("same seed, same stream") {
  Rng a(123), b(123), c(124);
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    differs = differs || x != c.next_u64();
  }
  CHECK(differs);
}

TEST_CASE("derived seeds depend on the whole path") {
  const std::set<std::uint64_t> seeds{derive_seed(1, {}), derive_seed(1, {0}), derive_seed(1, {1}),
                                      derive_seed(1, {0, 1}), derive_seed(1, {1, 0}),
                                      derive_seed(2, {0})};
  CHECK(seeds.size() == 6);
  CHECK(derive_seed(99, {3, 4}) == derive_seed(99, {3, 4}));
}

TEST_CASE("uniform and below stay in range") {
  Rng rng(7);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) {
    const double u = rng.uniform();
    CHECK((u >= 0.0 && u < 1.0));
    ++counts[rng.below(7)];
  }
  for (int c : counts) CHECK(std::abs(c - 10000) < 4 * std::sqrt(10000.0 * 6 / 7));
}

TEST_CASE("gaussian sampler moments within 3 sigma") {
  Rng rng(11);
  const int n = 200000;
  double s = 0, ss = 0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    s += x;
    ss += x * x;
  }
  const double mean = s / n;
  const double var = ss / n - mean * mean;
  CHECK(std::fabs(mean) < 3.0 / std::sqrt(n));
  CHECK(std::fabs(var - 1.0) < 3.0 * std::sqrt(2.0 / n));
}
