#include <doctest.h>

#include <cmath>
#include <vector>

#include "fairimpute/errors.hpp"
#include "fairimpute/synthgen.hpp"

using namespace fairimpute;

namespace {

struct Moments {
  std::size_t n = 0;
  std::vector<double> sum, sum_sq;
  explicit Moments(std::size_t d) : sum(d, 0.0), sum_sq(d, 0.0) {}
  void add(std::span<const double> x) {
    ++n;
    for (std::size_t j = 0; j < x.size(); ++j) {
      sum[j] += x[j];
      sum_sq[j] += x[j] * x[j];
    }
  }
  double mean(std::size_t j) const { return sum[j] / n; }
  double var(std::size_t j) const { return sum_sq[j] / n - mean(j) * mean(j); }
};

void check_cluster(const Moments& m, const ClusterSpec& c) {
  REQUIRE(m.n > 100);
  const double sd = std::sqrt(c.variance);
  for (std::size_t j = 0; j < c.mean.size(); ++j) {
    CHECK(std::fabs(m.mean(j) - c.mean[j]) <= 3 * sd / std::sqrt(m.n));
    if (3 * sd / std::sqrt(m.n) <= 0.01) CHECK(std::fabs(m.mean(j) - c.mean[j]) <= 0.01);
    // var of the sample variance ~ 2 sigma^4 / n
    CHECK(std::fabs(m.var(j) - c.variance) <= 3 * c.variance * std::sqrt(2.0 / m.n) + 1e-12);
  }
}

}  // namespace

TEST_CASE("base population: counts, cluster moments, prevalence") {
  const auto spec = paper_base_population(17);
  const Cohort c = generate(spec);
  REQUIRE(c.rows() == 101000);
  std::size_t marg = 0, pos_major = 0, pos_marg = 0;
  Moments neg(2), pmaj(2), pmarg(2);
  for (std::size_t i = 0; i < c.rows(); ++i) {
    const bool g = c.group()[i] == 1;
    marg += g;
    if (c.outcome()[i] == 0) {
      neg.add(c.covariates().row(i));
    } else if (g) {
      ++pos_marg;
      pmarg.add(c.covariates().row(i));
    } else {
      ++pos_major;
      pmaj.add(c.covariates().row(i));
    }
  }
  CHECK(marg == 1000);
  CHECK(c.group().front() == 0);
  CHECK(c.group().back() == 1);
  check_cluster(neg, spec.negative_cluster);
  check_cluster(pmaj, spec.positive_majority_cluster);
  check_cluster(pmarg, spec.positive_marginalised_cluster);
  CHECK(std::fabs(pos_major / 100000.0 - spec.prevalence_majority) < 0.01);
  CHECK(std::fabs(pos_marg / 1000.0 - spec.prevalence_marginalised) < 3 * std::sqrt(0.66 * 0.34 / 1000));
}

TEST_CASE("different-prevalence variant") {
  auto spec = paper_prevalence_population(5);
  spec.n_marginalised = 100000;
  const Cohort c = generate(spec);
  double p0 = 0, p1 = 0;
  for (std::size_t i = 0; i < c.rows(); ++i) (c.group()[i] ? p1 : p0) += c.outcome()[i];
  CHECK(std::fabs(p0 / 100000 - 0.1) < 0.01);
  CHECK(std::fabs(p1 / 100000 - 0.5) < 0.01);
}

TEST_CASE("forced outcomes pick the group's positive cluster") {
  PopulationSpec spec;
  spec.n_majority = 1;
  spec.n_marginalised = 1;
  spec.prevalence_majority = 1.0;
  spec.prevalence_marginalised = 1.0;
  spec.negative_cluster = {{-50.0}, 1e-6};
  spec.positive_majority_cluster = {{10.0}, 1e-6};
  spec.positive_marginalised_cluster = {{-10.0}, 1e-6};
  const Cohort c = generate(spec);
  CHECK(c.outcome() == BinaryLabels{1, 1});
  CHECK(std::fabs(c.covariates()(0, 0) - 10.0) < 0.01);
  CHECK(std::fabs(c.covariates()(1, 0) + 10.0) < 0.01);
}

TEST_CASE("generation is deterministic per seed") {
  auto spec = paper_base_population(3);
  spec.n_majority = 500;
  spec.n_marginalised = 50;
  const Cohort a = generate(spec), b = generate(spec);
  CHECK(a.covariates() == b.covariates());
  CHECK(a.outcome() == b.outcome());
  spec.seed = 4;
  CHECK_FALSE(generate(spec).covariates() == a.covariates());
}

TEST_CASE("correlated variant adds X1 to X2") {
  auto base = paper_base_population(9);
  auto corr = paper_correlated_population(9);
  base.n_majority = corr.n_majority = 100;
  base.n_marginalised = corr.n_marginalised = 10;
  const Cohort a = generate(base), b = generate(corr);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    CHECK(b.covariates()(i, 1) == a.covariates()(i, 1) + a.covariates()(i, 0));
  }
}

TEST_CASE("invalid specs are rejected") {
  auto spec = paper_base_population();
  spec.n_marginalised = 0;
  CHECK_THROWS_AS(generate(spec), ConfigError);
  spec = paper_base_population();
  spec.prevalence_majority = 1.5;
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec = paper_base_population();
  spec.positive_majority_cluster.mean = {1.0};
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec = paper_base_population();
  spec.negative_cluster.variance = 0.0;
  CHECK_THROWS_AS(spec.validate(), ConfigError);
}
