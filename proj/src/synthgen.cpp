#include "fairimpute/synthgen.hpp"

#include <cmath>
#include <string>

#include "fairimpute/errors.hpp"
#include "fairimpute/rng.hpp"

namespace fairimpute {

namespace {

void check_cluster(const ClusterSpec& c, std::size_t d, const char* name) {
  if (c.mean.size() != d) {
    throw ConfigError(std::string("PopulationSpec: ") + name + " has wrong dimension");
  }
  if (!(c.variance > 0.0) || !std::isfinite(c.variance)) {
    throw ConfigError(std::string("PopulationSpec: ") + name + " variance must be > 0");
  }
}

}  // namespace

void PopulationSpec::validate() const {
  if (n_majority < 1 || n_marginalised < 1) {
    throw ConfigError("PopulationSpec: both groups need at least one row");
  }
  for (double p : {prevalence_majority, prevalence_marginalised}) {
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError("PopulationSpec: prevalence must lie in [0, 1]");
  }
  const std::size_t d = dimension();
  if (d < 1) throw ConfigError("PopulationSpec: clusters need at least one dimension");
  if (correlate_x2_with_x1 && d < 2) {
    throw ConfigError("PopulationSpec: correlating X2 with X1 needs two dimensions");
  }
  check_cluster(negative_cluster, d, "negative_cluster");
  check_cluster(positive_majority_cluster, d, "positive_majority_cluster");
  check_cluster(positive_marginalised_cluster, d, "positive_marginalised_cluster");
}

double PopulationSpec::marginalised_ratio() const {
  return static_cast<double>(n_marginalised) / static_cast<double>(n_majority + n_marginalised);
}

PopulationSpec paper_base_population(std::uint64_t seed) {
  PopulationSpec spec;
  spec.n_majority = 100000;
  spec.n_marginalised = 1000;
  spec.prevalence_majority = 0.66;
  spec.prevalence_marginalised = 0.66;
  spec.negative_cluster = {{0.0, 0.0}, 0.0625};
  spec.positive_majority_cluster = {{0.0, 1.0}, 0.0625};
  spec.positive_marginalised_cluster = {{1.0, 0.0}, 0.0625};
  spec.seed = seed;
  return spec;
}

PopulationSpec paper_prevalence_population(std::uint64_t seed) {
  PopulationSpec spec = paper_base_population(seed);
  spec.prevalence_majority = 0.1;
  spec.prevalence_marginalised = 0.5;
  spec.positive_majority_cluster = {{1.0, 1.0}, 0.0625};
  spec.positive_marginalised_cluster = {{1.0, 1.0}, 0.0625};
  return spec;
}

PopulationSpec paper_correlated_population(std::uint64_t seed) {
  PopulationSpec spec = paper_base_population(seed);
  spec.correlate_x2_with_x1 = true;
  return spec;
}

Cohort generate(const PopulationSpec& spec) {
  spec.validate();
  const std::size_t n = spec.n_majority + spec.n_marginalised;
  const std::size_t d = spec.dimension();
  Matrix x(n, d);
  BinaryLabels group(n), outcome(n);
  Rng rng(spec.seed);

  for (std::size_t i = 0; i < n; ++i) {
    const bool marginalised = i >= spec.n_majority;
    const double prevalence =
        marginalised ? spec.prevalence_marginalised : spec.prevalence_majority;
    const bool positive = rng.uniform() < prevalence;
    const ClusterSpec& cluster =
        !positive ? spec.negative_cluster
                  : (marginalised ? spec.positive_marginalised_cluster
                                  : spec.positive_majority_cluster);
    const double sd = std::sqrt(cluster.variance);
    for (std::size_t j = 0; j < d; ++j) x(i, j) = cluster.mean[j] + sd * rng.normal();
    if (spec.correlate_x2_with_x1) x(i, 1) += x(i, 0);
    group[i] = marginalised ? 1 : 0;
    outcome[i] = positive ? 1 : 0;
  }
  return Cohort(std::move(x), std::move(group), std::move(outcome));
}

}  // namespace fairimpute
