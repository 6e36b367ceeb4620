#pragma once

#include <cstdint>
#include <vector>

#include "fairimpute/data_model.hpp"

namespace fairimpute {

/// Isotropic Gaussian cluster N(mean, variance * I).
struct ClusterSpec {
  std::vector<double> mean;
  double variance = 1.0;
};

struct PopulationSpec {
  std::size_t n_majority = 0;
  std::size_t n_marginalised = 0;
  double prevalence_majority = 0.5;
  double prevalence_marginalised = 0.5;
  ClusterSpec negative_cluster;
  ClusterSpec positive_majority_cluster;
  ClusterSpec positive_marginalised_cluster;
  /// Adds X1 to X2 after sampling.
  bool correlate_x2_with_x1 = false;
  std::uint64_t seed = 0;

  void validate() const;
  std::size_t dimension() const { return negative_cluster.mean.size(); }
  /// Share of the marginalised group in the population.
  double marginalised_ratio() const;
};

/// Base simulation: 100,000 majority and 1,000 marginalised rows, shared
/// negative cluster at the origin, group-specific positive clusters, standard
/// deviation 0.25 per coordinate and prevalence 0.66 in both groups.
PopulationSpec paper_base_population(std::uint64_t seed = 0);

/// Same clusters for both groups (positives at (1, 1)); prevalence 10% in the
/// majority and 50% in the marginalised group.
PopulationSpec paper_prevalence_population(std::uint64_t seed = 0);

/// Base population with X1 added to X2.
PopulationSpec paper_correlated_population(std::uint64_t seed = 0);

/// Rows are ordered majority first, then marginalised. Outcomes are Bernoulli
/// per row; group counts are exact.
Cohort generate(const PopulationSpec& spec);

}  // namespace fairimpute
