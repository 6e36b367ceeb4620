#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fairimpute/data_model.hpp"

namespace fairimpute {

enum class ImputationStrategy { kPopulationMean, kGroupMean, kMice, kGroupMice };

std::string_view strategy_name(ImputationStrategy s);
ImputationStrategy parse_strategy(std::string_view name);

struct ImputerSpec {
  ImputationStrategy strategy = ImputationStrategy::kPopulationMean;
  bool append_indicators = false;
  int mice_iterations = 10;
  int mice_draws = 10;
  bool noise_draws = true;
  /// Group strategies condition on the auxiliary group attributes as well:
  /// GroupMean uses intersectional cells (falling back to coarser cells, then
  /// the population mean), GroupMICE adds every attribute as a regressor.
  bool control_all_groups = false;
  std::uint64_t seed = 0;

  void validate() const;
  /// Number of completed tables produced: 1 for the mean strategies.
  int draws() const;
};

/// One chained-equation regression. Regressors, in order: intercept, every
/// other covariate by ascending index, then group indicator(s) for GroupMICE.
struct ColumnRegression {
  bool fallback = false;  // too few observed rows: mean imputation instead
  std::vector<double> coefficients;
  double residual_std = 0.0;
};

struct FittedImputer {
  ImputerSpec spec;
  std::size_t covariate_count = 0;
  std::size_t auxiliary_count = 0;
  std::vector<double> population_means;  // mu^O per covariate
  std::vector<double> medians;           // chained-equation initial fill
  /// Observed means per cell. Keys are prefixes of (group, auxiliary...); a
  /// missing entry means the cell had no observed value for that covariate.
  std::map<std::vector<std::uint8_t>, std::vector<std::optional<double>>> cell_means;
  /// Per chain, per covariate; empty for the mean strategies.
  std::vector<std::vector<ColumnRegression>> chains;
  std::vector<std::string> warnings;

  /// Group mean for (group, covariate), if that cell had observed values.
  std::optional<double> group_mean(std::uint8_t group, std::size_t covariate) const;
};

/// Fits on the training partition only. Every covariate needs at least one
/// observed training value.
FittedImputer fit(const MaskedCohort& train, const ImputerSpec& spec);

/// Fills missing entries of `data`; observed entries are copied verbatim.
ImputationResult transform(const FittedImputer& fitted, const MaskedCohort& data);

/// Versioned structured-text form of a fitted imputer.
std::string to_json(const FittedImputer& fitted);
FittedImputer fitted_imputer_from_json(std::string_view text);

}  // namespace fairimpute
