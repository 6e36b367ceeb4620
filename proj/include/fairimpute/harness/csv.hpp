#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "fairimpute/data_model.hpp"
#include "fairimpute/harness/config.hpp"

namespace fairimpute::harness {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// Comma-separated, header row required, double quotes for fields holding
/// commas or quotes. Every row must have as many fields as the header.
CsvTable parse_csv(std::string_view text);
CsvTable read_csv(const std::filesystem::path& path);

/// Quotes a field when needed.
std::string csv_field(std::string_view s);
/// Shortest round-trippable decimal ("%.17g").
std::string format_double(double v);

/// Cohort read from a file. Empty covariate cells are missing; the matrix
/// holds 0.0 placeholders there.
struct IngestedCohort {
  Cohort cohort;
  ObservationMask mask;

  /// Masked view with ground truth marked unknown.
  MaskedCohort masked() const { return MaskedCohort(cohort, mask, false); }
};

IngestedCohort ingest(const CsvTable& table, const CsvSource& source);
IngestedCohort ingest(const CsvSource& source);

/// Schema-compatible synthetic stand-in for a clinical extract: many
/// covariates, a binary group, a binary outcome, group-dependent
/// self-masking on the informative covariates plus background MCAR gaps.
struct StandinSpec {
  std::size_t rows = 20'000;
  std::size_t covariates = 67;
  std::size_t informative = 6;
  double marginalised_share = 0.2;
  double prevalence = 0.3;
  /// Mean shift of informative covariates for positives.
  double signal = 0.8;
  /// Mean shift of informative covariates for the marginalised group.
  double group_shift = 0.5;
  /// Informative covariates above the threshold are hidden with this
  /// probability in the marginalised group.
  double mask_threshold = 0.5;
  double mask_probability = 0.9;
  /// Same rule in the rest of the population.
  double rest_mask_probability = 0.0;
  double background_missing = 0.05;
  std::uint64_t seed = 0;
};

/// Writes the stand-in with columns x1..xd, group ("minority"/"majority") and
/// outcome (0/1); returns the matching CsvSource.
CsvSource write_standin_csv(const StandinSpec& spec, const std::filesystem::path& path);

}  // namespace fairimpute::harness
