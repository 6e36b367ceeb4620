#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fairimpute/data_model.hpp"
#include "fairimpute/impute.hpp"
#include "fairimpute/missingness.hpp"
#include "fairimpute/predict.hpp"
#include "fairimpute/synthgen.hpp"
#include "fairimpute/theory.hpp"

namespace fairimpute::harness {

/// A binary attribute read from a CSV column; raw cell text maps to 0 or 1.
struct BinaryColumn {
  std::string column;
  std::map<std::string, std::uint8_t> values;
};

struct CsvSource {
  std::filesystem::path path;
  BinaryColumn group;
  BinaryColumn outcome;
  std::vector<BinaryColumn> auxiliary_groups;
  /// Empty: every column not used above.
  std::vector<std::string> covariates;
};

struct ImputerEntry {
  std::string name;
  ImputerSpec spec;
};

enum class MetricKind { kReconstruction, kAuc, kFnr, kPrioritisation };
std::string_view metric_name(MetricKind m);
MetricKind parse_metric(std::string_view name);

/// Where reconstruction error is measured: the whole masked cohort (imputer
/// fit on train, applied to every row) or the test partition only.
enum class ReconstructionRows { kCohort, kTest };

struct TheoremSuiteConfig {
  std::size_t monte_carlo_cases = 20;
  std::size_t monte_carlo_samples = 1'000'000;
  double monte_carlo_tolerance = 0.02;
  std::size_t equivalence_inputs = 10'000;
  std::size_t sign_cases_per_side = 10;
};

struct ExperimentConfig {
  std::optional<PopulationSpec> population;
  std::optional<CsvSource> csv;
  std::vector<ScenarioSpec> scenarios;
  std::vector<ImputerEntry> imputers;
  LogisticSpec model;
  std::vector<MetricKind> metrics;
  std::vector<double> capacities{0.05, 0.30, 0.50};
  std::size_t repetitions = 100;
  std::size_t bootstrap_resamples = 100;
  SplitSpec split;
  bool fit_on_all = false;
  ReconstructionRows reconstruction_rows = ReconstructionRows::kCohort;
  RegionScanSpec region_scan;
  TheoremSuiteConfig theorems;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "fairimpute-out";
  std::size_t threads = 0;

  /// Checks the parts every subcommand relies on.
  void validate_simulation() const;
  void validate_csv_audit() const;
};

/// Parses the JSON config format documented in the README. Unknown keys are
/// rejected so typos do not silently fall back to defaults.
ExperimentConfig parse_config(std::string_view json_text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical JSON of the effective configuration (after overrides).
std::string config_to_json(const ExperimentConfig& config);

/// Default imputer list for clinical audits: Mean, GroupMean, MICE,
/// GroupMICE, GroupMICE with indicators.
std::vector<ImputerEntry> default_audit_imputers();

}  // namespace fairimpute::harness
