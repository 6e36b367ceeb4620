#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fairimpute/harness/config.hpp"
#include "fairimpute/harness/report.hpp"

namespace fairimpute::harness {

/// One metric field from one repetition.
struct RepetitionRecord {
  std::size_t repetition = 0;
  std::string scenario;
  std::string imputer;
  std::string metric;
  std::optional<double> threshold;
  std::string group;
  std::optional<double> value;
  std::string status;
};

struct SimulationResult {
  std::vector<ReportRow> rows;
  std::vector<RepetitionRecord> repetitions;
  /// Report cells with at least one failed repetition, with a message each.
  std::vector<std::string> failures;
};

/// generate -> mask -> split -> impute -> train -> evaluate, per repetition,
/// then aggregated. Output does not depend on the thread count.
SimulationResult run_simulation(const ExperimentConfig& config);

struct AuditResult {
  std::vector<ReportRow> rows;
  std::vector<std::string> failures;
};

/// ingest -> split -> standardise on train -> impute -> train (penalty grid
/// on the tuning rows when present) -> bootstrap test metrics.
AuditResult run_csv_audit(const ExperimentConfig& config);

struct TheoremCheck {
  std::string check;
  std::size_t case_index = 0;
  double value = 0.0;
  double reference = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct TheoremSuiteResult {
  std::vector<TheoremCheck> checks;
  bool passed() const;
};

/// Monte Carlo agreement of the reconstruction closed forms, predicate
/// equivalence on random inputs, and empirical sign checks for the
/// group-versus-population comparison.
TheoremSuiteResult run_theorem_validation(const ExperimentConfig& config);

std::string repetitions_csv(const std::vector<RepetitionRecord>& records);
std::string theorem_checks_csv(const std::vector<TheoremCheck>& checks);

}  // namespace fairimpute::harness
