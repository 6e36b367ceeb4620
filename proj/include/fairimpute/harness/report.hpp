#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fairimpute/harness/config.hpp"
#include "fairimpute/theory.hpp"

namespace fairimpute::harness {

inline constexpr std::string_view kVersion = "0.1.0";

/// One metric value in long format. `group` is overall, marginalised, rest
/// or gap. Summary statistics run over repetitions (simulate) or bootstrap
/// resamples (audit-csv); `point` is the full-test-set value for audits.
struct ReportRow {
  std::string scenario;
  std::string imputer;
  std::string metric;
  std::optional<double> threshold;
  std::string group;
  std::optional<double> point;
  std::optional<double> mean;
  std::optional<double> std;
  std::optional<double> lower;
  std::optional<double> upper;
  std::size_t n = 0;
  std::size_t n_undefined = 0;
  std::size_t n_errors = 0;
  std::string status = "ok";
};

inline constexpr std::string_view kGroupNames[4] = {"overall", "marginalised", "rest", "gap"};

std::string report_csv(const std::vector<ReportRow>& rows);

struct GapViolation {
  std::size_t row = 0;
  double gap = 0.0;
  double recomputed = 0.0;
};

/// Checks gap == marginalised - rest for the mean and point columns of every
/// gap row, within `tolerance`.
std::vector<GapViolation> audit_gaps(const std::vector<ReportRow>& rows, double tolerance = 1e-12);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view text);

/// JSON manifest: command, version, seed, effective config and its hash, files.
std::string manifest_json(const ExperimentConfig& config, std::string_view command,
                          const std::vector<std::string>& files);

std::string region_scan_csv(const std::vector<RegionCell>& cells);

void write_text(const std::filesystem::path& path, std::string_view text);

}  // namespace fairimpute::harness
