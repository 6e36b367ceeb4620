#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "fairimpute/data_model.hpp"

namespace fairimpute {

/// A metric split by group. gap = marginalised - rest, defined only when both
/// sides are.
struct GroupMetric {
  std::optional<double> overall;
  std::optional<double> marginalised;
  std::optional<double> rest;
  std::optional<double> gap;

  static GroupMetric from_parts(std::optional<double> overall, std::optional<double> marginalised,
                                std::optional<double> rest);
};

/// Mean squared imputation error over masked entries of `covariate`,
/// averaged over draws. A group with rows but no masked entries scores 0.
/// Throws UndefinedMetricError if nothing is masked at all.
GroupMetric reconstruction_error(const Cohort& truth, const ObservationMask& mask,
                                 const ImputationResult& result, std::size_t covariate);
/// Same, reading the ground truth behind a masked cohort.
GroupMetric reconstruction_error(const MaskedCohort& data, const ImputationResult& result,
                                 std::size_t covariate);

/// Mann-Whitney AUC with half credit for ties. Throws UndefinedMetricError
/// without both classes.
double auc_score(std::span<const double> scores, std::span<const std::uint8_t> outcomes);

GroupMetric auc(std::span<const double> scores, std::span<const std::uint8_t> outcomes,
                std::span<const std::uint8_t> groups);

struct ThresholdMetrics {
  GroupMetric fnr;
  GroupMetric prioritisation;
};

/// Top ceil(capacity * n) rows by descending score are prioritised; ties go to
/// the lower row index. capacity must lie in (0, 1].
ThresholdMetrics threshold_metrics(std::span<const double> scores,
                                   std::span<const std::uint8_t> outcomes,
                                   std::span<const std::uint8_t> groups, double capacity);

struct BootstrapSummary {
  double mean = 0.0;
  double std = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  std::size_t n_resamples = 0;
  std::size_t n_undefined = 0;
};

/// Evaluates a metric on the rows of one resample and returns its fields.
using MetricFn = std::function<std::vector<std::optional<double>>(std::span<const std::size_t>)>;

/// Resamples rows with replacement at full size. Per field: mean, sample std,
/// 2.5/97.5 percentile bounds. A resample with any undefined field is dropped
/// and counted, so every field summarises the same resamples; more than half
/// dropped is a ReliabilityError.
std::vector<BootstrapSummary> bootstrap(const MetricFn& metric, std::size_t n_rows,
                                        std::size_t n_resamples, std::uint64_t seed);

/// Linear-interpolation percentile, q in [0, 1], of unsorted values.
double percentile(std::vector<double> values, double q);

}  // namespace fairimpute
