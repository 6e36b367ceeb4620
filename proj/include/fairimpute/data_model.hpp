#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fairimpute/linalg.hpp"

namespace fairimpute {

using BinaryLabels = std::vector<std::uint8_t>;

/// Complete ground-truth table: covariates, binary group (1 = marginalised)
/// and binary outcome (1 = positive case).
class Cohort {
 public:
  Cohort(Matrix covariates, BinaryLabels group, BinaryLabels outcome,
         std::vector<std::string> covariate_names = {});

  std::size_t rows() const { return covariates_.rows(); }
  std::size_t cols() const { return covariates_.cols(); }
  const Matrix& covariates() const { return covariates_; }
  const BinaryLabels& group() const { return group_; }
  const BinaryLabels& outcome() const { return outcome_; }
  const std::vector<std::string>& covariate_names() const { return names_; }

  /// Extra binary attributes used when an imputer controls for several groups
  /// at once (intersectional cells). Each has one entry per row.
  const std::vector<BinaryLabels>& auxiliary_groups() const { return auxiliary_; }
  Cohort with_auxiliary_groups(std::vector<BinaryLabels> auxiliary) const;

  Cohort select_rows(std::span<const std::size_t> indices) const;

 private:
  Matrix covariates_;
  BinaryLabels group_;
  BinaryLabels outcome_;
  std::vector<std::string> names_;
  std::vector<BinaryLabels> auxiliary_;
};

/// Per-entry observation indicators (1 = observed).
class ObservationMask {
 public:
  ObservationMask() = default;
  ObservationMask(std::size_t rows, std::size_t cols, bool observed = true);
  ObservationMask(std::size_t rows, std::size_t cols, std::vector<std::uint8_t> observed);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool observed(std::size_t i, std::size_t j) const { return observed_[i * cols_ + j] != 0; }
  void set(std::size_t i, std::size_t j, bool observed) { observed_[i * cols_ + j] = observed ? 1 : 0; }

  std::size_t observed_count(std::size_t j) const;
  std::size_t missing_count() const;
  double observed_fraction(std::size_t j) const;

  ObservationMask select_rows(std::span<const std::size_t> indices) const;
  std::span<const std::uint8_t> values() const { return observed_; }

  friend bool operator==(const ObservationMask&, const ObservationMask&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::uint8_t> observed_;
};

class MaskedCohort;

/// The only route to covariate values hidden by a mask. Used by reconstruction
/// metrics and test oracles; imputation code never touches it.
struct GroundTruthAccess {
  static const Cohort& cohort(const MaskedCohort& masked);
};

/// A cohort seen through its observation mask. Values at masked positions are
/// not readable through this interface.
class MaskedCohort {
 public:
  /// `ground_truth_known` is false for ingested data, where masked cells hold
  /// placeholders rather than true values.
  MaskedCohort(Cohort cohort, ObservationMask mask, bool ground_truth_known = true);

  std::size_t rows() const { return cohort_.rows(); }
  std::size_t cols() const { return cohort_.cols(); }
  const BinaryLabels& group() const { return cohort_.group(); }
  const BinaryLabels& outcome() const { return cohort_.outcome(); }
  const std::vector<BinaryLabels>& auxiliary_groups() const { return cohort_.auxiliary_groups(); }
  const std::vector<std::string>& covariate_names() const { return cohort_.covariate_names(); }
  const ObservationMask& mask() const { return mask_; }
  bool ground_truth_known() const { return truth_known_; }

  bool is_observed(std::size_t i, std::size_t j) const { return mask_.observed(i, j); }
  std::optional<double> observed_value(std::size_t i, std::size_t j) const;
  /// Throws PreconditionError when (i, j) is masked.
  double value(std::size_t i, std::size_t j) const;

  /// Observed values of column j, in row order.
  std::vector<double> observed_column(std::size_t j) const;
  /// Covariates with every masked entry of column j replaced by fill[j].
  Matrix filled(std::span<const double> fill) const;

  MaskedCohort select_rows(std::span<const std::size_t> indices) const;

 private:
  friend struct GroundTruthAccess;
  Cohort cohort_;
  ObservationMask mask_;
  bool truth_known_;
};

/// One or more completed covariate tables, plus optional missingness
/// indicator columns (1 = originally missing).
struct ImputationResult {
  std::vector<Matrix> completed;
  std::optional<Matrix> missing_indicators;
  /// Non-fatal notes raised during fitting, e.g. regression fallbacks.
  std::vector<std::string> warnings;

  std::size_t draws() const { return completed.size(); }
  bool indicators_appended() const { return missing_indicators.has_value(); }
  std::size_t rows() const { return completed.empty() ? 0 : completed.front().rows(); }
  /// Model features for one draw: completed covariates, then indicators.
  Matrix features(std::size_t draw) const;
};

struct SplitSpec {
  double train_fraction = 0.8;
  double tune_fraction = 0.0;
  double test_fraction = 0.2;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Partition sizes by largest-remainder rounding. Ties between equal
/// remainders go to the later partition (test, then tune, then train).
std::array<std::size_t, 3> partition_sizes(std::size_t n, const SplitSpec& spec);

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> tune;
  std::vector<std::size_t> test;
};

/// Seeded row shuffle cut into partitions; indices inside each partition are
/// sorted ascending. A partition with positive fraction that would be empty
/// is a ConfigError.
SplitIndices split_indices(std::size_t n, const SplitSpec& spec);

struct Partitions {
  std::optional<MaskedCohort> train;
  std::optional<MaskedCohort> tune;
  std::optional<MaskedCohort> test;
  SplitIndices indices;
};

Partitions split(const Cohort& cohort, const ObservationMask& mask, const SplitSpec& spec);
Partitions split(const MaskedCohort& data, const SplitSpec& spec);

}  // namespace fairimpute
