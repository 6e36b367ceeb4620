#include "fairimpute/data_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fairimpute/errors.hpp"
#include "fairimpute/rng.hpp"

namespace fairimpute {

namespace {

void check_binary(const BinaryLabels& labels, const char* what) {
  for (auto v : labels) {
    if (v > 1) throw PreconditionError(std::string("Cohort: ") + what + " labels must be 0/1");
  }
}

template <typename T>
std::vector<T> pick(const std::vector<T>& v, std::span<const std::size_t> indices) {
  std::vector<T> out;
  out.reserve(indices.size());
  for (auto i : indices) out.push_back(v[i]);
  return out;
}

}  // namespace

Cohort::Cohort(Matrix covariates, BinaryLabels group, BinaryLabels outcome,
               std::vector<std::string> covariate_names)
    : covariates_(std::move(covariates)),
      group_(std::move(group)),
      outcome_(std::move(outcome)),
      names_(std::move(covariate_names)) {
  if (covariates_.rows() < 1 || covariates_.cols() < 1) {
    throw PreconditionError("Cohort: need at least one row and one covariate");
  }
  if (group_.size() != rows() || outcome_.size() != rows()) {
    throw PreconditionError("Cohort: group/outcome length differs from row count");
  }
  check_binary(group_, "group");
  check_binary(outcome_, "outcome");
  for (double v : covariates_.values()) {
    if (!std::isfinite(v)) throw PreconditionError("Cohort: covariates must be finite");
  }
  if (names_.empty()) {
    for (std::size_t j = 0; j < cols(); ++j) names_.push_back("X" + std::to_string(j + 1));
  } else if (names_.size() != cols()) {
    throw PreconditionError("Cohort: covariate name count differs from column count");
  }
}

Cohort Cohort::with_auxiliary_groups(std::vector<BinaryLabels> auxiliary) const {
  for (const auto& a : auxiliary) {
    if (a.size() != rows()) throw PreconditionError("Cohort: auxiliary group length mismatch");
    check_binary(a, "auxiliary group");
  }
  Cohort out = *this;
  out.auxiliary_ = std::move(auxiliary);
  return out;
}

Cohort Cohort::select_rows(std::span<const std::size_t> indices) const {
  Cohort out(covariates_.select_rows(indices), pick(group_, indices), pick(outcome_, indices),
             names_);
  for (const auto& a : auxiliary_) out.auxiliary_.push_back(pick(a, indices));
  return out;
}

ObservationMask::ObservationMask(std::size_t rows, std::size_t cols, bool observed)
    : rows_(rows), cols_(cols), observed_(rows * cols, observed ? 1 : 0) {}

ObservationMask::ObservationMask(std::size_t rows, std::size_t cols,
                                 std::vector<std::uint8_t> observed)
    : rows_(rows), cols_(cols), observed_(std::move(observed)) {
  if (observed_.size() != rows_ * cols_) throw PreconditionError("ObservationMask: size mismatch");
  for (auto& v : observed_) {
    if (v > 1) throw PreconditionError("ObservationMask: entries must be 0/1");
  }
}

std::size_t ObservationMask::observed_count(std::size_t j) const {
  std::size_t count = 0;
  for (std::size_t i = 0; i < rows_; ++i) count += observed_[i * cols_ + j];
  return count;
}

std::size_t ObservationMask::missing_count() const {
  return observed_.size() -
         static_cast<std::size_t>(std::count(observed_.begin(), observed_.end(), 1));
}

double ObservationMask::observed_fraction(std::size_t j) const {
  if (rows_ == 0) return 0.0;
  return static_cast<double>(observed_count(j)) / static_cast<double>(rows_);
}

ObservationMask ObservationMask::select_rows(std::span<const std::size_t> indices) const {
  std::vector<std::uint8_t> out;
  out.reserve(indices.size() * cols_);
  for (auto i : indices) {
    out.insert(out.end(), observed_.begin() + static_cast<std::ptrdiff_t>(i * cols_),
               observed_.begin() + static_cast<std::ptrdiff_t>((i + 1) * cols_));
  }
  return ObservationMask(indices.size(), cols_, std::move(out));
}

const Cohort& GroundTruthAccess::cohort(const MaskedCohort& masked) {
  if (!masked.truth_known_) {
    throw PreconditionError("ground truth is not available for this cohort");
  }
  return masked.cohort_;
}

MaskedCohort::MaskedCohort(Cohort cohort, ObservationMask mask, bool ground_truth_known)
    : cohort_(std::move(cohort)), mask_(std::move(mask)), truth_known_(ground_truth_known) {
  if (mask_.rows() != cohort_.rows() || mask_.cols() != cohort_.cols()) {
    throw PreconditionError("MaskedCohort: mask dimensions differ from cohort");
  }
}

std::optional<double> MaskedCohort::observed_value(std::size_t i, std::size_t j) const {
  if (!mask_.observed(i, j)) return std::nullopt;
  return cohort_.covariates()(i, j);
}

double MaskedCohort::value(std::size_t i, std::size_t j) const {
  if (!mask_.observed(i, j)) {
    throw PreconditionError("MaskedCohort: entry (" + std::to_string(i) + ", " +
                            std::to_string(j) + ") is not observed");
  }
  return cohort_.covariates()(i, j);
}

std::vector<double> MaskedCohort::observed_column(std::size_t j) const {
  std::vector<double> out;
  out.reserve(rows());
  for (std::size_t i = 0; i < rows(); ++i) {
    if (mask_.observed(i, j)) out.push_back(cohort_.covariates()(i, j));
  }
  return out;
}

Matrix MaskedCohort::filled(std::span<const double> fill) const {
  if (fill.size() != cols()) throw PreconditionError("MaskedCohort::filled: fill length mismatch");
  Matrix out = cohort_.covariates();
  for (std::size_t i = 0; i < rows(); ++i) {
    for (std::size_t j = 0; j < cols(); ++j) {
      if (!mask_.observed(i, j)) out(i, j) = fill[j];
    }
  }
  return out;
}

MaskedCohort MaskedCohort::select_rows(std::span<const std::size_t> indices) const {
  return MaskedCohort(cohort_.select_rows(indices), mask_.select_rows(indices), truth_known_);
}

Matrix ImputationResult::features(std::size_t draw) const {
  const Matrix& base = completed.at(draw);
  if (!missing_indicators) return base;
  const Matrix& ind = *missing_indicators;
  Matrix out(base.rows(), base.cols() + ind.cols());
  for (std::size_t i = 0; i < base.rows(); ++i) {
    auto dst = out.row(i);
    std::copy(base.row(i).begin(), base.row(i).end(), dst.begin());
    std::copy(ind.row(i).begin(), ind.row(i).end(),
              dst.begin() + static_cast<std::ptrdiff_t>(base.cols()));
  }
  return out;
}

void SplitSpec::validate() const {
  for (double f : {train_fraction, tune_fraction, test_fraction}) {
    if (!(f >= 0.0 && f <= 1.0)) throw ConfigError("SplitSpec: fractions must lie in [0, 1]");
  }
  if (std::abs(train_fraction + tune_fraction + test_fraction - 1.0) > 1e-12) {
    throw ConfigError("SplitSpec: fractions must sum to 1");
  }
}

std::array<std::size_t, 3> partition_sizes(std::size_t n, const SplitSpec& spec) {
  spec.validate();
  const std::array<double, 3> fractions = {spec.train_fraction, spec.tune_fraction,
                                           spec.test_fraction};
  std::array<std::size_t, 3> sizes{};
  std::array<double, 3> remainders{};
  std::size_t assigned = 0;
  for (int k = 0; k < 3; ++k) {
    const double exact = fractions[k] * static_cast<double>(n);
    sizes[k] = static_cast<std::size_t>(std::floor(exact));
    remainders[k] = exact - std::floor(exact);
    assigned += sizes[k];
  }
  std::array<int, 3> order = {2, 1, 0};
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return remainders[a] > remainders[b]; });
  for (std::size_t left = n - std::min(n, assigned), k = 0; left > 0; --left, ++k) {
    ++sizes[order[k % 3]];
  }
  return sizes;
}

SplitIndices split_indices(std::size_t n, const SplitSpec& spec) {
  const auto sizes = partition_sizes(n, spec);
  const std::array<double, 3> fractions = {spec.train_fraction, spec.tune_fraction,
                                           spec.test_fraction};
  static constexpr const char* kNames[] = {"train", "tune", "test"};
  for (int k = 0; k < 3; ++k) {
    if (fractions[k] > 0.0 && sizes[k] == 0) {
      throw ConfigError(std::string("split: ") + kNames[k] + " partition would be empty (n = " +
                        std::to_string(n) + ")");
    }
  }

  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(spec.seed);
  for (std::size_t i = n; i > 1; --i) {
    std::swap(perm[i - 1], perm[rng.below(i)]);
  }

  SplitIndices out;
  auto take = [&](std::vector<std::size_t>& dst, std::size_t begin, std::size_t count) {
    dst.assign(perm.begin() + static_cast<std::ptrdiff_t>(begin),
               perm.begin() + static_cast<std::ptrdiff_t>(begin + count));
    std::sort(dst.begin(), dst.end());
  };
  take(out.train, 0, sizes[0]);
  take(out.tune, sizes[0], sizes[1]);
  take(out.test, sizes[0] + sizes[1], sizes[2]);
  return out;
}

Partitions split(const MaskedCohort& data, const SplitSpec& spec) {
  Partitions parts;
  parts.indices = split_indices(data.rows(), spec);
  if (!parts.indices.train.empty()) parts.train = data.select_rows(parts.indices.train);
  if (!parts.indices.tune.empty()) parts.tune = data.select_rows(parts.indices.tune);
  if (!parts.indices.test.empty()) parts.test = data.select_rows(parts.indices.test);
  return parts;
}

Partitions split(const Cohort& cohort, const ObservationMask& mask, const SplitSpec& spec) {
  return split(MaskedCohort(cohort, mask), spec);
}

}  // namespace fairimpute
