#include "fairimpute/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "fairimpute/errors.hpp"
#include "fairimpute/rng.hpp"

namespace fairimpute {

namespace {

std::optional<double> ratio(double num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return num / static_cast<double>(den);
}

void check_lengths(std::size_t a, std::size_t b, std::size_t c) {
  if (a != b || a != c) throw PreconditionError("metrics: scores, outcomes and groups differ in length");
}

}  // namespace

GroupMetric GroupMetric::from_parts(std::optional<double> overall,
                                    std::optional<double> marginalised,
                                    std::optional<double> rest) {
  GroupMetric m{overall, marginalised, rest, std::nullopt};
  if (marginalised && rest) m.gap = *marginalised - *rest;
  return m;
}

GroupMetric reconstruction_error(const Cohort& truth, const ObservationMask& mask,
                                 const ImputationResult& result, std::size_t covariate) {
  if (covariate >= truth.cols()) throw PreconditionError("reconstruction_error: bad covariate index");
  if (mask.rows() != truth.rows() || result.rows() != truth.rows() || result.draws() == 0) {
    throw PreconditionError("reconstruction_error: shapes do not match");
  }
  double sum[2] = {0.0, 0.0};
  std::size_t count[2] = {0, 0};
  bool present[2] = {false, false};
  for (std::size_t i = 0; i < truth.rows(); ++i) {
    const int g = truth.group()[i];
    present[g] = true;
    if (mask.observed(i, covariate)) continue;
    const double x = truth.covariates()(i, covariate);
    double s = 0.0;
    for (const Matrix& m : result.completed) {
      const double e = m(i, covariate) - x;
      s += e * e;
    }
    sum[g] += s / static_cast<double>(result.draws());
    ++count[g];
  }
  if (count[0] + count[1] == 0) {
    throw UndefinedMetricError("reconstruction_error: no missing entries in covariate " +
                               std::to_string(covariate));
  }
  // A group with rows but nothing masked incurs no imputation error.
  auto per_group = [&](int g) -> std::optional<double> {
    if (!present[g]) return std::nullopt;
    return count[g] == 0 ? 0.0 : sum[g] / static_cast<double>(count[g]);
  };
  return GroupMetric::from_parts(ratio(sum[0] + sum[1], count[0] + count[1]), per_group(1),
                                 per_group(0));
}

GroupMetric reconstruction_error(const MaskedCohort& data, const ImputationResult& result,
                                 std::size_t covariate) {
  return reconstruction_error(GroundTruthAccess::cohort(data), data.mask(), result, covariate);
}

double auc_score(std::span<const double> scores, std::span<const std::uint8_t> outcomes) {
  if (scores.size() != outcomes.size()) throw PreconditionError("auc: length mismatch");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Sum of average ranks of the positives.
  double rank_sum = 0.0;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (outcomes[order[k]]) {
        rank_sum += avg_rank;
        ++pos;
      }
    }
    i = j;
  }
  const std::size_t neg = n - pos;
  if (pos == 0 || neg == 0) throw UndefinedMetricError("auc: needs both outcome classes");
  const double p = static_cast<double>(pos);
  return (rank_sum - p * (p + 1.0) / 2.0) / (p * static_cast<double>(neg));
}

GroupMetric auc(std::span<const double> scores, std::span<const std::uint8_t> outcomes,
                std::span<const std::uint8_t> groups) {
  check_lengths(scores.size(), outcomes.size(), groups.size());
  auto try_auc = [](std::span<const double> s, std::span<const std::uint8_t> y) -> std::optional<double> {
    try {
      return auc_score(s, y);
    } catch (const UndefinedMetricError&) {
      return std::nullopt;
    }
  };
  std::vector<double> s[2];
  std::vector<std::uint8_t> y[2];
  for (std::size_t i = 0; i < scores.size(); ++i) {
    s[groups[i]].push_back(scores[i]);
    y[groups[i]].push_back(outcomes[i]);
  }
  return GroupMetric::from_parts(try_auc(scores, outcomes), try_auc(s[1], y[1]), try_auc(s[0], y[0]));
}

ThresholdMetrics threshold_metrics(std::span<const double> scores,
                                   std::span<const std::uint8_t> outcomes,
                                   std::span<const std::uint8_t> groups, double capacity) {
  check_lengths(scores.size(), outcomes.size(), groups.size());
  if (!(capacity > 0.0 && capacity <= 1.0)) {
    throw PreconditionError("threshold_metrics: capacity must lie in (0, 1]");
  }
  const std::size_t n = scores.size();
  // Guard against 0.3 * 10 landing a hair above 3.
  const std::size_t k =
      std::min(n, static_cast<std::size_t>(std::ceil(capacity * static_cast<double>(n) - 1e-9)));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::vector<std::uint8_t> chosen(n, 0);
  for (std::size_t r = 0; r < k; ++r) chosen[order[r]] = 1;

  std::size_t rows[2] = {0, 0}, picked[2] = {0, 0}, positives[2] = {0, 0}, missed[2] = {0, 0};
  for (std::size_t i = 0; i < n; ++i) {
    const int g = groups[i];
    ++rows[g];
    picked[g] += chosen[i];
    if (outcomes[i]) {
      ++positives[g];
      missed[g] += chosen[i] ? 0 : 1;
    }
  }
  ThresholdMetrics out;
  out.fnr = GroupMetric::from_parts(ratio(static_cast<double>(missed[0] + missed[1]), positives[0] + positives[1]),
                                    ratio(static_cast<double>(missed[1]), positives[1]),
                                    ratio(static_cast<double>(missed[0]), positives[0]));
  out.prioritisation = GroupMetric::from_parts(ratio(static_cast<double>(picked[0] + picked[1]), n),
                                               ratio(static_cast<double>(picked[1]), rows[1]),
                                               ratio(static_cast<double>(picked[0]), rows[0]));
  return out;
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw PreconditionError("percentile: no values");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

std::vector<BootstrapSummary> bootstrap(const MetricFn& metric, std::size_t n_rows,
                                        std::size_t n_resamples, std::uint64_t seed) {
  if (n_rows == 0) throw PreconditionError("bootstrap: no rows");
  if (n_resamples == 0) throw PreconditionError("bootstrap: n_resamples must be >= 1");
  std::vector<std::vector<double>> values;
  std::optional<std::size_t> width;
  std::size_t undefined = 0;
  std::vector<std::size_t> rows(n_rows);
  for (std::size_t b = 0; b < n_resamples; ++b) {
    Rng rng(derive_seed(seed, {b}));
    for (auto& r : rows) r = rng.below(n_rows);
    const auto fields = metric(rows);
    if (!width) {
      width = fields.size();
      values.resize(fields.size());
    } else if (fields.size() != *width) {
      throw PreconditionError("bootstrap: metric returned a varying number of fields");
    }
    bool complete = true;
    for (const auto& f : fields) complete = complete && f.has_value();
    if (!complete) {
      ++undefined;
      continue;
    }
    for (std::size_t f = 0; f < fields.size(); ++f) values[f].push_back(*fields[f]);
  }
  if (2 * undefined > n_resamples) {
    throw ReliabilityError("bootstrap: metric undefined in " + std::to_string(undefined) + " of " +
                           std::to_string(n_resamples) + " resamples");
  }
  std::vector<BootstrapSummary> out(values.size());
  for (std::size_t f = 0; f < values.size(); ++f) {
    const auto& v = values[f];
    BootstrapSummary s;
    s.n_resamples = v.size();
    s.n_undefined = undefined;
    double sum = 0.0;
    for (double x : v) sum += x;
    s.mean = sum / static_cast<double>(v.size());
    if (v.size() > 1) {
      double ss = 0.0;
      for (double x : v) ss += (x - s.mean) * (x - s.mean);
      s.std = std::sqrt(ss / static_cast<double>(v.size() - 1));
    }
    s.lower = std::min(percentile(v, 0.025), s.mean);
    s.upper = std::max(percentile(v, 0.975), s.mean);
    out[f] = s;
  }
  return out;
}

}  // namespace fairimpute
