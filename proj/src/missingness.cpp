#include "fairimpute/missingness.hpp"

#include <cmath>
#include <sstream>
#include <string>

#include "fairimpute/errors.hpp"
#include "fairimpute/linalg.hpp"
#include "fairimpute/rng.hpp"

namespace fairimpute {

std::string_view scenario_name(Scenario s) {
  switch (s) {
    case Scenario::kS1:
      return "S1";
    case Scenario::kS2:
      return "S2";
    case Scenario::kS3:
      return "S3";
  }
  return "?";
}

Scenario parse_scenario(std::string_view name) {
  if (name == "S1") return Scenario::kS1;
  if (name == "S2") return Scenario::kS2;
  if (name == "S3") return Scenario::kS3;
  throw ConfigError("unknown scenario '" + std::string(name) + "' (expected S1, S2 or S3)");
}

ObservationMask apply_scenario(const Cohort& cohort, const ScenarioSpec& spec) {
  const std::size_t d = cohort.cols();
  if (spec.target_covariate >= d ||
      (spec.scenario == Scenario::kS2 && spec.trigger_covariate >= d)) {
    throw PreconditionError("apply_scenario: covariate index out of range");
  }
  if (!(spec.mask_probability >= 0.0 && spec.mask_probability <= 1.0)) {
    throw PreconditionError("apply_scenario: mask_probability must lie in [0, 1]");
  }
  ObservationMask mask(cohort.rows(), d, true);
  Rng rng(spec.seed);
  const Matrix& x = cohort.covariates();
  for (std::size_t i = 0; i < cohort.rows(); ++i) {
    // One draw per row keeps the stream aligned regardless of eligibility.
    const bool hit = rng.uniform() < spec.mask_probability;
    bool eligible = false;
    switch (spec.scenario) {
      case Scenario::kS1:
        eligible = cohort.group()[i] == 1;
        break;
      case Scenario::kS2:
        eligible = x(i, spec.trigger_covariate) > spec.threshold;
        break;
      case Scenario::kS3:
        eligible = x(i, spec.target_covariate) > spec.threshold;
        break;
    }
    if (eligible && hit) mask.set(i, spec.target_covariate, false);
  }
  return mask;
}

double max_attainable_correlation(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw PreconditionError("observation rate must lie in (0, 1)");
  }
  return normal_pdf(normal_cdf_inv(alpha)) / std::sqrt(alpha * (1.0 - alpha));
}

double latent_loading(double alpha, double rho) {
  const double bound = max_attainable_correlation(alpha);
  if (!(std::abs(rho) <= bound)) {
    std::ostringstream msg;
    msg << "correlation " << rho << " is not attainable at observation rate " << alpha
        << " (|rho| must be <= " << bound << ")";
    throw PreconditionError(msg.str());
  }
  return -rho * std::sqrt(alpha * (1.0 - alpha)) / normal_pdf(normal_cdf_inv(alpha));
}

ObservationMask apply_calibrated(const Cohort& cohort, const CalibratedMechanismSpec& spec) {
  const std::size_t j = spec.target_covariate;
  if (j >= cohort.cols()) throw PreconditionError("apply_calibrated: covariate index out of range");

  std::array<double, 2> loading{}, threshold{}, mean{}, sd{};
  std::array<std::size_t, 2> count{};
  for (int g = 0; g < 2; ++g) {
    const auto& m = spec.groups[g];
    loading[g] = latent_loading(m.observation_rate, m.correlation);
    threshold[g] = normal_cdf_inv(m.observation_rate);
  }
  const Matrix& x = cohort.covariates();
  for (std::size_t i = 0; i < cohort.rows(); ++i) {
    const int g = cohort.group()[i];
    ++count[g];
    mean[g] += x(i, j);
  }
  for (int g = 0; g < 2; ++g) {
    if (count[g] > 0) mean[g] /= static_cast<double>(count[g]);
  }
  for (std::size_t i = 0; i < cohort.rows(); ++i) {
    const int g = cohort.group()[i];
    const double c = x(i, j) - mean[g];
    sd[g] += c * c;
  }
  for (int g = 0; g < 2; ++g) {
    if (count[g] == 0) continue;
    sd[g] = std::sqrt(sd[g] / static_cast<double>(count[g]));
    if (!(sd[g] > 0.0)) {
      throw PreconditionError("apply_calibrated: covariate is constant within a group");
    }
  }

  ObservationMask mask(cohort.rows(), cohort.cols(), true);
  Rng rng(spec.seed);
  for (std::size_t i = 0; i < cohort.rows(); ++i) {
    const int g = cohort.group()[i];
    const double r = loading[g];
    const double z = r * (x(i, j) - mean[g]) / sd[g] + std::sqrt(1.0 - r * r) * rng.normal();
    mask.set(i, j, z <= threshold[g]);
  }
  return mask;
}

MissingnessDescriptor describe(const Cohort& cohort, const ObservationMask& mask,
                               std::size_t covariate) {
  const std::size_t j = covariate;
  if (j >= cohort.cols() || mask.rows() != cohort.rows() || mask.cols() != cohort.cols()) {
    throw PreconditionError("describe: mask/cohort mismatch or covariate out of range");
  }
  const Matrix& x = cohort.covariates();

  struct Sums {
    double n = 0, n_obs = 0, sum = 0, sum_obs = 0, sum_mis = 0;
  };
  std::array<Sums, 2> s{};
  for (std::size_t i = 0; i < cohort.rows(); ++i) {
    auto& t = s[cohort.group()[i]];
    const double v = x(i, j);
    t.n += 1;
    t.sum += v;
    if (mask.observed(i, j)) {
      t.n_obs += 1;
      t.sum_obs += v;
    } else {
      t.sum_mis += v;
    }
  }

  MissingnessDescriptor out;
  std::array<double, 2> var{}, cov{}, var_mis{};
  for (int g = 0; g < 2; ++g) {
    auto& d = out.groups[g];
    d.count = static_cast<std::size_t>(s[g].n);
    d.observed_count = static_cast<std::size_t>(s[g].n_obs);
    if (d.count == 0) continue;
    d.true_mean = s[g].sum / s[g].n;
    d.observation_rate = s[g].n_obs / s[g].n;
    if (s[g].n_obs > 0) d.observed_mean = s[g].sum_obs / s[g].n_obs;
    if (s[g].n_obs < s[g].n) d.unobserved_mean = s[g].sum_mis / (s[g].n - s[g].n_obs);
  }
  for (std::size_t i = 0; i < cohort.rows(); ++i) {
    const int g = cohort.group()[i];
    const auto& d = out.groups[g];
    const double c = x(i, j) - d.true_mean;
    const double o = (mask.observed(i, j) ? 1.0 : 0.0) - d.observation_rate;
    var[g] += c * c;
    cov[g] += c * o;
    if (!mask.observed(i, j)) {
      const double cm = x(i, j) - *d.unobserved_mean;
      var_mis[g] += cm * cm;
    }
  }
  for (int g = 0; g < 2; ++g) {
    auto& d = out.groups[g];
    if (d.count == 0) continue;
    d.sd = std::sqrt(var[g] / s[g].n);
    const bool degenerate = d.observed_count == 0 || d.observed_count == d.count;
    if (!degenerate && d.sd > 0.0) {
      const double sd_o = std::sqrt(d.observation_rate * (1.0 - d.observation_rate));
      d.correlation = (cov[g] / s[g].n) / (sd_o * d.sd);
    }
    if (d.unobserved_mean) var_mis[g] /= (s[g].n - s[g].n_obs);
    if (d.unobserved_mean) d.unobserved_variance = var_mis[g];
  }

  const double n_total = s[0].n + s[1].n;
  const double n_obs_total = s[0].n_obs + s[1].n_obs;
  out.observation_rate = n_obs_total / n_total;
  out.marginalised_ratio = s[1].n / n_total;
  if (n_obs_total > 0) out.observed_mean = (s[0].sum_obs + s[1].sum_obs) / n_obs_total;
  return out;
}

}  // namespace fairimpute
