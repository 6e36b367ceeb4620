#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

#include "fairimpute/data_model.hpp"

namespace fairimpute {

/// The three clinical-presence mechanisms:
///  S1 limited access to care: target masked w.p. p for marginalised rows;
///  S2 (mis)-informed collection: masked w.p. p where the trigger covariate
///     exceeds the threshold;
///  S3 confirmation bias: masked w.p. p where the target's own value exceeds
///     the threshold.
enum class Scenario { kS1, kS2, kS3 };

std::string_view scenario_name(Scenario s);
Scenario parse_scenario(std::string_view name);

struct ScenarioSpec {
  Scenario scenario = Scenario::kS1;
  std::size_t target_covariate = 1;
  std::size_t trigger_covariate = 0;
  double threshold = 0.5;
  double mask_probability = 0.5;
  std::uint64_t seed = 0;
};

ObservationMask apply_scenario(const Cohort& cohort, const ScenarioSpec& spec);

/// Observation rate alpha and target Corr(O, X) rho for one group.
struct GroupMechanism {
  double observation_rate = 1.0;
  double correlation = 0.0;
};

struct CalibratedMechanismSpec {
  /// Indexed by group label: [0] rest of the population, [1] marginalised.
  std::array<GroupMechanism, 2> groups;
  std::size_t target_covariate = 0;
  std::uint64_t seed = 0;
};

/// Largest |Corr(O, X)| a latent Gaussian threshold can realise at
/// observation rate alpha for Gaussian X: phi(z_alpha) / sqrt(alpha (1 - alpha)).
double max_attainable_correlation(double alpha);

/// Correlation between the latent variable and standardised X that yields
/// Corr(O, X) = rho: r = -rho sqrt(alpha (1 - alpha)) / phi(z_alpha).
double latent_loading(double alpha, double rho);

/// Per group: Z = r X_std + sqrt(1 - r^2) eps, O = 1[Z <= Phi^-1(alpha)].
/// Exact for Gaussian covariates; approximate otherwise.
ObservationMask apply_calibrated(const Cohort& cohort, const CalibratedMechanismSpec& spec);

/// Moments use 1/n normalisation so the observed-mean identity
/// mu^O_g = mu_g + rho_g sqrt((1 - alpha_g)/alpha_g) sigma_g holds exactly
/// on the sample.
struct GroupDescriptor {
  std::size_t count = 0;
  std::size_t observed_count = 0;
  double observation_rate = 0.0;        // alpha_g
  std::optional<double> correlation;    // rho_g; undefined if all/none observed
  std::optional<double> observed_mean;  // mu^O_g
  double true_mean = 0.0;               // mu_g
  double sd = 0.0;                      // sigma_{X|G}
  std::optional<double> unobserved_mean;      // E[X | not O, G]
  std::optional<double> unobserved_variance;  // sigma^2_{X | not O, G}
};

struct MissingnessDescriptor {
  std::array<GroupDescriptor, 2> groups;  // [0] rest, [1] marginalised
  std::optional<double> observed_mean;    // mu^O
  double observation_rate = 0.0;          // alpha
  double marginalised_ratio = 0.0;        // r_g
};

/// Reads ground truth: test and theory-validation use only.
MissingnessDescriptor describe(const Cohort& cohort, const ObservationMask& mask,
                               std::size_t covariate);

}  // namespace fairimpute
