#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "fairimpute/rng.hpp"

namespace fairimpute {

/// Parameters of one group as supplied by the caller. Exactly one of
/// `mean` (true) and `observed_mean` is required; if both are given they must
/// satisfy mu^O = mu + rho sqrt((1 - alpha)/alpha) sigma within 1e-9.
struct GroupParameters {
  double observation_rate = 0.0;   // alpha
  double correlation = 0.0;        // rho = Corr(O, X | G)
  double sd = 1.0;                 // sigma_{X|G}
  double unobserved_variance = 0.0;
  std::optional<double> mean;
  std::optional<double> observed_mean;
};

struct GroupSymbols {
  double alpha = 0.0;
  double rho = 0.0;
  double sigma = 0.0;
  double unobserved_variance = 0.0;
  double mean = 0.0;           // mu
  double observed_mean = 0.0;  // mu^O
};

enum class Side { kMarginalised, kRest };

/// Full symbol set for two groups g (marginalised) and not-g.
class TheoremInputs {
 public:
  TheoremInputs(const GroupParameters& marginalised, const GroupParameters& rest,
                double marginalised_ratio);

  const GroupSymbols& g() const { return g_; }
  const GroupSymbols& ng() const { return ng_; }
  const GroupSymbols& side(Side s) const { return s == Side::kMarginalised ? g_ : ng_; }
  double ratio() const { return r_; }
  /// Overall observation rate alpha = alpha_g r_g + alpha_ng (1 - r_g).
  double alpha() const;
  /// Population observed mean mu^O.
  double observed_mean() const;

 private:
  GroupSymbols g_;
  GroupSymbols ng_;
  double r_;
};

/// B^group = -rho sigma / sqrt(alpha (1 - alpha)).
double group_bias(const TheoremInputs& in, Side side = Side::kMarginalised);
/// B^pop = B^group + mu^O_side - mu^O.
double population_bias(const TheoremInputs& in, Side side = Side::kMarginalised);
/// B^pop via the mixture weights: B^group + (1 - w_side) mu^O_side - w_other mu^O_other,
/// w being each group's share of observed rows.
double population_bias_mixture(const TheoremInputs& in, Side side = Side::kMarginalised);
/// B^pop through the gamma term: B^group + b gamma / alpha (g) or -a gamma / alpha (not g).
double population_bias_expanded(const TheoremInputs& in, Side side = Side::kMarginalised);

/// gamma = rho_g s_g sigma_g + mu_g - mu_ng - rho_ng s_ng sigma_ng, s = sqrt((1-alpha)/alpha).
double gamma_term(const TheoremInputs& in);

struct ReconstructionErrors {
  double group = 0.0;
  double population = 0.0;
};

/// L^group = B^2 + var_unobs; L^pop = (B + mu^O_side - mu^O)^2 + var_unobs.
ReconstructionErrors reconstruction_closed_form(const TheoremInputs& in,
                                                Side side = Side::kMarginalised);

/// Error of imputing the constant c: (E[X | not O] - c)^2 + Var(X | not O).
double constant_imputation_error(double unobserved_mean, double unobserved_variance, double c);

struct FairnessGaps {
  double group = 0.0;       // Delta^group = L^group_g - L^group_ng
  double population = 0.0;  // Delta^pop
};
FairnessGaps fairness_gaps(const TheoremInputs& in);

/// rho/sqrt(alpha(1-alpha)) < (mu^O_g - mu^O)/(2 sigma) < 0, or the mirrored
/// chain. Equivalent to L^group > L^pop.
bool theorem2_predicate(const TheoremInputs& in, Side side = Side::kMarginalised);

struct Theorem3Terms {
  double f = 0.0;  // rho-weighted f terms
  double k = 0.0;  // ((1 - r_g) alpha_ng - r_g alpha_g)(mu_g - mu_ng)
  double e = 0.0;
  double m = 0.0;  // mu_g - mu_ng
  double h = 0.0;
};
Theorem3Terms theorem3_terms(const TheoremInputs& in);

/// Evaluates the two inequality systems; equivalent to
/// Delta^group > Delta^pop > 0. Throws AssumptionError unless the unobserved
/// variances are equal and mu^O_g > mu^O.
bool theorem3_predicate(const TheoremInputs& in);

struct RegionScanSpec {
  /// Observed means, rates, spreads and ratio are held fixed; true means are
  /// re-derived for each (rho_g, rho_ng).
  double observed_mean_g = 0.5;
  double observed_mean_ng = 0.0;
  double ratio = 0.25;
  double alpha_g = 0.7;
  double alpha_ng = 0.8;
  double sigma_g = 0.5;
  double sigma_ng = 0.5;
  double unobserved_variance = 0.25;
  double rho_min = -0.3;
  double rho_max = 0.3;
  std::size_t steps = 101;
};

struct RegionCell {
  double rho_g = 0.0;
  double rho_ng = 0.0;
  double delta_pop = 0.0;
  double delta_group = 0.0;
  double diff = 0.0;  // delta_pop - delta_group
  bool t3 = false;
  bool dotted = false;  // |delta_pop| < |delta_group|
  bool feasible = true;
};

/// Row-major over rho_g (outer) and rho_ng (inner). Cells outside the latent
/// threshold's attainable range are flagged infeasible.
std::vector<RegionCell> region_scan(const RegionScanSpec& spec);

/// Var(X | not O) implied by the latent-threshold mechanism for Gaussian X.
double implied_unobserved_variance(double alpha, double rho, double sigma);

struct MonteCarloSide {
  ReconstructionErrors closed_form;
  ReconstructionErrors empirical;
  double group_bias_closed = 0.0;
  double group_bias_empirical = 0.0;  // E[X|not O] - E[X|O]
  double relative_deviation_group = 0.0;
  double relative_deviation_population = 0.0;
};

struct MonteCarloReport {
  MonteCarloSide marginalised;
  MonteCarloSide rest;
  FairnessGaps closed_form_gaps;
  FairnessGaps empirical_gaps;
  std::size_t n = 0;
};

/// Gaussian groups with the given true means and spreads, masked by the
/// calibrated mechanism, then imputed with group and population observed means.
/// The closed form uses the unobserved variance the mechanism implies.
MonteCarloReport monte_carlo_validate(const TheoremInputs& in, std::size_t n, std::uint64_t seed);

/// Random feasible inputs: alpha in [0.05, 0.95], rho within the attainable
/// range, sigma in [0.1, 3], r_g in [0.01, 0.5], true means in [-2, 2].
/// With `theorem3_hypotheses`, unobserved variances are equal and
/// mu^O_g > mu^O (by rejection). `min_missing_share` rejects draws where either
/// group's share of missing rows, r (1 - alpha), falls below it.
TheoremInputs sample_inputs(Rng& rng, bool theorem3_hypotheses = false,
                            double min_missing_share = 0.0);

}  // namespace fairimpute
