#include "fairimpute/theory.hpp"

#include <cmath>
#include <string>

#include "fairimpute/data_model.hpp"
#include "fairimpute/errors.hpp"
#include "fairimpute/linalg.hpp"
#include "fairimpute/missingness.hpp"

namespace fairimpute {

namespace {

constexpr double kIdentityTolerance = 1e-9;

// sqrt((1 - alpha) / alpha)
double s_of(double alpha) { return std::sqrt((1.0 - alpha) / alpha); }

GroupSymbols resolve(const GroupParameters& p, const char* label) {
  const std::string who = label;
  if (!(p.observation_rate > 0.0 && p.observation_rate < 1.0)) {
    throw PreconditionError(who + ": observation rate must lie strictly inside (0, 1)");
  }
  if (!(std::abs(p.correlation) <= 1.0)) throw PreconditionError(who + ": |rho| must be <= 1");
  if (!(p.sd > 0.0) || !std::isfinite(p.sd)) throw PreconditionError(who + ": sigma must be positive");
  if (!(p.unobserved_variance >= 0.0) || !std::isfinite(p.unobserved_variance)) {
    throw PreconditionError(who + ": unobserved variance must be non-negative");
  }
  if (!p.mean && !p.observed_mean) {
    throw PreconditionError(who + ": supply the true mean or the observed mean");
  }
  GroupSymbols s;
  s.alpha = p.observation_rate;
  s.rho = p.correlation;
  s.sigma = p.sd;
  s.unobserved_variance = p.unobserved_variance;
  const double shift = s.rho * s_of(s.alpha) * s.sigma;
  if (p.mean) {
    s.mean = *p.mean;
    s.observed_mean = s.mean + shift;
    if (p.observed_mean && std::abs(*p.observed_mean - s.observed_mean) > kIdentityTolerance) {
      throw PreconditionError(who + ": true and observed means are inconsistent");
    }
  } else {
    s.observed_mean = *p.observed_mean;
    s.mean = s.observed_mean - shift;
  }
  if (!std::isfinite(s.mean) || !std::isfinite(s.observed_mean)) {
    throw PreconditionError(who + ": means must be finite");
  }
  return s;
}

// a = alpha_g r_g, b = alpha_ng (1 - r_g)
double weight_g(const TheoremInputs& in) { return in.g().alpha * in.ratio(); }
double weight_ng(const TheoremInputs& in) { return in.ng().alpha * (1.0 - in.ratio()); }

double f_fn(double alpha_1, double r_1, double alpha_2) {
  const double num = 2.0 * alpha_2 * (1.0 - r_1) / std::sqrt(alpha_1 * (1.0 - alpha_1));
  return num - s_of(alpha_1) * (alpha_2 * (1.0 - r_1) - alpha_1 * r_1);
}

double e_fn(double alpha) { return std::sqrt(alpha / (1.0 - alpha)); }

double h_fn(double alpha_1, double r_1, double alpha_2) {
  const double num = (alpha_1 * r_1 + alpha_2 * (1.0 - r_1)) / std::sqrt(alpha_1 * (1.0 - alpha_1));
  return num - s_of(alpha_1) * (alpha_2 * (1.0 - r_1) - alpha_1 * r_1);
}

}  // namespace

TheoremInputs::TheoremInputs(const GroupParameters& marginalised, const GroupParameters& rest,
                             double marginalised_ratio)
    : g_(resolve(marginalised, "marginalised group")),
      ng_(resolve(rest, "rest of population")),
      r_(marginalised_ratio) {
  if (!(r_ > 0.0 && r_ < 1.0)) throw PreconditionError("group ratio r_g must lie in (0, 1)");
}

double TheoremInputs::alpha() const { return g_.alpha * r_ + ng_.alpha * (1.0 - r_); }

double TheoremInputs::observed_mean() const {
  const double a = g_.alpha * r_;
  const double b = ng_.alpha * (1.0 - r_);
  return (a * g_.observed_mean + b * ng_.observed_mean) / (a + b);
}

double group_bias(const TheoremInputs& in, Side side) {
  const GroupSymbols& s = in.side(side);
  return -s.rho * s.sigma / std::sqrt(s.alpha * (1.0 - s.alpha));
}

double population_bias(const TheoremInputs& in, Side side) {
  return group_bias(in, side) + in.side(side).observed_mean - in.observed_mean();
}

double population_bias_mixture(const TheoremInputs& in, Side side) {
  const double a = weight_g(in);
  const double b = weight_ng(in);
  const double alpha = a + b;
  const bool g = side == Side::kMarginalised;
  const double own_w = (g ? a : b) / alpha;
  const double other_w = (g ? b : a) / alpha;
  const GroupSymbols& own = in.side(side);
  const GroupSymbols& other = g ? in.ng() : in.g();
  return group_bias(in, side) + (1.0 - own_w) * own.observed_mean - other_w * other.observed_mean;
}

double population_bias_expanded(const TheoremInputs& in, Side side) {
  const double a = weight_g(in);
  const double b = weight_ng(in);
  const double alpha = a + b;
  const double gam = gamma_term(in);
  const double shift = side == Side::kMarginalised ? b * gam / alpha : -a * gam / alpha;
  return group_bias(in, side) + shift;
}

double gamma_term(const TheoremInputs& in) {
  const GroupSymbols& g = in.g();
  const GroupSymbols& ng = in.ng();
  return g.rho * s_of(g.alpha) * g.sigma + g.mean - ng.mean - ng.rho * s_of(ng.alpha) * ng.sigma;
}

ReconstructionErrors reconstruction_closed_form(const TheoremInputs& in, Side side) {
  const double v = in.side(side).unobserved_variance;
  const double bg = group_bias(in, side);
  const double bp = population_bias(in, side);
  return {bg * bg + v, bp * bp + v};
}

double constant_imputation_error(double unobserved_mean, double unobserved_variance, double c) {
  if (!std::isfinite(unobserved_mean) || !std::isfinite(c) || !(unobserved_variance >= 0.0)) {
    throw PreconditionError("constant_imputation_error: non-finite or negative input");
  }
  const double d = unobserved_mean - c;
  return d * d + unobserved_variance;
}

FairnessGaps fairness_gaps(const TheoremInputs& in) {
  const auto lg = reconstruction_closed_form(in, Side::kMarginalised);
  const auto lng = reconstruction_closed_form(in, Side::kRest);
  return {lg.group - lng.group, lg.population - lng.population};
}

bool theorem2_predicate(const TheoremInputs& in, Side side) {
  const GroupSymbols& s = in.side(side);
  const double ratio = s.rho / std::sqrt(s.alpha * (1.0 - s.alpha));
  const double m = (s.observed_mean - in.observed_mean()) / (2.0 * s.sigma);
  return (ratio < m && m < 0.0) || (0.0 < m && m < ratio);
}

Theorem3Terms theorem3_terms(const TheoremInputs& in) {
  const GroupSymbols& g = in.g();
  const GroupSymbols& ng = in.ng();
  const double r = in.ratio();
  Theorem3Terms t;
  t.f = g.rho * g.sigma * f_fn(g.alpha, r, ng.alpha) +
        ng.rho * ng.sigma * f_fn(ng.alpha, 1.0 - r, g.alpha);
  t.m = g.mean - ng.mean;
  t.k = ((1.0 - r) * ng.alpha - r * g.alpha) * t.m;
  t.e = g.rho * g.sigma * e_fn(g.alpha) - ng.rho * ng.sigma * e_fn(ng.alpha);
  t.h = g.rho * g.sigma * h_fn(g.alpha, r, ng.alpha) +
        ng.rho * ng.sigma * h_fn(ng.alpha, 1.0 - r, g.alpha);
  return t;
}

bool theorem3_predicate(const TheoremInputs& in) {
  if (in.g().unobserved_variance != in.ng().unobserved_variance) {
    throw AssumptionError("theorem 3 requires equal unobserved variances in both groups");
  }
  if (!(in.g().observed_mean > in.observed_mean())) {
    throw AssumptionError("theorem 3 requires the marginalised observed mean above the population observed mean");
  }
  const Theorem3Terms t = theorem3_terms(in);
  const bool first = t.f > t.k && t.e > t.m && t.h > t.k;
  const bool second = t.f > t.k && t.e < t.m && t.h < t.k;
  return first || second;
}

std::vector<RegionCell> region_scan(const RegionScanSpec& spec) {
  if (spec.steps == 0) throw ConfigError("region_scan: steps must be >= 1");
  if (spec.rho_max < spec.rho_min) throw ConfigError("region_scan: rho_max < rho_min");
  auto grid = [&](std::size_t k) {
    if (spec.steps == 1) return spec.rho_min;
    return spec.rho_min + (spec.rho_max - spec.rho_min) * static_cast<double>(k) /
                              static_cast<double>(spec.steps - 1);
  };
  const double bound_g = max_attainable_correlation(spec.alpha_g);
  const double bound_ng = max_attainable_correlation(spec.alpha_ng);
  std::vector<RegionCell> cells;
  cells.reserve(spec.steps * spec.steps);
  for (std::size_t a = 0; a < spec.steps; ++a) {
    for (std::size_t b = 0; b < spec.steps; ++b) {
      RegionCell c;
      c.rho_g = grid(a);
      c.rho_ng = grid(b);
      c.feasible = std::abs(c.rho_g) <= bound_g && std::abs(c.rho_ng) <= bound_ng;
      try {
        GroupParameters pg{spec.alpha_g, c.rho_g, spec.sigma_g, spec.unobserved_variance,
                           std::nullopt, spec.observed_mean_g};
        GroupParameters png{spec.alpha_ng, c.rho_ng, spec.sigma_ng, spec.unobserved_variance,
                            std::nullopt, spec.observed_mean_ng};
        const TheoremInputs in(pg, png, spec.ratio);
        const FairnessGaps gaps = fairness_gaps(in);
        c.delta_pop = gaps.population;
        c.delta_group = gaps.group;
        c.diff = gaps.population - gaps.group;
        c.dotted = std::abs(gaps.population) < std::abs(gaps.group);
        try {
          c.t3 = theorem3_predicate(in);
        } catch (const AssumptionError&) {
          c.t3 = false;
        }
      } catch (const PreconditionError&) {
        c.feasible = false;
      }
      cells.push_back(c);
    }
  }
  return cells;
}

double implied_unobserved_variance(double alpha, double rho, double sigma) {
  const double r = latent_loading(alpha, rho);
  const double z = normal_cdf_inv(alpha);
  const double lambda = normal_pdf(z) / (1.0 - normal_cdf(z));
  return sigma * sigma * (r * r * (1.0 + z * lambda - lambda * lambda) + 1.0 - r * r);
}

MonteCarloReport monte_carlo_validate(const TheoremInputs& in, std::size_t n, std::uint64_t seed) {
  const auto n_g = static_cast<std::size_t>(std::llround(static_cast<double>(n) * in.ratio()));
  if (n_g == 0 || n_g >= n) throw PreconditionError("monte_carlo_validate: n too small for r_g");

  // Checked up front so an infeasible rho fails before sampling.
  for (const GroupSymbols* s : {&in.g(), &in.ng()}) latent_loading(s->alpha, s->rho);

  Rng rng(derive_seed(seed, {0}));
  std::vector<double> x(n);
  BinaryLabels group(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const bool marg = i >= n - n_g;
    const GroupSymbols& s = marg ? in.g() : in.ng();
    group[i] = marg ? 1 : 0;
    x[i] = s.mean + s.sigma * rng.normal();
  }
  Cohort cohort(Matrix(n, 1, x), group, BinaryLabels(n, 0));
  CalibratedMechanismSpec mech;
  mech.groups[1] = {in.g().alpha, in.g().rho};
  mech.groups[0] = {in.ng().alpha, in.ng().rho};
  mech.target_covariate = 0;
  mech.seed = derive_seed(seed, {1});
  const ObservationMask mask = apply_calibrated(cohort, mech);

  double obs_sum[2] = {0, 0}, mis_sum[2] = {0, 0};
  std::size_t obs_n[2] = {0, 0}, mis_n[2] = {0, 0};
  for (std::size_t i = 0; i < n; ++i) {
    const int g = group[i];
    if (mask.observed(i, 0)) {
      obs_sum[g] += x[i];
      ++obs_n[g];
    } else {
      mis_sum[g] += x[i];
      ++mis_n[g];
    }
  }
  for (int g = 0; g < 2; ++g) {
    if (obs_n[g] == 0 || mis_n[g] == 0) {
      throw NumericError("monte_carlo_validate: a group is fully observed or fully missing");
    }
  }
  const double mu_o[2] = {obs_sum[0] / static_cast<double>(obs_n[0]),
                          obs_sum[1] / static_cast<double>(obs_n[1])};
  const double mu_o_pop = (obs_sum[0] + obs_sum[1]) / static_cast<double>(obs_n[0] + obs_n[1]);
  double err_group[2] = {0, 0}, err_pop[2] = {0, 0};
  for (std::size_t i = 0; i < n; ++i) {
    if (mask.observed(i, 0)) continue;
    const int g = group[i];
    err_group[g] += (x[i] - mu_o[g]) * (x[i] - mu_o[g]);
    err_pop[g] += (x[i] - mu_o_pop) * (x[i] - mu_o_pop);
  }

  auto with_implied = [](const GroupSymbols& s) {
    return GroupParameters{s.alpha, s.rho, s.sigma,
                           implied_unobserved_variance(s.alpha, s.rho, s.sigma), s.mean,
                           std::nullopt};
  };
  const TheoremInputs closed(with_implied(in.g()), with_implied(in.ng()), in.ratio());

  MonteCarloReport rep;
  rep.n = n;
  auto fill = [&](MonteCarloSide& out, Side side, int g) {
    out.closed_form = reconstruction_closed_form(closed, side);
    const double m = static_cast<double>(mis_n[g]);
    out.empirical = {err_group[g] / m, err_pop[g] / m};
    out.group_bias_closed = group_bias(closed, side);
    out.group_bias_empirical = mis_sum[g] / m - mu_o[g];
    out.relative_deviation_group =
        std::abs(out.empirical.group - out.closed_form.group) / out.closed_form.group;
    out.relative_deviation_population =
        std::abs(out.empirical.population - out.closed_form.population) / out.closed_form.population;
  };
  fill(rep.marginalised, Side::kMarginalised, 1);
  fill(rep.rest, Side::kRest, 0);
  rep.closed_form_gaps = fairness_gaps(closed);
  rep.empirical_gaps = {rep.marginalised.empirical.group - rep.rest.empirical.group,
                        rep.marginalised.empirical.population - rep.rest.empirical.population};
  return rep;
}

TheoremInputs sample_inputs(Rng& rng, bool theorem3_hypotheses, double min_missing_share) {
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * rng.uniform(); };
  for (;;) {
    GroupParameters p[2];
    for (auto& q : p) {
      q.observation_rate = uniform(0.05, 0.95);
      const double bound = std::min(1.0, max_attainable_correlation(q.observation_rate));
      q.correlation = uniform(-bound, bound);
      q.sd = uniform(0.1, 3.0);
      q.mean = uniform(-2.0, 2.0);
      q.unobserved_variance = implied_unobserved_variance(q.observation_rate, q.correlation, q.sd);
    }
    const double r = uniform(0.01, 0.5);
    if (theorem3_hypotheses) {
      const double v = uniform(0.0, 1.0);
      p[0].unobserved_variance = p[1].unobserved_variance = v;
    }
    if (r * (1.0 - p[0].observation_rate) < min_missing_share ||
        (1.0 - r) * (1.0 - p[1].observation_rate) < min_missing_share) {
      continue;
    }
    TheoremInputs in(p[0], p[1], r);
    if (!theorem3_hypotheses || in.g().observed_mean > in.observed_mean()) return in;
  }
}

}  // namespace fairimpute
