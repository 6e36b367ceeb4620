#include "fairimpute/harness/runner.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "fairimpute/errors.hpp"
#include "fairimpute/harness/csv.hpp"
#include "fairimpute/impute.hpp"
#include "fairimpute/metrics.hpp"
#include "fairimpute/parallel.hpp"
#include "fairimpute/predict.hpp"
#include "fairimpute/rng.hpp"
#include "fairimpute/synthgen.hpp"
#include "fairimpute/theory.hpp"

namespace fairimpute::harness {

namespace {

using Fields = std::array<std::optional<double>, 4>;

Fields fields_of(const GroupMetric& m) { return {m.overall, m.marginalised, m.rest, m.gap}; }

struct MetricSlot {
  MetricKind kind;
  std::optional<double> threshold;
};

std::vector<MetricSlot> metric_slots(const ExperimentConfig& c, bool include_reconstruction) {
  std::vector<MetricSlot> out;
  for (auto m : c.metrics) {
    if (m == MetricKind::kReconstruction && !include_reconstruction) continue;
    if (m == MetricKind::kFnr || m == MetricKind::kPrioritisation) {
      for (double cap : c.capacities) out.push_back({m, cap});
    } else {
      out.push_back({m, std::nullopt});
    }
  }
  return out;
}

struct CellOutcome {
  Fields values;
  bool failed = false;
  bool undefined = false;
  std::string message;
};

void fail_all(std::vector<CellOutcome>& cells, std::size_t first, std::size_t count,
              const std::string& msg) {
  for (std::size_t i = first; i < first + count; ++i) {
    if (cells[i].failed || cells[i].undefined) continue;
    if (std::any_of(cells[i].values.begin(), cells[i].values.end(), [](auto& v) { return v.has_value(); })) {
      continue;
    }
    cells[i].failed = true;
    cells[i].message = msg;
  }
}

/// Fills predictive metric slots from test scores.
void evaluate_predictions(const std::vector<MetricSlot>& slots, std::span<const double> scores,
                          const MaskedCohort& test, std::vector<CellOutcome>& cells,
                          std::size_t base) {
  for (std::size_t m = 0; m < slots.size(); ++m) {
    CellOutcome& cell = cells[base + m];
    switch (slots[m].kind) {
      case MetricKind::kReconstruction:
        break;
      case MetricKind::kAuc:
        cell.values = fields_of(auc(scores, test.outcome(), test.group()));
        break;
      case MetricKind::kFnr:
        cell.values = fields_of(threshold_metrics(scores, test.outcome(), test.group(), *slots[m].threshold).fnr);
        break;
      case MetricKind::kPrioritisation:
        cell.values = fields_of(
            threshold_metrics(scores, test.outcome(), test.group(), *slots[m].threshold).prioritisation);
        break;
    }
  }
}

std::vector<CellOutcome> run_repetition(const ExperimentConfig& cfg,
                                        const std::vector<MetricSlot>& slots, std::size_t rep) {
  const std::size_t n_cells = cfg.scenarios.size() * cfg.imputers.size() * slots.size();
  std::vector<CellOutcome> cells(n_cells);
  const std::uint64_t seed = derive_seed(cfg.seed, {rep});

  PopulationSpec pop = *cfg.population;
  pop.seed = derive_seed(seed, {0});
  const Cohort cohort = generate(pop);
  SplitSpec split_spec = cfg.split;
  split_spec.seed = derive_seed(seed, {2});
  const SplitIndices idx = split_indices(cohort.rows(), split_spec);

  for (std::size_t s = 0; s < cfg.scenarios.size(); ++s) {
    ScenarioSpec sc = cfg.scenarios[s];
    sc.seed = derive_seed(seed, {1, s});
    const MaskedCohort masked(cohort, apply_scenario(cohort, sc));
    const MaskedCohort train = masked.select_rows(idx.train);
    const MaskedCohort test = masked.select_rows(idx.test);
    std::optional<MaskedCohort> tune;
    if (!idx.tune.empty()) tune = masked.select_rows(idx.tune);

    for (std::size_t k = 0; k < cfg.imputers.size(); ++k) {
      const std::size_t base = (s * cfg.imputers.size() + k) * slots.size();
      try {
        ImputerSpec ispec = cfg.imputers[k].spec;
        ispec.seed = derive_seed(seed, {3, s, k});
        const FittedImputer fitted = fit(cfg.fit_on_all ? masked : train, ispec);

        for (std::size_t m = 0; m < slots.size(); ++m) {
          if (slots[m].kind != MetricKind::kReconstruction) continue;
          CellOutcome& cell = cells[base + m];
          try {
            const MaskedCohort& rows =
                cfg.reconstruction_rows == ReconstructionRows::kCohort ? masked : test;
            cell.values = fields_of(reconstruction_error(rows, transform(fitted, rows), sc.target_covariate));
          } catch (const UndefinedMetricError& e) {
            cell.undefined = true;
            cell.message = e.what();
          }
        }

        const bool predictive = std::any_of(slots.begin(), slots.end(), [](const MetricSlot& m) {
          return m.kind != MetricKind::kReconstruction;
        });
        if (!predictive) continue;
        const ImputationResult train_res = transform(fitted, train);
        const ImputationResult test_res = transform(fitted, test);
        FittedModel model = tune ? fairimpute::train(train_res, train.outcome(), cfg.model,
                                                     transform(fitted, *tune), tune->outcome())
                                 : fairimpute::train(train_res, train.outcome(), cfg.model);
        const std::vector<double> scores = predict(model, test_res);
        evaluate_predictions(slots, scores, test, cells, base);
      } catch (const Error& e) {
        fail_all(cells, base, slots.size(), e.what());
      }
    }
  }
  return cells;
}

struct FieldStats {
  std::optional<double> mean, std, lower, upper;
};

FieldStats summarise(const std::vector<double>& v) {
  FieldStats s;
  if (v.empty()) return s;
  double sum = 0.0;
  for (double x : v) sum += x;
  const double mean = sum / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  s.mean = mean;
  s.std = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
  s.lower = std::min(percentile(v, 0.025), mean);
  s.upper = std::max(percentile(v, 0.975), mean);
  return s;
}

std::string status_text(std::size_t errors, std::size_t total, std::size_t defined,
                        const std::string& first_error, const char* unit) {
  if (errors > 0) {
    return "error in " + std::to_string(errors) + "/" + std::to_string(total) + " " + unit + ": " +
           first_error;
  }
  return defined > 0 ? "ok" : "undefined";
}

}  // namespace

SimulationResult run_simulation(const ExperimentConfig& cfg) {
  cfg.validate_simulation();
  const auto slots = metric_slots(cfg, true);
  std::vector<std::vector<CellOutcome>> reps(cfg.repetitions);
  parallel_for(cfg.repetitions, cfg.threads,
               [&](std::size_t r) { reps[r] = run_repetition(cfg, slots, r); });

  SimulationResult out;
  for (std::size_t s = 0; s < cfg.scenarios.size(); ++s) {
    const std::string scen(scenario_name(cfg.scenarios[s].scenario));
    for (std::size_t k = 0; k < cfg.imputers.size(); ++k) {
      for (std::size_t m = 0; m < slots.size(); ++m) {
        const std::size_t cell = (s * cfg.imputers.size() + k) * slots.size() + m;
        std::array<std::vector<double>, 4> values;
        std::size_t errors = 0, undefined = 0;
        std::string first_error;
        for (std::size_t r = 0; r < cfg.repetitions; ++r) {
          const CellOutcome& c = reps[r][cell];
          if (c.failed) {
            if (errors++ == 0) first_error = c.message;
            continue;
          }
          const bool complete = std::all_of(c.values.begin(), c.values.end(), [](auto& v) { return v.has_value(); });
          if (!complete) {
            ++undefined;
            continue;
          }
          for (std::size_t f = 0; f < 4; ++f) values[f].push_back(*c.values[f]);
        }
        const std::string status =
            status_text(errors, cfg.repetitions, values[0].size(), first_error, "repetitions");
        if (errors > 0) {
          out.failures.push_back(scen + " / " + cfg.imputers[k].name + " / " +
                                 std::string(metric_name(slots[m].kind)) + ": " + status);
        }
        for (std::size_t f = 0; f < 4; ++f) {
          ReportRow row;
          row.scenario = scen;
          row.imputer = cfg.imputers[k].name;
          row.metric = metric_name(slots[m].kind);
          row.threshold = slots[m].threshold;
          row.group = kGroupNames[f];
          const FieldStats st = summarise(values[f]);
          row.mean = st.mean;
          row.std = st.std;
          row.lower = st.lower;
          row.upper = st.upper;
          row.n = values[f].size();
          row.n_undefined = undefined;
          row.n_errors = errors;
          row.status = status;
          out.rows.push_back(std::move(row));
        }
        for (std::size_t r = 0; r < cfg.repetitions; ++r) {
          const CellOutcome& c = reps[r][cell];
          for (std::size_t f = 0; f < 4; ++f) {
            RepetitionRecord rec;
            rec.repetition = r;
            rec.scenario = scen;
            rec.imputer = cfg.imputers[k].name;
            rec.metric = metric_name(slots[m].kind);
            rec.threshold = slots[m].threshold;
            rec.group = kGroupNames[f];
            rec.value = c.failed ? std::nullopt : c.values[f];
            rec.status = c.failed ? "error: " + c.message : (rec.value ? "ok" : "undefined");
            out.repetitions.push_back(std::move(rec));
          }
        }
      }
    }
  }
  return out;
}

namespace {

IngestedCohort standardise_on_train(const IngestedCohort& data, const SplitIndices& idx) {
  const Cohort& c = data.cohort;
  const std::size_t n = c.rows(), d = c.cols();
  std::vector<double> mean(d, 0.0), sd(d, 1.0);
  for (std::size_t j = 0; j < d; ++j) {
    double sum = 0.0;
    std::size_t cnt = 0;
    for (std::size_t i : idx.train) {
      if (data.mask.observed(i, j)) {
        sum += c.covariates()(i, j);
        ++cnt;
      }
    }
    if (cnt == 0) {
      throw PreconditionError("covariate '" + c.covariate_names()[j] +
                              "' has no observed values in the training partition");
    }
    mean[j] = sum / static_cast<double>(cnt);
    double ss = 0.0;
    for (std::size_t i : idx.train) {
      if (data.mask.observed(i, j)) ss += (c.covariates()(i, j) - mean[j]) * (c.covariates()(i, j) - mean[j]);
    }
    const double var = ss / static_cast<double>(cnt);
    sd[j] = var > 0.0 ? std::sqrt(var) : 1.0;
  }
  std::vector<double> values(n * d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      if (data.mask.observed(i, j)) values[i * d + j] = (c.covariates()(i, j) - mean[j]) / sd[j];
    }
  }
  Cohort scaled(Matrix(n, d, std::move(values)), c.group(), c.outcome(), c.covariate_names());
  if (!c.auxiliary_groups().empty()) scaled = scaled.with_auxiliary_groups(c.auxiliary_groups());
  return {std::move(scaled), data.mask};
}

}  // namespace

AuditResult run_csv_audit(const ExperimentConfig& cfg) {
  cfg.validate_csv_audit();
  const IngestedCohort raw = ingest(*cfg.csv);
  SplitSpec split_spec = cfg.split;
  split_spec.seed = derive_seed(cfg.seed, {2});
  const SplitIndices idx = split_indices(raw.cohort.rows(), split_spec);
  const IngestedCohort scaled = standardise_on_train(raw, idx);
  const MaskedCohort all = scaled.masked();
  const MaskedCohort train = all.select_rows(idx.train);
  const MaskedCohort test = all.select_rows(idx.test);
  std::optional<MaskedCohort> tune;
  if (!idx.tune.empty()) tune = all.select_rows(idx.tune);

  const auto slots = metric_slots(cfg, false);
  const bool wants_reconstruction =
      std::find(cfg.metrics.begin(), cfg.metrics.end(), MetricKind::kReconstruction) != cfg.metrics.end();
  const std::uint64_t boot_seed = derive_seed(cfg.seed, {4});

  struct ImputerOutput {
    std::vector<std::vector<ReportRow>> slot_rows;
    std::vector<std::string> failures;
  };
  std::vector<ImputerOutput> per_imputer(cfg.imputers.size());

  parallel_for(cfg.imputers.size(), cfg.threads, [&](std::size_t k) {
    ImputerOutput& out = per_imputer[k];
    out.slot_rows.resize(slots.size());
    const std::string& name = cfg.imputers[k].name;
    auto make_rows = [&](std::size_t m) {
      std::vector<ReportRow> rows(4);
      for (std::size_t f = 0; f < 4; ++f) {
        rows[f].scenario = "csv";
        rows[f].imputer = name;
        rows[f].metric = metric_name(slots[m].kind);
        rows[f].threshold = slots[m].threshold;
        rows[f].group = kGroupNames[f];
      }
      return rows;
    };
    std::vector<double> scores;
    std::string pipeline_error;
    try {
      ImputerSpec ispec = cfg.imputers[k].spec;
      ispec.seed = derive_seed(cfg.seed, {3, k});
      const FittedImputer fitted = fit(cfg.fit_on_all ? all : train, ispec);
      const ImputationResult train_res = transform(fitted, train);
      FittedModel model = tune ? fairimpute::train(train_res, train.outcome(), cfg.model,
                                                   transform(fitted, *tune), tune->outcome())
                               : fairimpute::train(train_res, train.outcome(), cfg.model);
      scores = predict(model, transform(fitted, test));
    } catch (const Error& e) {
      pipeline_error = e.what();
    }

    for (std::size_t m = 0; m < slots.size(); ++m) {
      auto rows = make_rows(m);
      if (!pipeline_error.empty()) {
        for (auto& r : rows) {
          r.status = "error: " + pipeline_error;
          r.n_errors = 1;
        }
        out.failures.push_back(name + " / " + rows[0].metric + ": " + pipeline_error);
        out.slot_rows[m] = std::move(rows);
        continue;
      }
      const MetricSlot slot = slots[m];
      auto compute = [&](std::span<const std::size_t> sel) -> std::vector<std::optional<double>> {
        std::vector<double> s(sel.size());
        BinaryLabels y(sel.size()), g(sel.size());
        for (std::size_t i = 0; i < sel.size(); ++i) {
          s[i] = scores[sel[i]];
          y[i] = test.outcome()[sel[i]];
          g[i] = test.group()[sel[i]];
        }
        GroupMetric gm;
        if (slot.kind == MetricKind::kAuc) gm = auc(s, y, g);
        else if (slot.kind == MetricKind::kFnr) gm = threshold_metrics(s, y, g, *slot.threshold).fnr;
        else gm = threshold_metrics(s, y, g, *slot.threshold).prioritisation;
        return {gm.overall, gm.marginalised, gm.rest, gm.gap};
      };
      std::vector<std::size_t> identity(test.rows());
      for (std::size_t i = 0; i < identity.size(); ++i) identity[i] = i;
      const auto point = compute(identity);
      try {
        const auto summary = bootstrap(compute, test.rows(), cfg.bootstrap_resamples, boot_seed);
        for (std::size_t f = 0; f < 4; ++f) {
          rows[f].point = point[f];
          rows[f].mean = summary[f].mean;
          rows[f].std = summary[f].std;
          rows[f].lower = summary[f].lower;
          rows[f].upper = summary[f].upper;
          rows[f].n = summary[f].n_resamples;
          rows[f].n_undefined = summary[f].n_undefined;
        }
      } catch (const Error& e) {
        for (std::size_t f = 0; f < 4; ++f) {
          rows[f].point = point[f];
          rows[f].status = std::string("error: ") + e.what();
          rows[f].n_errors = 1;
        }
        out.failures.push_back(name + " / " + rows[0].metric + ": " + e.what());
      }
      out.slot_rows[m] = std::move(rows);
    }
  });

  AuditResult result;
  for (std::size_t k = 0; k < cfg.imputers.size(); ++k) {
    if (wants_reconstruction) {
      for (std::size_t f = 0; f < 4; ++f) {
        ReportRow r;
        r.scenario = "csv";
        r.imputer = cfg.imputers[k].name;
        r.metric = metric_name(MetricKind::kReconstruction);
        r.group = kGroupNames[f];
        r.status = "undefined: ground truth unknown";
        result.rows.push_back(std::move(r));
      }
    }
    for (auto& rows : per_imputer[k].slot_rows) {
      for (auto& r : rows) result.rows.push_back(std::move(r));
    }
    for (auto& f : per_imputer[k].failures) result.failures.push_back(std::move(f));
  }
  return result;
}

bool TheoremSuiteResult::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const TheoremCheck& c) { return c.pass; });
}

TheoremSuiteResult run_theorem_validation(const ExperimentConfig& cfg) {
  const TheoremSuiteConfig& t = cfg.theorems;
  TheoremSuiteResult res;
  // Below ~5% missing rows per group, Monte Carlo noise at 1e6 samples is of
  // the same order as a 2% tolerance.
  constexpr double kMinMissingShare = 0.05;

  {
    Rng rng(derive_seed(cfg.seed, {10}));
    std::vector<TheoremInputs> cases;
    for (std::size_t c = 0; c < t.monte_carlo_cases; ++c) cases.push_back(sample_inputs(rng, false, kMinMissingShare));
    std::vector<MonteCarloReport> reports(cases.size(), MonteCarloReport{});
    parallel_for(cases.size(), cfg.threads, [&](std::size_t c) {
      reports[c] = monte_carlo_validate(cases[c], t.monte_carlo_samples, derive_seed(cfg.seed, {11, c}));
    });
    for (std::size_t c = 0; c < cases.size(); ++c) {
      const auto& r = reports[c];
      auto add = [&](const char* name, double emp, double closed) {
        const double rel = std::abs(emp - closed) / closed;
        res.checks.push_back({name, c, emp, closed, t.monte_carlo_tolerance, rel <= t.monte_carlo_tolerance});
      };
      add("mc_L_group_marginalised", r.marginalised.empirical.group, r.marginalised.closed_form.group);
      add("mc_L_pop_marginalised", r.marginalised.empirical.population, r.marginalised.closed_form.population);
      add("mc_L_group_rest", r.rest.empirical.group, r.rest.closed_form.group);
      add("mc_L_pop_rest", r.rest.empirical.population, r.rest.closed_form.population);
    }
  }

  {
    Rng rng(derive_seed(cfg.seed, {12}));
    std::size_t dis2 = 0, dis3 = 0;
    double eq8 = 0.0;
    for (std::size_t i = 0; i < t.equivalence_inputs; ++i) {
      const TheoremInputs in = sample_inputs(rng, false);
      for (Side side : {Side::kMarginalised, Side::kRest}) {
        const auto l = reconstruction_closed_form(in, side);
        dis2 += theorem2_predicate(in, side) != (l.group > l.population);
        const double direct = population_bias(in, side);
        eq8 = std::max({eq8, std::abs(direct - population_bias_mixture(in, side)),
                        std::abs(direct - population_bias_expanded(in, side))});
      }
      const TheoremInputs in3 = sample_inputs(rng, true);
      const FairnessGaps gaps = fairness_gaps(in3);
      dis3 += theorem3_predicate(in3) != (gaps.group > gaps.population && gaps.population > 0.0);
    }
    res.checks.push_back({"theorem2_disagreements", 0, static_cast<double>(dis2), 0.0, 0.0, dis2 == 0});
    res.checks.push_back({"theorem3_disagreements", 0, static_cast<double>(dis3), 0.0, 0.0, dis3 == 0});
    res.checks.push_back({"population_bias_forms_max_abs_diff", 0, eq8, 0.0, 1e-12, eq8 <= 1e-12});
  }

  {
    // Inputs at least 10% away from the L^group = L^pop boundary on each side.
    Rng rng(derive_seed(cfg.seed, {13}));
    std::vector<TheoremInputs> cases;
    std::vector<bool> expect;
    std::size_t want[2] = {t.sign_cases_per_side, t.sign_cases_per_side};
    while (want[0] + want[1] > 0) {
      const TheoremInputs in = sample_inputs(rng, false, kMinMissingShare);
      const auto l = reconstruction_closed_form(in);
      const bool p = theorem2_predicate(in);
      if (std::abs(l.group - l.population) < 0.1 * std::max(l.group, l.population)) continue;
      if (want[p] == 0) continue;
      --want[p];
      cases.push_back(in);
      expect.push_back(p);
    }
    std::vector<MonteCarloReport> reports(cases.size(), MonteCarloReport{});
    parallel_for(cases.size(), cfg.threads, [&](std::size_t c) {
      reports[c] = monte_carlo_validate(cases[c], t.monte_carlo_samples, derive_seed(cfg.seed, {14, c}));
    });
    for (std::size_t c = 0; c < cases.size(); ++c) {
      const auto& e = reports[c].marginalised.empirical;
      const bool observed = e.group > e.population;
      res.checks.push_back({expect[c] ? "theorem2_sign_true" : "theorem2_sign_false", c,
                            e.group - e.population, expect[c] ? 1.0 : 0.0, 0.0, observed == expect[c]});
    }
  }
  return res;
}

std::string repetitions_csv(const std::vector<RepetitionRecord>& records) {
  std::string out = "repetition,scenario,imputer,metric,threshold,group,value,status\n";
  for (const auto& r : records) {
    out += std::to_string(r.repetition) + ',' + csv_field(r.scenario) + ',' + csv_field(r.imputer) + ',' +
           csv_field(r.metric) + ',' + (r.threshold ? format_double(*r.threshold) : "") + ',' + r.group +
           ',' + (r.value ? format_double(*r.value) : "") + ',' + csv_field(r.status) + '\n';
  }
  return out;
}

std::string theorem_checks_csv(const std::vector<TheoremCheck>& checks) {
  std::string out = "check,case,value,reference,tolerance,pass\n";
  for (const auto& c : checks) {
    out += c.check + ',' + std::to_string(c.case_index) + ',' + format_double(c.value) + ',' +
           format_double(c.reference) + ',' + format_double(c.tolerance) + ',' + (c.pass ? "1" : "0") + '\n';
  }
  return out;
}

}  // namespace fairimpute::harness
