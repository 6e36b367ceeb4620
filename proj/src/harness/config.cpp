#include "fairimpute/harness/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "fairimpute/errors.hpp"

namespace fairimpute::harness {

using nlohmann::json;

namespace {

void check_keys(const json& obj, std::initializer_list<std::string_view> allowed,
                const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : obj.items()) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key == a;
    if (!ok) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <typename T>
void read(const json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + ": wrong type");
  }
}

ClusterSpec parse_cluster(const json& j, const std::string& where) {
  check_keys(j, {"mean", "variance"}, where);
  ClusterSpec c;
  read(j, "mean", c.mean, where);
  read(j, "variance", c.variance, where);
  return c;
}

json cluster_json(const ClusterSpec& c) { return {{"mean", c.mean}, {"variance", c.variance}}; }

PopulationSpec parse_population(const json& j) {
  const std::string where = "population";
  check_keys(j, {"preset", "n_majority", "n_marginalised", "prevalence_majority",
                 "prevalence_marginalised", "negative", "positive_majority",
                 "positive_marginalised", "correlate_x2_with_x1"},
             where);
  PopulationSpec p = paper_base_population();
  if (j.contains("preset")) {
    const std::string preset = j.at("preset").get<std::string>();
    if (preset == "base") p = paper_base_population();
    else if (preset == "prevalence") p = paper_prevalence_population();
    else if (preset == "correlated") p = paper_correlated_population();
    else throw ConfigError("population.preset: unknown preset '" + preset + "'");
  }
  read(j, "n_majority", p.n_majority, where);
  read(j, "n_marginalised", p.n_marginalised, where);
  read(j, "prevalence_majority", p.prevalence_majority, where);
  read(j, "prevalence_marginalised", p.prevalence_marginalised, where);
  if (j.contains("negative")) p.negative_cluster = parse_cluster(j.at("negative"), where + ".negative");
  if (j.contains("positive_majority")) {
    p.positive_majority_cluster = parse_cluster(j.at("positive_majority"), where + ".positive_majority");
  }
  if (j.contains("positive_marginalised")) {
    p.positive_marginalised_cluster =
        parse_cluster(j.at("positive_marginalised"), where + ".positive_marginalised");
  }
  read(j, "correlate_x2_with_x1", p.correlate_x2_with_x1, where);
  try {
    p.validate();
  } catch (const Error& e) {
    throw ConfigError(std::string("population: ") + e.what());
  }
  return p;
}

BinaryColumn parse_binary_column(const json& j, const std::string& where) {
  check_keys(j, {"column", "values"}, where);
  BinaryColumn b;
  read(j, "column", b.column, where);
  if (b.column.empty()) throw ConfigError(where + ".column is required");
  if (j.contains("values")) {
    for (const auto& [k, v] : j.at("values").items()) {
      const int label = v.get<int>();
      if (label != 0 && label != 1) throw ConfigError(where + ".values: labels must be 0 or 1");
      b.values[k] = static_cast<std::uint8_t>(label);
    }
  } else {
    b.values = {{"0", 0}, {"1", 1}};
  }
  return b;
}

json binary_column_json(const BinaryColumn& b) {
  json values = json::object();
  for (const auto& [k, v] : b.values) values[k] = v;
  return {{"column", b.column}, {"values", values}};
}

CsvSource parse_csv(const json& j) {
  const std::string where = "csv";
  check_keys(j, {"path", "group", "outcome", "auxiliary_groups", "covariates"}, where);
  CsvSource c;
  std::string path;
  read(j, "path", path, where);
  if (path.empty()) throw ConfigError("csv.path is required");
  c.path = path;
  if (!j.contains("group")) throw ConfigError("csv.group is required");
  if (!j.contains("outcome")) throw ConfigError("csv.outcome is required");
  c.group = parse_binary_column(j.at("group"), "csv.group");
  c.outcome = parse_binary_column(j.at("outcome"), "csv.outcome");
  if (j.contains("auxiliary_groups")) {
    for (const auto& a : j.at("auxiliary_groups")) {
      c.auxiliary_groups.push_back(parse_binary_column(a, "csv.auxiliary_groups[]"));
    }
  }
  read(j, "covariates", c.covariates, where);
  return c;
}

ScenarioSpec parse_scenario_entry(const json& j) {
  ScenarioSpec s;
  if (j.is_string()) {
    s.scenario = parse_scenario(j.get<std::string>());
    return s;
  }
  const std::string where = "scenarios[]";
  check_keys(j, {"name", "target", "trigger", "threshold", "mask_probability"}, where);
  std::string name;
  read(j, "name", name, where);
  s.scenario = parse_scenario(name);
  read(j, "target", s.target_covariate, where);
  read(j, "trigger", s.trigger_covariate, where);
  read(j, "threshold", s.threshold, where);
  read(j, "mask_probability", s.mask_probability, where);
  if (!(s.mask_probability >= 0.0 && s.mask_probability <= 1.0)) {
    throw ConfigError("scenarios[].mask_probability must lie in [0, 1]");
  }
  return s;
}

ImputerEntry parse_imputer(const json& j) {
  const std::string where = "imputers[]";
  check_keys(j, {"name", "strategy", "indicators", "mice_iterations", "mice_draws", "noise",
                 "control_all_groups"},
             where);
  ImputerEntry e;
  std::string strategy;
  read(j, "strategy", strategy, where);
  e.spec.strategy = parse_strategy(strategy);
  read(j, "indicators", e.spec.append_indicators, where);
  read(j, "mice_iterations", e.spec.mice_iterations, where);
  read(j, "mice_draws", e.spec.mice_draws, where);
  read(j, "noise", e.spec.noise_draws, where);
  read(j, "control_all_groups", e.spec.control_all_groups, where);
  e.name = std::string(strategy_name(e.spec.strategy)) + (e.spec.append_indicators ? "+indicators" : "");
  read(j, "name", e.name, where);
  e.spec.validate();
  return e;
}

LogisticSpec parse_model(const json& j) {
  const std::string where = "model";
  check_keys(j, {"penalty", "penalty_grid", "max_iterations", "tolerance", "fit_intercept",
                 "standardise"},
             where);
  LogisticSpec m;
  if (j.contains("penalty")) {
    if (j.at("penalty").is_null()) m.fixed_penalty.reset();
    else m.fixed_penalty = j.at("penalty").get<double>();
  }
  read(j, "penalty_grid", m.penalty_grid, where);
  read(j, "max_iterations", m.max_iterations, where);
  read(j, "tolerance", m.tolerance, where);
  read(j, "fit_intercept", m.fit_intercept, where);
  read(j, "standardise", m.standardise, where);
  m.validate();
  return m;
}

RegionScanSpec parse_region(const json& j) {
  const std::string where = "region_scan";
  check_keys(j, {"observed_mean_g", "observed_mean_ng", "ratio", "alpha_g", "alpha_ng", "sigma_g",
                 "sigma_ng", "unobserved_variance", "rho_min", "rho_max", "steps"},
             where);
  RegionScanSpec r;
  read(j, "observed_mean_g", r.observed_mean_g, where);
  read(j, "observed_mean_ng", r.observed_mean_ng, where);
  read(j, "ratio", r.ratio, where);
  read(j, "alpha_g", r.alpha_g, where);
  read(j, "alpha_ng", r.alpha_ng, where);
  read(j, "sigma_g", r.sigma_g, where);
  read(j, "sigma_ng", r.sigma_ng, where);
  read(j, "unobserved_variance", r.unobserved_variance, where);
  read(j, "rho_min", r.rho_min, where);
  read(j, "rho_max", r.rho_max, where);
  read(j, "steps", r.steps, where);
  return r;
}

TheoremSuiteConfig parse_theorems(const json& j) {
  const std::string where = "theorems";
  check_keys(j, {"monte_carlo_cases", "monte_carlo_samples", "monte_carlo_tolerance",
                 "equivalence_inputs", "sign_cases_per_side"},
             where);
  TheoremSuiteConfig t;
  read(j, "monte_carlo_cases", t.monte_carlo_cases, where);
  read(j, "monte_carlo_samples", t.monte_carlo_samples, where);
  read(j, "monte_carlo_tolerance", t.monte_carlo_tolerance, where);
  read(j, "equivalence_inputs", t.equivalence_inputs, where);
  read(j, "sign_cases_per_side", t.sign_cases_per_side, where);
  return t;
}

}  // namespace

std::string_view metric_name(MetricKind m) {
  switch (m) {
    case MetricKind::kReconstruction:
      return "reconstruction_error";
    case MetricKind::kAuc:
      return "auc";
    case MetricKind::kFnr:
      return "fnr";
    case MetricKind::kPrioritisation:
      return "prioritisation";
  }
  return "?";
}

MetricKind parse_metric(std::string_view name) {
  for (auto m : {MetricKind::kReconstruction, MetricKind::kAuc, MetricKind::kFnr,
                 MetricKind::kPrioritisation}) {
    if (metric_name(m) == name) return m;
  }
  throw ConfigError("unknown metric '" + std::string(name) + "'");
}

void ExperimentConfig::validate_simulation() const {
  if (!population) throw ConfigError("simulate: config needs a population section");
  if (scenarios.empty()) throw ConfigError("simulate: at least one scenario is required");
  if (imputers.empty()) throw ConfigError("at least one imputer is required");
  if (metrics.empty()) throw ConfigError("at least one metric is required");
  if (repetitions < 1) throw ConfigError("repetitions must be >= 1");
  for (double c : capacities) {
    if (!(c > 0.0 && c <= 1.0)) throw ConfigError("capacities must lie in (0, 1]");
  }
  for (const auto& s : scenarios) {
    const std::size_t d = population->dimension();
    if (s.target_covariate >= d || s.trigger_covariate >= d) {
      throw ConfigError("scenario covariate index out of range for a " + std::to_string(d) +
                        "-dimensional population");
    }
  }
  split.validate();
  model.validate();
}

void ExperimentConfig::validate_csv_audit() const {
  if (!csv) throw ConfigError("audit-csv: config needs a csv section");
  if (imputers.empty()) throw ConfigError("at least one imputer is required");
  if (metrics.empty()) throw ConfigError("at least one metric is required");
  if (bootstrap_resamples < 1) throw ConfigError("bootstrap must be >= 1");
  for (double c : capacities) {
    if (!(c > 0.0 && c <= 1.0)) throw ConfigError("capacities must lie in (0, 1]");
  }
  split.validate();
  model.validate();
}

ExperimentConfig parse_config(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  check_keys(j, {"seed", "output", "threads", "population", "csv", "scenarios", "imputers", "model",
                 "metrics", "capacities", "repetitions", "bootstrap", "split", "fit_on_all",
                 "reconstruction_rows", "region_scan", "theorems"},
             "config");
  ExperimentConfig c;
  read(j, "seed", c.seed, "config");
  std::string out;
  read(j, "output", out, "config");
  if (!out.empty()) c.output_dir = out;
  read(j, "threads", c.threads, "config");
  if (j.contains("population")) c.population = parse_population(j.at("population"));
  if (j.contains("csv")) c.csv = parse_csv(j.at("csv"));
  if (j.contains("scenarios")) {
    for (const auto& s : j.at("scenarios")) c.scenarios.push_back(parse_scenario_entry(s));
  }
  if (j.contains("imputers")) {
    std::set<std::string> names;
    for (const auto& i : j.at("imputers")) {
      c.imputers.push_back(parse_imputer(i));
      if (!names.insert(c.imputers.back().name).second) {
        throw ConfigError("duplicate imputer name '" + c.imputers.back().name + "'");
      }
    }
  }
  if (j.contains("model")) c.model = parse_model(j.at("model"));
  if (j.contains("metrics")) {
    for (const auto& m : j.at("metrics")) c.metrics.push_back(parse_metric(m.get<std::string>()));
  } else {
    c.metrics = {MetricKind::kReconstruction, MetricKind::kAuc, MetricKind::kFnr,
                 MetricKind::kPrioritisation};
  }
  read(j, "capacities", c.capacities, "config");
  read(j, "repetitions", c.repetitions, "config");
  read(j, "bootstrap", c.bootstrap_resamples, "config");
  if (j.contains("split")) {
    const auto& s = j.at("split");
    check_keys(s, {"train", "tune", "test"}, "split");
    read(s, "train", c.split.train_fraction, "split");
    read(s, "tune", c.split.tune_fraction, "split");
    read(s, "test", c.split.test_fraction, "split");
    c.split.validate();
  }
  read(j, "fit_on_all", c.fit_on_all, "config");
  if (j.contains("reconstruction_rows")) {
    const std::string r = j.at("reconstruction_rows").get<std::string>();
    if (r == "cohort") c.reconstruction_rows = ReconstructionRows::kCohort;
    else if (r == "test") c.reconstruction_rows = ReconstructionRows::kTest;
    else throw ConfigError("reconstruction_rows must be 'cohort' or 'test'");
  }
  if (j.contains("region_scan")) c.region_scan = parse_region(j.at("region_scan"));
  if (j.contains("theorems")) c.theorems = parse_theorems(j.at("theorems"));
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  ExperimentConfig c = parse_config(ss.str());
  if (c.csv && c.csv->path.is_relative()) c.csv->path = path.parent_path() / c.csv->path;
  return c;
}

std::string config_to_json(const ExperimentConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["output"] = c.output_dir.string();
  if (c.population) {
    const auto& p = *c.population;
    j["population"] = {{"n_majority", p.n_majority},
                       {"n_marginalised", p.n_marginalised},
                       {"prevalence_majority", p.prevalence_majority},
                       {"prevalence_marginalised", p.prevalence_marginalised},
                       {"negative", cluster_json(p.negative_cluster)},
                       {"positive_majority", cluster_json(p.positive_majority_cluster)},
                       {"positive_marginalised", cluster_json(p.positive_marginalised_cluster)},
                       {"correlate_x2_with_x1", p.correlate_x2_with_x1}};
  }
  if (c.csv) {
    json aux = json::array();
    for (const auto& a : c.csv->auxiliary_groups) aux.push_back(binary_column_json(a));
    j["csv"] = {{"path", c.csv->path.string()},
                {"group", binary_column_json(c.csv->group)},
                {"outcome", binary_column_json(c.csv->outcome)},
                {"auxiliary_groups", aux},
                {"covariates", c.csv->covariates}};
  }
  json scenarios = json::array();
  for (const auto& s : c.scenarios) {
    scenarios.push_back({{"name", scenario_name(s.scenario)},
                         {"target", s.target_covariate},
                         {"trigger", s.trigger_covariate},
                         {"threshold", s.threshold},
                         {"mask_probability", s.mask_probability}});
  }
  j["scenarios"] = scenarios;
  json imputers = json::array();
  for (const auto& i : c.imputers) {
    imputers.push_back({{"name", i.name},
                        {"strategy", strategy_name(i.spec.strategy)},
                        {"indicators", i.spec.append_indicators},
                        {"mice_iterations", i.spec.mice_iterations},
                        {"mice_draws", i.spec.mice_draws},
                        {"noise", i.spec.noise_draws},
                        {"control_all_groups", i.spec.control_all_groups}});
  }
  j["imputers"] = imputers;
  j["model"] = {{"penalty", c.model.fixed_penalty ? json(*c.model.fixed_penalty) : json(nullptr)},
                {"penalty_grid", c.model.penalty_grid},
                {"max_iterations", c.model.max_iterations},
                {"tolerance", c.model.tolerance},
                {"fit_intercept", c.model.fit_intercept},
                {"standardise", c.model.standardise}};
  json metrics = json::array();
  for (auto m : c.metrics) metrics.push_back(metric_name(m));
  j["metrics"] = metrics;
  j["capacities"] = c.capacities;
  j["repetitions"] = c.repetitions;
  j["bootstrap"] = c.bootstrap_resamples;
  j["split"] = {{"train", c.split.train_fraction},
                {"tune", c.split.tune_fraction},
                {"test", c.split.test_fraction}};
  j["fit_on_all"] = c.fit_on_all;
  j["reconstruction_rows"] = c.reconstruction_rows == ReconstructionRows::kCohort ? "cohort" : "test";
  const auto& r = c.region_scan;
  j["region_scan"] = {{"observed_mean_g", r.observed_mean_g},
                      {"observed_mean_ng", r.observed_mean_ng},
                      {"ratio", r.ratio},
                      {"alpha_g", r.alpha_g},
                      {"alpha_ng", r.alpha_ng},
                      {"sigma_g", r.sigma_g},
                      {"sigma_ng", r.sigma_ng},
                      {"unobserved_variance", r.unobserved_variance},
                      {"rho_min", r.rho_min},
                      {"rho_max", r.rho_max},
                      {"steps", r.steps}};
  const auto& t = c.theorems;
  j["theorems"] = {{"monte_carlo_cases", t.monte_carlo_cases},
                   {"monte_carlo_samples", t.monte_carlo_samples},
                   {"monte_carlo_tolerance", t.monte_carlo_tolerance},
                   {"equivalence_inputs", t.equivalence_inputs},
                   {"sign_cases_per_side", t.sign_cases_per_side}};
  return j.dump(2);
}

std::vector<ImputerEntry> default_audit_imputers() {
  std::vector<ImputerEntry> out;
  auto add = [&](std::string name, ImputationStrategy s, bool ind) {
    ImputerEntry e;
    e.name = std::move(name);
    e.spec.strategy = s;
    e.spec.append_indicators = ind;
    out.push_back(e);
  };
  add("Mean", ImputationStrategy::kPopulationMean, false);
  add("GroupMean", ImputationStrategy::kGroupMean, false);
  add("MICE", ImputationStrategy::kMice, false);
  add("GroupMICE", ImputationStrategy::kGroupMice, false);
  add("GroupMICE+indicators", ImputationStrategy::kGroupMice, true);
  return out;
}

}  // namespace fairimpute::harness
