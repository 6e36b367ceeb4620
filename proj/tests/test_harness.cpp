#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "fairimpute/errors.hpp"
#include "fairimpute/harness/config.hpp"
#include "fairimpute/harness/csv.hpp"
#include "fairimpute/harness/report.hpp"
#include "fairimpute/harness/runner.hpp"

using namespace fairimpute;
using namespace fairimpute::harness;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("fairimpute-test-" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

ExperimentConfig small_simulation() {
  ExperimentConfig c;
  auto pop = paper_base_population();
  pop.n_majority = 3000;
  pop.n_marginalised = 300;
  c.population = pop;
  ScenarioSpec s1;
  s1.target_covariate = 1;
  ScenarioSpec s3 = s1;
  s3.scenario = Scenario::kS3;
  c.scenarios = {s1, s3};
  ImputerSpec mean, gmice;
  gmice.strategy = ImputationStrategy::kGroupMice;
  gmice.mice_draws = 2;
  gmice.mice_iterations = 2;
  c.imputers = {{"Mean", mean}, {"GroupMICE", gmice}};
  c.metrics = {MetricKind::kReconstruction, MetricKind::kAuc, MetricKind::kFnr, MetricKind::kPrioritisation};
  c.repetitions = 4;
  c.seed = 77;
  return c;
}

std::string write_file(const fs::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
  return p.string();
}

CsvSource simple_source(const fs::path& p) {
  CsvSource s;
  s.path = p;
  s.group = {"g", {{"a", 0}, {"b", 1}}};
  s.outcome = {"y", {{"0", 0}, {"1", 1}}};
  return s;
}

}  // namespace

TEST_CASE("csv parsing") {
  const auto t = parse_csv("\xEF\xBB\xBF" "a,b,c\r\n1,\"x,y\",\"he said \"\"hi\"\"\"\r\n2,,3\n");
  CHECK(t.header == std::vector<std::string>{"a", "b", "c"});
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0][1] == "x,y");
  CHECK(t.rows[0][2] == "he said \"hi\"");
  CHECK(t.rows[1][1].empty());
  CHECK_THROWS_AS(parse_csv("a,b\n1\n"), SchemaError);
  CHECK_THROWS_AS(parse_csv(""), SchemaError);
  CHECK(csv_field("x,y") == "\"x,y\"");
  CHECK(csv_field("plain") == "plain");
  CHECK(format_double(0.1) == "0.10000000000000001");
}

TEST_CASE("ingest maps columns and marks empty cells missing") {
  const auto dir = scratch("ingest");
  const auto path = write_file(dir / "d.csv", "x1,g,x2,y\n1.5,a,,1\n,b,2,0\n3,b,4,1\n");
  const auto ing = ingest(simple_source(path));
  CHECK(ing.cohort.covariate_names() == std::vector<std::string>{"x1", "x2"});
  CHECK(ing.cohort.group() == BinaryLabels{0, 1, 1});
  CHECK_FALSE(ing.mask.observed(0, 1));
  CHECK_FALSE(ing.mask.observed(1, 0));
  CHECK(ing.cohort.covariates()(2, 1) == 4.0);
  CHECK_FALSE(ing.masked().ground_truth_known());
  write_file(dir / "bad.csv", "x1,g,y\n1,c,1\n");
  CHECK_THROWS_AS(ingest(simple_source(dir / "bad.csv")), SchemaError);
  write_file(dir / "nan.csv", "x1,g,y\nabc,a,1\n");
  CHECK_THROWS_AS(ingest(simple_source(dir / "nan.csv")), SchemaError);
  auto missing_col = simple_source(path);
  missing_col.covariates = {"x9"};
  CHECK_THROWS_AS(ingest(missing_col), SchemaError);
}

TEST_CASE("config parsing is strict and round-trips") {
  const std::string text = R"({
    "seed": 5, "population": {"preset": "base", "n_majority": 100},
    "scenarios": ["S1", {"name": "S3", "target": 1, "threshold": 0.2, "mask_probability": 0.4}],
    "imputers": [{"name": "m", "strategy": "PopulationMean"},
                 {"name": "g", "strategy": "GroupMICE", "indicators": true, "mice_draws": 3}],
    "model": {"penalty": null, "penalty_grid": [1, 10]},
    "metrics": ["auc", "fnr"], "split": {"train": 0.7, "tune": 0.1, "test": 0.2}
  })";
  const auto c = parse_config(text);
  CHECK(c.population->n_majority == 100);
  CHECK(c.population->n_marginalised == 1000);
  CHECK(c.scenarios.size() == 2);
  CHECK(c.scenarios[1].threshold == 0.2);
  CHECK(c.imputers[1].spec.mice_draws == 3);
  CHECK_FALSE(c.model.fixed_penalty.has_value());
  const auto again = parse_config(config_to_json(c));
  CHECK(config_to_json(again) == config_to_json(c));
  CHECK_THROWS_AS(parse_config(R"({"sead": 1})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"imputers": [{"name": "a", "strategy": "PopulationMean", "colour": 1}]})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"imputers": [{"name": "a", "strategy": "PopulationMean"},
                                                {"name": "a", "strategy": "GroupMean"}]})"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config("{"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"split": {"train": 0.5, "tune": 0.0, "test": 0.2}})"), ConfigError);
}

TEST_CASE("zero imputers fail validation before any work") {
  auto c = small_simulation();
  c.imputers.clear();
  CHECK_THROWS_AS(run_simulation(c), ConfigError);
  c = small_simulation();
  c.scenarios[0].target_covariate = 5;
  CHECK_THROWS_AS(run_simulation(c), ConfigError);
}

TEST_CASE("simulation output is identical across runs and thread counts") {
  auto c = small_simulation();
  c.threads = 1;
  const auto a = run_simulation(c);
  c.threads = 3;
  const auto b = run_simulation(c);
  CHECK(report_csv(a.rows) == report_csv(b.rows));
  CHECK(repetitions_csv(a.repetitions) == repetitions_csv(b.repetitions));
  CHECK(a.failures.empty());
  CHECK(audit_gaps(a.rows).empty());
  // 2 scenarios x 2 imputers x (recon + auc + 3 fnr + 3 prio) x 4 groups
  CHECK(a.rows.size() == 2 * 2 * 8 * 4);
  c.seed = 78;
  CHECK(report_csv(run_simulation(c).rows) != report_csv(a.rows));
}

TEST_CASE("report gap audit catches a wrong sign") {
  auto rows = run_simulation(small_simulation()).rows;
  for (auto& r : rows) {
    if (r.group == "gap" && r.mean) {
      r.mean = -*r.mean;
      break;
    }
  }
  CHECK(audit_gaps(rows).size() == 1);
}

TEST_CASE("csv without missing cells gives identical results for every imputer") {
  const auto dir = scratch("complete");
  StandinSpec s;
  s.rows = 1500;
  s.covariates = 5;
  s.informative = 3;
  s.mask_probability = 0.0;
  s.background_missing = 0.0;
  s.seed = 4;
  ExperimentConfig c;
  c.csv = write_standin_csv(s, dir / "c.csv");
  c.imputers = default_audit_imputers();
  for (auto& i : c.imputers) i.spec.mice_draws = 2;
  c.metrics = {MetricKind::kAuc, MetricKind::kFnr, MetricKind::kPrioritisation};
  c.bootstrap_resamples = 10;
  const auto res = run_csv_audit(c);
  CHECK(res.failures.empty());
  CHECK(audit_gaps(res.rows).empty());
  // Compare each imputer's gap rows against the first imputer's.
  std::map<std::string, double> reference;
  std::size_t compared = 0;
  for (const auto& r : res.rows) {
    if (r.group != "gap" || !r.point) continue;
    const std::string key = r.metric + "/" + (r.threshold ? format_double(*r.threshold) : "");
    auto [it, inserted] = reference.emplace(key, *r.point);
    if (!inserted) {
      CHECK(std::fabs(*r.point - it->second) <= 1e-10);
      ++compared;
    }
  }
  CHECK(compared == 4 * 7);
}

TEST_CASE("entirely missing training covariate is reported by name") {
  const auto dir = scratch("allmissing");
  std::ostringstream text;
  text << "x1,lactate,g,y\n";
  for (int i = 0; i < 60; ++i) text << i << ",," << (i % 3 ? "a" : "b") << ',' << (i % 2) << '\n';
  ExperimentConfig c;
  c.csv = simple_source(write_file(dir / "m.csv", text.str()));
  c.imputers = {{"Mean", ImputerSpec{}}};
  c.metrics = {MetricKind::kAuc};
  CHECK_THROWS_WITH_AS(run_csv_audit(c), doctest::Contains("lactate"), PreconditionError);
}

TEST_CASE("region scan csv") {
  RegionScanSpec one;
  one.steps = 1;
  const auto text = region_scan_csv(region_scan(one));
  CHECK(std::count(text.begin(), text.end(), '\n') == 2);
  CHECK(text.rfind("rho_g,rho_ng,delta_pop,delta_group,diff,t3,dotted,feasible\n", 0) == 0);
  RegionScanSpec wide;
  wide.rho_min = -0.99;
  wide.rho_max = 0.99;
  wide.steps = 3;
  const auto cells = region_scan(wide);
  CHECK_FALSE(cells.front().feasible);
  CHECK(region_scan_csv(cells).find(",0\n") != std::string::npos);
}

TEST_CASE("manifest records the effective configuration") {
  const auto c = small_simulation();
  const auto m = nlohmann::json::parse(manifest_json(c, "simulate", {"report.csv"}));
  CHECK(m.at("command") == "simulate");
  CHECK(m.at("seed") == 77);
  CHECK(m.at("files") == nlohmann::json::array({"report.csv"}));
  const auto restored = parse_config(m.at("config").dump());
  CHECK(config_to_json(restored) == config_to_json(c));
  auto moved = c;
  moved.output_dir = "elsewhere";
  CHECK(nlohmann::json::parse(manifest_json(moved, "simulate", {})).at("config_hash") == m.at("config_hash"));
  CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
}

TEST_CASE("theorem suite passes on a reduced budget") {
  ExperimentConfig c;
  c.theorems.monte_carlo_cases = 3;
  c.theorems.monte_carlo_samples = 400000;
  c.theorems.monte_carlo_tolerance = 0.03;
  c.theorems.equivalence_inputs = 500;
  c.theorems.sign_cases_per_side = 2;
  c.seed = 3;
  const auto r = run_theorem_validation(c);
  for (const auto& chk : r.checks) {
    CAPTURE(chk.check);
    CHECK(chk.pass);
  }
  CHECK(r.passed());
}
