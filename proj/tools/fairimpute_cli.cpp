// fairimpute command-line entry point.
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "fairimpute/errors.hpp"
#include "fairimpute/harness/config.hpp"
#include "fairimpute/harness/csv.hpp"
#include "fairimpute/harness/report.hpp"
#include "fairimpute/harness/runner.hpp"
#include "fairimpute/theory.hpp"

namespace fs = std::filesystem;
using namespace fairimpute;
using namespace fairimpute::harness;

namespace {

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<std::size_t> threads;
  std::optional<std::size_t> repetitions;
};

void add_common(CLI::App* cmd, CommonOptions& o, bool config_required) {
  auto* c = cmd->add_option("--config", o.config, "JSON experiment config");
  if (config_required) c->required()->check(CLI::ExistingFile);
  else c->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "Master seed (overrides config)");
  cmd->add_option("--out", o.out, "Output directory (overrides config and FAIRIMPUTE_OUT_DIR)");
  cmd->add_option("--threads", o.threads, "Worker threads, 0 = all cores");
  cmd->add_option("--repetitions", o.repetitions, "Repetitions (overrides config)")->check(CLI::PositiveNumber);
}

ExperimentConfig resolve(const CommonOptions& o) {
  ExperimentConfig cfg = o.config.empty() ? ExperimentConfig{} : load_config(o.config);
  if (o.seed) cfg.seed = *o.seed;
  if (o.threads) cfg.threads = *o.threads;
  if (o.repetitions) cfg.repetitions = *o.repetitions;
  if (const char* env = std::getenv("FAIRIMPUTE_OUT_DIR"); env && *env) cfg.output_dir = env;
  if (!o.out.empty()) cfg.output_dir = o.out;
  return cfg;
}

int report_failures(const std::vector<std::string>& failures, const std::vector<GapViolation>& gaps) {
  for (const auto& g : gaps) {
    std::cerr << "gap audit: report row " << g.row << " gap " << format_double(g.gap)
              << " != marginalised - rest " << format_double(g.recomputed) << '\n';
  }
  if (!failures.empty()) {
    std::cerr << failures.size() << " cell(s) failed:\n";
    for (const auto& f : failures) std::cerr << "  " << f << '\n';
  }
  return failures.empty() && gaps.empty() ? 0 : 1;
}

int cmd_simulate(const CommonOptions& o) {
  const ExperimentConfig cfg = resolve(o);
  const SimulationResult res = run_simulation(cfg);
  write_text(cfg.output_dir / "report.csv", report_csv(res.rows));
  write_text(cfg.output_dir / "repetitions.csv", repetitions_csv(res.repetitions));
  write_text(cfg.output_dir / "manifest.json",
             manifest_json(cfg, "simulate", {"report.csv", "repetitions.csv"}));
  std::cout << "wrote " << res.rows.size() << " report rows to " << (cfg.output_dir / "report.csv").string()
            << '\n';
  return report_failures(res.failures, audit_gaps(res.rows));
}

int cmd_audit(const CommonOptions& o) {
  const ExperimentConfig cfg = resolve(o);
  const AuditResult res = run_csv_audit(cfg);
  write_text(cfg.output_dir / "report.csv", report_csv(res.rows));
  write_text(cfg.output_dir / "manifest.json", manifest_json(cfg, "audit-csv", {"report.csv"}));
  std::cout << "wrote " << res.rows.size() << " report rows to " << (cfg.output_dir / "report.csv").string()
            << '\n';
  return report_failures(res.failures, audit_gaps(res.rows));
}

int cmd_region(const CommonOptions& o) {
  const ExperimentConfig cfg = resolve(o);
  const auto cells = region_scan(cfg.region_scan);
  write_text(cfg.output_dir / "region_scan.csv", region_scan_csv(cells));
  write_text(cfg.output_dir / "manifest.json", manifest_json(cfg, "region-scan", {"region_scan.csv"}));
  std::size_t infeasible = 0;
  for (const auto& c : cells) infeasible += !c.feasible;
  std::cout << "wrote " << cells.size() << " cells (" << infeasible << " infeasible) to "
            << (cfg.output_dir / "region_scan.csv").string() << '\n';
  return 0;
}

int cmd_theorems(const CommonOptions& o) {
  const ExperimentConfig cfg = resolve(o);
  const TheoremSuiteResult res = run_theorem_validation(cfg);
  write_text(cfg.output_dir / "theorem_checks.csv", theorem_checks_csv(res.checks));
  write_text(cfg.output_dir / "manifest.json",
             manifest_json(cfg, "validate-theorems", {"theorem_checks.csv"}));
  std::size_t failed = 0;
  for (const auto& c : res.checks) {
    if (!c.pass) {
      ++failed;
      std::cerr << "FAIL " << c.check << " case " << c.case_index << ": value " << format_double(c.value)
                << " reference " << format_double(c.reference) << '\n';
    }
  }
  std::cout << res.checks.size() - failed << "/" << res.checks.size() << " theorem checks passed\n";
  return failed == 0 ? 0 : 1;
}

int cmd_generate(const StandinSpec& spec, const std::string& out_opt, std::size_t bootstrap) {
  fs::path out = out_opt;
  if (out.empty()) {
    const char* env = std::getenv("FAIRIMPUTE_OUT_DIR");
    out = env && *env ? env : "fairimpute-out";
  }
  fs::create_directories(out);
  const CsvSource src = write_standin_csv(spec, out / "standin.csv");
  ExperimentConfig cfg;
  cfg.seed = spec.seed;
  cfg.csv = src;
  cfg.csv->path = "standin.csv";
  cfg.imputers = default_audit_imputers();
  cfg.metrics = {MetricKind::kAuc, MetricKind::kFnr, MetricKind::kPrioritisation};
  cfg.split = {0.8, 0.1, 0.1, 0};
  cfg.model.fixed_penalty.reset();
  cfg.bootstrap_resamples = bootstrap;
  cfg.output_dir = "audit";
  write_text(out / "audit_config.json", config_to_json(cfg) + "\n");
  std::cout << "wrote " << (out / "standin.csv").string() << " and " << (out / "audit_config.json").string()
            << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulate clinical missingness, compare imputation strategies and audit group fairness gaps"};
  app.require_subcommand(1);

  CommonOptions sim_o, audit_o, region_o, thm_o;
  auto* sim = app.add_subcommand("simulate", "Run a configured simulation grid");
  add_common(sim, sim_o, true);
  auto* audit = app.add_subcommand("audit-csv", "Audit imputers on a CSV cohort");
  add_common(audit, audit_o, true);
  auto* region = app.add_subcommand("region-scan", "Scan fairness gaps over (rho_g, rho_ng)");
  add_common(region, region_o, false);
  auto* thm = app.add_subcommand("validate-theorems", "Monte Carlo and oracle checks of the closed forms");
  add_common(thm, thm_o, false);

  StandinSpec standin;
  std::string gen_out;
  std::size_t gen_bootstrap = 100;
  auto* gen = app.add_subcommand("generate-csv", "Write a synthetic stand-in cohort and an audit config");
  gen->add_option("--out", gen_out, "Output directory");
  gen->add_option("--seed", standin.seed, "Generator seed");
  gen->add_option("--rows", standin.rows, "Number of rows");
  gen->add_option("--covariates", standin.covariates, "Number of covariates");
  gen->add_option("--informative", standin.informative, "Covariates carrying outcome signal");
  gen->add_option("--marginalised-share", standin.marginalised_share, "Share of marginalised rows");
  gen->add_option("--prevalence", standin.prevalence, "Outcome prevalence");
  gen->add_option("--signal", standin.signal, "Mean shift of informative covariates for positives");
  gen->add_option("--group-shift", standin.group_shift, "Mean shift of informative covariates in the marginalised group");
  gen->add_option("--mask-threshold", standin.mask_threshold, "Self-masking threshold");
  gen->add_option("--mask-probability", standin.mask_probability, "Self-masking probability, marginalised group");
  gen->add_option("--rest-mask-probability", standin.rest_mask_probability, "Self-masking probability, rest");
  gen->add_option("--background-missing", standin.background_missing, "MCAR missing rate on every covariate");
  gen->add_option("--bootstrap", gen_bootstrap, "Bootstrap resamples in the written config");

  CLI11_PARSE(app, argc, argv);
  try {
    if (sim->parsed()) return cmd_simulate(sim_o);
    if (audit->parsed()) return cmd_audit(audit_o);
    if (region->parsed()) return cmd_region(region_o);
    if (thm->parsed()) return cmd_theorems(thm_o);
    if (gen->parsed()) return cmd_generate(standin, gen_out, gen_bootstrap);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
