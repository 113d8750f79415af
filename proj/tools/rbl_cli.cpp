#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rbl/error.hpp"
#include "rbl/harness.hpp"
#include "rbl/report.hpp"
#include "rbl/scenario_file.hpp"
#include "rbl/validation.hpp"

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

// One line on stderr that scripts can match: error: kind=<kind> message="<json string>"
void print_error(std::string_view kind, const std::string& message) {
  std::cerr << "error: kind=" << kind << " message=" << nlohmann::json(message).dump() << '\n';
}

template <typename T, typename Parse>
std::vector<T> parse_list(const std::string& csv, Parse parse) {
  std::vector<T> out;
  std::size_t start = 0;
  while (start <= csv.size()) {
    const std::size_t end = std::min(csv.find(',', start), csv.size());
    const std::string item = csv.substr(start, end - start);
    if (item.empty()) throw rbl::Error(rbl::ErrorKind::kParse, "empty item in list '" + csv + "'");
    out.push_back(parse(item));
    start = end + 1;
  }
  return out;
}

double parse_sigma(const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw rbl::Error(rbl::ErrorKind::kParse, "bad sigma value '" + s + "'");
}

rbl::Scenario scenario_from(const std::string& path) {
  return path.empty() ? rbl::default_scenario() : rbl::load_scenario(path);
}

struct RunOptions {
  std::string scenario;
  std::string sigma;
  int trials = 1000;
  std::uint64_t seed = 1;
  std::string estimators = "double-gabp,stage-a-gabp,ls-procrustes,genie";
  std::string norm_source = "estimated";
  double rho = 0.5;
  int lambda_max = 100;
  double convergence_tol = 1e-8;
  std::string noise_mode = "per-row";
  std::string layout = "stacked";
  std::string generator;
  double angle_scale = 1.0;
  unsigned threads = 1;
  std::string out = "rbl_out";
};

int cmd_run(const RunOptions& o) {
  rbl::ExperimentConfig cfg;
  cfg.scenario = scenario_from(o.scenario);
  if (!o.generator.empty()) cfg.scenario.generator_mode = rbl::parse_generator_mode(o.generator);
  if (!o.sigma.empty()) {
    cfg.sigmas = parse_list<double>(o.sigma, parse_sigma);
  } else if (!cfg.scenario.sigma_w.empty()) {
    cfg.sigmas = cfg.scenario.sigma_w;
  }
  cfg.trials = o.trials;
  cfg.seed = o.seed;
  cfg.estimators = parse_list<rbl::Estimator>(o.estimators, rbl::parse_estimator);
  cfg.norm_source = rbl::parse_norm_source(o.norm_source);
  cfg.layout = rbl::parse_layout(o.layout);
  cfg.gabp.rho = o.rho;
  cfg.gabp.lambda_max = o.lambda_max;
  cfg.gabp.convergence_tol = o.convergence_tol;
  cfg.gabp.noise_mode = rbl::parse_noise_mode(o.noise_mode);
  cfg.angle_scale = o.angle_scale;
  cfg.threads = o.threads;
  cfg.validate();

  const rbl::RmseReport report = rbl::run_monte_carlo(cfg);
  const rbl::EmittedFiles files = rbl::emit_report(report, o.out);
  std::cout << "csv: " << files.csv.string() << '\n' << "plot: " << files.script.string() << '\n';
  return 0;
}

int cmd_validate(const std::string& scenario, std::uint64_t seed) {
  const std::vector<rbl::CheckResult> results = rbl::run_invariant_suite(scenario_from(scenario), seed);
  int failed = 0;
  for (const rbl::CheckResult& r : results) {
    std::cout << (r.passed ? "[PASS] " : "[FAIL] ") << r.name << ": " << r.detail << '\n';
    failed += r.passed ? 0 : 1;
  }
  std::cout << results.size() - failed << "/" << results.size() << " checks passed\n";
  if (failed > 0) {
    print_error("validation", std::to_string(failed) + " invariant check(s) failed");
    return kExitFailure;
  }
  return 0;
}

int cmd_report(const std::string& csv, const std::string& out) {
  const rbl::RmseReport report = rbl::read_csv(csv);
  const std::filesystem::path dir = out.empty() ? std::filesystem::path(csv).parent_path() : std::filesystem::path(out);
  const std::filesystem::path script = rbl::emit_plot_script(csv, dir);
  std::cout << "rows: " << report.rows.size() << '\n' << "plot: " << script.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rigid body localization from range measurements: Monte-Carlo experiments"};
  app.require_subcommand(1);

  RunOptions run;
  CLI::App* run_cmd = app.add_subcommand("run", "Run the Monte-Carlo RMSE sweep and write a CSV report");
  run_cmd->add_option("--scenario", run.scenario, "Scenario JSON file (default: built-in cube setup)");
  run_cmd->add_option("--sigma", run.sigma, "Comma-separated range error list [m]");
  run_cmd->add_option("--trials", run.trials, "Monte-Carlo trials per sigma")->check(CLI::PositiveNumber);
  run_cmd->add_option("--seed", run.seed, "Base RNG seed");
  run_cmd->add_option("--estimators", run.estimators,
                      "Comma-separated subset of double-gabp,stage-a-gabp,ls-procrustes,genie");
  run_cmd->add_option("--norm-source", run.norm_source, "Squared sensor norms fed to GaBP")
      ->check(CLI::IsMember({"true", "estimated"}));
  run_cmd->add_option("--rho", run.rho, "GaBP damping weight on the previous iterate, in [0, 1)");
  run_cmd->add_option("--lambda-max", run.lambda_max, "GaBP iteration cap per stage");
  run_cmd->add_option("--tol", run.convergence_tol, "GaBP relative convergence threshold");
  run_cmd->add_option("--noise-mode", run.noise_mode, "Composite noise model")
      ->check(CLI::IsMember({"per-row", "scalar"}));
  run_cmd->add_option("--layout", run.layout, "Factor graph over all sensors or one per sensor")
      ->check(CLI::IsMember({"stacked", "per-sensor"}));
  run_cmd->add_option("--generator", run.generator, "Override the scenario's ground-truth generator")
      ->check(CLI::IsMember({"exact-rotation", "small-angle-rotation"}));
  run_cmd->add_option("--angle-scale", run.angle_scale, "Multiplier on every sampled angle");
  run_cmd->add_option("--threads", run.threads, "Worker threads")->check(CLI::PositiveNumber);
  run_cmd->add_option("--out", run.out, "Output directory");

  std::string validate_scenario;
  std::uint64_t validate_seed = 1;
  CLI::App* validate_cmd = app.add_subcommand("validate", "Run the invariant suite on a scenario");
  validate_cmd->add_option("--scenario", validate_scenario, "Scenario JSON file (default: built-in)");
  validate_cmd->add_option("--seed", validate_seed, "RNG seed");

  std::string report_csv;
  std::string report_out;
  CLI::App* report_cmd = app.add_subcommand("report", "Re-render the plot script from a CSV report");
  report_cmd->add_option("--csv", report_csv, "CSV written by 'run'")->required();
  report_cmd->add_option("--out", report_out, "Output directory (default: next to the CSV)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("usage", e.what());
    return kExitUsage;
  }

  try {
    if (*run_cmd) return cmd_run(run);
    if (*validate_cmd) return cmd_validate(validate_scenario, validate_seed);
    if (*report_cmd) return cmd_report(report_csv, report_out);
  } catch (const rbl::Error& e) {
    print_error(rbl::to_string(e.kind()), e.what());
    return kExitFailure;
  } catch (const std::exception& e) {
    print_error("internal", e.what());
    return kExitFailure;
  }
  return kExitUsage;
}
