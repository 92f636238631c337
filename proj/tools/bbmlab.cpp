#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

#include "bbmlab/acceptance.hpp"
#include "bbmlab/experiment.hpp"
#include "bbmlab/kernels.hpp"

using namespace bbmlab;

namespace {

struct CommonArgs {
  std::string config_file;
  std::vector<std::string> overrides;
  double lambda = -1.0, mu0 = -1.0, dt = -1.0;
  std::string grid;  // "length:n"
  std::string out;
  double budget = -1.0;
  int threads = 1;
};

void add_common(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("-c,--config", a.config_file, "flat key=value config file");
  cmd->add_option("-D", a.overrides, "config override key=value (repeatable)");
  cmd->add_option("--lambda", a.lambda, "model parameter in [0, 0.9]");
  cmd->add_option("--mu0", a.mu0, "speed offset in (0, 0.25]");
  cmd->add_option("--grid", a.grid, "grid as length:n (e.g. 512:8192)");
  cmd->add_option("--dt", a.dt, "time step override");
  cmd->add_option("--out", a.out, "output directory");
  cmd->add_option("--budget-seconds", a.budget, "refuse plans beyond this cost");
  cmd->add_option("--threads", a.threads, "worker threads for kernels");
}

ExperimentConfig build_config(const CommonArgs& a, ExperimentKind kind) {
  ExperimentConfig cfg;
  if (!a.config_file.empty()) cfg = ExperimentConfig::from_file(a.config_file);
  cfg.kind = kind;
  for (const auto& kv : a.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("override must be key=value: " + kv);
    cfg.apply_override(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (a.lambda >= 0) cfg.lambda = a.lambda;
  if (a.mu0 > 0) cfg.mu0 = a.mu0;
  if (a.dt > 0) cfg.dt = a.dt;
  if (!a.grid.empty()) {
    const auto colon = a.grid.find(':');
    if (colon == std::string::npos)
      throw std::invalid_argument("--grid expects length:n");
    cfg.length = std::stod(a.grid.substr(0, colon));
    cfg.n = std::stoi(a.grid.substr(colon + 1));
  }
  if (!a.out.empty()) cfg.out_dir = a.out;
  else if (const char* root = std::getenv("BBMLAB_OUT_ROOT"))
    cfg.out_dir = std::string(root) + "/" + kind_to_string(kind);
  if (a.budget > 0) cfg.budget_seconds = a.budget;
  kernels::set_threads(a.threads);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"two-soliton interaction laboratory for the regularized "
               "long-wave equation"};
  app.require_subcommand(1);

  CommonArgs plan_args, run_args, sweep_args;
  std::string run_kind = "collision";

  auto* plan_cmd = app.add_subcommand("plan", "resolve and print the run plan");
  add_common(plan_cmd, plan_args);
  plan_cmd->add_option("--kind", run_kind, "experiment kind");

  auto* run_cmd = app.add_subcommand("run", "execute one experiment");
  add_common(run_cmd, run_args);
  std::string run_kind2 = "collision";
  run_cmd->add_option("--kind", run_kind2, "experiment kind");

  auto* sweep_cmd = app.add_subcommand("sweep", "collision sweep over mu0");
  add_common(sweep_cmd, sweep_args);
  std::string mu0_list;
  sweep_cmd->add_option("--mu0-list", mu0_list, "comma-separated mu0 values");

  auto* verify_cmd = app.add_subcommand("verify", "run the acceptance suite");
  std::vector<int> only;
  verify_cmd->add_option("--only", only, "criteria subset (1..11)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (plan_cmd->parsed()) {
      ExperimentConfig cfg = build_config(plan_args, kind_from_string(run_kind));
      std::cout << plan(cfg).to_json().dump(2) << "\n";
      return 0;
    }
    if (run_cmd->parsed()) {
      ExperimentConfig cfg = build_config(run_args, kind_from_string(run_kind2));
      RunArtifacts art = run(cfg);
      std::cout << art.report.dump(2) << "\n";
      std::cerr << "artifacts written to " << art.out_dir << "\n";
      return 0;
    }
    if (sweep_cmd->parsed()) {
      ExperimentConfig cfg = build_config(sweep_args, ExperimentKind::sweep);
      if (!mu0_list.empty()) cfg.apply_override("mu0_list", mu0_list);
      RunArtifacts art = run(cfg);
      std::cout << art.report.dump(2) << "\n";
      return 0;
    }
    if (verify_cmd->parsed()) {
      auto results = run_acceptance(only);
      int failures = 0;
      for (const auto& r : results) {
        std::cout << format_criterion(r) << "\n";
        if (!r.pass) ++failures;
      }
      return failures == 0 ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
