#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "bbmlab/experiment.hpp"

using namespace bbmlab;

TEST_CASE("plan derives the apex separation and scales the horizon") {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::collision;
  cfg.lambda = 0.5;
  cfg.mu0 = 0.15;
  ResolvedPlan p = plan(cfg);
  const double alpha = alpha_closed_form(0.5);
  CHECK(p.Y0 == doctest::Approx(std::abs(std::log(0.15 * 0.15 / alpha)))
                    .epsilon(1e-14));
  ExperimentConfig cfg2 = cfg;
  cfg2.mu0 = 0.05;
  ExperimentConfig cfg3 = cfg;
  cfg3.mu0 = 0.1;
  CHECK(plan(cfg2).t_final ==
        doctest::Approx(2.0 * plan(cfg3).t_final).epsilon(1e-12));
  // domain rule of the planner
  CHECK(p.length >= 4.0 * (p.Y0 + cfg.end_gap) + 80.0);
  CHECK(p.length / p.n <= 0.0625);
}

TEST_CASE("plan is deterministic and budget-guarded") {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::collision;
  cfg.lambda = 0.5;
  cfg.mu0 = 0.12;
  const std::string a = plan(cfg).to_json().dump(2);
  const std::string b = plan(cfg).to_json().dump(2);
  CHECK(a == b);
  cfg.budget_seconds = 1e-6;
  try {
    plan(cfg);
    CHECK(false);
  } catch (const std::exception& e) {
    const std::string msg = e.what();
    CHECK(msg.find("budget") != std::string::npos);
    CHECK(msg.find("binding constraint") != std::string::npos);
  }
}

TEST_CASE("config validation and file parsing") {
  ExperimentConfig cfg;
  cfg.mu0 = 0.4;
  CHECK_THROWS(cfg.validate());
  cfg.mu0 = 0.15;
  cfg.lambda = 0.95;
  CHECK_THROWS(cfg.validate());

  write_text_file("cfg_test/exp.cfg",
                  "kind = collision\nlambda = 0.25\nmu0 = 0.2 # comment\n"
                  "out = cfg_test/out\n");
  ExperimentConfig fromf = ExperimentConfig::from_file("cfg_test/exp.cfg");
  CHECK(fromf.kind == ExperimentKind::collision);
  CHECK(fromf.lambda == 0.25);
  CHECK(fromf.mu0 == 0.2);
  CHECK(fromf.out_dir == "cfg_test/out");
  CHECK_THROWS(fromf.apply_override("nonsense", "1"));
}

TEST_CASE("identities experiment writes consistent artifacts") {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::identities;
  cfg.out_dir = "exp_test/identities";
  RunArtifacts art = run(cfg);
  CHECK(art.report.at("pass").get<bool>());
  CHECK(art.report.at("max_deviation").get<double>() < 1e-8);
  // manifest hash matches the bytes on disk
  const std::string bytes = read_text_file(cfg.out_dir + "/report.json");
  CHECK(art.manifest.at("hashes").at("report.json").get<std::string>() ==
        content_hash(bytes));
  // determinism of the report itself
  RunArtifacts art2 = run(cfg);
  CHECK(art2.manifest.at("hashes").at("report.json") ==
        art.manifest.at("hashes").at("report.json"));
}

TEST_CASE("profiles experiment serializes a loadable family") {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::profiles;
  cfg.lambda = 0.5;
  cfg.out_dir = "exp_test/profiles";
  RunArtifacts art = run(cfg);
  CHECK(std::abs(art.report.at("alpha_dev").get<double>()) < 1e-8);
  const json fam_json = json::parse(read_text_file(cfg.out_dir + "/constants.json"));
  ProfileFamily fam = ProfileFamily::from_json(fam_json);
  CHECK(fam.lambda == 0.5);
  CHECK(std::abs(fam.alpha - alpha_closed_form(0.5)) < 1e-8);
}

TEST_CASE("ode_compare experiment") {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::ode_compare;
  cfg.lambda = 0.5;
  cfg.mu0_list = {0.2, 0.1, 0.05};
  cfg.out_dir = "exp_test/ode";
  RunArtifacts art = run(cfg);
  CHECK(art.report.at("sup_error_monotone_decreasing").get<bool>());
  CHECK(art.report.at("first_integral_drift").get<double>() < 1e-10);
}

TEST_CASE("slope fit on synthetic power-law data") {
  std::vector<double> mu0s = {0.2, 0.15, 0.1};
  std::vector<double> defs;
  for (double m : mu0s) defs.push_back(3.7 * std::pow(m, 2.5));
  CHECK(loglog_slope(mu0s, defs) == doctest::Approx(2.5).epsilon(1e-12));
}

TEST_CASE("short collision pipeline end to end") {
  // a light configuration: wider speeds, shorter horizon; exercises the
  // evolve -> track -> defect path without acceptance-size cost
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::collision;
  cfg.lambda = 0.5;
  cfg.mu0 = 0.2;
  cfg.start_gap = 11.0;
  cfg.end_gap = 12.0;
  cfg.dt = 0.005;
  cfg.out_dir = "exp_test/collision";
  RunArtifacts art = run(cfg);
  const json& r = art.report;
  CHECK(r.at("mu_sign_changes").get<int>() == 1);
  CHECK(r.at("min_separation").get<double>() > 0.0);
  const double y0 = r.at("Y0").get<double>();
  CHECK(std::abs(r.at("min_separation").get<double>() - y0) < 0.25 * y0);
  CHECK(r.at("defect_h1").get<double>() > 0.0);
  CHECK(r.at("mu1_plus").get<double>() > 0.0);
  CHECK(r.at("mu2_plus").get<double>() < 0.0);
  CHECK(std::filesystem::exists("exp_test/collision/series.csv"));
  const std::string csv = read_text_file("exp_test/collision/series.csv");
  CHECK(csv.rfind("t,mu1,mu2,y1,y2,Y_closed,separation", 0) == 0);
}
