#pragma once

#include <map>
#include <optional>
#include <string>

#include "bbmlab/modulation.hpp"

namespace bbmlab {

enum class ExperimentKind {
  identities,
  profiles,
  single_soliton,
  collision,
  ode_compare,
  sweep
};

ExperimentKind kind_from_string(const std::string& s);
std::string kind_to_string(ExperimentKind k);

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::identities;
  double lambda = 0.5;
  double mu0 = 0.15;
  std::vector<double> mu0_list = {0.2, 0.15, 0.1};  // sweep only
  // resolution overrides; 0 = auto
  double length = 0.0;
  int n = 0;
  double dt = 0.0;
  double t_start = 0.0, t_final = 0.0;  // used when auto_time = false
  bool auto_time = true;
  double start_gap = 16.0;  // separation above Y0 at t_start
  double end_gap = 22.0;    // separation above Y0 at t_final
  std::string out_dir = "out";
  double budget_seconds = 3600.0;

  void validate() const;
  json to_json() const;
  static ExperimentConfig from_file(const std::string& path);
  void apply_override(const std::string& key, const std::string& value);
};

struct ResolvedPlan {
  double Y0 = 0;
  double t_start = 0, t_final = 0;
  double length = 0;
  int n = 0;
  double dt = 0;
  int snap_stride = 0;
  double est_cost_seconds = 0;
  double prep_gap = 0;  // e^{-(sep(t_start)-Y0)}
  json to_json() const;
};

/// Deterministic run plan; throws with the binding constraint named when
/// the cost estimate exceeds the budget.
ResolvedPlan plan(const ExperimentConfig& cfg);

struct RunArtifacts {
  json report;
  json manifest;
  std::string out_dir;
};

/// Executes the experiment and writes manifest.json, report.json and,
/// where applicable, constants.json and series.csv under cfg.out_dir.
RunArtifacts run(const ExperimentConfig& cfg);

/// In-memory collision pipeline (also used by the acceptance suite).
struct CollisionOutcome {
  CollisionReport report;
  TrackResult track;
  ResolvedPlan plan;
};
CollisionOutcome run_collision(const ExperimentConfig& cfg,
                               const ProfileFamily& fam);

/// Least-squares slope of log(defect) against log(mu0).
double loglog_slope(const std::vector<double>& mu0s,
                    const std::vector<double>& defects);

}  // namespace bbmlab
