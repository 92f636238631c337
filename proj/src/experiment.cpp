#include "bbmlab/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace bbmlab {

ExperimentKind kind_from_string(const std::string& s) {
  if (s == "identities") return ExperimentKind::identities;
  if (s == "profiles") return ExperimentKind::profiles;
  if (s == "single_soliton") return ExperimentKind::single_soliton;
  if (s == "collision") return ExperimentKind::collision;
  if (s == "ode_compare") return ExperimentKind::ode_compare;
  if (s == "sweep") return ExperimentKind::sweep;
  throw std::invalid_argument("unknown experiment kind: " + s);
}

std::string kind_to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::identities: return "identities";
    case ExperimentKind::profiles: return "profiles";
    case ExperimentKind::single_soliton: return "single_soliton";
    case ExperimentKind::collision: return "collision";
    case ExperimentKind::ode_compare: return "ode_compare";
    case ExperimentKind::sweep: return "sweep";
  }
  return "?";
}

void ExperimentConfig::validate() const {
  if (!(mu0 > 0.0 && mu0 <= 0.25))
    throw std::invalid_argument("ExperimentConfig: mu0 in (0, 0.25]");
  if (!(lambda >= 0.0 && lambda <= 0.9))
    throw std::invalid_argument("ExperimentConfig: lambda in [0, 0.9]");
  for (double m : mu0_list)
    if (!(m > 0.0 && m <= 0.25))
      throw std::invalid_argument("ExperimentConfig: sweep mu0 in (0, 0.25]");
  if (n != 0 && (n < 0 || n % 2 != 0))
    throw std::invalid_argument("ExperimentConfig: n must be even");
}

json ExperimentConfig::to_json() const {
  json j;
  j["kind"] = kind_to_string(kind);
  j["lambda"] = lambda;
  j["mu0"] = mu0;
  j["mu0_list"] = mu0_list;
  j["length"] = length;
  j["n"] = n;
  j["dt"] = dt;
  j["t_start"] = t_start;
  j["t_final"] = t_final;
  j["auto_time"] = auto_time;
  j["start_gap"] = start_gap;
  j["end_gap"] = end_gap;
  j["out_dir"] = out_dir;
  j["budget_seconds"] = budget_seconds;
  return j;
}

void ExperimentConfig::apply_override(const std::string& key,
                                      const std::string& value) {
  auto list_of = [&]() {
    std::vector<double> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
    return out;
  };
  if (key == "kind") kind = kind_from_string(value);
  else if (key == "lambda") lambda = std::stod(value);
  else if (key == "mu0") mu0 = std::stod(value);
  else if (key == "mu0_list") mu0_list = list_of();
  else if (key == "length") length = std::stod(value);
  else if (key == "n") n = std::stoi(value);
  else if (key == "dt") dt = std::stod(value);
  else if (key == "t_start") { t_start = std::stod(value); auto_time = false; }
  else if (key == "t_final") { t_final = std::stod(value); auto_time = false; }
  else if (key == "start_gap") start_gap = std::stod(value);
  else if (key == "end_gap") end_gap = std::stod(value);
  else if (key == "out") out_dir = value;
  else if (key == "budget_seconds") budget_seconds = std::stod(value);
  else throw std::invalid_argument("unknown config key: " + key);
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  ExperimentConfig cfg;
  std::istringstream in(read_text_file(path));
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!key.empty()) cfg.apply_override(key, value);
  }
  return cfg;
}

json ResolvedPlan::to_json() const {
  json j;
  j["Y0"] = Y0;
  j["t_start"] = t_start;
  j["t_final"] = t_final;
  j["length"] = length;
  j["n"] = n;
  j["dt"] = dt;
  j["snap_stride"] = snap_stride;
  j["est_cost_seconds"] = est_cost_seconds;
  j["prep_gap"] = prep_gap;
  return j;
}

ResolvedPlan plan(const ExperimentConfig& cfg) {
  cfg.validate();
  ResolvedPlan p;
  const double alpha = alpha_closed_form(cfg.lambda);
  p.Y0 = separation_apex(cfg.mu0, alpha);

  if (cfg.auto_time) {
    p.t_start = -std::acosh(std::exp(0.5 * cfg.start_gap)) / cfg.mu0;
    p.t_final = std::acosh(std::exp(0.5 * cfg.end_gap)) / cfg.mu0;
  } else {
    p.t_start = cfg.t_start;
    p.t_final = cfg.t_final;
  }
  p.prep_gap = std::exp(-cfg.start_gap);

  const double sep_max = p.Y0 + std::max(cfg.start_gap, cfg.end_gap);
  double length = std::max(512.0, 4.0 * sep_max + 80.0);
  if (cfg.length > 0) length = cfg.length;
  int n = 512;
  while (length / n > 0.0625) n *= 2;
  if (cfg.n > 0) n = cfg.n;
  p.length = length;
  p.n = n;

  double dt = 0.0025;
  if (cfg.lambda > 0.0) {
    double wmax = 0.0;
    for (int m2 = 0; m2 <= n / 2; ++m2)
      wmax = std::max(wmax, std::abs(linear_symbol(wavenumber(m2, length), cfg.lambda)));
    dt = std::min(dt, 1.0 / wmax);
  }
  if (cfg.dt > 0) dt = cfg.dt;
  p.dt = dt;

  const double snap_dt = std::min(0.5, 0.1 / cfg.mu0);
  p.snap_stride = std::max(1, (int)std::floor(snap_dt / dt + 0.5));

  const double steps = (p.t_final - p.t_start) / dt;
  p.est_cost_seconds = steps * n * std::log2((double)n) * 6e-9;
  if (p.est_cost_seconds > cfg.budget_seconds) {
    std::ostringstream msg;
    msg << "plan exceeds budget: estimated " << p.est_cost_seconds
        << " s > budget " << cfg.budget_seconds
        << " s (binding constraint: " << steps << " steps of n=" << n
        << " transforms; lower end_gap/start_gap or raise dt)";
    throw std::runtime_error(msg.str());
  }
  return p;
}

CollisionOutcome run_collision(const ExperimentConfig& cfg,
                               const ProfileFamily& fam) {
  CollisionOutcome out;
  out.plan = plan(cfg);
  const ResolvedPlan& pl = out.plan;
  const ModelParams m{cfg.lambda};

  EvolverConfig ecfg;
  ecfg.model = m;
  ecfg.length = pl.length;
  ecfg.n = pl.n;
  ecfg.dt = pl.dt;
  ecfg.scheme = EvolverConfig::default_scheme(cfg.lambda);

  // symmetric well-separated pair on the incoming branch of the closed law
  const ReducedState rs = closed_separation(pl.t_start, pl.Y0, cfg.mu0);
  PairParams g0;
  g0.mu1 = 0.5 * rs.dY;
  g0.mu2 = -0.5 * rs.dY;
  g0.y1 = 0.5 * rs.Y;
  g0.y2 = -0.5 * rs.Y;
  GridFunction u0(pl.length, pl.n);
  {
    const SolitonParams p1{g0.mu1, g0.y1}, p2{g0.mu2, g0.y2};
    for (int i = 0; i < pl.n; ++i)
      u0.v[i] = soliton_profile(p1, m, u0.x(i)) + soliton_profile(p2, m, u0.x(i));
  }
  // preparation error: distance to the corrected ansatz at the same state
  double prep_error = 0.0;
  {
    AnsatzState st{g0, pl.Y0};
    GridFunction v0 = ansatz_cut_grid(fam, st, u0, false);
    prep_error = h1_norm(u0 - v0);
  }

  BbmEvolver ev(ecfg);
  ev.set_state(u0, pl.t_start);
  std::vector<double> times;
  std::vector<GridFunction> snaps;
  ConservationReport cons;
  ev.evolve(pl.t_final,
            [&](double t, const GridFunction& u) {
              times.push_back(t);
              snaps.push_back(u);
              cons.update(u, m);
            },
            pl.snap_stride);

  out.track = track(times, snaps, fam, pl.Y0, g0);
  out.report = defect_report(times, snaps, fam, pl.Y0, out.track, cons,
                             prep_error, ev.flags().seam_warning);
  return out;
}

namespace {

json run_identities(const ExperimentConfig& cfg) {
  json rep;
  rep["kind"] = "identities";
  json per_lambda = json::array();
  double worst = 0.0;
  for (double l : {0.0, 0.25, 0.5, 0.75}) {
    IdentityReport ir = identity_suite(ModelParams{l});
    json jl;
    jl["lambda"] = l;
    jl["max_deviation"] = ir.max_deviation;
    json items = json::array();
    for (const auto& it : ir.items)
      items.push_back({{"name", it.name}, {"deviation", it.deviation}});
    jl["items"] = items;
    per_lambda.push_back(jl);
    worst = std::max(worst, ir.max_deviation);
  }
  rep["per_lambda"] = per_lambda;
  rep["max_deviation"] = worst;
  rep["pass"] = worst < 1e-8;
  return rep;
}

json run_profiles(const ExperimentConfig& cfg, json* constants_out) {
  ProfileFamily fam = build_family(cfg.lambda);
  if (constants_out) *constants_out = fam.to_json();
  json rep;
  rep["kind"] = "profiles";
  rep["lambda"] = cfg.lambda;
  rep["alpha"] = fam.alpha;
  rep["beta"] = fam.beta;
  rep["delta"] = fam.delta;
  rep["a"] = fam.a;
  rep["b1"] = fam.b1;
  rep["b2"] = fam.b2;
  rep["d1"] = fam.d1;
  rep["d2"] = fam.d2;
  rep["theta"] = fam.theta;
  rep["theta_A"] = fam.theta_A;
  rep["theta_B"] = fam.theta_B;
  rep["theta_D"] = fam.theta_D;
  rep["alpha_dev"] = std::abs(fam.recovery.alpha_quad - fam.recovery.alpha_closed);
  rep["theta_A_dev"] =
      std::abs(fam.recovery.theta_A_quad - fam.recovery.theta_A_closed);
  rep["beta_dev"] = std::abs(fam.recovery.beta_quad - fam.recovery.beta_closed);
  rep["theta_B_dev"] =
      std::abs(fam.recovery.theta_B_quad - fam.recovery.theta_B_closed);
  rep["b_diff"] = fam.b1 - fam.b2;
  rep["b_diff_pairing"] = fam.recovery.b_diff_pairing;
  rep["d_diff"] = fam.d1 - fam.d2;
  rep["d_diff_pairing"] = fam.recovery.d_diff_pairing;
  rep["ortho_max"] = fam.recovery.ortho_max;
  rep["eq_residual_max"] = fam.recovery.eq_residual_max;
  rep["source_antisym_max"] = fam.recovery.source_antisym_max;
  rep["mirror_dev"] = fam.recovery.mirror_dev;
  return rep;
}

json run_single_soliton(const ExperimentConfig& cfg) {
  const ModelParams m{cfg.lambda};
  const double mu = cfg.mu0;
  EvolverConfig ecfg;
  ecfg.model = m;
  ecfg.length = cfg.length > 0 ? cfg.length : 256.0;
  ecfg.n = cfg.n > 0 ? cfg.n : 4096;
  ecfg.dt = cfg.dt > 0 ? cfg.dt : 0.0025;
  ecfg.scheme = EvolverConfig::default_scheme(cfg.lambda);
  const double T = cfg.auto_time ? 50.0 : (cfg.t_final - cfg.t_start);
  const double y0 = -0.5 * mu * T;

  GridFunction u0(ecfg.length, ecfg.n);
  const SolitonParams p0{mu, y0};
  for (int i = 0; i < ecfg.n; ++i) u0.v[i] = soliton_profile(p0, m, u0.x(i));

  BbmEvolver ev(ecfg);
  ev.set_state(u0, 0.0);
  ConservationReport cons;
  ev.evolve(T, [&](double, const GridFunction& u) { cons.update(u, m); },
            (int)std::round(1.0 / ecfg.dt));
  GridFunction uT = ev.state();

  // recenter by a one-parameter fit of the translation
  double yc = y0 + mu * T;
  {
    GridFunction w(uT.length, uT.n);
    for (int it = 0; it < 40; ++it) {
      const SolitonParams pc{mu, yc};
      double f = 0.0, df = 0.0;
      GridFunction r(uT.length, uT.n);
      for (int i = 0; i < uT.n; ++i) {
        const double x = uT.x(i);
        const double dq = soliton_profile_dx(pc, m, x);
        const double ddq = soliton_profile_dxx(pc, m, x);
        const double diff = uT.v[i] - soliton_profile(pc, m, x);
        f += diff * dq;
        df += dq * dq - diff * ddq;
      }
      const double step = f / df;
      yc -= step;
      if (std::abs(step) < 1e-14) break;
    }
  }
  GridFunction diff(uT.length, uT.n);
  const SolitonParams pc{mu, yc};
  for (int i = 0; i < uT.n; ++i)
    diff.v[i] = uT.v[i] - soliton_profile(pc, m, uT.x(i));

  json rep;
  rep["kind"] = "single_soliton";
  rep["lambda"] = cfg.lambda;
  rep["mu"] = mu;
  rep["T"] = T;
  rep["shape_error_l2"] = l2_norm(diff);
  rep["measured_speed"] = (yc - y0) / T;
  rep["speed_error"] = std::abs((yc - y0) / T - mu);
  rep["rel_mass_drift"] = cons.max_rel_mass_drift;
  rep["rel_energy_drift"] = cons.max_rel_energy_drift;
  rep["resolved"] = is_resolved(uT, 1e-8);
  return rep;
}

json run_ode_compare(const ExperimentConfig& cfg) {
  const double alpha = alpha_closed_form(cfg.lambda);
  ProfileFamily fam = build_family(cfg.lambda);
  json rep;
  rep["kind"] = "ode_compare";
  rep["lambda"] = cfg.lambda;
  json sweeps = json::array();
  double prev_err = -1.0;
  bool monotone = true;
  for (double mu0 : cfg.mu0_list) {
    const double Y0 = separation_apex(mu0, alpha);
    const double t_span = 6.0 / mu0;
    const double dt = std::min(0.01 / mu0, 0.05);
    FullParamState s0{0.0, 0.0, 0.5 * Y0, -0.5 * Y0};
    Trajectory tr =
        integrate_full(s0, fam.ode_coefficients(), 0.0, t_span, dt, 10);
    double err = 0.0;
    for (std::size_t i = 0; i < tr.t.size(); ++i)
      err = std::max(err, std::abs(tr.state[i].separation() -
                                   closed_separation(tr.t[i], Y0, mu0).Y));
    sweeps.push_back({{"mu0", mu0}, {"sup_error", err}, {"Y0", Y0}});
    if (prev_err >= 0 && err > prev_err) monotone = false;
    prev_err = err;
  }
  rep["sweep"] = sweeps;
  rep["sup_error_monotone_decreasing"] = monotone;
  ReducedTrajectory rt = integrate_reduced(8.0, 0.0, alpha, 0.0, 200.0, 0.01, 50);
  rep["first_integral_drift"] = first_integral_drift(rt, alpha);
  return rep;
}

}  // namespace

RunArtifacts run(const ExperimentConfig& cfg) {
  cfg.validate();
  RunArtifacts art;
  art.out_dir = cfg.out_dir;
  const ResolvedPlan pl = plan(cfg);
  json constants;
  json report;
  std::string series_csv;

  switch (cfg.kind) {
    case ExperimentKind::identities:
      report = run_identities(cfg);
      break;
    case ExperimentKind::profiles:
      report = run_profiles(cfg, &constants);
      break;
    case ExperimentKind::single_soliton:
      report = run_single_soliton(cfg);
      break;
    case ExperimentKind::ode_compare:
      report = run_ode_compare(cfg);
      break;
    case ExperimentKind::collision: {
      ProfileFamily fam = build_family(cfg.lambda);
      constants = fam.to_json();
      CollisionOutcome oc = run_collision(cfg, fam);
      report = oc.report.to_json();
      report["kind"] = "collision";
      series_csv = oc.track.to_csv(oc.plan.Y0, cfg.mu0).to_string();
      break;
    }
    case ExperimentKind::sweep: {
      ProfileFamily fam = build_family(cfg.lambda);
      constants = fam.to_json();
      json runs = json::array();
      std::vector<double> mu0s, defects;
      double prev_gap = -1.0;
      bool gap_shrinks = true;
      for (double mu0 : cfg.mu0_list) {
        ExperimentConfig c1 = cfg;
        c1.mu0 = mu0;
        CollisionOutcome oc = run_collision(c1, fam);
        runs.push_back(oc.report.to_json());
        mu0s.push_back(mu0);
        defects.push_back(oc.report.defect_h1);
        const double gap =
            std::abs(oc.report.min_separation - oc.report.Y0) / oc.report.Y0;
        if (prev_gap >= 0 && gap > prev_gap + 1e-12) gap_shrinks = false;
        prev_gap = gap;
      }
      report["kind"] = "sweep";
      report["lambda"] = cfg.lambda;
      report["runs"] = runs;
      report["defect_loglog_slope"] = loglog_slope(mu0s, defects);
      // mu0_list is descending, so shrinking along the list means the
      // separation gap decreases with mu0
      report["separation_gap_shrinks_with_mu0"] = gap_shrinks;
      break;
    }
  }

  json manifest;
  manifest["schema_version"] = 1;
  manifest["version"] = kVersion;
  manifest["config"] = cfg.to_json();
  manifest["plan"] = pl.to_json();
  const std::string report_s = report.dump(2) + "\n";
  write_text_file(cfg.out_dir + "/report.json", report_s);
  json hashes;
  hashes["report.json"] = content_hash(report_s);
  if (!constants.is_null()) {
    const std::string s = constants.dump(2) + "\n";
    write_text_file(cfg.out_dir + "/constants.json", s);
    hashes["constants.json"] = content_hash(s);
  }
  if (!series_csv.empty()) {
    write_text_file(cfg.out_dir + "/series.csv", series_csv);
    hashes["series.csv"] = content_hash(series_csv);
  }
  manifest["hashes"] = hashes;
  write_text_file(cfg.out_dir + "/manifest.json", manifest.dump(2) + "\n");
  art.report = report;
  art.manifest = manifest;
  return art;
}

double loglog_slope(const std::vector<double>& mu0s,
                    const std::vector<double>& defects) {
  if (mu0s.size() != defects.size() || mu0s.size() < 2)
    throw std::invalid_argument("loglog_slope: need >= 2 points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = (double)mu0s.size();
  for (std::size_t i = 0; i < mu0s.size(); ++i) {
    const double x = std::log(mu0s[i]), y = std::log(defects[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace bbmlab
