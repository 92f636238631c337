#include "bbmlab/modulation.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>

#include "bbmlab/linearized.hpp"

namespace bbmlab {

void DiagnosticsConfig::validate() const {
  if (!(rho > 0.0 && rho < 1.0 / 32.0))
    throw std::invalid_argument("DiagnosticsConfig: rho in (0, 1/32)");
}

namespace {

struct ConstraintSet {
  // (1-l dxx) applied to R1, R2, dR1, dR2 plus the Gamma-derivatives of the
  // plain constraint functions, all sampled on the grid
  GridFunction w_r1, w_r2, w_dr1, w_dr2;
  GridFunction lam1, lam2, dlam1, dlam2, ddr1, ddr2;
};

ConstraintSet make_constraints(const GridFunction& proto, const ModelParams& m,
                               const PairParams& g) {
  ConstraintSet cs{proto, proto, proto, proto, proto,
                   proto, proto, proto, proto, proto};
  const SolitonParams p1{g.mu1, g.y1}, p2{g.mu2, g.y2};
  for (int i = 0; i < proto.n; ++i) {
    const double x = proto.x(i);
    cs.w_r1.v[i] = soliton_profile(p1, m, x);
    cs.w_r2.v[i] = soliton_profile(p2, m, x);
    cs.w_dr1.v[i] = soliton_profile_dx(p1, m, x);
    cs.w_dr2.v[i] = soliton_profile_dx(p2, m, x);
    cs.lam1.v[i] = mu_deriv_profile(p1, m, x);
    cs.lam2.v[i] = mu_deriv_profile(p2, m, x);
    cs.dlam1.v[i] = mu_deriv_profile_dx(p1, m, x);
    cs.dlam2.v[i] = mu_deriv_profile_dx(p2, m, x);
    cs.ddr1.v[i] = soliton_profile_dxx(p1, m, x);
    cs.ddr2.v[i] = soliton_profile_dxx(p2, m, x);
  }
  cs.w_r1 = helmholtz_apply(cs.w_r1, m.lambda);
  cs.w_r2 = helmholtz_apply(cs.w_r2, m.lambda);
  cs.w_dr1 = helmholtz_apply(cs.w_dr1, m.lambda);
  cs.w_dr2 = helmholtz_apply(cs.w_dr2, m.lambda);
  return cs;
}

GridFunction ansatz_on(const GridFunction& proto, const ProfileFamily& fam,
                       const PairParams& g, AnsatzKind kind, double Y0) {
  GridFunction v(proto.length, proto.n);
  const ModelParams m{fam.lambda};
  if (kind == AnsatzKind::plain_sum) {
    const SolitonParams p1{g.mu1, g.y1}, p2{g.mu2, g.y2};
    for (int i = 0; i < proto.n; ++i)
      v.v[i] = soliton_profile(p1, m, proto.x(i)) +
               soliton_profile(p2, m, proto.x(i));
  } else {
    AnsatzState s{g, Y0};
    for (int i = 0; i < proto.n; ++i)
      v.v[i] = ansatz_cut(fam, s, proto.x(i), false);
  }
  return v;
}

GridFunction ansatz_dparam_on(const GridFunction& proto, const ProfileFamily& fam,
                              const PairParams& g, AnsatzKind kind, double Y0,
                              int p) {
  GridFunction v(proto.length, proto.n);
  const ModelParams m{fam.lambda};
  if (kind == AnsatzKind::plain_sum) {
    const SolitonParams p1{g.mu1, g.y1}, p2{g.mu2, g.y2};
    for (int i = 0; i < proto.n; ++i) {
      const double x = proto.x(i);
      switch (p) {
        case 0: v.v[i] = mu_deriv_profile(p1, m, x); break;
        case 1: v.v[i] = mu_deriv_profile(p2, m, x); break;
        case 2: v.v[i] = -soliton_profile_dx(p1, m, x); break;
        default: v.v[i] = -soliton_profile_dx(p2, m, x); break;
      }
    }
  } else {
    AnsatzState s{g, Y0};
    for (int i = 0; i < proto.n; ++i)
      v.v[i] = ansatz_cut_dparam(fam, s, p, proto.x(i));
  }
  return v;
}

}  // namespace

DecompositionResult decompose(const GridFunction& u, const ProfileFamily& fam,
                              const PairParams& guess, AnsatzKind kind, double Y0,
                              double tol, int max_iter) {
  const ModelParams m{fam.lambda};
  const double scale = std::max(1.0, l2_norm(u));
  PairParams g = guess;
  GridFunction eps(u.length, u.n);
  std::array<double, 4> res{};
  int iter = 0;
  for (;; ++iter) {
    if (iter >= max_iter)
      throw std::runtime_error(
          "decompose: no convergence (outside modulation neighborhood)");
    if (g.separation() < 2.0)
      throw std::runtime_error("decompose: separation collapsed; fit aborted");
    ConstraintSet cs = make_constraints(u, m, g);
    GridFunction v = ansatz_on(u, fam, g, kind, Y0);
    eps = u - v;
    const GridFunction* ws[4] = {&cs.w_r1, &cs.w_r2, &cs.w_dr1, &cs.w_dr2};
    for (int i = 0; i < 4; ++i) res[i] = inner(eps, *ws[i]);
    double worst = 0.0;
    for (double r : res) worst = std::max(worst, std::abs(r));
    if (worst < tol * scale) break;

    Eigen::Matrix4d J;
    Eigen::Vector4d rhs;
    for (int i = 0; i < 4; ++i) rhs(i) = -res[i];
    for (int p = 0; p < 4; ++p) {
      GridFunction dv = ansatz_dparam_on(u, fam, g, kind, Y0, p);
      for (int i = 0; i < 4; ++i) J(i, p) = -inner(dv, *ws[i]);
    }
    // motion of the constraint functions themselves
    const double l = m.lambda;
    auto helm_inner = [&](const GridFunction& f) {
      return inner(eps, helmholtz_apply(f, l));
    };
    J(0, 0) += helm_inner(cs.lam1);
    J(0, 2) += -inner(eps, cs.w_dr1);
    J(1, 1) += helm_inner(cs.lam2);
    J(1, 3) += -inner(eps, cs.w_dr2);
    J(2, 0) += helm_inner(cs.dlam1);
    J(2, 2) += -helm_inner(cs.ddr1);
    J(3, 1) += helm_inner(cs.dlam2);
    J(3, 3) += -helm_inner(cs.ddr2);

    Eigen::FullPivLU<Eigen::Matrix4d> lu(J);
    if (lu.rcond() < 1e-13)
      throw std::runtime_error(
          "decompose: near-singular constraint Jacobian (separation too small)");
    Eigen::Vector4d step = lu.solve(rhs);
    const double cap = 1.0;
    for (int i = 0; i < 4; ++i) step(i) = std::clamp(step(i), -cap, cap);
    g.mu1 += step(0);
    g.mu2 += step(1);
    g.y1 += step(2);
    g.y2 += step(3);
  }
  DecompositionResult out;
  out.gamma = g;
  out.epsilon = std::move(eps);
  out.h1_norm = h1_norm(out.epsilon);
  out.orthogonality_residuals = res;
  out.newton_iterations = iter;
  return out;
}

double arctan_weight(double x, double rho) {
  const double s = 8.0 * rho * x;
  if (s > 36.0) return 1.0 - (2.0 / std::numbers::pi) * std::exp(-s);
  if (s < -36.0) return (2.0 / std::numbers::pi) * std::exp(s);
  return (2.0 / std::numbers::pi) * std::atan(std::exp(s));
}

double eval_monotone_functional(const DecompositionResult& dec,
                                const ProfileFamily& fam, double Y0,
                                const DiagnosticsConfig& cfg, Branch branch) {
  cfg.validate();
  const GridFunction& eps = dec.epsilon;
  GridFunction deps = derivative(eps, 1);
  GridFunction v = ansatz_on(eps, fam, dec.gamma, AnsatzKind::corrected, Y0);
  const double mu1 = dec.gamma.mu1, mu2 = dec.gamma.mu2;
  const double l = fam.lambda;
  const double w1 = 1.0 / ((1.0 + mu1) * (1.0 + mu1));
  const double w2 = 1.0 / ((1.0 + mu2) * (1.0 + mu2));
  double acc = 0.0;
  for (int i = 0; i < eps.n; ++i) {
    const double e = eps.v[i], de = deps.v[i], V = v.v[i];
    const double phi = arctan_weight(eps.x(i), cfg.rho);
    // (eps+V)^3 - V^3 - 3V^2 eps = 3 V eps^2 + eps^3
    const double cubic = 3.0 * V * e * e + e * e * e;
    if (branch == Branch::plus) {
      const double Phi = mu1 * phi + mu2 * (1.0 - phi);
      acc += de * de + e * e - (2.0 / 3.0) * cubic;
      acc += (l * de * de + e * e) * Phi;
    } else {
      const double Phi1 = w1 * phi + w2 * (1.0 - phi);
      const double Phi2 = mu1 * w1 * phi + mu2 * w2 * (1.0 - phi);
      acc += (de * de + e * e - (2.0 / 3.0) * cubic) * Phi1;
      acc += (l * de * de + e * e) * Phi2;
    }
  }
  return acc * eps.dx();
}

double monotone_functional_coercivity(const ProfileFamily& fam,
                                      const AnsatzState& state,
                                      const DiagnosticsConfig& cfg, double length,
                                      int n) {
  cfg.validate();
  const ModelParams m{fam.lambda};
  GridFunction proto(length, n);
  GridFunction v = ansatz_on(proto, fam, state.gamma, AnsatzKind::corrected,
                             state.Y0);
  GridFunction phi_w(length, n);
  const double mu1 = state.gamma.mu1, mu2 = state.gamma.mu2;
  for (int i = 0; i < n; ++i) {
    const double phi = arctan_weight(proto.x(i), cfg.rho);
    phi_w.v[i] = mu1 * phi + mu2 * (1.0 - phi);
  }
  const double l = fam.lambda;
  // quadratic part of the + functional:
  //   A eps = -d_x((1 + l Phi) d_x eps) + (1 + Phi) eps - 2 V eps
  auto applyA = [&](const GridFunction& f) {
    GridFunction df = derivative(f, 1);
    for (int i = 0; i < n; ++i) df.v[i] *= 1.0 + l * phi_w.v[i];
    GridFunction out = derivative(df, 1);
    for (int i = 0; i < n; ++i)
      out.v[i] = -out.v[i] + (1.0 + phi_w.v[i]) * f.v[i] - 2.0 * v.v[i] * f.v[i];
    return out;
  };
  ConstraintSet csr = make_constraints(proto, m, state.gamma);
  std::vector<GridFunction> cons = {csr.w_r1, csr.w_r2, csr.w_dr1, csr.w_dr2};
  return projected_h1_rayleigh_min(proto, applyA, cons);
}

double eval_translation_diagnostic(const DecompositionResult& dec,
                                   const ProfileFamily& fam, int j) {
  if (j != 0 && j != 1) throw std::invalid_argument("diagnostic index is 0 or 1");
  const ModelParams m{fam.lambda};
  const GridFunction& eps = dec.epsilon;
  const double y1 = dec.gamma.y1;
  double right_tail = 0.0;
  for (int i = 0; i < eps.n; ++i)
    if (eps.x(i) > y1 + 40.0) right_tail = std::max(right_tail, std::abs(eps.v[i]));
  if (right_tail > 1e-8)
    throw std::runtime_error(
        "translation diagnostic: remainder does not decay on the right");
  const SolitonParams pj = j == 0 ? SolitonParams{dec.gamma.mu1, dec.gamma.y1}
                                  : SolitonParams{dec.gamma.mu2, dec.gamma.y2};
  GridFunction wj(eps.length, eps.n);
  for (int i = 0; i < eps.n; ++i) {
    const double x = eps.x(i);
    wj.v[i] = mu_deriv_antiderivative(pj, m, x) -
              fam.lambda * mu_deriv_profile_dx(pj, m, x);
  }
  const double l = fam.lambda;
  const double norm = 0.3 * (15.0 + 10.0 * l - l * l);
  return inner(eps, wj) / norm;
}

TrackResult track(const std::vector<double>& times,
                  const std::vector<GridFunction>& snaps,
                  const ProfileFamily& fam, double Y0, const PairParams& guess0) {
  if (times.size() != snaps.size() || times.size() < 5)
    throw std::invalid_argument("track: need matching times/snapshots, >= 5");
  const double K_window = 2.5;
  TrackResult tr;
  PairParams guess = guess0;
  for (std::size_t s = 0; s < snaps.size(); ++s) {
    const bool corrected = guess.separation() <= K_window * Y0;
    DecompositionResult dec =
        decompose(snaps[s], fam, guess,
                  corrected ? AnsatzKind::corrected : AnsatzKind::plain_sum, Y0);
    TrackPoint pt;
    pt.t = times[s];
    pt.gamma = dec.gamma;
    pt.eps_h1 = dec.h1_norm;
    pt.corrected = corrected;
    tr.points.push_back(pt);
    tr.max_eps_h1 = std::max(tr.max_eps_h1, dec.h1_norm);
    guess = dec.gamma;
  }
  // centered 4th-order differences for Gamma-dot, then drift vs the
  // truncated modulation system
  const OdeCoefficients c = fam.ode_coefficients();
  const double h = times[1] - times[0];
  for (std::size_t s = 2; s + 2 < tr.points.size(); ++s) {
    auto par = [&](std::size_t i, int p) {
      const PairParams& g = tr.points[i].gamma;
      return p == 0 ? g.mu1 : p == 1 ? g.mu2 : p == 2 ? g.y1 : g.y2;
    };
    double dot[4];
    for (int p = 0; p < 4; ++p)
      dot[p] = (-par(s + 2, p) + 8.0 * par(s + 1, p) - 8.0 * par(s - 1, p) +
                par(s - 2, p)) /
               (12.0 * h);
    const FullParamState st{tr.points[s].gamma.mu1, tr.points[s].gamma.mu2,
                            tr.points[s].gamma.y1, tr.points[s].gamma.y2};
    const FullParamState pred = ode_rhs(st, c);
    tr.points[s].drift = {dot[0] - pred.mu1, dot[1] - pred.mu2,
                          st.mu1 - dot[2] - (st.mu1 - pred.y1),
                          st.mu2 - dot[3] - (st.mu2 - pred.y2)};
    tr.points[s].drift_valid = true;
  }
  // sign changes of mu(t) = mu1 - mu2
  int changes = 0;
  double prev = 0.0;
  for (const auto& pt : tr.points) {
    const double mu = pt.gamma.mu_diff();
    if (std::abs(mu) < 1e-12) continue;
    if (prev != 0.0 && mu * prev < 0.0) ++changes;
    prev = mu;
  }
  tr.mu_sign_changes = changes;
  // min separation with quadratic refinement
  std::size_t imin = 0;
  for (std::size_t s = 1; s < tr.points.size(); ++s)
    if (tr.points[s].gamma.separation() < tr.points[imin].gamma.separation())
      imin = s;
  tr.min_separation = tr.points[imin].gamma.separation();
  tr.t_min_separation = tr.points[imin].t;
  if (imin > 0 && imin + 1 < tr.points.size()) {
    const double f0 = tr.points[imin - 1].gamma.separation();
    const double f1 = tr.points[imin].gamma.separation();
    const double f2 = tr.points[imin + 1].gamma.separation();
    const double denom = f0 - 2.0 * f1 + f2;
    if (denom > 0) {
      const double dt = tr.points[imin + 1].t - tr.points[imin].t;
      const double sft = 0.5 * (f0 - f2) / denom;
      tr.t_min_separation += sft * dt;
      tr.min_separation = f1 - 0.125 * (f0 - f2) * (f0 - f2) / denom;
    }
  }
  return tr;
}

CsvTable TrackResult::to_csv(double Y0, double mu0) const {
  CsvTable csv;
  csv.columns = {"t",  "mu1",       "mu2",    "y1",     "y2",
                 "Y_closed", "separation", "eps_h1", "drift_mu1", "drift_mu2",
                 "drift_y1", "drift_y2"};
  for (const auto& p : points) {
    const double Yc = closed_separation(p.t, Y0, mu0).Y;
    csv.rows.push_back({p.t, p.gamma.mu1, p.gamma.mu2, p.gamma.y1, p.gamma.y2, Yc,
                        p.gamma.separation(), p.eps_h1, p.drift[0], p.drift[1],
                        p.drift[2], p.drift[3]});
  }
  return csv;
}

namespace {
// Solve M(Q_a)+M(Q_b) = Ms, E(Q_a)+E(Q_b) = Es for (a, b) near (mu0, -mu0).
std::pair<double, double> balance_speeds(double Ms, double Es, double mu0,
                                         const ModelParams& m) {
  double aa = mu0, bb = -mu0;
  for (int it = 0; it < 60; ++it) {
    const double f1 = soliton_mass(aa, m) + soliton_mass(bb, m) - Ms;
    const double f2 = soliton_energy(aa, m) + soliton_energy(bb, m) - Es;
    const double j11 = soliton_mass_dmu(aa, m), j12 = soliton_mass_dmu(bb, m);
    const double j21 = soliton_energy_dmu(aa, m), j22 = soliton_energy_dmu(bb, m);
    const double det = j11 * j22 - j12 * j21;
    if (std::abs(det) < 1e-14) break;
    const double da = (-f1 * j22 + f2 * j12) / det;
    const double db = (-f2 * j11 + f1 * j21) / det;
    aa += da;
    bb += db;
    if (std::abs(da) + std::abs(db) < 1e-14) break;
  }
  return {aa, bb};
}
}  // namespace

CollisionReport defect_report(const std::vector<double>& times,
                              const std::vector<GridFunction>& snaps,
                              const ProfileFamily& fam, double Y0,
                              const TrackResult& tr,
                              const ConservationReport& cons,
                              double preparation_error, bool seam_warning) {
  CollisionReport rep;
  rep.Y0 = Y0;
  rep.lambda = fam.lambda;
  rep.mu0 = speed_from_apex(Y0, fam.alpha);
  rep.preparation_error = preparation_error;
  rep.seam_warning = seam_warning;
  rep.min_separation = tr.min_separation;
  rep.t_collision = tr.t_min_separation;
  rep.mu_sign_changes = tr.mu_sign_changes;
  rep.max_eps_h1 = tr.max_eps_h1;

  const GridFunction& u_end = snaps.back();
  const double t_end = times.back();
  const ModelParams m{fam.lambda};

  if (tr.points.back().gamma.separation() < Y0 + 10.0)
    throw std::runtime_error("defect_report: run ends before solitons separate");

  // final plain-soliton fit
  DecompositionResult fit = decompose(u_end, fam, tr.points.back().gamma,
                                      AnsatzKind::plain_sum, Y0);
  rep.mu1_plus = fit.gamma.mu1;
  rep.mu2_plus = fit.gamma.mu2;

  // defect restricted to the right-moving window, collision recentered
  const double x_center =
      0.5 * (tr.points.back().gamma.y1 + tr.points.back().gamma.y2) -
      0.5 * (tr.points.back().gamma.mu1 + tr.points.back().gamma.mu2) *
          (t_end - rep.t_collision);
  const double window_min = x_center - 0.99 * (t_end - rep.t_collision);
  rep.defect_h1 = h1_norm_right_of(fit.epsilon, window_min);

  // mass/energy balance route for the final speeds: closed-form invariants
  // of the incoming pair minus the measured invariants of the remainder,
  // independent of the direct fit parameters
  {
    const GridFunction& e = fit.epsilon;
    const double mass_eps = conserved_mass(e, m);
    const double energy_eps = conserved_energy(e);
    const double Ms =
        soliton_mass(rep.mu0, m) + soliton_mass(-rep.mu0, m) - mass_eps;
    const double Es =
        soliton_energy(rep.mu0, m) + soliton_energy(-rep.mu0, m) - energy_eps;
    auto [ba, bb2] = balance_speeds(Ms, Es, rep.mu0, m);
    rep.mu1_plus_balance = ba;
    rep.mu2_plus_balance = bb2;
  }

  // tracking error against the closed separation law near the collision
  double terr = 0.0;
  for (const auto& pt : tr.points) {
    if (pt.gamma.separation() > Y0 + 5.0) continue;
    const double Yc = closed_separation(pt.t - rep.t_collision, Y0, rep.mu0).Y;
    terr = std::max(terr, std::abs(pt.gamma.separation() - Yc));
  }
  rep.tracking_error = terr;

  rep.drift_floor = cons.floor() * h1_norm(snaps.front());
  rep.elasticity_ratio =
      rep.drift_floor > 0 ? rep.defect_h1 / rep.drift_floor : 0.0;
  return rep;
}

json CollisionReport::to_json() const {
  json j;
  j["schema_version"] = 1;
  j["lambda"] = lambda;
  j["mu0"] = mu0;
  j["Y0"] = Y0;
  j["min_separation"] = min_separation;
  j["t_collision"] = t_collision;
  j["defect_h1"] = defect_h1;
  j["mu1_plus"] = mu1_plus;
  j["mu2_plus"] = mu2_plus;
  j["mu1_plus_balance"] = mu1_plus_balance;
  j["mu2_plus_balance"] = mu2_plus_balance;
  j["tracking_error"] = tracking_error;
  j["preparation_error"] = preparation_error;
  j["drift_floor"] = drift_floor;
  j["elasticity_ratio"] = elasticity_ratio;
  j["max_eps_h1"] = max_eps_h1;
  j["mu_sign_changes"] = mu_sign_changes;
  j["seam_warning"] = seam_warning;
  return j;
}

}  // namespace bbmlab
