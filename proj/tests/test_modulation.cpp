#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bbmlab/modulation.hpp"

using namespace bbmlab;

namespace {
const ProfileFamily& family(double l) {
  static std::map<double, ProfileFamily> cache;
  auto it = cache.find(l);
  if (it == cache.end())
    it = cache.emplace(l, build_family(l, OperatorConfig{60.0, 2048, 0.0})).first;
  return it->second;
}

GridFunction proto_grid() { return GridFunction(512.0, 8192); }
}  // namespace

TEST_CASE("decompose recovers an exact ansatz") {
  const auto& fam = family(0.5);
  const double Y0 = 10.0;
  const double mu0 = speed_from_apex(Y0, fam.alpha);
  PairParams g{-0.6 * mu0, 0.6 * mu0, 0.5 * (Y0 + 1.2), -0.5 * (Y0 + 1.2)};
  AnsatzState st{g, Y0};
  GridFunction u = ansatz_cut_grid(fam, st, proto_grid());

  PairParams guess{0.0, 0.0, g.y1 + 0.25, g.y2 - 0.15};
  DecompositionResult dec = decompose(u, fam, guess, AnsatzKind::corrected, Y0);
  CHECK(std::abs(dec.gamma.mu1 - g.mu1) < 1e-10);
  CHECK(std::abs(dec.gamma.mu2 - g.mu2) < 1e-10);
  CHECK(std::abs(dec.gamma.y1 - g.y1) < 1e-10);
  CHECK(std::abs(dec.gamma.y2 - g.y2) < 1e-10);
  CHECK(dec.h1_norm < 1e-10);
  for (double r : dec.orthogonality_residuals) CHECK(std::abs(r) < 1e-11);
}

TEST_CASE("decompose under a small perturbation, with basin robustness") {
  const auto& fam = family(0.5);
  const double Y0 = 10.0;
  const double mu0 = speed_from_apex(Y0, fam.alpha);
  PairParams g{-0.5 * mu0, 0.5 * mu0, 0.5 * (Y0 + 0.8), -0.5 * (Y0 + 0.8)};
  AnsatzState st{g, Y0};
  GridFunction u = ansatz_cut_grid(fam, st, proto_grid());
  // even localized bump, amplitude 1e-4
  for (int i = 0; i < u.n; ++i) {
    const double x = u.x(i);
    u.v[i] += 1e-4 * std::exp(-0.5 * x * x);
  }
  DecompositionResult dec = decompose(u, fam, g, AnsatzKind::corrected, Y0);
  for (double r : dec.orthogonality_residuals) CHECK(std::abs(r) < 1e-11);
  // implicit-function bound: the parameter shift is of the size of the bump
  CHECK(std::abs(dec.gamma.mu1 - g.mu1) < 5e-4);
  CHECK(std::abs(dec.gamma.y1 - g.y1) < 5e-4);
  CHECK(dec.h1_norm > 1e-5);
  CHECK(dec.h1_norm < 5e-4);

  PairParams displaced{g.mu1, g.mu2, g.y1 + 0.5, g.y2};
  DecompositionResult dec2 =
      decompose(u, fam, displaced, AnsatzKind::corrected, Y0);
  CHECK(std::abs(dec2.gamma.y1 - dec.gamma.y1) < 1e-9);
  CHECK(std::abs(dec2.gamma.mu1 - dec.gamma.mu1) < 1e-9);
}

TEST_CASE("plain-sum decomposition fits a bare pair exactly") {
  const auto& fam = family(0.5);
  const ModelParams m{0.5};
  GridFunction u = proto_grid();
  const SolitonParams p1{0.13, 11.0}, p2{-0.09, -9.0};
  for (int i = 0; i < u.n; ++i)
    u.v[i] = soliton_profile(p1, m, u.x(i)) + soliton_profile(p2, m, u.x(i));
  PairParams guess{0.1, -0.1, 10.5, -8.5};
  DecompositionResult dec =
      decompose(u, fam, guess, AnsatzKind::plain_sum, 10.0);
  // the bare pair is not an exact zero of the constraints (tails overlap),
  // but the fitted parameters land within the interaction-tail size
  CHECK(std::abs(dec.gamma.mu1 - 0.13) < 1e-4);
  CHECK(std::abs(dec.gamma.y1 - 11.0) < 1e-3);
  for (double r : dec.orthogonality_residuals) CHECK(std::abs(r) < 1e-11);
}

TEST_CASE("weight function saturates correctly") {
  DiagnosticsConfig cfg;
  cfg.validate();
  CHECK(arctan_weight(1e4, cfg.rho) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(arctan_weight(-1e4, cfg.rho) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(arctan_weight(0.0, cfg.rho) == doctest::Approx(0.5).epsilon(1e-14));
  // the two branches join smoothly at the switch point
  const double s = 36.0 / (8.0 * cfg.rho);
  CHECK(std::abs(arctan_weight(s - 1e-9, cfg.rho) -
                 arctan_weight(s + 1e-9, cfg.rho)) < 1e-12);
  DiagnosticsConfig bad;
  bad.rho = 0.5;
  CHECK_THROWS(bad.validate());
}

TEST_CASE("monotone functionals vanish at zero remainder and control it") {
  const auto& fam = family(0.5);
  const double Y0 = 10.0;
  const double mu0 = speed_from_apex(Y0, fam.alpha);
  PairParams g{-0.5 * mu0, 0.5 * mu0, 0.5 * (Y0 + 0.8), -0.5 * (Y0 + 0.8)};
  AnsatzState st{g, Y0};
  GridFunction u = ansatz_cut_grid(fam, st, proto_grid());
  DiagnosticsConfig cfg;
  DecompositionResult dec = decompose(u, fam, g, AnsatzKind::corrected, Y0);
  CHECK(std::abs(eval_monotone_functional(dec, fam, Y0, cfg, Branch::plus)) < 1e-18);
  CHECK(std::abs(eval_monotone_functional(dec, fam, Y0, cfg, Branch::minus)) < 1e-18);

  // perturbed state: the + functional dominates c ||eps||_H1^2
  GridFunction up = u;
  for (int i = 0; i < up.n; ++i) {
    const double x = up.x(i);
    up.v[i] += 1e-4 * (std::exp(-0.4 * x * x) + 0.3 * x * std::exp(-0.3 * x * x));
  }
  DecompositionResult decp = decompose(up, fam, g, AnsatzKind::corrected, Y0);
  const double fplus = eval_monotone_functional(decp, fam, Y0, cfg, Branch::plus);
  const double fminus = eval_monotone_functional(decp, fam, Y0, cfg, Branch::minus);
  const double h1sq = decp.h1_norm * decp.h1_norm;
  const double c =
      monotone_functional_coercivity(fam, st, cfg);
  CHECK(c > 0.0);
  CHECK(fplus >= 0.5 * c * h1sq);
  CHECK(fminus >= 0.25 * h1sq * c);
}

TEST_CASE("translation diagnostic: zero remainder, bump oracle, refusal") {
  const auto& fam = family(0.5);
  const ModelParams m{0.5};
  const double Y0 = 10.0;
  const double mu0 = speed_from_apex(Y0, fam.alpha);
  PairParams g{-0.5 * mu0, 0.5 * mu0, 0.5 * (Y0 + 0.8), -0.5 * (Y0 + 0.8)};
  AnsatzState st{g, Y0};
  GridFunction u = ansatz_cut_grid(fam, st, proto_grid());
  DecompositionResult dec = decompose(u, fam, g, AnsatzKind::corrected, Y0);
  CHECK(std::abs(eval_translation_diagnostic(dec, fam, 0)) < 1e-12);

  // localized bump left of the pair: compare against an independent
  // quadrature that builds the antiderivative numerically
  DecompositionResult dec2 = dec;
  const double xb = -25.0;
  for (int i = 0; i < dec2.epsilon.n; ++i) {
    const double x = dec2.epsilon.x(i);
    dec2.epsilon.v[i] = 1e-3 * std::exp(-2.0 * (x - xb) * (x - xb));
  }
  const double direct = eval_translation_diagnostic(dec2, fam, 0);
  // oracle: cumulative trapezoid of the speed derivative
  const GridFunction& e = dec2.epsilon;
  GridFunction lam(e.length, e.n);
  const SolitonParams p1{dec.gamma.mu1, dec.gamma.y1};
  for (int i = 0; i < e.n; ++i)
    lam.v[i] = mu_deriv_profile(p1, m, e.x(i));
  GridFunction J(e.length, e.n);
  double acc = 0.0;
  J.v[0] = 0.0;
  for (int i = 1; i < e.n; ++i) {
    acc += 0.5 * e.dx() * (lam.v[i - 1] + lam.v[i]);
    J.v[i] = acc;
  }
  GridFunction w(e.length, e.n);
  for (int i = 0; i < e.n; ++i)
    w.v[i] = J.v[i] - fam.lambda * mu_deriv_profile_dx(p1, m, e.x(i));
  const double l = fam.lambda;
  const double oracle = inner(e, w) / (0.3 * (15.0 + 10.0 * l - l * l));
  CHECK(std::abs(direct - oracle) < 1e-9);

  // remainder mass on the far right makes the functional ill-defined
  DecompositionResult dec3 = dec;
  for (int i = 0; i < dec3.epsilon.n; ++i) {
    const double x = dec3.epsilon.x(i);
    dec3.epsilon.v[i] = 1e-4 * std::exp(-0.1 * (x - 150.0) * (x - 150.0));
  }
  CHECK_THROWS(eval_translation_diagnostic(dec3, fam, 0));
}

TEST_CASE("tracking a synthetic modulation trajectory") {
  const auto& fam = family(0.5);
  const double Y0 = 9.0;
  const double mu0 = speed_from_apex(Y0, fam.alpha);
  const double t0 = -3.0 / mu0, t1 = 3.0 / mu0;
  const ReducedState rs = closed_separation(t0, Y0, mu0);
  FullParamState s0{0.5 * rs.dY, -0.5 * rs.dY, 0.5 * rs.Y, -0.5 * rs.Y};
  const double dt = 0.01 / mu0;
  // snapshot spacing 0.03/mu0 keeps the 4th-order differentiation noise of
  // Gamma-dot below the 1e-8 self-consistency bar
  Trajectory tr = integrate_full(s0, fam.ode_coefficients(), t0, t1, dt, 3);

  std::vector<double> times;
  std::vector<GridFunction> snaps;
  GridFunction proto = proto_grid();
  for (std::size_t i = 0; i < tr.t.size(); ++i) {
    PairParams g{tr.state[i].mu1, tr.state[i].mu2, tr.state[i].y1,
                 tr.state[i].y2};
    AnsatzState st{g, Y0};
    times.push_back(tr.t[i]);
    snaps.push_back(ansatz_cut_grid(fam, st, proto, false));
  }
  PairParams guess{s0.mu1, s0.mu2, s0.y1, s0.y2};
  TrackResult res = track(times, snaps, fam, Y0, guess);
  CHECK(res.mu_sign_changes == 1);
  CHECK(res.max_eps_h1 < 1e-9);
  double worst_param = 0.0, worst_drift = 0.0;
  for (std::size_t i = 0; i < res.points.size(); ++i) {
    worst_param = std::max(worst_param, std::abs(res.points[i].gamma.y1 -
                                                 tr.state[i].y1));
    if (res.points[i].drift_valid)
      for (double d : res.points[i].drift)
        worst_drift = std::max(worst_drift, std::abs(d));
  }
  CHECK(worst_param < 1e-9);
  CHECK(worst_drift < 1e-8);
  CHECK(std::abs(res.min_separation - Y0) < 0.02);
}
