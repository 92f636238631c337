#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bbmlab/dynamics.hpp"

using namespace bbmlab;

namespace {
OdeCoefficients coeffs_for_tests() {
  // representative magnitudes; exact values come from the profile builder
  OdeCoefficients c;
  c.alpha = 12.151898734177214;
  c.beta = 3.0379746835443036;
  c.delta = -1.9;
  c.a = 4.1;
  c.b1 = 2.4;
  c.b2 = 7.9;
  c.d1 = 0.7;
  c.d2 = -0.3;
  return c;
}
}  // namespace

TEST_CASE("closed separation law: apex, asymptotic slope, envelope") {
  const double Y0 = 9.0, mu0 = 0.12;
  const ReducedState s0 = closed_separation(0.0, Y0, mu0);
  CHECK(s0.Y == doctest::Approx(Y0).epsilon(1e-15));
  CHECK(s0.dY == 0.0);

  for (double t : {-300.0, -120.0}) {
    const ReducedState s = closed_separation(t, Y0, mu0);
    CHECK(std::abs(s.dY + 2.0 * mu0) < std::exp(-2.0 * mu0 * std::abs(t)) + 1e-15);
  }
  for (double t = -200.0; t <= 200.0; t += 1.7) {
    const ReducedState s = closed_separation(t, Y0, mu0);
    const double gap = s.Y - (Y0 + 2.0 * mu0 * std::abs(t) - 2.0 * std::log(2.0));
    CHECK(gap >= -1e-13);
    CHECK(gap <= 2.0 * std::exp(-2.0 * mu0 * std::abs(t)) + 1e-13);
  }
}

TEST_CASE("apex/speed conversions are mutually inverse") {
  const double alpha = 16.0;
  for (double mu0 : {0.2, 0.1, 0.05}) {
    const double Y0 = separation_apex(mu0, alpha);
    CHECK(speed_from_apex(Y0, alpha) == doctest::Approx(mu0).epsilon(1e-12));
  }
}

TEST_CASE("modulation right-hand side: sign pattern and limits") {
  const OdeCoefficients c = coeffs_for_tests();
  {
    FullParamState s{0.0, 0.0, 4.0, -4.0};
    const FullParamState d = ode_rhs(s, c);
    const double e = std::exp(-8.0);
    CHECK(d.mu1 == doctest::Approx(c.alpha * e).epsilon(1e-14));
    CHECK(d.mu2 == doctest::Approx(-c.alpha * e).epsilon(1e-14));
    CHECK(d.y1 == doctest::Approx(-c.a * e).epsilon(1e-14));
    CHECK(d.y2 == doctest::Approx(-c.a * e).epsilon(1e-14));
  }
  {
    // exact pairwise structure: as functions of their own speed argument
    // the two speed equations are negatives of each other
    FullParamState s{0.04, 0.04, 3.5, -3.5};
    const FullParamState d = ode_rhs(s, c);
    CHECK(d.mu1 == doctest::Approx(-d.mu2).epsilon(1e-15));
    // with the translation-shift asymmetry removed, the position equations
    // coincide at equal speed arguments
    OdeCoefficients sym = c;
    sym.b2 = sym.b1;
    sym.d2 = sym.d1;
    const FullParamState e = ode_rhs(s, sym);
    CHECK(e.y1 - s.mu1 == doctest::Approx(e.y2 - s.mu2).epsilon(1e-15));
    // the asymmetry is visible exactly when b1 != b2
    const FullParamState ea = ode_rhs(s, c);
    CHECK(std::abs((ea.y1 - s.mu1) - (ea.y2 - s.mu2)) > 1e-6);
  }
  {
    FullParamState s{0.05, -0.05, 500.0, -500.0};
    const FullParamState d = ode_rhs(s, c);
    CHECK(std::abs(d.mu1) < 1e-300);
    CHECK(std::abs(d.y1 - s.mu1) < 1e-300);
  }
  FullParamState tight{0.0, 0.0, 0.4, -0.4};
  CHECK_THROWS(ode_rhs(tight, c));
}

TEST_CASE("leading-order system reproduces the closed law exactly") {
  const OdeCoefficients c = coeffs_for_tests();
  const double Y0 = 8.0;
  const double mu0 = speed_from_apex(Y0, c.alpha);
  FullParamState s0{0.0, 0.0, 0.5 * Y0, -0.5 * Y0};
  Trajectory tr = integrate_full(s0, c, 0.0, 4.0 / mu0, 0.02, 5, true);
  double dev = 0.0;
  for (std::size_t i = 0; i < tr.t.size(); ++i)
    dev = std::max(dev, std::abs(tr.state[i].separation() -
                                 closed_separation(tr.t[i], Y0, mu0).Y));
  CHECK(dev < 1e-9);
}

TEST_CASE("full system tracks the closed law better as mu0 shrinks") {
  const OdeCoefficients c = coeffs_for_tests();
  double prev = -1.0;
  for (double mu0 : {0.2, 0.1, 0.05}) {
    const double Y0 = separation_apex(mu0, c.alpha);
    FullParamState s0{0.0, 0.0, 0.5 * Y0, -0.5 * Y0};
    Trajectory tr = integrate_full(s0, c, 0.0, 5.0 / mu0,
                                   std::min(0.01 / mu0, 0.05), 10);
    double dev = 0.0;
    for (std::size_t i = 0; i < tr.t.size(); ++i)
      dev = std::max(dev, std::abs(tr.state[i].separation() -
                                   closed_separation(tr.t[i], Y0, mu0).Y));
    if (prev >= 0) CHECK(dev < prev);
    prev = dev;
  }
}

TEST_CASE("first integral of the reduced flow") {
  const double alpha = 16.0;
  ReducedTrajectory tr = integrate_reduced(8.0, 0.0, alpha, 0.0, 300.0, 0.01, 20);
  CHECK(first_integral_drift(tr, alpha) < 1e-10);
  // time reversal of the symmetric orbit
  ReducedTrajectory bw = integrate_reduced(8.0, 0.0, alpha, 0.0, -300.0, 0.01, 20);
  double dev = 0.0;
  for (std::size_t i = 0; i < tr.t.size(); ++i)
    dev = std::max(dev, std::abs(tr.Y[i] - bw.Y[i]));
  CHECK(dev < 1e-10);
}

TEST_CASE("integrator reaches 4th order under step halving") {
  // a strongly curved orbit, so truncation dominates the roundoff floor
  const double alpha = 12.0;
  auto final_Y = [&](double dt) {
    return integrate_reduced(2.0, 0.0, alpha, 0.0, 20.0, dt, 1 << 30).Y.back();
  };
  const double ref = final_Y(0.0005);
  const double e1 = std::abs(final_Y(0.04) - ref);
  const double e2 = std::abs(final_Y(0.02) - ref);
  const double order = std::log2(e1 / e2);
  CHECK(order > 3.7);
  CHECK(order < 4.3);
}

TEST_CASE("single sign change of the speed difference on symmetric orbits") {
  const OdeCoefficients c = coeffs_for_tests();
  const double mu0 = 0.1;
  const double Y0 = separation_apex(mu0, c.alpha);
  const ReducedState rs = closed_separation(-4.0 / mu0, Y0, mu0);
  FullParamState s0{0.5 * rs.dY, -0.5 * rs.dY, 0.5 * rs.Y, -0.5 * rs.Y};
  Trajectory tr = integrate_full(s0, c, -4.0 / mu0, 4.0 / mu0, 0.05, 20);
  int changes = 0;
  double prev = 0.0;
  for (const auto& s : tr.state) {
    const double mu = s.mu_diff();
    if (prev != 0.0 && mu * prev < 0.0) ++changes;
    prev = mu;
  }
  CHECK(changes == 1);
}

TEST_CASE("trajectory CSV carries the documented columns") {
  const OdeCoefficients c = coeffs_for_tests();
  FullParamState s0{0.0, 0.0, 4.0, -4.0};
  Trajectory tr = integrate_full(s0, c, 0.0, 1.0, 0.1, 1);
  CsvTable csv = tr.to_csv(8.0, 0.1);
  CHECK(csv.columns == std::vector<std::string>{"t", "mu1", "mu2", "y1", "y2",
                                                "Y_closed", "separation"});
  CHECK(csv.rows.size() == tr.t.size());
  const std::string s = csv.to_string();
  CHECK(s.substr(0, 2) == "t,");
}
