#pragma once

#include <vector>

#include "bbmlab/io.hpp"

namespace bbmlab {

/// Interaction coefficients of the four-parameter modulation system; a
/// ProfileFamily supplies them for its lambda.
struct OdeCoefficients {
  double alpha = 0, beta = 0, delta = 0;
  double a = 0, b1 = 0, b2 = 0, d1 = 0, d2 = 0;
};

/// Closed-form separation law: apex Y0, asymptotic speed 2*mu0.
struct ReducedState {
  double Y, dY, Y0, mu0;
};
ReducedState closed_separation(double t, double Y0, double mu0);

/// mu0 and Y0 are tied by mu0 = sqrt(alpha) e^{-Y0/2}.
double separation_apex(double mu0, double alpha);  // Y0 from mu0
double speed_from_apex(double Y0, double alpha);   // mu0 from Y0

struct FullParamState {
  double mu1 = 0, mu2 = 0, y1 = 0, y2 = 0;
  double separation() const { return y1 - y2; }
  double mu_diff() const { return mu1 - mu2; }
};

/// Right-hand side of the truncated modulation system:
///   mu1' = alpha e^{-y} + beta mu1 y e^{-y} + delta mu1 e^{-y}
///   mu2' = -(...same with mu2...)
///   y1'  = mu1 - (a e^{-y} + b1 mu1 y e^{-y} + d1 mu1 e^{-y})
///   y2'  = mu2 - (a e^{-y} + b2 mu2 y e^{-y} + d2 mu2 e^{-y})
FullParamState ode_rhs(const FullParamState& s, const OdeCoefficients& c);

/// Same with the b/d layers dropped (leading-order system).
FullParamState ode_rhs_leading(const FullParamState& s, const OdeCoefficients& c);

struct Trajectory {
  std::vector<double> t;
  std::vector<FullParamState> state;
  CsvTable to_csv(double Y0, double mu0) const;
};

/// Fixed-step RK4; records every `stride` steps (and the final point).
Trajectory integrate_full(const FullParamState& initial, const OdeCoefficients& c,
                          double t0, double t1, double dt, int stride = 1,
                          bool leading_order_y = false);

/// Reduced two-variable system Y'' = 2 alpha e^{-Y}, for the first-integral
/// and reversibility checks.
struct ReducedTrajectory {
  std::vector<double> t, Y, dY;
};
ReducedTrajectory integrate_reduced(double Y0, double dY0, double alpha, double t0,
                                    double t1, double dt, int stride = 1);

/// Max |Y'^2 + 4 alpha e^{-Y} - const| along a reduced trajectory.
double first_integral_drift(const ReducedTrajectory& tr, double alpha);

}  // namespace bbmlab
