#include "bbmlab/dynamics.hpp"

#include <cmath>
#include <stdexcept>

namespace bbmlab {

ReducedState closed_separation(double t, double Y0, double mu0) {
  if (!(mu0 > 0.0)) throw std::invalid_argument("closed_separation: mu0 > 0");
  ReducedState s;
  s.Y0 = Y0;
  s.mu0 = mu0;
  const double u = mu0 * t;
  // 2*log(cosh(u)) without overflow for large |u|
  const double au = std::abs(u);
  s.Y = Y0 + 2.0 * (au + std::log1p(std::exp(-2.0 * au)) - std::log(2.0));
  s.dY = 2.0 * mu0 * std::tanh(u);
  return s;
}

double separation_apex(double mu0, double alpha) {
  return std::abs(std::log(mu0 * mu0 / alpha));
}

double speed_from_apex(double Y0, double alpha) {
  return std::sqrt(alpha) * std::exp(-0.5 * Y0);
}

FullParamState ode_rhs(const FullParamState& s, const OdeCoefficients& c) {
  const double y = s.separation();
  if (!(y > 1.0)) throw std::invalid_argument("ode_rhs: separation must exceed 1");
  const double e = std::exp(-y);
  FullParamState d;
  d.mu1 = c.alpha * e + c.beta * s.mu1 * y * e + c.delta * s.mu1 * e;
  d.mu2 = -(c.alpha * e + c.beta * s.mu2 * y * e + c.delta * s.mu2 * e);
  d.y1 = s.mu1 - (c.a * e + c.b1 * s.mu1 * y * e + c.d1 * s.mu1 * e);
  d.y2 = s.mu2 - (c.a * e + c.b2 * s.mu2 * y * e + c.d2 * s.mu2 * e);
  return d;
}

FullParamState ode_rhs_leading(const FullParamState& s, const OdeCoefficients& c) {
  const double y = s.separation();
  if (!(y > 1.0)) throw std::invalid_argument("ode_rhs: separation must exceed 1");
  const double e = std::exp(-y);
  FullParamState d;
  d.mu1 = c.alpha * e;
  d.mu2 = -c.alpha * e;
  d.y1 = s.mu1;
  d.y2 = s.mu2;
  return d;
}

namespace {
FullParamState axpy(const FullParamState& s, double h, const FullParamState& d) {
  return {s.mu1 + h * d.mu1, s.mu2 + h * d.mu2, s.y1 + h * d.y1, s.y2 + h * d.y2};
}
}  // namespace

Trajectory integrate_full(const FullParamState& initial, const OdeCoefficients& c,
                          double t0, double t1, double dt, int stride,
                          bool leading_order_y) {
  if (!(dt > 0.0)) throw std::invalid_argument("integrate_full: dt > 0");
  auto rhs = [&](const FullParamState& s) {
    return leading_order_y ? ode_rhs_leading(s, c) : ode_rhs(s, c);
  };
  const double span = t1 - t0;
  const long nsteps = (long)std::ceil(std::abs(span) / dt - 1e-12);
  const double h = span / nsteps;
  Trajectory tr;
  FullParamState s = initial;
  tr.t.push_back(t0);
  tr.state.push_back(s);
  for (long k = 0; k < nsteps; ++k) {
    const FullParamState k1 = rhs(s);
    const FullParamState k2 = rhs(axpy(s, 0.5 * h, k1));
    const FullParamState k3 = rhs(axpy(s, 0.5 * h, k2));
    const FullParamState k4 = rhs(axpy(s, h, k3));
    s.mu1 += h / 6.0 * (k1.mu1 + 2 * k2.mu1 + 2 * k3.mu1 + k4.mu1);
    s.mu2 += h / 6.0 * (k1.mu2 + 2 * k2.mu2 + 2 * k3.mu2 + k4.mu2);
    s.y1 += h / 6.0 * (k1.y1 + 2 * k2.y1 + 2 * k3.y1 + k4.y1);
    s.y2 += h / 6.0 * (k1.y2 + 2 * k2.y2 + 2 * k3.y2 + k4.y2);
    if (!std::isfinite(s.mu1 + s.mu2 + s.y1 + s.y2))
      throw std::runtime_error("integrate_full: state blew up at t=" +
                               std::to_string(t0 + (k + 1) * h));
    if ((k + 1) % stride == 0 || k + 1 == nsteps) {
      tr.t.push_back(t0 + (k + 1) * h);
      tr.state.push_back(s);
    }
  }
  return tr;
}

CsvTable Trajectory::to_csv(double Y0, double mu0) const {
  CsvTable csv;
  csv.columns = {"t", "mu1", "mu2", "y1", "y2", "Y_closed", "separation"};
  for (std::size_t i = 0; i < t.size(); ++i) {
    const auto& s = state[i];
    const double Yc = closed_separation(t[i], Y0, mu0).Y;
    csv.rows.push_back({t[i], s.mu1, s.mu2, s.y1, s.y2, Yc, s.separation()});
  }
  return csv;
}

ReducedTrajectory integrate_reduced(double Y0, double dY0, double alpha, double t0,
                                    double t1, double dt, int stride) {
  const double span = t1 - t0;
  const long nsteps = (long)std::ceil(std::abs(span) / dt - 1e-12);
  const double h = span / nsteps;
  ReducedTrajectory tr;
  double Y = Y0, V = dY0;
  tr.t.push_back(t0);
  tr.Y.push_back(Y);
  tr.dY.push_back(V);
  auto acc = [&](double y) { return 2.0 * alpha * std::exp(-y); };
  for (long k = 0; k < nsteps; ++k) {
    const double k1y = V, k1v = acc(Y);
    const double k2y = V + 0.5 * h * k1v, k2v = acc(Y + 0.5 * h * k1y);
    const double k3y = V + 0.5 * h * k2v, k3v = acc(Y + 0.5 * h * k2y);
    const double k4y = V + h * k3v, k4v = acc(Y + h * k3y);
    Y += h / 6.0 * (k1y + 2 * k2y + 2 * k3y + k4y);
    V += h / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v);
    if ((k + 1) % stride == 0 || k + 1 == nsteps) {
      tr.t.push_back(t0 + (k + 1) * h);
      tr.Y.push_back(Y);
      tr.dY.push_back(V);
    }
  }
  return tr;
}

double first_integral_drift(const ReducedTrajectory& tr, double alpha) {
  double ref = tr.dY[0] * tr.dY[0] + 4.0 * alpha * std::exp(-tr.Y[0]);
  double dev = 0.0;
  for (std::size_t i = 0; i < tr.t.size(); ++i) {
    const double v = tr.dY[i] * tr.dY[i] + 4.0 * alpha * std::exp(-tr.Y[i]);
    dev = std::max(dev, std::abs(v - ref));
  }
  return dev;
}

}  // namespace bbmlab
