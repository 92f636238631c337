#include "bbmlab/soliton.hpp"

#include <cmath>
#include <stdexcept>

namespace bbmlab {

void ModelParams::validate() const {
  if (!(lambda >= 0.0 && lambda < 1.0))
    throw std::invalid_argument("ModelParams: lambda must be in [0,1)");
}

void SolitonParams::validate(const ModelParams& m) const {
  if (!(1.0 + mu > 0.0))
    throw std::invalid_argument("SolitonParams: need 1+mu > 0");
  if (!(1.0 + m.lambda * mu > 0.0))
    throw std::invalid_argument("SolitonParams: need 1+lambda*mu > 0");
}

double base_wave(double x) {
  const double c = std::cosh(0.5 * x);
  return 1.5 / (c * c);
}

double base_wave_dx(double x) { return -base_wave(x) * std::tanh(0.5 * x); }

double base_wave_dxx(double x) {
  const double q = base_wave(x);
  return q - q * q;
}

double base_wave_dxxx(double x) {
  return base_wave_dx(x) * (1.0 - 2.0 * base_wave(x));
}

double log_slope(double x) { return -std::tanh(0.5 * x); }

double width_factor(double mu, double lambda) {
  return std::sqrt((1.0 + mu) / (1.0 + lambda * mu));
}

double soliton_profile(const SolitonParams& p, const ModelParams& m, double x) {
  p.validate(m);
  return (1.0 + p.mu) * base_wave(width_factor(p.mu, m.lambda) * (x - p.y));
}

double soliton_profile_dx(const SolitonParams& p, const ModelParams& m, double x) {
  const double b = width_factor(p.mu, m.lambda);
  return (1.0 + p.mu) * b * base_wave_dx(b * (x - p.y));
}

double soliton_profile_dxx(const SolitonParams& p, const ModelParams& m, double x) {
  const double b = width_factor(p.mu, m.lambda);
  return (1.0 + p.mu) * b * b * base_wave_dxx(b * (x - p.y));
}

double soliton_profile_dxxx(const SolitonParams& p, const ModelParams& m, double x) {
  const double b = width_factor(p.mu, m.lambda);
  return (1.0 + p.mu) * b * b * b * base_wave_dxxx(b * (x - p.y));
}

namespace {
// width factor g(mu) = (1+mu)/(1+lambda mu) and derivatives of b = sqrt(g)
struct WidthDerivs {
  double b, bp, bpp;
};
WidthDerivs width_derivs(double mu, double lambda) {
  const double d = 1.0 + lambda * mu;
  const double g = (1.0 + mu) / d;
  const double gp = (1.0 - lambda) / (d * d);
  const double gpp = -2.0 * lambda * (1.0 - lambda) / (d * d * d);
  WidthDerivs w;
  w.b = std::sqrt(g);
  w.bp = 0.5 * gp / w.b;
  w.bpp = 0.5 * gpp / w.b - 0.25 * gp * gp / (g * w.b);
  return w;
}
}  // namespace

double mu_deriv_profile(const SolitonParams& p, const ModelParams& m, double x) {
  p.validate(m);
  const auto w = width_derivs(p.mu, m.lambda);
  const double u = x - p.y;
  return base_wave(w.b * u) + (1.0 + p.mu) * w.bp * u * base_wave_dx(w.b * u);
}

double mu_deriv2_profile(const SolitonParams& p, const ModelParams& m, double x) {
  p.validate(m);
  const auto w = width_derivs(p.mu, m.lambda);
  const double u = x - p.y;
  const double qp = base_wave_dx(w.b * u);
  const double qpp = base_wave_dxx(w.b * u);
  return 2.0 * w.bp * u * qp + (1.0 + p.mu) * (w.bpp * u * qp + w.bp * w.bp * u * u * qpp);
}

double mu_deriv_profile_dx(const SolitonParams& p, const ModelParams& m, double x) {
  const auto w = width_derivs(p.mu, m.lambda);
  const double u = x - p.y;
  const double c = (1.0 + p.mu) * w.bp;
  return w.b * base_wave_dx(w.b * u) +
         c * (base_wave_dx(w.b * u) + u * w.b * base_wave_dxx(w.b * u));
}

double mu_deriv_profile_dxx(const SolitonParams& p, const ModelParams& m, double x) {
  const auto w = width_derivs(p.mu, m.lambda);
  const double u = x - p.y;
  const double c = (1.0 + p.mu) * w.bp;
  return w.b * w.b * base_wave_dxx(w.b * u) +
         c * (2.0 * w.b * base_wave_dxx(w.b * u) +
              u * w.b * w.b * base_wave_dxxx(w.b * u));
}

double mu_deriv_antiderivative(const SolitonParams& p, const ModelParams& m, double x) {
  const auto w = width_derivs(p.mu, m.lambda);
  const double u = x - p.y;
  const double bu = w.b * u;
  const double cum_q = 3.0 * (1.0 + std::tanh(0.5 * bu));  // int_{-inf}^{bu} Q
  // int_{-inf}^{u} s Q'(b s) ds = (1/b^2) (bu Q(bu) - cum_q)
  const double cum_sqp = (bu * base_wave(bu) - cum_q) / (w.b * w.b);
  return cum_q / w.b + (1.0 + p.mu) * w.bp * cum_sqp;
}

double conserved_mass(const GridFunction& u, const ModelParams& m) {
  GridFunction du = derivative(u, 1);
  return m.lambda * inner(du, du) + inner(u, u);
}

double conserved_energy(const GridFunction& u) {
  GridFunction du = derivative(u, 1);
  double cubic = 0.0;
  for (double x : u.v) cubic += x * x * x;
  cubic *= u.dx();
  return inner(du, du) + inner(u, u) - (2.0 / 3.0) * cubic;
}

double soliton_l2sq(double mu, const ModelParams& m) {
  return 6.0 * std::pow(1.0 + mu, 1.5) * std::sqrt(1.0 + m.lambda * mu);
}

double soliton_mass(double mu, const ModelParams& m) {
  const double l = m.lambda;
  return 1.2 * std::pow(1.0 + mu, 1.5) / std::sqrt(1.0 + l * mu) *
         (5.0 + l * (1.0 + 6.0 * mu));
}

double soliton_mass_dmu(double mu, const ModelParams& m) {
  const double l = m.lambda;
  return 0.6 * std::sqrt(1.0 + mu) * std::pow(1.0 + l * mu, -1.5) *
         (15.0 + 10.0 * l - l * l + 40.0 * l * mu + 8.0 * l * l * mu +
          24.0 * l * l * mu * mu);
}

double soliton_energy(double mu, const ModelParams& m) {
  const double l = m.lambda;
  const double a = std::pow(1.0 + mu, 2.5);
  const double b = std::sqrt(1.0 + l * mu);
  // int (Q_mu')^2 + int Q_mu^2 - (2/3) int Q_mu^3
  return 1.2 * a / b + 6.0 * std::pow(1.0 + mu, 1.5) * b - (2.0 / 3.0) * 7.2 * a * b;
}

double soliton_energy_dmu(double mu, const ModelParams& m) {
  // dE/dmu = -mu dM/dmu
  return -mu * soliton_mass_dmu(mu, m);
}

namespace {
double trapezoid(double half_width, int n, const std::function<double(double)>& f) {
  GridFunction g = sample(2.0 * half_width, n, f);
  return integral(g);
}
}  // namespace

IdentityReport identity_suite(const ModelParams& m, double half_width, int n) {
  m.validate();
  if (half_width < 60.0)
    throw std::invalid_argument("identity_suite: half_width must be >= 60");
  const double l = m.lambda;
  const double P = 15.0 + 10.0 * l - l * l;
  IdentityReport rep;
  auto add = [&](const std::string& name, double dev) {
    rep.items.push_back({name, std::abs(dev)});
    rep.max_deviation = std::max(rep.max_deviation, std::abs(dev));
  };

  auto lam_q = [&](double x) {
    return base_wave(x) + 0.5 * (1.0 - l) * x * base_wave_dx(x);
  };
  auto lam_q_dx = [&](double x) {
    return base_wave_dx(x) +
           0.5 * (1.0 - l) * (base_wave_dx(x) + x * base_wave_dxx(x));
  };
  auto lam_q_dxx = [&](double x) {
    return base_wave_dxx(x) +
           0.5 * (1.0 - l) * (2.0 * base_wave_dxx(x) + x * base_wave_dxxx(x));
  };

  add("int Q = 6", trapezoid(half_width, n, base_wave) - 6.0);
  add("int Q^2 = 6", trapezoid(half_width, n, [](double x) {
        double q = base_wave(x);
        return q * q;
      }) - 6.0);
  add("int Q^3 = 7.2", trapezoid(half_width, n, [](double x) {
        double q = base_wave(x);
        return q * q * q;
      }) - 7.2);
  add("int Q'^2 = 1.2", trapezoid(half_width, n, [](double x) {
        double qp = base_wave_dx(x);
        return qp * qp;
      }) - 1.2);
  add("int dmuQ = 3(1+lambda)", trapezoid(half_width, n, lam_q) - 3.0 * (1.0 + l));
  add("int Q dmuQ = 1.5(3+lambda)",
      trapezoid(half_width, n, [&](double x) { return base_wave(x) * lam_q(x); }) -
          1.5 * (3.0 + l));
  add("int [(1-l dxx) dmuQ] Q = 0.3 P",
      trapezoid(half_width, n,
                [&](double x) {
                  return (lam_q(x) - l * lam_q_dxx(x)) * base_wave(x);
                }) -
          0.3 * P);
  add("10 int e^{-x}Q^3 = 9 int e^{-x}Q^2",
      trapezoid(half_width, n,
                [](double x) {
                  double q = base_wave(x);
                  return std::exp(-x) * q * q * (10.0 * q - 9.0);
                }));

  // pointwise identities on [-30, 30], step 0.05
  double d56a = 0, d56b = 0, d57 = 0, dqpq = 0, dls = 0, dlim = 0;
  for (double x = -30.0; x <= 30.0 + 1e-12; x += 0.05) {
    const double q = base_wave(x), qp = base_wave_dx(x);
    d56a = std::max(d56a, std::abs(q - qp - std::exp(x) * (q + qp)));
    const double ex = std::exp(x);
    d56a = std::max(d56a,
                    std::abs(q - qp - 12.0 * ex * ex / std::pow(ex + 1.0, 3)));
    d56b = std::max(d56b, std::abs(std::exp(-x) * q * q + q * q - 3.0 * (qp + q)));
    const double lhs57 =
        std::exp(-x) * (lam_q_dx(x) - lam_q(x) - 0.5 * (1.0 - l) * q);
    const double rhs57 = -0.5 * (3.0 - l) * (qp + q) +
                         0.5 * (1.0 - l) * x * (q * q - 2.0 * (qp + q));
    d57 = std::max(d57, std::abs(lhs57 - rhs57));
    // L(Q'/Q) = -(5/3)Q' + Q'/Q, second derivative of Q'/Q taken in
    // closed form independent of the relation (Q'/Q)' = -Q/3
    const double t = std::tanh(0.5 * x), s2 = 1.0 - t * t;
    const double ls = -t;                  // Q'/Q
    const double ls_dd = 0.5 * s2 * t;     // (Q'/Q)''
    const double Lls = -ls_dd + ls - 2.0 * q * ls;
    dqpq = std::max(dqpq, std::abs(Lls - (-(5.0 / 3.0) * qp + ls)));
    dls = std::max(dls, std::abs(log_slope(x) - (qp / q)));
  }
  dlim = std::max(std::abs(log_slope(-500.0) - 1.0), std::abs(log_slope(500.0) + 1.0));
  add("pointwise Q-Q' = e^x(Q+Q')", d56a);
  add("pointwise e^{-x}Q^2 = -Q^2+3(Q'+Q)", d56b);
  add("pointwise weighted dmuQ relation", d57);
  add("pointwise L(Q'/Q) = -(5/3)Q' + Q'/Q", dqpq);
  add("pointwise Q'/Q = -tanh(x/2)", dls);
  add("limits of Q'/Q at +-inf", dlim);

  // scaling of int Q_mu^2 against the closed form
  double dsc = 0.0;
  for (double mu : {-0.2, 0.0, 0.2}) {
    SolitonParams p{mu, 0.0};
    const double quad = trapezoid(half_width, n, [&](double x) {
      double r = soliton_profile(p, m, x);
      return r * r;
    });
    dsc = std::max(dsc, std::abs(quad - soliton_l2sq(mu, m)));
  }
  add("int Q_mu^2 scaling law", dsc);

  return rep;
}

double check_antecedent_identity(double y1, double y2, double half_width, int n) {
  if (y1 - y2 < 2.0)
    throw std::invalid_argument("check_antecedent_identity: need y1 - y2 >= 2");
  const double y = y1 - y2;
  GridFunction f(2.0 * half_width, n);
  GridFunction r1g(2.0 * half_width, n), r2g(2.0 * half_width, n);
  for (int i = 0; i < n; ++i) {
    const double x = f.x(i);
    const double x1 = x - y1, x2 = x - y2;
    r1g.v[i] = base_wave(x1);
    r2g.v[i] = base_wave(x2);
    f.v[i] = (x1 + x2) * r1g.v[i] * r2g.v[i];
  }
  // left side: d_x(-f'' + f - 2(R1+R2) f) by spectral differentiation
  GridFunction fdd = derivative(f, 2);
  GridFunction inner_expr(2.0 * half_width, n);
  for (int i = 0; i < n; ++i)
    inner_expr.v[i] = -fdd.v[i] + f.v[i] - 2.0 * (r1g.v[i] + r2g.v[i]) * f.v[i];
  GridFunction lhs = derivative(inner_expr, 1);

  double dev = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = f.x(i);
    const double x1 = x - y1, x2 = x - y2;
    const double R1 = base_wave(x1), R2 = base_wave(x2);
    const double R1p = base_wave_dx(x1), R2p = base_wave_dx(x2);
    const double dR1sq = 2.0 * R1 * R1p, dR2sq = 2.0 * R2 * R2p;
    double rhs = 2.0 * R1 * R2;
    rhs += -y * (3.0 * (R1p - R1) + dR1sq) * R2 + y * R1 * R1 * R2p;
    rhs += y * (3.0 * (R2p + R2) + dR2sq) * R1 - y * R2 * R2 * R1p;
    rhs += 2.0 * (R1 * R1 - x1 * dR1sq - 3.0 * x1 * (R1p - R1) - 3.0 * (R1 - R1p)) * R2;
    rhs += 2.0 * (x1 * R1 * R1 - 3.0 * (R1p - R1)) * R2p;
    rhs += 2.0 * (R2 * R2 - x2 * dR2sq - 3.0 * x2 * (R2p + R2) - 3.0 * (R2 + R2p)) * R1;
    rhs += 2.0 * (x2 * R2 * R2 - 3.0 * (R2p + R2)) * R1p;
    dev = std::max(dev, std::abs(lhs.v[i] - rhs));
  }
  return dev;
}

double mu_of_speed(double c, double lambda) {
  return (c * (1.0 - lambda) - 1.0) / lambda;
}

TransformResult bbmc_to_bbm(double c1, double c2, double x1, double x2) {
  if (!(c1 > 1.0) || !(c2 > 1.0))
    throw std::invalid_argument("bbmc_to_bbm: speeds must exceed 1");
  if (!(c1 <= c2)) throw std::invalid_argument("bbmc_to_bbm: need c1 <= c2");
  TransformResult r;
  r.cbar = 0.5 * (c1 + c2);
  r.model.lambda = (r.cbar - 1.0) / r.cbar;
  r.mu0 = (c2 - r.cbar) / (r.cbar - 1.0);
  const double sl = std::sqrt(r.model.lambda);
  r.y1 = x1 * sl;
  r.y2 = x2 * sl;
  return r;
}

void coordinate_map(double t, double x, double lambda, double& tp, double& xp) {
  xp = std::sqrt(lambda) * (x - t / (1.0 - lambda));
  tp = std::pow(lambda, 1.5) / (1.0 - lambda) * t;
}

double mapped_c_soliton(double c, double x0, double lambda, double tp, double xp) {
  const double amp = (1.0 - lambda) / lambda * (c - 1.0);
  const double arg = std::pow(lambda, -0.5) * xp +
                     std::pow(lambda, -1.5) * (1.0 - c * (1.0 - lambda)) * tp - x0;
  return amp * base_wave(std::sqrt((c - 1.0) / c) * arg);
}

}  // namespace bbmlab
