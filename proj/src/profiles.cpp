#include "bbmlab/profiles.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>

namespace bbmlab {

double Profile::tail(double x) const {
  switch (kind) {
    case TailKind::none: return 0.0;
    case TailKind::odd: return tail_coeff * log_slope(x);
    case TailKind::shifted: return tail_coeff * (1.0 + log_slope(x));
  }
  return 0.0;
}

double Profile::tail_dx(double x) const {
  if (kind == TailKind::none) return 0.0;
  return tail_coeff * (-base_wave(x) / 3.0);  // (Q'/Q)' = -Q/3
}

double Profile::eval(double x) const {
  return interp_uniform(decaying, x, 0.0) + tail(x);
}

double Profile::eval_dx(double x) const {
  return interp_uniform(decaying_dx, x, 0.0) + tail_dx(x);
}

double Profile::limit_left() const {
  if (kind == TailKind::odd) return tail_coeff;           // Q'/Q -> +1
  if (kind == TailKind::shifted) return 2.0 * tail_coeff;  // 1+Q'/Q -> 2
  return 0.0;
}

double Profile::limit_right() const {
  if (kind == TailKind::odd) return -tail_coeff;
  return 0.0;  // shifted tail vanishes to the right
}

GridFunction Profile::full_on_grid() const {
  GridFunction out = decaying;
  for (int i = 0; i < out.n; ++i) out.v[i] += tail(out.x(i));
  return out;
}

double alpha_closed_form(double l) { return 240.0 / (15.0 + 10.0 * l - l * l); }
double theta_A_closed_form(double l) {
  return 36.0 * (5.0 - l * l) / (15.0 + 10.0 * l - l * l);
}
double beta_closed_form(double l) {
  return 120.0 * (1.0 - l) / (15.0 + 10.0 * l - l * l);
}
double theta_B_closed_form(double l) {
  return 144.0 * l * l / (15.0 + 10.0 * l - l * l);
}
double theta_closed_form(double l) {
  return (1.0 + l) * (5.0 - 10.0 * l + l * l) / (15.0 + 10.0 * l - l * l);
}

double theta_consistency(double l) {
  const double via_tail = 1.0 - l - theta_A_closed_form(l) / 18.0;
  return std::abs(via_tail - theta_closed_form(l));
}

// -- source terms --

double source_f_right(double l, double x) {
  const double q = base_wave(x), qp = base_wave_dx(x);
  return 6.0 * (1.0 - l) * (-(qp + q) + x * (q * q - 3.0 * (qp + q)));
}

double source_f_left(double l, double x) {
  const double q = base_wave(x), qp = base_wave_dx(x);
  return 6.0 * (1.0 - l) * ((q - qp) + x * (q * q - 3.0 * (q - qp)));
}

double source_q_right(double l, double x) {
  const double th = theta_closed_form(l);
  const double q = base_wave(x), qp = base_wave_dx(x);
  const double dq2 = 2.0 * q * qp;
  const double ex = std::exp(-x);
  const double t1 = q * q - x * dq2 - 3.0 * x * (qp - q) - 3.0 * (q - qp);
  const double t2 = x * q * q - 3.0 * (qp - q);
  return -12.0 * th * ex * t1 + 12.0 * th * ex * t2;
}

double source_q_left(double l, double x) {
  const double th = theta_closed_form(l);
  const double q = base_wave(x), qp = base_wave_dx(x);
  const double dq2 = 2.0 * q * qp;
  const double ex = std::exp(x);
  const double t1 = q * q - x * dq2 - 3.0 * x * (qp + q) - 3.0 * (q + qp);
  const double t2 = x * q * q - 3.0 * (qp + q);
  return 12.0 * th * ex * t1 + 12.0 * th * ex * t2;
}

// The product cross term between the solitons cancels only up to the
// weighted second derivative: the translation motion of the outer layer
// enters through (1 - l dxx), which leaves l d_xx of the product behind.
// Its one-sided asymptotics ride on each soliton.
double source_cross_right(double l, double theta_A, double x) {
  const double q = base_wave(x), qp = base_wave_dx(x);
  const double qpp = base_wave_dxx(x);
  return (2.0 / 3.0) * l * theta_A * std::exp(-x) * (qpp - 2.0 * qp + q);
}

double source_cross_left(double l, double theta_A, double x) {
  const double q = base_wave(x), qp = base_wave_dx(x);
  const double qpp = base_wave_dxx(x);
  return -(2.0 / 3.0) * l * theta_A * std::exp(x) * (qpp + 2.0 * qp + q);
}

namespace {

struct BuilderContext {
  OperatorConfig cfg;
  LinearizedOperator* op = nullptr;
  double lambda = 0.0;
  // lambda-dependent exact grids
  GridFunction q, qp, lamq, lamq_dx, pl_lamq, pl_q, pl_qp;
  double I_PL = 0, int_q = 0, int_lamq = 0, int_q2 = 0;
  double J_qq = 0, J_kk = 0;

  GridFunction grid() const { return GridFunction(2.0 * cfg.half_width, cfg.n); }

  void prepare(double l) {
    lambda = l;
    const double L = 2.0 * cfg.half_width;
    const int n = cfg.n;
    q = sample(L, n, base_wave);
    qp = sample(L, n, base_wave_dx);
    const ModelParams m{l};
    const SolitonParams p0{0.0, 0.0};
    lamq = sample(L, n, [&](double x) { return mu_deriv_profile(p0, m, x); });
    lamq_dx = sample(L, n, [&](double x) { return mu_deriv_profile_dx(p0, m, x); });
    pl_lamq = sample(L, n, [&](double x) {
      return mu_deriv_profile(p0, m, x) - l * mu_deriv_profile_dxx(p0, m, x);
    });
    pl_q = sample(L, n, [&](double x) { return base_wave(x) - l * base_wave_dxx(x); });
    pl_qp = sample(L, n,
                   [&](double x) { return base_wave_dx(x) - l * base_wave_dxxx(x); });
    I_PL = inner(pl_lamq, q);
    int_q = integral(q);
    int_lamq = integral(lamq);
    int_q2 = inner(q, q);
    GridFunction ls = sample(L, n, log_slope);
    J_qq = inner(ls, pl_qp);
    J_kk = inner(qp, pl_qp);
  }

  // (-L tail)' for the two tail shapes, in closed form
  GridFunction neg_l_tail_dx(TailKind kind, double coeff) const {
    GridFunction out = grid();
    for (int i = 0; i < out.n; ++i) {
      const double x = out.x(i);
      const double qq = base_wave(x), qqp = base_wave_dx(x);
      double val = 2.0 * qq - (5.0 / 3.0) * qq * qq;  // (-L(Q'/Q))'
      if (kind == TailKind::shifted) val += 2.0 * qqp;  // (-L(1))' = 2Q'
      out.v[i] = coeff * val;
    }
    return out;
  }

  struct Solved {
    Profile prof;
    double ck;       // translation-shift coefficient (a, b_j, d_j)
    double balance;  // int(rhs)Q' before the solve (should vanish)
  };

  /// Solves (-L P)' + ck (1-l dxx)Q' = rhs_total for P = hat + tail, where
  /// rhs_total already excludes the unknown-ck term; the tail is fixed by
  /// the caller.  even_extra * int_q enters the even normalization.
  Solved solve_profile(const GridFunction& rhs, TailKind kind, double tail_coeff,
                       double even_extra) {
    Solved s;
    GridFunction reduced = rhs - neg_l_tail_dx(kind, tail_coeff);
    auto anti = op->integrate_from_left(reduced);
    s.balance = inner(anti.z, qp);
    GridFunction negz(anti.z);
    for (double& x : negz.v) x = -x;
    GridFunction w = op->solve(negz, lambda);
    const double ck = (inner(w, pl_q) + even_extra * int_q) / I_PL;
    const double qq_coeff = tail_coeff;  // coefficient of Q'/Q inside the tail
    const double kappa = -qq_coeff * J_qq / J_kk;
    Profile prof;
    prof.kind = kind;
    prof.tail_coeff = tail_coeff;
    prof.decaying = grid();
    for (int i = 0; i < prof.decaying.n; ++i)
      prof.decaying.v[i] = w.v[i] - ck * lamq.v[i] + kappa * qp.v[i];
    prof.decaying_dx = derivative(prof.decaying, 1);
    s.prof = std::move(prof);
    s.ck = ck;
    return s;
  }

  /// Linf residual of (-L P)' + cl*(1-l dxx)dmuQ + ck*(1-l dxx)Q'
  ///                  + extra_qp*Q' - rhs  (the profile equation).
  double equation_residual(const Profile& p, double cl, double ck, double extra_qp,
                           const GridFunction& rhs) const {
    GridFunction lp = op->apply(p.decaying, 0.0, 0.0);
    GridFunction dlp = derivative(lp, 1);  // (L hat)'
    double dev = 0.0;
    for (int i = 0; i < dlp.n; ++i) {
      const double x = dlp.x(i);
      const double qq = base_wave(x), qqp = base_wave_dx(x);
      double neg_l_p_dx = -dlp.v[i];
      if (p.kind != TailKind::none) {
        double val = 2.0 * qq - (5.0 / 3.0) * qq * qq;
        if (p.kind == TailKind::shifted) val += 2.0 * qqp;
        neg_l_p_dx += p.tail_coeff * val;
      }
      const double lhs = neg_l_p_dx + cl * pl_lamq.v[i] + ck * pl_qp.v[i] +
                         extra_qp * qqp;
      dev = std::max(dev, std::abs(lhs - rhs.v[i]));
    }
    return dev;
  }

  double ortho_even(const Profile& p, double shift_const) const {
    // int (P + shift_const)(1-l dxx)Q
    GridFunction full = p.full_on_grid();
    return inner(full, pl_q) + shift_const * int_q;
  }

  double ortho_odd(const Profile& p) const {
    GridFunction full = p.full_on_grid();
    return inner(full, pl_qp);
  }
};

std::map<std::pair<double, int>, std::shared_ptr<LinearizedOperator>> g_op_cache;
std::mutex g_op_mutex;

std::shared_ptr<LinearizedOperator> shared_operator(const OperatorConfig& cfg) {
  std::lock_guard<std::mutex> lock(g_op_mutex);
  auto key = std::make_pair(cfg.half_width, cfg.n);
  auto it = g_op_cache.find(key);
  if (it != g_op_cache.end()) return it->second;
  OperatorConfig c = cfg;
  c.lambda = 0.0;
  auto op = std::make_shared<LinearizedOperator>(c);
  g_op_cache[key] = op;
  return op;
}

}  // namespace

ProfileFamily build_family(double lambda, const OperatorConfig& grid_cfg) {
  if (!(lambda >= 0.0 && lambda < 1.0))
    throw std::invalid_argument("build_family: lambda in [0,1)");
  auto op_shared = shared_operator(grid_cfg);

  BuilderContext ctx;
  ctx.cfg = grid_cfg;
  ctx.op = op_shared.get();
  ctx.prepare(lambda);

  ProfileFamily fam;
  fam.lambda = lambda;
  fam.half_width = grid_cfg.half_width;
  fam.n = grid_cfg.n;
  const double l = lambda;
  auto& rec = fam.recovery;
  const GridFunction proto = ctx.grid();
  const int n = proto.n;

  // ---- outer layer: alpha, theta_A, a ----
  rec.alpha_quad = 12.0 * ctx.int_q2 / ctx.I_PL;
  rec.alpha_closed = alpha_closed_form(l);
  fam.alpha = rec.alpha_quad;

  GridFunction mean_part(proto);
  for (int i = 0; i < n; ++i)
    mean_part.v[i] = -fam.alpha * ctx.pl_lamq.v[i] + 12.0 * ctx.q.v[i];
  rec.theta_A_quad = 0.5 * integral(mean_part);
  rec.theta_A_closed = theta_A_closed_form(l);
  fam.theta_A = rec.theta_A_quad;
  fam.theta = 1.0 - l - fam.theta_A / 18.0;
  rec.theta_formula_dev = theta_consistency(l);

  // right-hand side of the full outer-profile equation, without the
  // unknown translation term; the solver moves the tail over by itself
  GridFunction rhs_a(proto);
  for (int i = 0; i < n; ++i) {
    const double qq = ctx.q.v[i], qqp = ctx.qp.v[i];
    rhs_a.v[i] = -fam.alpha * ctx.pl_lamq.v[i] + 12.0 * (qq + qqp) -
                 2.0 * fam.theta_A * qqp;
  }
  auto sa = ctx.solve_profile(rhs_a, TailKind::odd, fam.theta_A, fam.theta_A);
  fam.A1 = sa.prof;
  fam.a = sa.ck;
  rec.kernel_balance_max = std::abs(sa.balance);

  // mirror image A2(x) = A1(-x)
  fam.A2.kind = TailKind::odd;
  fam.A2.tail_coeff = -fam.theta_A;
  fam.A2.decaying = reflect(fam.A1.decaying);
  fam.A2.decaying_dx = derivative(fam.A2.decaying, 1);
  {
    GridFunction a2g = fam.A2.full_on_grid();
    GridFunction a1g = fam.A1.full_on_grid();
    double dev = 0.0;
    // i = 0 is the seam point x = -L, its own mirror image modulo the
    // wrap; the odd tail is two-valued there, so skip it
    for (int i = 1; i < n; ++i) {
      const double mirrored = a1g.v[n - i];
      dev = std::max(dev, std::abs(a2g.v[i] - mirrored));
    }
    rec.mirror_dev = dev;
  }
  // residual of the A1 equation: rhs excludes the a-term
  {
    GridFunction rhs_full(proto);
    for (int i = 0; i < n; ++i) {
      const double qq = ctx.q.v[i], qqp = ctx.qp.v[i];
      rhs_full.v[i] = 12.0 * (qq + qqp);
    }
    rec.eq_residual_max = std::max(
        rec.eq_residual_max,
        ctx.equation_residual(fam.A1, fam.alpha, fam.a, 2.0 * fam.theta_A, rhs_full));
  }
  rec.ortho_max = std::max({std::abs(ctx.ortho_odd(fam.A1)),
                            std::abs(ctx.ortho_even(fam.A1, fam.theta_A))});

  // ---- middle layer: beta, theta_B, b1, b2 ----
  GridFunction zsrc(proto);
  for (int i = 0; i < n; ++i) {
    const double x = zsrc.x(i);
    const double qq = ctx.q.v[i], qqp = ctx.qp.v[i];
    const double middle = 3.0 * (qq - qqp) - 2.0 * qq * qqp - qq * qq;
    zsrc.v[i] = 6.0 * (1.0 - l) * (qq + qqp) + 6.0 * fam.theta * std::exp(-x) * middle;
  }
  rec.beta_quad = inner(zsrc, ctx.q) / ctx.I_PL;
  rec.beta_closed = beta_closed_form(l);
  fam.beta = rec.beta_quad;
  const double int_z = integral(zsrc);
  rec.theta_B_quad = 0.5 * (int_z - fam.beta * ctx.int_lamq);
  rec.theta_B_closed = theta_B_closed_form(l);
  fam.theta_B = rec.theta_B_quad;

  GridFunction rhs_b1(proto);
  for (int i = 0; i < n; ++i)
    rhs_b1.v[i] = zsrc.v[i] - fam.beta * ctx.pl_lamq.v[i];
  auto sb1 = ctx.solve_profile(rhs_b1, TailKind::shifted, fam.theta_B, fam.theta_B);
  fam.B1 = sb1.prof;
  fam.b1 = sb1.ck;
  rec.kernel_balance_max = std::max(rec.kernel_balance_max, std::abs(sb1.balance));

  GridFunction zrefl = reflect(zsrc);
  GridFunction rhs_b2(proto);
  for (int i = 0; i < n; ++i)
    rhs_b2.v[i] = -zrefl.v[i] + 4.0 * fam.theta_B * ctx.qp.v[i] +
                  fam.beta * ctx.pl_lamq.v[i];
  auto sb2 = ctx.solve_profile(rhs_b2, TailKind::shifted, -fam.theta_B,
                               -3.0 * fam.theta_B);
  fam.B2 = sb2.prof;
  fam.b2 = sb2.ck;
  rec.kernel_balance_max = std::max(rec.kernel_balance_max, std::abs(sb2.balance));

  rec.eq_residual_max = std::max(
      rec.eq_residual_max, ctx.equation_residual(fam.B1, fam.beta, fam.b1, 0.0, zsrc));
  {
    GridFunction rhs_full(proto);
    for (int i = 0; i < n; ++i) rhs_full.v[i] = -zrefl.v[i];
    rec.eq_residual_max = std::max(
        rec.eq_residual_max,
        ctx.equation_residual(fam.B2, -fam.beta, fam.b2, -4.0 * fam.theta_B, rhs_full));
  }
  rec.ortho_max = std::max({rec.ortho_max, std::abs(ctx.ortho_odd(fam.B1)),
                            std::abs(ctx.ortho_even(fam.B1, 0.0)),
                            std::abs(ctx.ortho_odd(fam.B2)),
                            std::abs(ctx.ortho_even(fam.B2, -2.0 * fam.theta_B))});
  // pairing identity for b1-b2 (independent route)
  rec.b_diff_pairing = -12.0 * fam.theta_B * (1.0 + l) / ctx.I_PL;

  // ---- inner layer: sources, delta, theta_D, d1, d2 ----
  // S1 = 2 (dmuQ (A1+theta_A))' - (1-l dxx)[(2/3) theta_A Q + 2 hatA1 + A1'];
  // the translation motion of the outer layer carries the Helmholtz weight,
  // so everything it leaves behind is (1-l dxx)-dressed
  GridFunction a1_full = fam.A1.full_on_grid();
  GridFunction a1_dx(proto);
  for (int i = 0; i < n; ++i)
    a1_dx.v[i] = fam.A1.decaying_dx.v[i] - fam.theta_A * ctx.q.v[i] / 3.0;
  GridFunction prod_dx(proto);
  for (int i = 0; i < n; ++i)
    prod_dx.v[i] = ctx.lamq_dx.v[i] * (a1_full.v[i] + fam.theta_A) +
                   ctx.lamq.v[i] * a1_dx.v[i];
  GridFunction dressed1(proto);
  for (int i = 0; i < n; ++i)
    dressed1.v[i] = (2.0 / 3.0) * fam.theta_A * ctx.q.v[i] +
                    2.0 * fam.A1.decaying.v[i] + a1_dx.v[i];
  dressed1 = helmholtz_apply(dressed1, l);
  GridFunction s1(proto);
  for (int i = 0; i < n; ++i)
    s1.v[i] = 2.0 * prod_dx.v[i] - dressed1.v[i];
  // independent construction of the mirrored source for the antisymmetry check
  GridFunction a2_full = fam.A2.full_on_grid();
  GridFunction a2_dx(proto);
  for (int i = 0; i < n; ++i)
    a2_dx.v[i] = fam.A2.decaying_dx.v[i] + fam.theta_A * ctx.q.v[i] / 3.0;
  GridFunction dressed2(proto);
  for (int i = 0; i < n; ++i)
    dressed2.v[i] = (2.0 / 3.0) * fam.theta_A * ctx.q.v[i] +
                    2.0 * fam.A2.decaying.v[i] - a2_dx.v[i];
  dressed2 = helmholtz_apply(dressed2, l);
  GridFunction s2(proto);
  for (int i = 0; i < n; ++i) {
    const double p2 = ctx.lamq_dx.v[i] * (a2_full.v[i] + fam.theta_A) +
                      ctx.lamq.v[i] * a2_dx.v[i];
    s2.v[i] = 2.0 * p2 + dressed2.v[i];
  }
  {
    double dev = 0.0;
    for (int i = 1; i < n; ++i)
      dev = std::max(dev, std::abs(s2.v[i] + s1.v[n - i]));
    rec.source_antisym_max = dev;
    for (int i = 0; i < n; ++i) {
      const double x = proto.x(i);
      rec.source_antisym_max =
          std::max(rec.source_antisym_max,
                   std::abs(source_f_left(l, x) + source_f_right(l, -x)));
      rec.source_antisym_max =
          std::max(rec.source_antisym_max,
                   std::abs(source_q_left(l, x) + source_q_right(l, -x)));
      rec.source_antisym_max =
          std::max(rec.source_antisym_max,
                   std::abs(source_cross_left(l, fam.theta_A, x) +
                            source_cross_right(l, fam.theta_A, -x)));
    }
  }

  GridFunction ssum(proto);
  {
    const ModelParams m{l};
    const SolitonParams p0{0.0, 0.0};
    GridFunction g(proto);
    for (int i = 0; i < n; ++i) {
      const double x = g.x(i);
      g.v[i] = fam.alpha * mu_deriv2_profile(p0, m, x) +
               fam.a * mu_deriv_profile_dx(p0, m, x);
    }
    GridFunction plg = helmholtz_apply(g, l);
    for (int i = 0; i < n; ++i) {
      const double x = g.x(i);
      ssum.v[i] = -source_f_right(l, x) - s1.v[i] - source_q_right(l, x) -
                  source_cross_right(l, fam.theta_A, x) - plg.v[i];
    }
  }
  fam.delta = inner(ssum, ctx.q) / ctx.I_PL;
  fam.theta_D = 0.5 * (integral(ssum) - fam.delta * ctx.int_lamq);

  GridFunction rhs_d1(proto);
  for (int i = 0; i < n; ++i)
    rhs_d1.v[i] = ssum.v[i] - fam.delta * ctx.pl_lamq.v[i];
  auto sd1 = ctx.solve_profile(rhs_d1, TailKind::shifted, fam.theta_D, fam.theta_D);
  fam.D1 = sd1.prof;
  fam.d1 = sd1.ck;
  rec.kernel_balance_max = std::max(rec.kernel_balance_max, std::abs(sd1.balance));

  GridFunction srefl = reflect(ssum);
  GridFunction rhs_d2(proto);
  for (int i = 0; i < n; ++i)
    rhs_d2.v[i] = -srefl.v[i] + 4.0 * fam.theta_D * ctx.qp.v[i] +
                  fam.delta * ctx.pl_lamq.v[i];
  auto sd2 = ctx.solve_profile(rhs_d2, TailKind::shifted, -fam.theta_D,
                               -3.0 * fam.theta_D);
  fam.D2 = sd2.prof;
  fam.d2 = sd2.ck;
  rec.kernel_balance_max = std::max(rec.kernel_balance_max, std::abs(sd2.balance));

  rec.eq_residual_max = std::max(
      rec.eq_residual_max,
      ctx.equation_residual(fam.D1, fam.delta, fam.d1, 0.0, ssum));
  {
    GridFunction rhs_full(proto);
    for (int i = 0; i < n; ++i) rhs_full.v[i] = -srefl.v[i];
    rec.eq_residual_max = std::max(
        rec.eq_residual_max,
        ctx.equation_residual(fam.D2, -fam.delta, fam.d2, -4.0 * fam.theta_D,
                              rhs_full));
  }
  rec.ortho_max = std::max({rec.ortho_max, std::abs(ctx.ortho_odd(fam.D1)),
                            std::abs(ctx.ortho_even(fam.D1, 0.0)),
                            std::abs(ctx.ortho_odd(fam.D2)),
                            std::abs(ctx.ortho_even(fam.D2, -2.0 * fam.theta_D))});
  rec.d_diff_pairing = -12.0 * fam.theta_D * (1.0 + l) / ctx.I_PL;

  return fam;
}

// -- serialization --

namespace {
json profile_to_json(const Profile& p) {
  json j;
  j["tail_kind"] = p.kind == TailKind::none ? "none"
                   : p.kind == TailKind::odd ? "odd"
                                             : "shifted";
  j["tail_coeff"] = p.tail_coeff;
  j["decaying"] = p.decaying.v;
  return j;
}

Profile profile_from_json(const json& j, double length, int n) {
  Profile p;
  const std::string k = j.at("tail_kind");
  p.kind = k == "none" ? TailKind::none : k == "odd" ? TailKind::odd : TailKind::shifted;
  p.tail_coeff = j.at("tail_coeff");
  p.decaying = GridFunction(length, n);
  p.decaying.v = j.at("decaying").get<std::vector<double>>();
  if ((int)p.decaying.v.size() != n)
    throw std::runtime_error("profile_from_json: sample count mismatch");
  p.decaying_dx = derivative(p.decaying, 1);
  return p;
}
}  // namespace

json ProfileFamily::to_json() const {
  json j;
  j["schema_version"] = 1;
  j["lambda"] = lambda;
  j["grid"] = {{"half_width", half_width}, {"n", n}};
  j["constants"] = {{"alpha", alpha},     {"beta", beta},
                    {"delta", delta},     {"a", a},
                    {"b1", b1},           {"b2", b2},
                    {"d1", d1},           {"d2", d2},
                    {"theta", theta},     {"theta_A", theta_A},
                    {"theta_B", theta_B}, {"theta_D", theta_D}};
  j["recovery"] = {{"alpha_quad", recovery.alpha_quad},
                   {"theta_A_quad", recovery.theta_A_quad},
                   {"beta_quad", recovery.beta_quad},
                   {"theta_B_quad", recovery.theta_B_quad},
                   {"theta_formula_dev", recovery.theta_formula_dev},
                   {"b_diff_pairing", recovery.b_diff_pairing},
                   {"d_diff_pairing", recovery.d_diff_pairing},
                   {"ortho_max", recovery.ortho_max},
                   {"eq_residual_max", recovery.eq_residual_max},
                   {"source_antisym_max", recovery.source_antisym_max},
                   {"mirror_dev", recovery.mirror_dev}};
  j["profiles"] = {{"A1", profile_to_json(A1)}, {"A2", profile_to_json(A2)},
                   {"B1", profile_to_json(B1)}, {"B2", profile_to_json(B2)},
                   {"D1", profile_to_json(D1)}, {"D2", profile_to_json(D2)}};
  return j;
}

ProfileFamily ProfileFamily::from_json(const json& j) {
  if (j.at("schema_version").get<int>() != 1)
    throw std::runtime_error("ProfileFamily: unknown schema version");
  ProfileFamily f;
  f.lambda = j.at("lambda");
  f.half_width = j.at("grid").at("half_width");
  f.n = j.at("grid").at("n");
  const auto& c = j.at("constants");
  f.alpha = c.at("alpha");
  f.beta = c.at("beta");
  f.delta = c.at("delta");
  f.a = c.at("a");
  f.b1 = c.at("b1");
  f.b2 = c.at("b2");
  f.d1 = c.at("d1");
  f.d2 = c.at("d2");
  f.theta = c.at("theta");
  f.theta_A = c.at("theta_A");
  f.theta_B = c.at("theta_B");
  f.theta_D = c.at("theta_D");
  const double L = 2.0 * f.half_width;
  f.A1 = profile_from_json(j.at("profiles").at("A1"), L, f.n);
  f.A2 = profile_from_json(j.at("profiles").at("A2"), L, f.n);
  f.B1 = profile_from_json(j.at("profiles").at("B1"), L, f.n);
  f.B2 = profile_from_json(j.at("profiles").at("B2"), L, f.n);
  f.D1 = profile_from_json(j.at("profiles").at("D1"), L, f.n);
  f.D2 = profile_from_json(j.at("profiles").at("D2"), L, f.n);
  return f;
}

// -- ansatz --

void AnsatzState::validate(double alpha) const {
  const double y = gamma.separation();
  if (!(y >= Y0 - 1.0 - 1e-12))
    throw std::invalid_argument("AnsatzState: separation below Y0 - 1");
  const double mu0 = speed_from_apex(Y0, alpha);
  if (std::abs(gamma.mu1) > 2.0 * mu0 + 1e-15 ||
      std::abs(gamma.mu2) > 2.0 * mu0 + 1e-15)
    throw std::invalid_argument("AnsatzState: speed parameter outside window");
  if (std::abs(gamma.mu1 + gamma.mu2) > Y0 * Y0 * std::exp(-Y0) + 1e-15)
    throw std::invalid_argument("AnsatzState: speed sum outside window");
  if (std::abs(gamma.y1 + gamma.y2) > std::pow(Y0, 4) * std::exp(-0.5 * Y0) + 1e-15)
    throw std::invalid_argument("AnsatzState: center sum outside window");
}

double psi_cutoff(double s) {
  if (s <= 0.0) return 0.0;
  if (s >= 0.5) return 1.0;
  const double g1 = std::exp(-1.0 / (2.0 * s));
  const double g2 = std::exp(-1.0 / (1.0 - 2.0 * s));
  return g1 / (g1 + g2);
}

double ansatz_uncut(const ProfileFamily& fam, const PairParams& g, double x) {
  const ModelParams m{fam.lambda};
  const double y = g.separation();
  const double ey = std::exp(-y);
  const SolitonParams p1{g.mu1, g.y1}, p2{g.mu2, g.y2};
  const double x1 = x - g.y1, x2 = x - g.y2;
  double v = soliton_profile(p1, m, x) + soliton_profile(p2, m, x);
  v += ey * (fam.A1.eval(x1) + fam.A2.eval(x2));
  v += fam.theta * (g.mu1 - g.mu2) * x * base_wave(x1) * base_wave(x2);
  v += y * ey * (g.mu1 * fam.B1.eval(x1) + g.mu2 * fam.B2.eval(x2));
  v += ey * (g.mu1 * fam.D1.eval(x1) + g.mu2 * fam.D2.eval(x2));
  return v;
}

double ansatz_uncut_dparam(const ProfileFamily& fam, const PairParams& g, int p,
                           double x) {
  const ModelParams m{fam.lambda};
  const double y = g.separation();
  const double ey = std::exp(-y);
  const SolitonParams p1{g.mu1, g.y1}, p2{g.mu2, g.y2};
  const double x1 = x - g.y1, x2 = x - g.y2;
  const double r1 = base_wave(x1), r2 = base_wave(x2);
  switch (p) {
    case 0:  // mu1
      return mu_deriv_profile(p1, m, x) + fam.theta * x * r1 * r2 +
             y * ey * fam.B1.eval(x1) + ey * fam.D1.eval(x1);
    case 1:  // mu2
      return mu_deriv_profile(p2, m, x) - fam.theta * x * r1 * r2 +
             y * ey * fam.B2.eval(x2) + ey * fam.D2.eval(x2);
    case 2: {  // y1
      double v = -soliton_profile_dx(p1, m, x);
      v += -ey * (fam.A1.eval(x1) + fam.A2.eval(x2)) - ey * fam.A1.eval_dx(x1);
      v += -fam.theta * (g.mu1 - g.mu2) * x * base_wave_dx(x1) * r2;
      v += (1.0 - y) * ey * (g.mu1 * fam.B1.eval(x1) + g.mu2 * fam.B2.eval(x2)) -
           y * ey * g.mu1 * fam.B1.eval_dx(x1);
      v += -ey * (g.mu1 * fam.D1.eval(x1) + g.mu2 * fam.D2.eval(x2)) -
           ey * g.mu1 * fam.D1.eval_dx(x1);
      return v;
    }
    default: {  // y2
      double v = -soliton_profile_dx(p2, m, x);
      v += ey * (fam.A1.eval(x1) + fam.A2.eval(x2)) - ey * fam.A2.eval_dx(x2);
      v += -fam.theta * (g.mu1 - g.mu2) * x * r1 * base_wave_dx(x2);
      v += -(1.0 - y) * ey * (g.mu1 * fam.B1.eval(x1) + g.mu2 * fam.B2.eval(x2)) -
           y * ey * g.mu2 * fam.B2.eval_dx(x2);
      v += ey * (g.mu1 * fam.D1.eval(x1) + g.mu2 * fam.D2.eval(x2)) -
           ey * g.mu2 * fam.D2.eval_dx(x2);
      return v;
    }
  }
}

double ansatz_cut(const ProfileFamily& fam, const AnsatzState& s, double x,
                  bool validate) {
  if (validate) s.validate(fam.alpha);
  const double cut = psi_cutoff(std::exp(-0.5 * s.Y0) * x + 1.0);
  if (cut == 0.0) return 0.0;
  return ansatz_uncut(fam, s.gamma, x) * cut;
}

double ansatz_cut_dparam(const ProfileFamily& fam, const AnsatzState& s, int p,
                         double x) {
  const double cut = psi_cutoff(std::exp(-0.5 * s.Y0) * x + 1.0);
  if (cut == 0.0) return 0.0;
  return ansatz_uncut_dparam(fam, s.gamma, p, x) * cut;
}

GridFunction ansatz_cut_grid(const ProfileFamily& fam, const AnsatzState& s,
                             const GridFunction& proto, bool validate) {
  if (validate) s.validate(fam.alpha);
  GridFunction out(proto.length, proto.n);
  for (int i = 0; i < proto.n; ++i)
    out.v[i] = ansatz_cut(fam, s, proto.x(i), false);
  return out;
}

// -- residual scan --

namespace {

struct LayerGrids {
  GridFunction w;             // total correction W0
  GridFunction dw_dmu[2];     // dW0/dmu_j
  GridFunction dw_dy[2];      // dW0/dy_j
};

LayerGrids correction_layers(const ProfileFamily& fam, const PairParams& g,
                             const GridFunction& proto, bool include_d) {
  LayerGrids lg{proto, {proto, proto}, {proto, proto}};
  const double y = g.separation();
  const double ey = std::exp(-y);
  for (int i = 0; i < proto.n; ++i) {
    const double x = proto.x(i);
    const double x1 = x - g.y1, x2 = x - g.y2;
    const double a1 = fam.A1.eval(x1), a2 = fam.A2.eval(x2);
    const double a1p = fam.A1.eval_dx(x1), a2p = fam.A2.eval_dx(x2);
    const double b1 = fam.B1.eval(x1), b2 = fam.B2.eval(x2);
    const double b1p = fam.B1.eval_dx(x1), b2p = fam.B2.eval_dx(x2);
    const double d1 = include_d ? fam.D1.eval(x1) : 0.0;
    const double d2 = include_d ? fam.D2.eval(x2) : 0.0;
    const double d1p = include_d ? fam.D1.eval_dx(x1) : 0.0;
    const double d2p = include_d ? fam.D2.eval_dx(x2) : 0.0;
    const double r1 = base_wave(x1), r2 = base_wave(x2);
    const double r1p = base_wave_dx(x1), r2p = base_wave_dx(x2);

    const double wa = ey * (a1 + a2);
    const double wq = fam.theta * (g.mu1 - g.mu2) * x * r1 * r2;
    const double wb = y * ey * (g.mu1 * b1 + g.mu2 * b2);
    const double wd = ey * (g.mu1 * d1 + g.mu2 * d2);
    lg.w.v[i] = wa + wq + wb + wd;

    lg.dw_dmu[0].v[i] = fam.theta * x * r1 * r2 + y * ey * b1 + ey * d1;
    lg.dw_dmu[1].v[i] = -fam.theta * x * r1 * r2 + y * ey * b2 + ey * d2;

    lg.dw_dy[0].v[i] = -wa - ey * a1p
                       - fam.theta * (g.mu1 - g.mu2) * x * r1p * r2
                       + (1.0 - y) * ey * (g.mu1 * b1 + g.mu2 * b2) -
                       y * ey * g.mu1 * b1p
                       - wd - ey * g.mu1 * d1p;
    lg.dw_dy[1].v[i] = wa - ey * a2p
                       - fam.theta * (g.mu1 - g.mu2) * x * r1 * r2p
                       - (1.0 - y) * ey * (g.mu1 * b1 + g.mu2 * b2) -
                       y * ey * g.mu2 * b2p
                       + wd - ey * g.mu2 * d2p;
  }
  return lg;
}

struct ResidualGrids {
  GridFunction e0;
};

// Layered evaluation of the PDE residual: every summand is individually of
// the size of the residual itself, so no large cancellations occur and the
// roundoff floor stays far below the signal even at large separations.
GridFunction layered_residual(const ProfileFamily& fam, const PairParams& g,
                              const GridFunction& proto, bool include_d) {
  const ModelParams m{fam.lambda};
  const double l = fam.lambda;
  const double y = g.separation();
  const double ey = std::exp(-y);
  const OdeCoefficients c =
      include_d ? fam.ode_coefficients() : fam.ode_coefficients_no_d();
  const double M1 = c.alpha * ey + c.beta * g.mu1 * y * ey + c.delta * g.mu1 * ey;
  const double M2 =
      -(c.alpha * ey + c.beta * g.mu2 * y * ey + c.delta * g.mu2 * ey);
  const double N1 = c.a * ey + c.b1 * g.mu1 * y * ey + c.d1 * g.mu1 * ey;
  const double N2 = c.a * ey + c.b2 * g.mu2 * y * ey + c.d2 * g.mu2 * ey;

  const SolitonParams p1{g.mu1, g.y1}, p2{g.mu2, g.y2};
  LayerGrids lg = correction_layers(fam, g, proto, include_d);

  const int n = proto.n;
  GridFunction rt1(proto), rt2(proto);
  GridFunction base(proto);  // F + Ftilde, fully analytic
  for (int i = 0; i < n; ++i) {
    const double x = proto.x(i);
    rt1.v[i] = soliton_profile(p1, m, x);
    rt2.v[i] = soliton_profile(p2, m, x);
    const double dr1 = soliton_profile_dx(p1, m, x);
    const double dr2 = soliton_profile_dx(p2, m, x);
    const double f_term = 2.0 * (dr1 * rt2.v[i] + rt1.v[i] * dr2);
    const double pl_lam1 =
        mu_deriv_profile(p1, m, x) - l * mu_deriv_profile_dxx(p1, m, x);
    const double pl_lam2 =
        mu_deriv_profile(p2, m, x) - l * mu_deriv_profile_dxx(p2, m, x);
    const double pl_dr1 = dr1 - l * soliton_profile_dxxx(p1, m, x);
    const double pl_dr2 = dr2 - l * soliton_profile_dxxx(p2, m, x);
    base.v[i] = f_term + M1 * pl_lam1 + M2 * pl_lam2 + N1 * pl_dr1 + N2 * pl_dr2;
  }

  // G-hat(w) = d_x(w'' - w + 2(R1+R2)w) + sum mu_j (1-l dxx) dw/dy_j
  GridFunction wxx = fd_derivative(lg.w, 2);
  GridFunction inner_g(proto);
  for (int i = 0; i < n; ++i)
    inner_g.v[i] =
        wxx.v[i] - lg.w.v[i] + 2.0 * (rt1.v[i] + rt2.v[i]) * lg.w.v[i];
  GridFunction g_term = fd_derivative(inner_g, 1);
  const double mus[2] = {g.mu1, g.mu2};
  for (int j = 0; j < 2; ++j) {
    GridFunction hj = fd_derivative(lg.dw_dy[j], 2);
    for (int i = 0; i < n; ++i)
      g_term.v[i] += mus[j] * (lg.dw_dy[j].v[i] - l * hj.v[i]);
  }

  // H(w) = d_x(w^2) + sum M_j (1-l dxx) dw/dmu_j - sum N_j (1-l dxx) dw/dy_j
  GridFunction wsq(proto);
  for (int i = 0; i < n; ++i) wsq.v[i] = lg.w.v[i] * lg.w.v[i];
  GridFunction h_term = fd_derivative(wsq, 1);
  const double Ms[2] = {M1, M2}, Ns[2] = {N1, N2};
  for (int j = 0; j < 2; ++j) {
    GridFunction dmuxx = fd_derivative(lg.dw_dmu[j], 2);
    GridFunction dyxx = fd_derivative(lg.dw_dy[j], 2);
    for (int i = 0; i < n; ++i) {
      h_term.v[i] += Ms[j] * (lg.dw_dmu[j].v[i] - l * dmuxx.v[i]);
      h_term.v[i] -= Ns[j] * (lg.dw_dy[j].v[i] - l * dyxx.v[i]);
    }
  }

  GridFunction e0(proto);
  for (int i = 0; i < n; ++i)
    e0.v[i] = base.v[i] + g_term.v[i] + h_term.v[i];
  return e0;
}

PairParams scan_config(double Y0, double mu0, double t) {
  const ReducedState rs = closed_separation(t, Y0, mu0);
  PairParams g;
  g.mu1 = 0.5 * rs.dY;
  g.mu2 = -0.5 * rs.dY;
  g.y1 = 0.5 * rs.Y;
  g.y2 = -0.5 * rs.Y;
  return g;
}

}  // namespace

ResidualScanResult residual_scan(const ProfileFamily& fam, double Y0, int samples,
                                 double span, bool include_d) {
  const double mu0 = speed_from_apex(Y0, fam.alpha);
  const double t_max = std::acosh(std::exp(0.5 * span)) / mu0;
  GridFunction proto(2.0 * fam.half_width, fam.n);
  ResidualScanResult res;
  const double interior = fam.half_width - 1.0;
  for (int s = 0; s < samples; ++s) {
    const double t = t_max * (2.0 * s / (samples - 1) - 1.0);
    const PairParams g = scan_config(Y0, mu0, t);
    GridFunction e0 = layered_residual(fam, g, proto, include_d);
    double wsup = 0.0;
    for (int i = 0; i < proto.n; ++i) {
      const double x = proto.x(i);
      if (std::abs(x) > interior) continue;
      // the residual decays at least like e^{-(x-y1)} past the right
      // soliton, so the weighted profile falls off like e^{-(x-y1)/2};
      // capping the window keeps the true sup and stops the weight from
      // amplifying the double-precision floor at the far edge
      if (x > g.y1 + 25.0) continue;
      const double wgt = 1.0 + std::exp(0.5 * (x - g.y1));
      wsup = std::max(wsup, wgt * std::abs(e0.v[i]));
    }
    ResidualScanPoint pt;
    pt.t = t;
    pt.y = g.separation();
    pt.weighted_sup = wsup;
    pt.normalized = wsup / (std::exp(-Y0) * std::exp(-pt.y));
    res.points.push_back(pt);
    res.sup_normalized = std::max(res.sup_normalized, pt.normalized);
  }
  return res;
}

double residual_route_consistency(const ProfileFamily& fam, double Y0) {
  const double mu0 = speed_from_apex(Y0, fam.alpha);
  const PairParams g = scan_config(Y0, mu0, 0.35 / mu0);
  GridFunction proto(2.0 * fam.half_width, fam.n);
  GridFunction layered = layered_residual(fam, g, proto, true);

  // direct route: S(V0) with dGamma/dt = ode rhs, all derivatives by finite
  // differences (the ansatz carries bounded tails, so no FFT here)
  const OdeCoefficients c = fam.ode_coefficients();
  FullParamState fs{g.mu1, g.mu2, g.y1, g.y2};
  const FullParamState dg = ode_rhs(fs, c);
  const double gdot[4] = {dg.mu1, dg.mu2, dg.y1, dg.y2};
  const int n = proto.n;
  GridFunction v0(proto), vt(proto);
  for (int i = 0; i < n; ++i) {
    const double x = proto.x(i);
    v0.v[i] = ansatz_uncut(fam, g, x);
    double acc = 0.0;
    for (int p = 0; p < 4; ++p)
      acc += gdot[p] * ansatz_uncut_dparam(fam, g, p, x);
    vt.v[i] = acc;
  }
  GridFunction vt_xx = fd_derivative(vt, 2);
  GridFunction vxx = fd_derivative(v0, 2);
  GridFunction flux(proto);
  for (int i = 0; i < n; ++i)
    flux.v[i] = vxx.v[i] - v0.v[i] + v0.v[i] * v0.v[i];
  GridFunction flux_x = fd_derivative(flux, 1);
  double dev = 0.0;
  const double interior = fam.half_width - 2.0;
  for (int i = 0; i < n; ++i) {
    if (std::abs(proto.x(i)) > interior) continue;
    const double direct =
        vt.v[i] - fam.lambda * vt_xx.v[i] + flux_x.v[i];
    dev = std::max(dev, std::abs(direct - layered.v[i]));
  }
  return dev;
}

}  // namespace bbmlab
