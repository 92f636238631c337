#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bbmlab/linearized.hpp"

using namespace bbmlab;

namespace {
// smaller grid for unit tests; the acceptance suite runs the default size
OperatorConfig test_cfg() { return OperatorConfig{60.0, 2048, 0.0}; }

LinearizedOperator& op() {
  static LinearizedOperator instance(test_cfg());
  return instance;
}

GridFunction sample_op(const std::function<double(double)>& f) {
  return sample(120.0, 2048, f);
}
}  // namespace

TEST_CASE("operator kills the kernel and matches the bound state") {
  GridFunction qp = sample_op(base_wave_dx);
  CHECK(linf_norm(op().apply0(qp)) < 1e-10);

  GridFunction q32 = sample_op([](double x) { return std::pow(base_wave(x), 1.5); });
  GridFunction lq32 = op().apply0(q32);
  double dev = 0.0;
  for (int i = 0; i < lq32.n; ++i)
    dev = std::max(dev, std::abs(lq32.v[i] + 1.25 * q32.v[i]));
  CHECK(dev < 1e-10);

  GridFunction q = sample_op(base_wave);
  GridFunction lq = op().apply0(q);
  dev = 0.0;
  for (int i = 0; i < lq.n; ++i)
    dev = std::max(dev, std::abs(lq.v[i] + q.v[i] * q.v[i]));
  CHECK(dev < 1e-10);
}

TEST_CASE("mu-parametrized operator annihilates the soliton translations") {
  const double l = 0.4, mu = 0.15;
  const ModelParams m{l};
  const SolitonParams p{mu, 0.0};
  GridFunction dq = sample_op([&](double x) { return soliton_profile_dx(p, m, x); });
  CHECK(linf_norm(op().apply(dq, mu, l)) < 1e-9);
  // L_mu dmuQ_mu = -(1 - l dxx) Q_mu
  GridFunction lam = sample_op([&](double x) { return mu_deriv_profile(p, m, x); });
  GridFunction lhs = op().apply(lam, mu, l);
  double dev = 0.0;
  for (int i = 0; i < lhs.n; ++i) {
    const double x = lhs.x(i);
    const double rhs = -(soliton_profile(p, m, x) - l * soliton_profile_dxx(p, m, x));
    dev = std::max(dev, std::abs(lhs.v[i] - rhs));
  }
  CHECK(dev < 1e-9);
}

TEST_CASE("self-adjointness on decaying data") {
  GridFunction f = sample_op([](double x) { return std::exp(-0.4 * (x - 1) * (x - 1)); });
  GridFunction g = sample_op([](double x) { return x * std::exp(-0.3 * x * x); });
  CHECK(std::abs(inner(op().apply0(f), g) - inner(f, op().apply0(g))) < 1e-10);
}

TEST_CASE("constrained solve: zero, speed-derivative oracle, eigen oracle") {
  GridFunction zero(120.0, 2048);
  GridFunction f0 = op().solve(zero, 0.3);
  CHECK(linf_norm(f0) < 1e-13);

  for (double l : {0.0, 0.5}) {
    const ModelParams m{l};
    const SolitonParams p0{0.0, 0.0};
    GridFunction h = sample_op([&](double x) {
      return -(base_wave(x) - l * base_wave_dxx(x));
    });
    GridFunction f = op().solve(h, l);
    GridFunction target = sample_op([&](double x) { return mu_deriv_profile(p0, m, x); });
    CHECK(linf_norm(f - target) < 1e-8);
    CHECK(op().solve_residual(f, h) < 1e-8);
    // the constraint itself
    GridFunction w = sample_op([&](double x) {
      return base_wave_dx(x) - l * base_wave_dxxx(x);
    });
    CHECK(std::abs(inner(f, w)) < 1e-10);
  }

  // eigen-pair oracle: L(Q^{3/2}) = -(5/4)Q^{3/2} inverts to -(4/5)Q^{3/2}
  GridFunction q32 = sample_op([](double x) { return std::pow(base_wave(x), 1.5); });
  GridFunction f = op().solve(q32, 0.25);
  double dev = 0.0;
  for (int i = 0; i < f.n; ++i)
    dev = std::max(dev, std::abs(f.v[i] + 0.8 * q32.v[i]));
  CHECK(dev < 1e-8);
}

TEST_CASE("solve preserves parity") {
  GridFunction even = sample_op([](double x) { return std::exp(-0.5 * x * x); });
  GridFunction fe = op().solve(even, 0.2);
  // an odd right-hand side must first be cleansed of its kernel overlap
  GridFunction odd = sample_op([](double x) { return x * std::exp(-0.5 * x * x); });
  GridFunction qp = sample_op(base_wave_dx);
  const double c = inner(odd, qp) / inner(qp, qp);
  for (int i = 0; i < odd.n; ++i) odd.v[i] -= c * qp.v[i];
  GridFunction fo = op().solve(odd, 0.2);
  GridFunction fer = reflect(fe), forr = reflect(fo);
  CHECK(linf_norm(fe - fer) < 1e-10);
  CHECK(linf_norm(fo + forr) < 1e-10);
}

TEST_CASE("solve composed with apply is the identity on admissible data") {
  GridFunction h = sample_op([](double x) {
    return (1.0 - 0.2 * x * x) * std::exp(-0.45 * x * x);
  });
  // symmetrize: even data is orthogonal to the kernel automatically
  GridFunction f = op().solve(h, 0.35);
  CHECK(op().solve_residual(f, h) < 1e-8);
}

TEST_CASE("kernel obstruction is rejected") {
  GridFunction qp = sample_op(base_wave_dx);  // int qp Q' != 0
  CHECK_THROWS_AS(op().solve(qp, 0.0), KernelObstruction);
}

TEST_CASE("lowest two eigenpairs") {
  auto [e1, e2] = op().lowest_two();
  CHECK(std::abs(e1.value + 1.25) < 1e-8);
  CHECK(std::abs(e2.value) < 1e-8);
  GridFunction q32 = sample_op([](double x) { return std::pow(base_wave(x), 1.5); });
  const double c1 = std::abs(inner(e1.vec, q32)) / (l2_norm(e1.vec) * l2_norm(q32));
  CHECK(std::acos(std::min(1.0, c1)) < 1e-6);
  GridFunction qp = sample_op(base_wave_dx);
  const double c2 = std::abs(inner(e2.vec, qp)) / (l2_norm(e2.vec) * l2_norm(qp));
  CHECK(std::acos(std::min(1.0, c2)) < 1e-6);
}

TEST_CASE("resolution convergence of the lowest eigenvalue") {
  LinearizedOperator fine(OperatorConfig{60.0, 4096, 0.0});
  auto [e1a, e2a] = op().lowest_two();
  auto [e1b, e2b] = fine.lowest_two();
  CHECK(std::abs(e1a.value - e1b.value) < 1e-9);
}

TEST_CASE("coercivity under the two constraints") {
  for (double l : {0.0, 0.5}) {
    const double c = op().constrained_coercivity(l);
    CHECK(c > 0.0);
    CHECK(c < 1.0);
  }
  const double unc = op().unconstrained_h1_rayleigh_min();
  CHECK(unc < 0.0);
  // oracle: the Rayleigh quotient of the ground state bounds the minimum
  GridFunction q32 = sample_op([](double x) { return std::pow(base_wave(x), 1.5); });
  const double bound =
      -1.25 * inner(q32, q32) / (h1_norm(q32) * h1_norm(q32));
  CHECK(unc <= bound + 1e-10);
}

TEST_CASE("antiderivative guardrails") {
  GridFunction qp = sample_op(base_wave_dx);
  auto anti = op().integrate_from_left(qp);
  GridFunction q = sample_op(base_wave);
  CHECK(linf_norm(anti.z - q) < 1e-10);

  // zero-mean difference of two bumps gives a decaying antiderivative
  GridFunction g = sample_op([](double x) {
    return base_wave(x) - 2.0 * base_wave(2.0 * (x - 3.0));
  });
  // the second bump has half the mass of the first at double amplitude: the
  // combination integrates to zero
  auto anti2 = op().integrate_from_left(g);
  CHECK(std::abs(anti2.total) < 1e-9);
  CHECK(std::abs(anti2.z.v[0]) < 1e-9);
  CHECK(std::abs(anti2.z.v[anti2.z.n - 1]) < 1e-9);

  GridFunction q6 = sample_op(base_wave);
  CHECK_THROWS_AS(op().integrate_from_left(q6), MeanObstruction);
  try {
    op().integrate_from_left(q6);
  } catch (const MeanObstruction& e) {
    CHECK(e.mean == doctest::Approx(6.0).epsilon(1e-10));
  }
}
