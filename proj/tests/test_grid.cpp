#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "bbmlab/grid.hpp"
#include "bbmlab/soliton.hpp"

using namespace bbmlab;

TEST_CASE("spectral derivative is exact on resolved data") {
  const double L = 40.0;
  const int n = 512;
  const double k = 2.0 * std::numbers::pi * 3.0 / L;
  GridFunction u = sample(L, n, [&](double x) { return std::sin(k * x); });
  GridFunction du = derivative(u, 1);
  GridFunction ddu = derivative(u, 2);
  for (int i = 0; i < n; i += 17) {
    CHECK(du.v[i] == doctest::Approx(k * std::cos(k * u.x(i))).epsilon(1e-12));
    CHECK(ddu.v[i] ==
          doctest::Approx(-k * k * std::sin(k * u.x(i))).epsilon(1e-12));
  }
  GridFunction q = sample(120.0, 2048, base_wave);
  GridFunction dq = derivative(q, 1);
  double dev = 0.0;
  for (int i = 0; i < q.n; ++i)
    dev = std::max(dev, std::abs(dq.v[i] - base_wave_dx(q.x(i))));
  CHECK(dev < 1e-12);
}

TEST_CASE("antiderivative from the left edge") {
  GridFunction g = sample(120.0, 2048, base_wave_dx);
  GridFunction z = antiderivative_from_left(g);
  double dev = 0.0;
  for (int i = 0; i < g.n; ++i)
    dev = std::max(dev, std::abs(z.v[i] - base_wave(z.x(i))));
  CHECK(dev < 1e-10);
}

TEST_CASE("quadrature, norms, resolution flag") {
  GridFunction q = sample(120.0, 2048, base_wave);
  CHECK(integral(q) == doctest::Approx(6.0).epsilon(1e-12));
  CHECK(l2_norm(q) == doctest::Approx(std::sqrt(6.0)).epsilon(1e-12));
  CHECK(h1_norm(q) == doctest::Approx(std::sqrt(7.2)).epsilon(1e-12));
  CHECK(is_resolved(q));
  GridFunction rough(10.0, 128);
  for (int i = 0; i < rough.n; ++i) rough.v[i] = (i % 2 == 0) ? 1.0 : -1.0;
  CHECK(!is_resolved(rough));
}

TEST_CASE("H1 norm on a half line") {
  GridFunction q = sample(120.0, 2048, base_wave);
  const double whole = h1_norm(q);
  const double right = h1_norm_right_of(q, 0.0);
  // the window boundary sits on a grid point, counted fully
  const double corr = (base_wave(0.0) * base_wave(0.0)) * q.dx();
  CHECK(right * right ==
        doctest::Approx(0.5 * (whole * whole + corr)).epsilon(1e-10));
  CHECK(h1_norm_right_of(q, 70.0) == 0.0);
}

TEST_CASE("reflection and Helmholtz application") {
  GridFunction f = sample(80.0, 1024, [](double x) {
    return std::exp(-0.3 * (x - 1.5) * (x - 1.5));
  });
  GridFunction rf = reflect(f);
  for (int i = 1; i < f.n; i += 31)
    CHECK(rf.v[i] == doctest::Approx(f.v[(f.n - i) % f.n]).epsilon(1e-15));
  GridFunction hq = helmholtz_apply(sample(120.0, 2048, base_wave), 0.4);
  double dev = 0.0;
  for (int i = 0; i < hq.n; ++i)
    dev = std::max(dev, std::abs(hq.v[i] - (base_wave(hq.x(i)) -
                                            0.4 * base_wave_dxx(hq.x(i)))));
  CHECK(dev < 1e-11);
}

TEST_CASE("finite-difference derivatives reach 8th order") {
  GridFunction q = sample(120.0, 2048, base_wave);
  GridFunction d1 = fd_derivative(q, 1);
  GridFunction d2 = fd_derivative(q, 2);
  GridFunction d3 = fd_derivative(q, 3);
  double e1 = 0, e2 = 0, e3 = 0;
  for (int i = 0; i < q.n; ++i) {
    const double x = q.x(i);
    e1 = std::max(e1, std::abs(d1.v[i] - base_wave_dx(x)));
    e2 = std::max(e2, std::abs(d2.v[i] - base_wave_dxx(x)));
    e3 = std::max(e3, std::abs(d3.v[i] - base_wave_dxxx(x)));
  }
  CHECK(e1 < 1e-9);
  CHECK(e2 < 1e-8);
  CHECK(e3 < 1e-6);
  // halving the spacing must gain well over two orders of magnitude
  GridFunction qf = sample(120.0, 4096, base_wave);
  GridFunction d1f = fd_derivative(qf, 1);
  double e1f = 0;
  for (int i = 0; i < qf.n; ++i)
    e1f = std::max(e1f, std::abs(d1f.v[i] - base_wave_dx(qf.x(i))));
  CHECK(e1f * 128.0 < e1);
}

TEST_CASE("uniform-grid interpolation at off-grid points") {
  GridFunction q = sample(120.0, 4096, base_wave);
  double dev = 0.0;
  for (double x = -20.0; x <= 20.0; x += 0.0317)
    dev = std::max(dev, std::abs(interp_uniform(q, x) - base_wave(x)));
  CHECK(dev < 1e-11);
  CHECK(interp_uniform(q, 100.0, -7.0) == -7.0);  // out of range -> fallback
}

TEST_CASE("grid constructor validates shape") {
  CHECK_THROWS(GridFunction(10.0, 3));
  CHECK_THROWS(GridFunction(-1.0, 64));
}
