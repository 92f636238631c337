#include "bbmlab/grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <numbers>

#include "bbmlab/kernels.hpp"

namespace bbmlab {

GridFunction::GridFunction(double length_, int n_) : length(length_), n(n_) {
  if (length_ <= 0 || n_ <= 0 || n_ % 2 != 0)
    throw std::invalid_argument("GridFunction: need length>0 and even n>0");
  v.assign(n_, 0.0);
}

int GridFunction::index_of(double xq) const {
  int i = (int)std::lround((xq + 0.5 * length) / dx());
  return std::clamp(i, 0, n - 1);
}

GridFunction sample(double length, int n, const std::function<double(double)>& f) {
  GridFunction u(length, n);
  for (int i = 0; i < n; ++i) u.v[i] = f(u.x(i));
  return u;
}

void require_finite(const GridFunction& u, const char* what) {
  for (double x : u.v)
    if (!std::isfinite(x))
      throw std::invalid_argument(std::string(what) + ": non-finite sample");
}

namespace {

// One r2c/c2r plan pair per size, created with FFTW_ESTIMATE|FFTW_UNALIGNED
// so they can execute on caller buffers deterministically.
struct PlanPair {
  fftw_plan fwd = nullptr, bwd = nullptr;
};

PlanPair& plans_for(int n) {
  static std::map<int, PlanPair> cache;
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  std::vector<double> r(n);
  std::vector<std::complex<double>> c(n / 2 + 1);
  PlanPair p;
  p.fwd = fftw_plan_dft_r2c_1d(n, r.data(),
                               reinterpret_cast<fftw_complex*>(c.data()),
                               FFTW_ESTIMATE | FFTW_UNALIGNED);
  p.bwd = fftw_plan_dft_c2r_1d(n, reinterpret_cast<fftw_complex*>(c.data()),
                               r.data(), FFTW_ESTIMATE | FFTW_UNALIGNED);
  return cache.emplace(n, p).first->second;
}

}  // namespace

void fft(const GridFunction& u, std::vector<std::complex<double>>& uhat) {
  uhat.resize(u.n / 2 + 1);
  std::vector<double> tmp(u.v);  // r2c destroys its input
  fftw_execute_dft_r2c(plans_for(u.n).fwd, tmp.data(),
                       reinterpret_cast<fftw_complex*>(uhat.data()));
}

void ifft(const std::vector<std::complex<double>>& uhat, GridFunction& u) {
  std::vector<std::complex<double>> tmp(uhat);  // c2r destroys its input
  fftw_execute_dft_c2r(plans_for(u.n).bwd,
                       reinterpret_cast<fftw_complex*>(tmp.data()),
                       u.v.data());
  const double s = 1.0 / u.n;
  for (double& x : u.v) x *= s;
}

double wavenumber(int m, double length) {
  return 2.0 * std::numbers::pi * m / length;
}

GridFunction derivative(const GridFunction& u, int order) {
  std::vector<std::complex<double>> uhat;
  fft(u, uhat);
  const int nh = u.n / 2;
  for (int m = 0; m <= nh; ++m) {
    const double k = wavenumber(m, u.length);
    std::complex<double> f;
    switch (order % 4) {
      case 0: f = std::pow(k, order); break;
      case 1: f = std::complex<double>(0, 1) * std::pow(k, order); break;
      case 2: f = -std::pow(k, order); break;
      default: f = std::complex<double>(0, -1) * std::pow(k, order); break;
    }
    uhat[m] *= f;
  }
  if (order % 2 == 1) uhat[nh] = 0.0;  // Nyquist mode of odd derivatives
  GridFunction out(u.length, u.n);
  ifft(uhat, out);
  return out;
}

GridFunction antiderivative_from_left(const GridFunction& u) {
  std::vector<std::complex<double>> uhat;
  fft(u, uhat);
  const int nh = u.n / 2;
  uhat[0] = 0.0;
  for (int m = 1; m < nh; ++m)
    uhat[m] /= std::complex<double>(0, wavenumber(m, u.length));
  uhat[nh] = 0.0;
  GridFunction out(u.length, u.n);
  ifft(uhat, out);
  const double z0 = out.v[0];
  for (double& x : out.v) x -= z0;
  return out;
}

double integral(const GridFunction& u) { return u.dx() * kernels::sum(u.v); }

double inner(const GridFunction& a, const GridFunction& b) {
  if (!a.compatible(b)) throw std::invalid_argument("inner: grid mismatch");
  return a.dx() * kernels::dot(a.v, b.v);
}

double l2_norm(const GridFunction& u) { return std::sqrt(inner(u, u)); }

double h1_norm(const GridFunction& u) {
  GridFunction du = derivative(u, 1);
  return std::sqrt(inner(u, u) + inner(du, du));
}

double linf_norm(const GridFunction& u) { return kernels::max_abs(u.v); }

double h1_norm_right_of(const GridFunction& u, double xmin) {
  GridFunction du = derivative(u, 1);
  double s = 0.0;
  for (int i = 0; i < u.n; ++i)
    if (u.x(i) >= xmin) s += u.v[i] * u.v[i] + du.v[i] * du.v[i];
  return std::sqrt(s * u.dx());
}

double spectral_tail_ratio(const GridFunction& u) {
  std::vector<std::complex<double>> uhat;
  fft(u, uhat);
  double peak = 0.0, tail = 0.0;
  const int nh = u.n / 2;
  for (int m = 0; m <= nh; ++m) {
    const double a = std::abs(uhat[m]);
    peak = std::max(peak, a);
    if (m >= (9 * nh) / 10) tail = std::max(tail, a);
  }
  return peak > 0 ? tail / peak : 0.0;
}

bool is_resolved(const GridFunction& u, double tol) {
  return spectral_tail_ratio(u) < tol;
}

GridFunction operator+(const GridFunction& a, const GridFunction& b) {
  GridFunction out(a.length, a.n);
  kernels::axpby(1.0, a.v, 1.0, b.v, out.v);
  return out;
}

GridFunction operator-(const GridFunction& a, const GridFunction& b) {
  GridFunction out(a.length, a.n);
  kernels::axpby(1.0, a.v, -1.0, b.v, out.v);
  return out;
}

GridFunction operator*(double s, const GridFunction& a) {
  GridFunction out(a.length, a.n);
  for (int i = 0; i < a.n; ++i) out.v[i] = s * a.v[i];
  return out;
}

GridFunction pointwise(const GridFunction& a, const GridFunction& b,
                       const std::function<double(double, double)>& op) {
  GridFunction out(a.length, a.n);
  for (int i = 0; i < a.n; ++i) out.v[i] = op(a.v[i], b.v[i]);
  return out;
}

namespace {
// 9-point centered stencils, 8th order.
constexpr double kD1[4] = {4.0 / 5, -1.0 / 5, 4.0 / 105, -1.0 / 280};
constexpr double kD2C = -205.0 / 72;
constexpr double kD2[4] = {8.0 / 5, -1.0 / 5, 8.0 / 315, -1.0 / 560};
}  // namespace

GridFunction fd_derivative(const GridFunction& u, int order) {
  if (order == 3) {
    return fd_derivative(fd_derivative(u, 1), 2);
  }
  if (order != 1 && order != 2)
    throw std::invalid_argument("fd_derivative: order must be 1, 2 or 3");
  GridFunction out(u.length, u.n);
  const int n = u.n;
  auto at = [&](int i) {  // clamp: fields of interest vanish near the edges
    return u.v[std::clamp(i, 0, n - 1)];
  };
  const double h = u.dx();
  if (order == 1) {
    const double s = 1.0 / h;
    for (int i = 0; i < n; ++i) {
      double acc = 0.0;
      for (int j = 1; j <= 4; ++j) acc += kD1[j - 1] * (at(i + j) - at(i - j));
      out.v[i] = acc * s;
    }
  } else {
    const double s = 1.0 / (h * h);
    for (int i = 0; i < n; ++i) {
      double acc = kD2C * at(i);
      for (int j = 1; j <= 4; ++j) acc += kD2[j - 1] * (at(i + j) + at(i - j));
      out.v[i] = acc * s;
    }
  }
  return out;
}

GridFunction reflect(const GridFunction& u) {
  GridFunction out(u.length, u.n);
  for (int i = 0; i < u.n; ++i) out.v[i] = u.v[(u.n - i) % u.n];
  return out;
}

GridFunction helmholtz_apply(const GridFunction& u, double lambda) {
  GridFunction out = derivative(u, 2);
  kernels::axpby(1.0, u.v, -lambda, out.v, out.v);
  return out;
}

double interp_uniform(const GridFunction& u, double xq, double fallback) {
  const double h = u.dx();
  const double t = (xq + 0.5 * u.length) / h;
  if (t < 0.0 || t > u.n - 1) return fallback;
  int i0 = (int)std::floor(t) - 3;
  i0 = std::clamp(i0, 0, u.n - 8);
  // barycentric weights for 8 equispaced nodes: (-1)^j * C(7,j)
  static const double w[8] = {-1, 7, -21, 35, -35, 21, -7, 1};
  double num = 0.0, den = 0.0;
  for (int j = 0; j < 8; ++j) {
    const double d = t - (i0 + j);
    if (std::abs(d) < 1e-12) return u.v[i0 + j];
    const double q = w[j] / d;
    num += q * u.v[i0 + j];
    den += q;
  }
  return num / den;
}

}  // namespace bbmlab
