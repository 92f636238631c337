#pragma once

#include <complex>
#include <functional>
#include <stdexcept>
#include <vector>

namespace bbmlab {

/// Periodic real field on [-length/2, length/2), uniform samples.
/// x_i = -length/2 + i*dx, dx = length/n.  The spectral view is the
/// discrete Fourier transform of the samples.
struct GridFunction {
  double length = 0.0;
  int n = 0;
  std::vector<double> v;

  GridFunction() = default;
  GridFunction(double length_, int n_);

  double dx() const { return length / n; }
  double x(int i) const { return -0.5 * length + i * dx(); }
  int index_of(double xq) const;  // nearest grid index

  bool compatible(const GridFunction& o) const {
    return n == o.n && length == o.length;
  }
};

GridFunction sample(double length, int n, const std::function<double(double)>& f);

/// All-finite check; throws std::invalid_argument otherwise.
void require_finite(const GridFunction& u, const char* what);

// -- spectral machinery (FFTW r2c/c2r with cached plans, FFTW_ESTIMATE so
//    results are reproducible run to run) --

void fft(const GridFunction& u, std::vector<std::complex<double>>& uhat);
void ifft(const std::vector<std::complex<double>>& uhat, GridFunction& u);

/// k-value of r2c bin m for a domain of length L: k = 2*pi*m/L.
double wavenumber(int m, double length);

GridFunction derivative(const GridFunction& u, int order = 1);

/// Antiderivative vanishing at the left edge of the domain; the mean of u
/// is ignored (callers needing the mean handle it separately).
GridFunction antiderivative_from_left(const GridFunction& u);

// -- quadrature and norms (periodic trapezoid = dx * sum) --

double integral(const GridFunction& u);
double inner(const GridFunction& a, const GridFunction& b);
double l2_norm(const GridFunction& u);
double h1_norm(const GridFunction& u);
double linf_norm(const GridFunction& u);

/// H^1 norm restricted to grid points with x >= xmin.
double h1_norm_right_of(const GridFunction& u, double xmin);

/// Ratio of the top-decade spectral amplitude to the peak amplitude;
/// "resolved" data keeps this below ~1e-10.
double spectral_tail_ratio(const GridFunction& u);
bool is_resolved(const GridFunction& u, double tol = 1e-10);

// arithmetic helpers (value semantics, allocate result)
GridFunction operator+(const GridFunction& a, const GridFunction& b);
GridFunction operator-(const GridFunction& a, const GridFunction& b);
GridFunction operator*(double s, const GridFunction& a);
GridFunction pointwise(const GridFunction& a, const GridFunction& b,
                       const std::function<double(double, double)>& op);

// -- 8th-order centered finite differences (no periodicity assumption;
//    used where fields carry non-decaying tails and the FFT would ring) --

GridFunction fd_derivative(const GridFunction& u, int order);

/// Mirror image u(-x) on the same grid.
GridFunction reflect(const GridFunction& u);

/// (1 - lambda d_xx) u via spectral differentiation.
GridFunction helmholtz_apply(const GridFunction& u, double lambda);

/// Lagrange interpolation (8-point stencil) on a uniform grid.  Outside the
/// domain returns fallback.
double interp_uniform(const GridFunction& u, double xq, double fallback = 0.0);

}  // namespace bbmlab
