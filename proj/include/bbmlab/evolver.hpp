#pragma once

#include <complex>
#include <functional>
#include <vector>

#include "bbmlab/grid.hpp"
#include "bbmlab/soliton.hpp"

namespace bbmlab {

enum class Scheme { explicit_rk4, integrating_factor_rk4 };

/// Dispersion relation of the linear part: omega(k) = k(1+k^2)/(1+lambda k^2).
/// Bounded in k for lambda > 0, cubic in the KdV limit.
double linear_symbol(double k, double lambda);

struct EvolverConfig {
  ModelParams model;
  double length = 256.0;
  int n = 4096;
  double dt = 0.005;
  bool dealias = true;
  Scheme scheme = Scheme::explicit_rk4;

  static Scheme default_scheme(double lambda) {
    return lambda > 0.0 ? Scheme::explicit_rk4 : Scheme::integrating_factor_rk4;
  }
  void validate() const;
};

struct EvolveFlags {
  bool seam_warning = false;  // field at the periodic seam above 1e-8
  double max_seam_value = 0.0;
};

/// Pseudospectral integrator for
///   (1 - lambda d_xx) u_t + d_x(u_xx - u + u^2) = 0
/// on the periodic domain.  Quadratic nonlinearity in physical space with
/// 2/3-rule dealiasing; classical RK4 for lambda > 0 (bounded symbol), an
/// integrating factor for the stiff KdV limit.
class BbmEvolver {
 public:
  explicit BbmEvolver(const EvolverConfig& cfg);

  const EvolverConfig& config() const { return cfg_; }

  void set_state(const GridFunction& u, double t);
  GridFunction state() const;
  double time() const { return t_; }
  const EvolveFlags& flags() const { return flags_; }

  void step();           // one dt step
  void step_back();      // one -dt step (reversibility checks)

  /// Advance to t_final; calls snapshot(t, u) every `stride` steps and at
  /// both endpoints.  Throws on NaN/overflow with a diagnostic message.
  void evolve(double t_final,
              const std::function<void(double, const GridFunction&)>& snapshot = {},
              int stride = 0);

 private:
  void rhs(const std::vector<std::complex<double>>& v,
           std::vector<std::complex<double>>& out);
  void nonlinear(const std::vector<std::complex<double>>& v,
                 std::vector<std::complex<double>>& out);
  void step_signed(double h);
  void check_finite();

  EvolverConfig cfg_;
  double t_ = 0.0;
  std::vector<std::complex<double>> uhat_;
  std::vector<double> k_, omega_, transport_;  // transport = k/(1+lambda k^2)
  std::vector<bool> keep_;                     // dealias mask
  EvolveFlags flags_;
  long steps_since_check_ = 0;
  // scratch
  GridFunction phys_, work_;
  std::vector<std::complex<double>> s1_, s2_, s3_, s4_, s5_;
};

struct ConservationReport {
  double mass0 = 0, energy0 = 0;
  double max_rel_mass_drift = 0, max_rel_energy_drift = 0;
  void update(const GridFunction& u, const ModelParams& m);
  double floor() const {  // worst relative drift
    return std::max(max_rel_mass_drift, max_rel_energy_drift);
  }
};

}  // namespace bbmlab
