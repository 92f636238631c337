#include "bbmlab/evolver.hpp"

#include <cmath>
#include <stdexcept>

#include "bbmlab/kernels.hpp"

namespace bbmlab {

double linear_symbol(double k, double lambda) {
  return k * (1.0 + k * k) / (1.0 + lambda * k * k);
}

void EvolverConfig::validate() const {
  model.validate();
  if (length <= 0 || n <= 0 || n % 2 != 0)
    throw std::invalid_argument("EvolverConfig: bad grid");
  if (length / n > 0.1)
    throw std::invalid_argument("EvolverConfig: grid spacing must be <= 0.1");
  if (!(dt > 0.0)) throw std::invalid_argument("EvolverConfig: dt > 0");
  if (scheme == Scheme::explicit_rk4) {
    double wmax = 0.0;
    for (int m = 0; m <= n / 2; ++m)
      wmax = std::max(wmax, std::abs(linear_symbol(wavenumber(m, length), model.lambda)));
    if (dt * wmax > 2.82)
      throw std::invalid_argument(
          "EvolverConfig: dt violates the RK4 stability bound for this grid");
  }
}

BbmEvolver::BbmEvolver(const EvolverConfig& cfg)
    : cfg_(cfg), phys_(cfg.length, cfg.n), work_(cfg.length, cfg.n) {
  cfg_.validate();
  const int nh = cfg_.n / 2;
  k_.resize(nh + 1);
  omega_.resize(nh + 1);
  transport_.resize(nh + 1);
  keep_.resize(nh + 1);
  for (int m = 0; m <= nh; ++m) {
    k_[m] = wavenumber(m, cfg_.length);
    omega_[m] = linear_symbol(k_[m], cfg_.model.lambda);
    transport_[m] = k_[m] / (1.0 + cfg_.model.lambda * k_[m] * k_[m]);
    keep_[m] = !cfg_.dealias || (3 * m <= cfg_.n);
  }
  keep_[nh] = false;  // Nyquist never participates in transport
  uhat_.assign(nh + 1, 0.0);
  s1_ = s2_ = s3_ = s4_ = s5_ = uhat_;
}

void BbmEvolver::set_state(const GridFunction& u, double t) {
  if (u.n != cfg_.n || u.length != cfg_.length)
    throw std::invalid_argument("set_state: grid mismatch");
  require_finite(u, "set_state");
  fft(u, uhat_);
  t_ = t;
}

GridFunction BbmEvolver::state() const {
  GridFunction u(cfg_.length, cfg_.n);
  ifft(uhat_, u);
  return u;
}

void BbmEvolver::nonlinear(const std::vector<std::complex<double>>& v,
                           std::vector<std::complex<double>>& out) {
  ifft(v, phys_);
  kernels::square(phys_.v, work_.v);
  fft(work_, out);
  for (std::size_t m = 0; m < out.size(); ++m) {
    if (!keep_[m]) {
      out[m] = 0.0;
      continue;
    }
    out[m] *= std::complex<double>(0.0, -transport_[m]);
  }
}

void BbmEvolver::rhs(const std::vector<std::complex<double>>& v,
                     std::vector<std::complex<double>>& out) {
  nonlinear(v, out);
  for (std::size_t m = 0; m < out.size(); ++m)
    out[m] += std::complex<double>(0.0, omega_[m]) * v[m];
}

void BbmEvolver::step_signed(double h) {
  const std::size_t nm = uhat_.size();
  if (cfg_.scheme == Scheme::explicit_rk4) {
    rhs(uhat_, s1_);
    for (std::size_t m = 0; m < nm; ++m) s5_[m] = uhat_[m] + 0.5 * h * s1_[m];
    rhs(s5_, s2_);
    for (std::size_t m = 0; m < nm; ++m) s5_[m] = uhat_[m] + 0.5 * h * s2_[m];
    rhs(s5_, s3_);
    for (std::size_t m = 0; m < nm; ++m) s5_[m] = uhat_[m] + h * s3_[m];
    rhs(s5_, s4_);
    for (std::size_t m = 0; m < nm; ++m)
      uhat_[m] += h / 6.0 * (s1_[m] + 2.0 * s2_[m] + 2.0 * s3_[m] + s4_[m]);
  } else {
    // integrating factor RK4: the linear phase is advanced exactly
    nonlinear(uhat_, s1_);
    for (std::size_t m = 0; m < nm; ++m) {
      const std::complex<double> E = std::polar(1.0, omega_[m] * 0.5 * h);
      s5_[m] = E * (uhat_[m] + 0.5 * h * s1_[m]);
    }
    nonlinear(s5_, s2_);
    for (std::size_t m = 0; m < nm; ++m) {
      const std::complex<double> E = std::polar(1.0, omega_[m] * 0.5 * h);
      s5_[m] = E * uhat_[m] + 0.5 * h * s2_[m];
    }
    nonlinear(s5_, s3_);
    for (std::size_t m = 0; m < nm; ++m) {
      const std::complex<double> E = std::polar(1.0, omega_[m] * 0.5 * h);
      const std::complex<double> E2 = std::polar(1.0, omega_[m] * h);
      s5_[m] = E2 * uhat_[m] + h * E * s3_[m];
    }
    nonlinear(s5_, s4_);
    for (std::size_t m = 0; m < nm; ++m) {
      const std::complex<double> E = std::polar(1.0, omega_[m] * 0.5 * h);
      const std::complex<double> E2 = std::polar(1.0, omega_[m] * h);
      uhat_[m] = E2 * uhat_[m] +
                 h / 6.0 * (E2 * s1_[m] + 2.0 * E * (s2_[m] + s3_[m]) + s4_[m]);
    }
  }
  t_ += h;
  if (++steps_since_check_ >= 64) {
    steps_since_check_ = 0;
    check_finite();
  }
}

void BbmEvolver::check_finite() {
  for (const auto& c : uhat_)
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
      throw std::runtime_error("BbmEvolver: state lost finiteness at t=" +
                               std::to_string(t_));
}

void BbmEvolver::step() { step_signed(cfg_.dt); }
void BbmEvolver::step_back() { step_signed(-cfg_.dt); }

void BbmEvolver::evolve(
    double t_final, const std::function<void(double, const GridFunction&)>& snapshot,
    int stride) {
  const double span = t_final - t_;
  if (span == 0.0) return;
  const long nsteps = (long)std::ceil(std::abs(span) / cfg_.dt - 1e-9);
  const double h = span / nsteps;
  auto snap = [&]() {
    if (!snapshot) return;
    GridFunction u = state();
    const int guard = std::max(4, cfg_.n / 256);
    double seam = 0.0;
    for (int i = 0; i < guard; ++i) {
      seam = std::max(seam, std::abs(u.v[i]));
      seam = std::max(seam, std::abs(u.v[cfg_.n - 1 - i]));
    }
    flags_.max_seam_value = std::max(flags_.max_seam_value, seam);
    if (seam > 1e-8) flags_.seam_warning = true;
    snapshot(t_, u);
  };
  snap();
  for (long s = 0; s < nsteps; ++s) {
    step_signed(h);
    if (stride > 0 && (s + 1) % stride == 0 && s + 1 != nsteps) snap();
  }
  check_finite();
  snap();
}

void ConservationReport::update(const GridFunction& u, const ModelParams& m) {
  const double mass = conserved_mass(u, m);
  const double energy = conserved_energy(u);
  if (mass0 == 0 && energy0 == 0) {
    mass0 = mass;
    energy0 = energy;
    return;
  }
  max_rel_mass_drift =
      std::max(max_rel_mass_drift, std::abs(mass - mass0) / std::abs(mass0));
  max_rel_energy_drift = std::max(max_rel_energy_drift,
                                  std::abs(energy - energy0) / std::abs(energy0));
}

}  // namespace bbmlab
