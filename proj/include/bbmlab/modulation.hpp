#pragma once

#include <array>

#include "bbmlab/evolver.hpp"
#include "bbmlab/profiles.hpp"

namespace bbmlab {

enum class AnsatzKind { corrected, plain_sum };

struct DecompositionResult {
  PairParams gamma;
  GridFunction epsilon;
  double h1_norm = 0.0;
  std::array<double, 4> orthogonality_residuals{};
  int newton_iterations = 0;
};

struct DiagnosticsConfig {
  double rho = 1.0 / 64.0;
  void validate() const;
};

/// Splits u = V(.;Gamma) + eps with eps orthogonal (weighted by 1-l dxx) to
/// the two solitons and their translations; Newton on the four constraints.
/// kind selects the corrected ansatz (during interaction) or the plain
/// two-soliton sum (asymptotic fits).  Y0 feeds the corrected cutoff.
DecompositionResult decompose(const GridFunction& u, const ProfileFamily& fam,
                              const PairParams& guess, AnsatzKind kind,
                              double Y0, double tol = 1e-12, int max_iter = 60);

/// Smooth switch weight used by the almost-monotone functionals.
double arctan_weight(double x, double rho);

enum class Branch { plus, minus };

/// Weighted energy/mass functional of a decomposition; branch selects
/// which combination (they differ in how the speeds weight the two terms).
double eval_monotone_functional(const DecompositionResult& dec,
                                const ProfileFamily& fam, double Y0,
                                const DiagnosticsConfig& cfg, Branch branch);

/// Rayleigh minimum of the quadratic part of the + functional over the
/// four orthogonality constraints (H^1-normalized); positive when the
/// functional controls ||eps||_H1^2.
double monotone_functional_coercivity(const ProfileFamily& fam,
                                      const AnsatzState& state,
                                      const DiagnosticsConfig& cfg,
                                      double length = 120.0, int n = 2048);

/// Translation diagnostic built from the antiderivative of the speed
/// derivative of soliton j (j = 0 or 1); requires eps to decay to the
/// right of soliton 1 and refuses otherwise.
double eval_translation_diagnostic(const DecompositionResult& dec,
                                   const ProfileFamily& fam, int j);

struct TrackPoint {
  double t;
  PairParams gamma;
  double eps_h1 = 0.0;
  bool corrected = false;           // which ansatz was used
  std::array<double, 4> drift{};    // filled for interior points
  bool drift_valid = false;
};

struct TrackResult {
  std::vector<TrackPoint> points;
  int mu_sign_changes = 0;
  double min_separation = 0.0;      // refined
  double t_min_separation = 0.0;
  double max_eps_h1 = 0.0;
  CsvTable to_csv(double Y0, double mu0) const;
};

/// Runs decompose over a snapshot series with warm starts; switches from
/// the corrected ansatz to the plain sum once the separation leaves the
/// interaction window.  Gamma-dot for the drift columns comes from
/// 4th-order centered differences of the tracked parameters.
TrackResult track(const std::vector<double>& times,
                  const std::vector<GridFunction>& snaps,
                  const ProfileFamily& fam, double Y0, const PairParams& guess0);

struct CollisionReport {
  double Y0 = 0, mu0 = 0, lambda = 0;
  double min_separation = 0, t_collision = 0;
  double defect_h1 = 0;
  double mu1_plus = 0, mu2_plus = 0;
  double mu1_plus_balance = 0, mu2_plus_balance = 0;
  double tracking_error = 0;
  double preparation_error = 0;
  double drift_floor = 0;        // rel. conservation drift * ||u0||_H1
  double elasticity_ratio = 0;   // defect_h1 / drift_floor
  double max_eps_h1 = 0;
  int mu_sign_changes = 0;
  bool seam_warning = false;
  json to_json() const;
};

/// Post-collision defect measurement: plain two-soliton fit at the final
/// snapshot, H^1 norm of the remainder on the right-moving window, final
/// speeds both from the fit and from the mass/energy balance.
CollisionReport defect_report(const std::vector<double>& times,
                              const std::vector<GridFunction>& snaps,
                              const ProfileFamily& fam, double Y0,
                              const TrackResult& tr,
                              const ConservationReport& cons,
                              double preparation_error, bool seam_warning);

}  // namespace bbmlab
