#pragma once

#include <functional>
#include <memory>
#include <stdexcept>

#include "bbmlab/grid.hpp"
#include "bbmlab/soliton.hpp"

namespace bbmlab {

struct OperatorConfig {
  double half_width = 60.0;
  int n = 4096;
  double lambda = 0.0;
  void validate() const;
};

/// Thrown when an antiderivative is requested for data with nonzero mean.
class MeanObstruction : public std::runtime_error {
 public:
  explicit MeanObstruction(double mean_);
  double mean;
};

/// Thrown when a solve is requested for data with a kernel component.
class KernelObstruction : public std::runtime_error {
 public:
  explicit KernelObstruction(double overlap_);
  double overlap;
};

/// Deterministic Lanczos with full reorthogonalization; returns the k
/// largest eigenpairs of a symmetric operator given by its apply.
struct LanczosResult {
  std::vector<double> values;                 // descending
  std::vector<std::vector<double>> vectors;   // unit 2-norm
  int iterations = 0;
};
LanczosResult lanczos_largest(
    int n, const std::function<void(const std::vector<double>&, std::vector<double>&)>& op,
    int k, int max_iter = 240, double tol = 1e-13);

/// min (A f, f) / ||f||_H1^2 over f orthogonal (in L^2) to the given
/// constraints.  A must be symmetric; applyA acts on grid samples.
double projected_h1_rayleigh_min(
    const GridFunction& proto,
    const std::function<GridFunction(const GridFunction&)>& applyA,
    const std::vector<GridFunction>& constraints, double push = 4.0,
    int max_iter = 700);

/// Fourier-collocation realization of L = -d_xx + 1 - 2Q and its
/// mu-parametrized variant.  The dense bordered factorization (one per
/// grid; the model parameter only changes a border row, handled by a
/// rank-one update) backs the constrained solves.
class LinearizedOperator {
 public:
  explicit LinearizedOperator(const OperatorConfig& cfg);
  ~LinearizedOperator();
  LinearizedOperator(const LinearizedOperator&) = delete;
  LinearizedOperator& operator=(const LinearizedOperator&) = delete;

  const OperatorConfig& config() const { return cfg_; }
  GridFunction make_grid() const { return GridFunction(2.0 * cfg_.half_width, cfg_.n); }
  const GridFunction& q() const { return q_; }
  const GridFunction& qp() const { return qp_; }

  /// L_mu f = -(1+lambda*mu) f'' + (1+mu) f - 2 Q_mu f, spectral.
  GridFunction apply(const GridFunction& f, double mu, double lambda) const;
  GridFunction apply0(const GridFunction& f) const { return apply(f, 0.0, 0.0); }

  /// Solve L f = h with int f (1-lambda d_xx) Q' = 0.  Requires
  /// int h Q' ~ 0 (throws KernelObstruction otherwise).
  GridFunction solve(const GridFunction& h, double lambda) const;
  /// Max-norm residual ||L f - h||_inf, computed spectrally (independent of
  /// the dense path used by solve).
  double solve_residual(const GridFunction& f, const GridFunction& h) const;

  struct EigenPair {
    double value;
    GridFunction vec;
  };
  /// Two smallest eigenvalues of L (they sit below the continuous branch).
  std::pair<EigenPair, EigenPair> lowest_two() const;

  /// min (Lf,f)/||f||_H1^2 over f orthogonal to (1-l dxx)Q and (1-l dxx)Q'.
  double constrained_coercivity(double lambda) const;
  /// Same minimum without the constraints (negative).
  double unconstrained_h1_rayleigh_min() const;

  struct Antiderivative {
    GridFunction z;
    double total;  // measured integral of the input
  };
  /// Z(x) = int_{-inf}^x g, valid when int g = 0; decays at both ends.
  Antiderivative integrate_from_left(const GridFunction& g,
                                     double mean_tol = 1e-7) const;

 private:
  struct Dense;
  void ensure_dense() const;

  OperatorConfig cfg_;
  GridFunction q_, qp_;
  mutable std::unique_ptr<Dense> dense_;
};

}  // namespace bbmlab
