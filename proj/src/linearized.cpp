#include "bbmlab/linearized.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>

namespace bbmlab {

void OperatorConfig::validate() const {
  if (half_width < 40.0)
    throw std::invalid_argument("OperatorConfig: half_width must be >= 40");
  if (n <= 0 || n % 2 != 0)
    throw std::invalid_argument("OperatorConfig: n must be even and positive");
  if (2.0 * half_width / n > 0.1)
    throw std::invalid_argument("OperatorConfig: grid spacing must be <= 0.1");
  if (!(lambda >= 0.0 && lambda < 1.0))
    throw std::invalid_argument("OperatorConfig: lambda in [0,1)");
}

MeanObstruction::MeanObstruction(double mean_)
    : std::runtime_error("mean obstruction"), mean(mean_) {}

KernelObstruction::KernelObstruction(double overlap_)
    : std::runtime_error("kernel obstruction"), overlap(overlap_) {}

LanczosResult lanczos_largest(
    int n, const std::function<void(const std::vector<double>&, std::vector<double>&)>& op,
    int k, int max_iter, double tol) {
  std::vector<std::vector<double>> basis;
  std::vector<double> alpha, beta;
  std::vector<double> v(n), w(n), check(n);
  std::mt19937 rng(12345);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (double& x : v) x = unif(rng);
  auto nrm = [&](const std::vector<double>& a) {
    double s = 0;
    for (double x : a) s += x * x;
    return std::sqrt(s);
  };
  auto dot = [&](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0;
    for (int i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
  };
  double nv = nrm(v);
  for (double& x : v) x /= nv;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  auto extract = [&](int m, int j, std::vector<double>& vec) {
    vec.assign(n, 0.0);
    for (int c = 0; c < m; ++c) {
      const double w2 = es.eigenvectors()(c, m - 1 - j);
      for (int i = 0; i < n; ++i) vec[i] += w2 * basis[c][i];
    }
    const double s = 1.0 / nrm(vec);
    for (double& x : vec) x *= s;
  };

  double nb = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    basis.push_back(v);
    op(v, w);
    alpha.push_back(dot(v, w));
    // two full Gram-Schmidt passes; one pass loses orthogonality exactly
    // when the recurrence residual gets small
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& b : basis) {
        const double c = dot(b, w);
        for (int i = 0; i < n; ++i) w[i] -= c * b[i];
      }
    nb = nrm(w);
    const int m = (int)alpha.size();
    const bool breakdown = nb < 1e-13;
    if (m >= std::max(2 * k, 8) &&
        ((it + 1) % 40 == 0 || breakdown || it == max_iter - 1)) {
      Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
      for (int i = 0; i < m; ++i) {
        T(i, i) = alpha[i];
        if (i + 1 < m) T(i, i + 1) = T(i + 1, i) = beta[i];
      }
      es.compute(T);
      if (m < k)
        throw std::runtime_error("lanczos_largest: subspace too small");
      // verify the top-k Ritz pairs with true operator residuals
      LanczosResult res;
      res.iterations = m;
      bool done = true;
      for (int j = 0; j < k; ++j) {
        std::vector<double> vec;
        extract(m, j, vec);
        op(vec, check);
        const double theta = es.eigenvalues()(m - 1 - j);
        double rs = 0;
        for (int i = 0; i < n; ++i) {
          const double r = check[i] - theta * vec[i];
          rs += r * r;
        }
        if (std::sqrt(rs) > tol) done = false;
        res.values.push_back(theta);
        res.vectors.push_back(std::move(vec));
      }
      if (done || breakdown || it == max_iter - 1) return res;
    }
    if (breakdown) break;
    beta.push_back(nb);
    for (int i = 0; i < n; ++i) v[i] = w[i] / nb;
  }
  throw std::runtime_error("lanczos_largest: no convergence");
}

struct LinearizedOperator::Dense {
  Eigen::PartialPivLU<Eigen::MatrixXd> lu;  // bordered with the Q' row
  Eigen::VectorXd inv_elast;                // M0^{-1} e_last, for row updates
  Eigen::VectorXd base_row;                 // dx * Q'
};

LinearizedOperator::LinearizedOperator(const OperatorConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  q_ = sample(2.0 * cfg_.half_width, cfg_.n, base_wave);
  qp_ = sample(2.0 * cfg_.half_width, cfg_.n, base_wave_dx);
}

LinearizedOperator::~LinearizedOperator() = default;

GridFunction LinearizedOperator::apply(const GridFunction& f, double mu,
                                       double lambda) const {
  GridFunction fxx = derivative(f, 2);
  GridFunction out(f.length, f.n);
  const ModelParams m{lambda};
  const SolitonParams p{mu, 0.0};
  for (int i = 0; i < f.n; ++i) {
    const double qm = (mu == 0.0) ? q_.v[i] : soliton_profile(p, m, f.x(i));
    out.v[i] = -(1.0 + lambda * mu) * fxx.v[i] + (1.0 + mu) * f.v[i] -
               2.0 * qm * f.v[i];
  }
  return out;
}

void LinearizedOperator::ensure_dense() const {
  if (dense_) return;
  const int n = cfg_.n;
  const double dx = 2.0 * cfg_.half_width / n;
  // circulant second-derivative matrix from its first column
  GridFunction delta(2.0 * cfg_.half_width, n);
  delta.v[0] = 1.0;
  GridFunction col = derivative(delta, 2);
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n + 1, n + 1);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) M(i, j) = -col.v[(i - j + n) % n];
  for (int i = 0; i < n; ++i) M(i, i) += 1.0 - 2.0 * q_.v[i];
  auto d = std::make_unique<Dense>();
  d->base_row = Eigen::VectorXd(n + 1);
  for (int i = 0; i < n; ++i) {
    M(i, n) = qp_.v[i];           // border column: kernel direction
    M(n, i) = dx * qp_.v[i];      // border row: lambda=0 constraint
    d->base_row(i) = M(n, i);
  }
  d->base_row(n) = 0.0;
  d->lu.compute(M);
  Eigen::VectorXd elast = Eigen::VectorXd::Zero(n + 1);
  elast(n) = 1.0;
  d->inv_elast = d->lu.solve(elast);
  dense_ = std::move(d);
}

GridFunction LinearizedOperator::solve(const GridFunction& h, double lambda) const {
  if (h.n != cfg_.n) throw std::invalid_argument("solve: grid mismatch");
  const double overlap = inner(h, qp_);
  const double scale = std::max(1.0, l2_norm(h));
  if (std::abs(overlap) > 1e-8 * scale) throw KernelObstruction(overlap);
  ensure_dense();
  const int n = cfg_.n;
  const double dx = h.dx();
  Eigen::VectorXd b(n + 1);
  for (int i = 0; i < n; ++i) b(i) = h.v[i];
  b(n) = 0.0;
  Eigen::VectorXd z0 = dense_->lu.solve(b);
  if (lambda != 0.0) {
    // constraint row for lambda != 0 differs from the factored one by
    // dr = dx*((1-l dxx)Q' - Q'); Sherman-Morrison on the bordered matrix
    GridFunction cl(h.length, n);
    for (int i = 0; i < n; ++i) {
      const double x = cl.x(i);
      cl.v[i] = base_wave_dx(x) - lambda * base_wave_dxxx(x);
    }
    Eigen::VectorXd dr = Eigen::VectorXd::Zero(n + 1);
    for (int i = 0; i < n; ++i) dr(i) = dx * (cl.v[i] - qp_.v[i]);
    const double denom = 1.0 + dr.dot(dense_->inv_elast);
    const double num = dr.dot(z0);
    z0 -= (num / denom) * dense_->inv_elast;
  }
  GridFunction f(h.length, n);
  for (int i = 0; i < n; ++i) f.v[i] = z0(i);
  return f;
}

double LinearizedOperator::solve_residual(const GridFunction& f,
                                          const GridFunction& h) const {
  GridFunction r = apply0(f) - h;
  return linf_norm(r);
}

std::pair<LinearizedOperator::EigenPair, LinearizedOperator::EigenPair>
LinearizedOperator::lowest_two() const {
  const int n = cfg_.n;
  const double L = 2.0 * cfg_.half_width;
  // Plain Lanczos crawls here: the discrete continuum stretches to -k_max^2,
  // so the two bound states are barely separated relative to the spectral
  // width.  Shift-invert with sigma below the ground state fixes the scale;
  // (L - sigma) is positive definite and the Helmholtz symbol is an exact
  // preconditioner for its high-frequency part.
  const double sigma = -3.0;
  GridFunction r(L, n), z(L, n), p(L, n), ap(L, n), x(L, n);
  std::vector<std::complex<double>> hat;
  auto precond = [&](const GridFunction& in, GridFunction& out) {
    fft(in, hat);
    for (int m = 0; m < (int)hat.size(); ++m) {
      const double k = wavenumber(m, L);
      hat[m] /= k * k + 1.0 - sigma;
    }
    ifft(hat, out);
  };
  auto shift_apply = [&](const GridFunction& in, GridFunction& out) {
    out = apply0(in);
    for (int i = 0; i < n; ++i) out.v[i] -= sigma * in.v[i];
  };
  auto cg_solve = [&](const std::vector<double>& b, std::vector<double>& out) {
    for (int i = 0; i < n; ++i) {
      x.v[i] = 0.0;
      r.v[i] = b[i];
    }
    precond(r, z);
    p = z;
    double rz = inner(r, z);
    const double b2 = std::sqrt(inner(r, r));
    for (int it = 0; it < 400; ++it) {
      shift_apply(p, ap);
      const double alpha = rz / inner(p, ap);
      for (int i = 0; i < n; ++i) {
        x.v[i] += alpha * p.v[i];
        r.v[i] -= alpha * ap.v[i];
      }
      if (std::sqrt(inner(r, r)) < 1e-14 * b2) break;
      precond(r, z);
      const double rz_new = inner(r, z);
      const double beta = rz_new / rz;
      rz = rz_new;
      for (int i = 0; i < n; ++i) p.v[i] = z.v[i] + beta * p.v[i];
    }
    out = x.v;
  };
  LanczosResult lr = lanczos_largest(n, cg_solve, 2, 200, 1e-11);
  EigenPair e1, e2;
  e1.value = sigma + 1.0 / lr.values[0];
  e2.value = sigma + 1.0 / lr.values[1];
  e1.vec = make_grid();
  e2.vec = make_grid();
  e1.vec.v = lr.vectors[0];
  e2.vec.v = lr.vectors[1];
  // report honest eigenpairs: verify against the direct application
  for (const EigenPair* e : {&e1, &e2}) {
    GridFunction res = apply0(e->vec);
    double rs = 0.0;
    for (int i = 0; i < n; ++i) {
      const double d = res.v[i] - e->value * e->vec.v[i];
      rs += d * d;
    }
    if (std::sqrt(rs) > 1e-9)
      throw std::runtime_error("lowest_two: eigenpair failed verification");
  }
  return {e1, e2};
}

namespace {
// y = H^{p/2} x with H = 1 - d_xx (Fourier multiplier (1+k^2)^{p/2})
void h_power(const GridFunction& in, double p, GridFunction& out) {
  std::vector<std::complex<double>> hat;
  fft(in, hat);
  for (int m = 0; m < (int)hat.size(); ++m) {
    const double k = wavenumber(m, in.length);
    hat[m] *= std::pow(1.0 + k * k, 0.5 * p);
  }
  ifft(hat, out);
}
}  // namespace

double projected_h1_rayleigh_min(
    const GridFunction& proto,
    const std::function<GridFunction(const GridFunction&)>& applyA,
    const std::vector<GridFunction>& constraints, double push, int max_iter) {
  const int n = proto.n;
  const double L = proto.length;
  // pull constraints back through H^{-1/2} and orthonormalize; the Nyquist
  // direction joins them because first-derivative symbols vanish there
  // while the H^1 weight does not, which would fake a tiny Rayleigh value
  std::vector<std::vector<double>> cs;
  GridFunction tmp(L, n);
  std::vector<GridFunction> pulled;
  for (const auto& c : constraints) {
    h_power(c, -1.0, tmp);
    pulled.push_back(tmp);
  }
  {
    GridFunction nyq(L, n);
    for (int i = 0; i < n; ++i) nyq.v[i] = (i % 2 == 0) ? 1.0 : -1.0;
    pulled.push_back(nyq);
  }
  for (const auto& c : pulled) {
    std::vector<double> v = c.v;
    for (const auto& prev : cs) {
      double p = 0;
      for (int i = 0; i < n; ++i) p += prev[i] * v[i];
      for (int i = 0; i < n; ++i) v[i] -= p * prev[i];
    }
    double s = 0;
    for (double x : v) s += x * x;
    s = 1.0 / std::sqrt(s);
    for (double& x : v) x *= s;
    cs.push_back(std::move(v));
  }
  GridFunction gin(L, n), gmid(L, n), gout(L, n);
  auto op = [&](const std::vector<double>& x, std::vector<double>& y) {
    gin.v = x;
    std::vector<double> proj(cs.size());
    for (std::size_t c = 0; c < cs.size(); ++c) {
      double p = 0;
      for (int i = 0; i < n; ++i) p += cs[c][i] * gin.v[i];
      proj[c] = p;
      for (int i = 0; i < n; ++i) gin.v[i] -= p * cs[c][i];
    }
    h_power(gin, -1.0, gmid);
    gmid = applyA(gmid);
    h_power(gmid, -1.0, gout);
    std::vector<double> rproj(cs.size());
    for (std::size_t c = 0; c < cs.size(); ++c) {
      double p = 0;
      for (int i = 0; i < n; ++i) p += cs[c][i] * gout.v[i];
      rproj[c] = p;
    }
    // project the range, lift the constraint directions above the window;
    // the smallest eigenvalue of M is then the constrained minimum and
    // push*I - M makes it the largest.
    for (int i = 0; i < n; ++i) {
      double m = gout.v[i];
      for (std::size_t c = 0; c < cs.size(); ++c)
        m += -rproj[c] * cs[c][i] + push * proj[c] * cs[c][i];
      y[i] = push * x[i] - m;
    }
  };
  LanczosResult lr = lanczos_largest(n, op, 1, max_iter, 1e-11);
  return push - lr.values[0];
}

double LinearizedOperator::constrained_coercivity(double lambda) const {
  const int n = cfg_.n;
  const double L = 2.0 * cfg_.half_width;
  GridFunction c1(L, n), c2(L, n);
  for (int i = 0; i < n; ++i) {
    const double x = c1.x(i);
    c1.v[i] = base_wave(x) - lambda * base_wave_dxx(x);
    c2.v[i] = base_wave_dx(x) - lambda * base_wave_dxxx(x);
  }
  GridFunction proto(L, n);
  return projected_h1_rayleigh_min(
      proto, [&](const GridFunction& f) { return apply0(f); }, {c1, c2});
}

double LinearizedOperator::unconstrained_h1_rayleigh_min() const {
  GridFunction proto(2.0 * cfg_.half_width, cfg_.n);
  return projected_h1_rayleigh_min(
      proto, [&](const GridFunction& f) { return apply0(f); }, {});
}

LinearizedOperator::Antiderivative LinearizedOperator::integrate_from_left(
    const GridFunction& g, double mean_tol) const {
  Antiderivative out;
  out.total = integral(g);
  if (std::abs(out.total) > mean_tol) throw MeanObstruction(out.total);
  out.z = antiderivative_from_left(g);
  return out;
}

}  // namespace bbmlab
