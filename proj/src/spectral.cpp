#include "lplab/spectral.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

#include "lplab/fft.hpp"

namespace lplab {
namespace {

// -f'' via FFT into `out`, using thread-local scratch to keep hot loops quiet.
void kinetic_apply(const Grid& g, const std::vector<double>& f, std::vector<double>& out) {
  thread_local std::vector<Complex> buf, hat;
  const std::size_t n = g.size;
  buf.assign(f.begin(), f.end());
  hat.resize(n);
  fft::forward(buf, hat);
  for (std::size_t m = 0; m < n; ++m) {
    const double k = g.wavenumber(m);
    hat[m] *= k * k / static_cast<double>(n);
  }
  fft::inverse(hat, buf);
  out.resize(n);
  for (std::size_t j = 0; j < n; ++j) out[j] = buf[j].real();
}

void h_apply(const RealField& W, const std::vector<double>& f, std::vector<double>& out) {
  kinetic_apply(W.grid, f, out);
  for (std::size_t j = 0; j < f.size(); ++j) out[j] += W.v[j] * f[j];
}

double dot(const Grid& g, const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * b[j];
  return g.spacing * s;
}

double nrm(const Grid& g, const std::vector<double>& a) { return std::sqrt(dot(g, a, a)); }

void axpy(double alpha, const std::vector<double>& x, std::vector<double>& y) {
  for (std::size_t j = 0; j < y.size(); ++j) y[j] += alpha * x[j];
}

// Off-center start so the Krylov space is not confined to one parity class
// when the potential happens to be symmetric.
std::vector<double> lanczos_start(const Grid& g) {
  std::vector<double> start(g.size);
  for (std::size_t j = 0; j < g.size; ++j) {
    const double x = g.node(j);
    start[j] = std::exp(-0.5 * (x - 0.5) * (x - 0.5));
  }
  return start;
}

struct LanczosResult {
  std::vector<double> alpha, beta;        // tridiagonal entries; beta[i] couples i and i+1
  std::vector<std::vector<double>> basis; // orthonormal in the h-weighted inner product
};

LanczosResult lanczos(const RealField& W, const std::vector<double>& start, int steps) {
  const Grid& g = W.grid;
  LanczosResult res;
  std::vector<double> v = start;
  const double n0 = nrm(g, v);
  require(n0 > 0.0, ErrorCode::InvalidArgument, "lanczos: zero start vector");
  for (auto& x : v) x /= n0;

  std::vector<double> w;
  for (int i = 0; i < steps; ++i) {
    res.basis.push_back(v);
    h_apply(W, v, w);
    if (i > 0) axpy(-res.beta.back(), res.basis[i - 1], w);
    const double a = dot(g, v, w);
    res.alpha.push_back(a);
    axpy(-a, v, w);
    // Full reorthogonalization against the whole basis.
    for (const auto& u : res.basis) axpy(-dot(g, u, w), u, w);
    const double b = nrm(g, w);
    if (b < 1e-13) break;  // invariant subspace found
    res.beta.push_back(b);
    v = w;
    for (auto& x : v) x /= b;
  }
  res.beta.resize(res.alpha.size() > 0 ? res.alpha.size() - 1 : 0);
  return res;
}

Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tridiag_eigen(const LanczosResult& lr) {
  const int m = static_cast<int>(lr.alpha.size());
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    T(i, i) = lr.alpha[i];
    if (i + 1 < m) T(i, i + 1) = T(i + 1, i) = lr.beta[i];
  }
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(T);
}

// Projected preconditioned CG for A = P (H_W - shift) P on the complement of q,
// preconditioned by (-d^2/dx^2 + c)^{-1}. Returns true on convergence.
bool projected_pcg(const RealField& W, double shift, const std::vector<double>& q,
                   const std::vector<double>& rhs, std::vector<double>& x, double rel_tol,
                   int max_iterations) {
  const Grid& g = W.grid;
  const std::size_t n = g.size;
  const double c = 1.0 + std::abs(shift);

  auto project = [&](std::vector<double>& y) { axpy(-dot(g, q, y) / dot(g, q, q), q, y); };
  auto apply_A = [&](const std::vector<double>& y, std::vector<double>& out) {
    std::vector<double> t = y;
    project(t);
    h_apply(W, t, out);
    axpy(-shift, t, out);
    project(out);
  };
  auto apply_M = [&](const std::vector<double>& y, std::vector<double>& out) {
    thread_local std::vector<Complex> buf, hat;
    buf.assign(y.begin(), y.end());
    hat.resize(n);
    fft::forward(buf, hat);
    for (std::size_t m = 0; m < n; ++m) {
      const double k = g.wavenumber(m);
      hat[m] /= (k * k + c) * static_cast<double>(n);
    }
    fft::inverse(hat, buf);
    out.resize(n);
    for (std::size_t j = 0; j < n; ++j) out[j] = buf[j].real();
    project(out);
  };

  std::vector<double> b = rhs;
  project(b);
  const double bnorm = nrm(g, b);
  if (bnorm == 0.0) {
    x.assign(n, 0.0);
    return true;
  }
  if (x.size() != n) x.assign(n, 0.0);
  project(x);

  std::vector<double> r(n), z(n), p(n), Ap(n);
  apply_A(x, Ap);
  for (std::size_t j = 0; j < n; ++j) r[j] = b[j] - Ap[j];
  apply_M(r, z);
  p = z;
  double rz = dot(g, r, z);

  for (int it = 0; it < max_iterations; ++it) {
    if (nrm(g, r) <= rel_tol * bnorm) {
      project(x);
      return true;
    }
    apply_A(p, Ap);
    const double pAp = dot(g, p, Ap);
    if (pAp <= 0.0) {
      // Negative curvature: shift sits above the projected spectrum. Bail out
      // with the current iterate; the outer iteration recovers.
      project(x);
      return false;
    }
    const double a = rz / pAp;
    axpy(a, p, x);
    axpy(-a, Ap, r);
    apply_M(r, z);
    const double rz_next = dot(g, r, z);
    for (std::size_t j = 0; j < n; ++j) p[j] = z[j] + (rz_next / rz) * p[j];
    rz = rz_next;
  }
  project(x);
  return nrm(g, r) <= rel_tol * bnorm;
}

void fix_sign(RealField& q, const RealField* reference) {
  bool flip = false;
  if (reference) {
    flip = inner(*reference, q) < 0.0;
  } else {
    std::size_t peak = 0;
    for (std::size_t j = 1; j < q.v.size(); ++j)
      if (std::abs(q.v[j]) > std::abs(q.v[peak])) peak = j;
    flip = q.v[peak] < 0.0;
  }
  if (flip)
    for (auto& x : q.v) x = -x;
}

}  // namespace

Field apply_hamiltonian(const RealField& W, const Field& f) {
  require_same_grid(W.grid, f.grid, "apply_hamiltonian");
  const std::size_t n = f.grid.size;
  std::vector<Complex> hat(n);
  fft::forward(f.v, hat);
  for (std::size_t m = 0; m < n; ++m) {
    const double k = f.grid.wavenumber(m);
    hat[m] *= k * k / static_cast<double>(n);
  }
  Field out{f.grid, std::vector<Complex>(n)};
  fft::inverse(hat, out.v);
  for (std::size_t j = 0; j < n; ++j) out.v[j] += W.v[j] * f.v[j];
  return out;
}

RealField apply_hamiltonian(const RealField& W, const RealField& f) {
  require_same_grid(W.grid, f.grid, "apply_hamiltonian");
  RealField out{f.grid, {}};
  h_apply(W, f.v, out.v);
  return out;
}

GroundState ground_state(const RealField& W, double mass, const EigenOptions& opts) {
  const Grid& g = W.grid;
  require(mass > 0.0, ErrorCode::InvalidArgument, "ground_state: mass must be positive");
  require(all_finite(W), ErrorCode::NonFiniteSample, "ground_state: potential has non-finite samples");

  std::vector<double> q;
  if (opts.warm_start) {
    require_same_grid(g, opts.warm_start->grid, "ground_state warm start");
    q = opts.warm_start->v;
    const double n0 = nrm(g, q);
    require(n0 > 0.0, ErrorCode::InvalidArgument, "ground_state: zero warm start");
    for (auto& x : q) x /= n0;
  } else {
    LanczosResult lr = lanczos(W, lanczos_start(g), opts.lanczos_steps);
    auto es = tridiag_eigen(lr);
    const double theta = es.eigenvalues()(0);
    require(theta < -opts.gap_tol, ErrorCode::NoNegativeEigenvalue,
            "ground_state: smallest Ritz value " + std::to_string(theta) +
                " is not below -gap_tol");
    q.assign(g.size, 0.0);
    for (std::size_t i = 0; i < lr.basis.size(); ++i)
      axpy(es.eigenvectors()(static_cast<int>(i), 0), lr.basis[i], q);
    const double n0 = nrm(g, q);
    for (auto& x : q) x /= n0;
  }

  // Rayleigh-shift refinement; each correction solve stays on the complement
  // of the current iterate where H - shift is positive definite.
  std::vector<double> Hq, r(g.size), delta;
  double sigma = 0.0;
  double res_norm = 0.0;
  bool converged = false;
  for (int sweep = 0; sweep <= opts.max_refinements; ++sweep) {
    h_apply(W, q, Hq);
    sigma = dot(g, q, Hq);
    for (std::size_t j = 0; j < g.size; ++j) r[j] = Hq[j] - sigma * q[j];
    res_norm = nrm(g, r);
    if (res_norm <= opts.tol) {
      converged = true;
      break;
    }
    if (sweep == opts.max_refinements) break;
    for (auto& x : r) x = -x;
    delta.assign(g.size, 0.0);
    const double rel = std::clamp(res_norm, 1e-4, 1e-2);
    projected_pcg(W, sigma, q, r, delta, rel, opts.max_cg_iterations);
    axpy(1.0, delta, q);
    const double n1 = nrm(g, q);
    require(n1 > 0.0, ErrorCode::NoConvergence, "ground_state: iterate collapsed");
    for (auto& x : q) x /= n1;
  }
  require(converged, ErrorCode::NoConvergence,
          "ground_state: residual " + std::to_string(res_norm) + " above tol after " +
              std::to_string(opts.max_refinements) + " refinements");
  require(sigma < -opts.gap_tol, ErrorCode::NoNegativeEigenvalue,
          "ground_state: converged eigenvalue " + std::to_string(sigma) +
              " is not below -gap_tol");

  GroundState out;
  out.energy = sigma;
  out.wavefunction = RealField{g, std::move(q)};
  for (auto& x : out.wavefunction.v) x *= mass;
  fix_sign(out.wavefunction, opts.continuity_reference);
  h_apply(W, out.wavefunction.v, Hq);
  for (std::size_t j = 0; j < g.size; ++j) Hq[j] -= sigma * out.wavefunction.v[j];
  out.residual = nrm(g, Hq);
  return out;
}

std::vector<double> lanczos_ritz_values(const RealField& W, int steps) {
  require(steps > 0, ErrorCode::InvalidArgument, "lanczos_ritz_values: steps must be positive");
  LanczosResult lr = lanczos(W, lanczos_start(W.grid), steps);
  auto es = tridiag_eigen(lr);
  std::vector<double> ritz(es.eigenvalues().data(),
                           es.eigenvalues().data() + es.eigenvalues().size());
  std::sort(ritz.begin(), ritz.end());
  return ritz;
}

SpectralReport spectral_report(const RealField& W, const ShootingOptions& opts) {
  const Grid& g = W.grid;
  const std::size_t n = g.size;
  require(all_finite(W), ErrorCode::NonFiniteSample, "spectral_report: non-finite potential");

  double tail = 0.0;
  const std::size_t margin = n / 20;  // 5% of nodes on each side
  for (std::size_t j = 0; j < margin; ++j) tail = std::max(tail, std::abs(W.v[j]));
  for (std::size_t j = n - margin; j < n; ++j) tail = std::max(tail, std::abs(W.v[j]));
  require(tail < opts.boundary_tol, ErrorCode::PotentialNotLocalized,
          "spectral_report: potential tail " + std::to_string(tail) + " exceeds boundary_tol");

  // Zero-energy shooting u'' = W u with u(-L) = 1, u'(-L) = 0, RK4 with the
  // midpoint potential taken as the average of the two node values.
  SpectralReport rep;
  rep.shooting_solution = RealField{g, std::vector<double>(n)};
  double u = 1.0, v = 0.0;
  rep.shooting_solution.v[0] = u;
  int sign_changes = 0;
  double last_sign = u > 0.0 ? 1.0 : (u < 0.0 ? -1.0 : 0.0);
  const double h = g.spacing;
  for (std::size_t j = 0; j + 1 < n; ++j) {
    const double w0 = W.v[j];
    const double w1 = W.v[j + 1];
    const double wm = 0.5 * (w0 + w1);
    const double k1u = v, k1v = w0 * u;
    const double k2u = v + 0.5 * h * k1v, k2v = wm * (u + 0.5 * h * k1u);
    const double k3u = v + 0.5 * h * k2v, k3v = wm * (u + 0.5 * h * k2u);
    const double k4u = v + h * k3v, k4v = w1 * (u + h * k3u);
    u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
    v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    rep.shooting_solution.v[j + 1] = u;
    const double s = u > 0.0 ? 1.0 : (u < 0.0 ? -1.0 : 0.0);
    if (s != 0.0) {
      if (last_sign != 0.0 && s != last_sign) ++sign_changes;
      last_sign = s;
    }
  }
  rep.negative_count = sign_changes;
  const double L = g.half_width;
  rep.rho = L * std::abs(v) / (std::abs(u) + L * std::abs(v));
  rep.is_resonant = rep.rho < opts.rho_tol;
  return rep;
}

RealField constrained_resolvent_solve(const RealField& W, double E, const RealField& Q,
                                      const RealField& rhs, const ResolventOptions& opts) {
  require_same_grid(W.grid, Q.grid, "constrained_resolvent_solve");
  require_same_grid(W.grid, rhs.grid, "constrained_resolvent_solve");
  std::vector<double> x;
  if (opts.warm_start) {
    require_same_grid(W.grid, opts.warm_start->grid, "constrained_resolvent_solve warm start");
    x = opts.warm_start->v;
  }
  const bool ok = projected_pcg(W, E, Q.v, rhs.v, x, opts.tol, opts.max_iterations);
  require(ok, ErrorCode::NoConvergence,
          "constrained_resolvent_solve: CG did not reach tol within " +
              std::to_string(opts.max_iterations) + " iterations");
  return RealField{W.grid, std::move(x)};
}

}  // namespace lplab
