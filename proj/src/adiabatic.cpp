#include "lplab/adiabatic.hpp"

#include <cmath>
#include <complex>

#include "lplab/errors.hpp"
#include "lplab/fft.hpp"
#include "lplab/interp.hpp"

namespace lplab {

AdiabaticPath path_from_function(const Grid& grid, PotentialFn fn, double T, double dt_mesh) {
  require(T > 0.0 && dt_mesh > 0.0, ErrorCode::InvalidArgument,
          "path_from_function: T and dt_mesh must be positive");
  const auto steps = static_cast<std::size_t>(std::llround(T / dt_mesh));
  require(steps >= 3 && std::abs(static_cast<double>(steps) * dt_mesh - T) <
                            1e-9 * std::max(1.0, T),
          ErrorCode::InvalidArgument, "path_from_function: T must be a multiple of dt_mesh");
  AdiabaticPath path;
  path.grid = grid;
  path.dt_mesh = dt_mesh;
  path.exact = fn;
  path.times.reserve(steps + 1);
  path.V.reserve(steps + 1);
  for (std::size_t i = 0; i <= steps; ++i) {
    const double t = static_cast<double>(i) * dt_mesh;
    RealField V{grid, std::vector<double>(grid.size)};
    fn(t, V);
    path.times.push_back(t);
    path.V.push_back(std::move(V));
  }
  return path;
}

AdiabaticPath path_from_reference(const ReferenceTrajectory& traj) {
  AdiabaticPath path;
  path.grid = traj.grid;
  path.dt_mesh = traj.dt_ref;
  path.times = traj.times;
  path.V = traj.V;
  path.mass = traj.mass;
  return path;
}

void prepare_eigendata(AdiabaticPath& path, double ref_tol) {
  const std::size_t m = path.times.size();
  require(m >= 4, ErrorCode::InsufficientSamples, "prepare_eigendata: need four mesh points");
  const std::size_t n = path.grid.size;
  const double dt = path.dt_mesh;

  path.E.clear();
  path.Phi.clear();
  EigenOptions eig;
  eig.tol = ref_tol * 0.1;
  for (std::size_t i = 0; i < m; ++i) {
    if (i > 0) {
      eig.warm_start = &path.Phi.back();
      eig.continuity_reference = &path.Phi.back();
    }
    GroundState gs = ground_state(path.V[i], 1.0, eig);
    path.E.push_back(gs.energy);
    path.Phi.push_back(std::move(gs.wavefunction));
  }

  path.dPhi_dt.clear();
  path.dPhi_dt.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    RealField d{path.grid, std::vector<double>(n)};
    if (i == 0) {
      for (std::size_t j = 0; j < n; ++j)
        d.v[j] = (-3.0 * path.Phi[0].v[j] + 4.0 * path.Phi[1].v[j] - path.Phi[2].v[j]) / (2.0 * dt);
    } else if (i + 1 == m) {
      for (std::size_t j = 0; j < n; ++j)
        d.v[j] = (3.0 * path.Phi[m - 1].v[j] - 4.0 * path.Phi[m - 2].v[j] + path.Phi[m - 3].v[j]) /
                 (2.0 * dt);
    } else {
      for (std::size_t j = 0; j < n; ++j)
        d.v[j] = (path.Phi[i + 1].v[j] - path.Phi[i - 1].v[j]) / (2.0 * dt);
    }
    path.dPhi_dt.push_back(std::move(d));
  }

  // Phi is real, so Im<Phi, dPhi/dt> = 0 pointwise in time and the geometric
  // phase never accumulates; Xi reduces to the constrained resolvent of the
  // rate.
  path.beta.assign(m, 0.0);
  path.Xi.clear();
  path.Xi.reserve(m);
  ResolventOptions ropts;
  for (std::size_t i = 0; i < m; ++i) {
    ropts.warm_start = path.Xi.empty() ? nullptr : &path.Xi.back();
    path.Xi.push_back(
        constrained_resolvent_solve(path.V[i], path.E[i], path.Phi[i], path.dPhi_dt[i], ropts));
  }

  path.theta.assign(m, 0.0);
  for (std::size_t i = 1; i < m; ++i)
    path.theta[i] = path.theta[i - 1] + 0.5 * dt * (path.E[i - 1] + path.E[i]);
}

SchrodingerEvolver::SchrodingerEvolver(const AdiabaticPath& path, double epsilon, double dt,
                                       std::optional<bool> deflate)
    : path_(path), deflate_(deflate.value_or(path.deflate)), epsilon_(epsilon), dt_(dt) {
  require(epsilon > 0.0, ErrorCode::ValidationError, "epsilon must be positive");
  require(dt > 0.0 && dt <= 0.05 * epsilon + 1e-15, ErrorCode::ValidationError,
          "dt may not exceed 0.05*epsilon");
  require(path.times.size() >= 4, ErrorCode::InsufficientSamples,
          "potential path needs at least four mesh points");
  if (deflate_)
    require(!path.E.empty(), ErrorCode::InvalidArgument,
            "deflated evolution requires prepared eigen-data");
  const Grid& g = path.grid;
  kinetic_phase_.resize(g.size);
  for (std::size_t m = 0; m < g.size; ++m) {
    const double k = g.wavenumber(m);
    kinetic_phase_[m] = k * k * dt / (2.0 * epsilon);
  }
  v_mid_ = RealField{g, std::vector<double>(g.size)};
  phi_mid_ = RealField{g, std::vector<double>(g.size)};
  hat_.resize(g.size);
}

void SchrodingerEvolver::sample_potential(double t, RealField& out) const {
  if (path_.exact) {
    path_.exact(t, out);
    return;
  }
  const CubicWeights cw = cubic_weights(t, path_.times.front(), path_.dt_mesh, path_.times.size());
  cubic_eval(path_.V, cw, out);
}

void SchrodingerEvolver::step(Field& psi, double t) {
  const std::size_t n = path_.grid.size;
  const double inv_n = 1.0 / static_cast<double>(n);
  const double t_mid = t + 0.5 * dt_;
  sample_potential(t_mid, v_mid_);

  auto kinetic_half = [&] {
    fft::forward(psi.v, hat_);
    for (std::size_t m = 0; m < n; ++m) hat_[m] *= std::polar(inv_n, -kinetic_phase_[m]);
    fft::inverse(hat_, psi.v);
  };

  // Exact exponential of the -E |Phi><Phi| term over a half step: identity
  // plus a rank-one rotation, unitary because the projector is normalized
  // explicitly. Applied on both sides of the potential phase so the middle
  // factor stays palindromic; V and the projector do not commute, and an
  // unsymmetrized product would leak a first-order-in-dt bound component.
  auto deflation_half = [&] {
    const CubicWeights cw =
        cubic_weights(t_mid, path_.times.front(), path_.dt_mesh, path_.times.size());
    cubic_eval(path_.Phi, cw, phi_mid_);
    const double e_mid = cubic_eval(path_.E, cw);
    double nrm2 = 0.0;
    for (std::size_t j = 0; j < n; ++j) nrm2 += phi_mid_.v[j] * phi_mid_.v[j];
    nrm2 *= path_.grid.spacing;
    Complex overlap(0.0, 0.0);
    for (std::size_t j = 0; j < n; ++j) overlap += phi_mid_.v[j] * psi.v[j];
    overlap *= path_.grid.spacing;
    const Complex gain =
        (std::polar(1.0, 0.5 * dt_ * e_mid / epsilon_) - 1.0) * overlap / nrm2;
    for (std::size_t j = 0; j < n; ++j) psi.v[j] += gain * phi_mid_.v[j];
  };

  kinetic_half();
  if (deflate_) deflation_half();
  for (std::size_t j = 0; j < n; ++j)
    psi.v[j] *= std::polar(1.0, -v_mid_.v[j] * dt_ / epsilon_);
  if (deflate_) deflation_half();
  kinetic_half();
}

std::vector<Field> evolve_adiabatic(const AdiabaticPath& path, double epsilon, double dt) {
  require(!path.Phi.empty(), ErrorCode::InvalidArgument,
          "evolve_adiabatic: prepare_eigendata first");
  const auto per = static_cast<std::size_t>(std::llround(path.dt_mesh / dt));
  require(per >= 1 && std::abs(static_cast<double>(per) * dt - path.dt_mesh) < 1e-12,
          ErrorCode::InvalidArgument, "dt must divide the path mesh spacing");

  SchrodingerEvolver evolver(path, epsilon, dt);
  std::vector<Field> out;
  out.reserve(path.times.size());
  Field psi{path.grid, std::vector<Complex>(path.grid.size)};
  for (std::size_t j = 0; j < path.grid.size; ++j) psi.v[j] = path.Phi[0].v[j];
  out.push_back(psi);
  for (std::size_t i = 1; i < path.times.size(); ++i) {
    double t = path.times[i - 1];
    for (std::size_t s = 0; s < per; ++s) {
      evolver.step(psi, t);
      t += dt;
    }
    require(all_finite(psi), ErrorCode::NonFiniteSample, "evolve_adiabatic: non-finite sample");
    out.push_back(psi);
  }
  return out;
}

AdiabaticErrorReport adiabatic_bound_check(const AdiabaticPath& path, double epsilon, double dt) {
  std::vector<Field> Psi = evolve_adiabatic(path, epsilon, dt);
  const std::size_t m = path.times.size();
  const std::size_t n = path.grid.size;
  const double h = path.grid.spacing;

  AdiabaticErrorReport report;
  report.times = path.times;
  report.lhs_l2.resize(m);
  report.rhs_l2.resize(m);
  report.energy_lhs.resize(m);
  report.ratio.resize(m);
  report.proj_l2.resize(m);

  // Norm of dXi/dt by the same differencing stencil as the eigen-data rates.
  std::vector<double> dxi_norm(m);
  auto stencil_norm = [&](std::size_t i) {
    double acc = 0.0;
    const double dtm = path.dt_mesh;
    for (std::size_t j = 0; j < n; ++j) {
      double d;
      if (i == 0)
        d = (-3.0 * path.Xi[0].v[j] + 4.0 * path.Xi[1].v[j] - path.Xi[2].v[j]) / (2.0 * dtm);
      else if (i + 1 == m)
        d = (3.0 * path.Xi[m - 1].v[j] - 4.0 * path.Xi[m - 2].v[j] + path.Xi[m - 3].v[j]) /
            (2.0 * dtm);
      else
        d = (path.Xi[i + 1].v[j] - path.Xi[i - 1].v[j]) / (2.0 * dtm);
      acc += d * d;
    }
    return std::sqrt(acc * h);
  };
  for (std::size_t i = 0; i < m; ++i) dxi_norm[i] = stencil_norm(i);

  double dxi_integral = 0.0;
  double running_sup = 0.0;
  Field diff{path.grid, std::vector<Complex>(n)};
  Field proj{path.grid, std::vector<Complex>(n)};
  for (std::size_t i = 0; i < m; ++i) {
    if (i > 0) dxi_integral += 0.5 * path.dt_mesh * (dxi_norm[i - 1] + dxi_norm[i]);
    const double xi_norm = norm(path.Xi[i], {NormBase::L2, 0});
    running_sup = std::max(running_sup, xi_norm + dxi_integral);
    report.rhs_l2[i] = 2.0 * epsilon * running_sup;

    const Complex phase = std::polar(1.0, -path.theta[i] / epsilon - path.beta[i]);
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      diff.v[j] = Psi[i].v[j] - phase * path.Phi[i].v[j];
      acc += std::norm(diff.v[j]);
    }
    report.lhs_l2[i] = std::sqrt(acc * h);

    Complex overlap(0.0, 0.0);
    for (std::size_t j = 0; j < n; ++j) overlap += path.Phi[i].v[j] * Psi[i].v[j];
    overlap *= h;
    double pacc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      proj.v[j] = Psi[i].v[j] - overlap * path.Phi[i].v[j];
      pacc += std::norm(proj.v[j]);
    }
    report.proj_l2[i] = std::sqrt(pacc * h);

    Field Hp = apply_hamiltonian(path.V[i], proj);
    Complex quad(0.0, 0.0);
    for (std::size_t j = 0; j < n; ++j) quad += std::conj(proj.v[j]) * Hp.v[j];
    quad *= h;
    report.energy_lhs[i] = quad.real() - path.E[i] * pacc * h;

    report.ratio[i] = report.rhs_l2[i] > 0.0 ? report.lhs_l2[i] / report.rhs_l2[i] : 0.0;
  }
  return report;
}

}  // namespace lplab
