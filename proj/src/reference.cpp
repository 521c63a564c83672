#include "lplab/reference.hpp"

#include <cmath>
#include <cstdio>
#include <utility>

#include "lplab/errors.hpp"

namespace lplab {

namespace {

std::string with_time(double t, const char* what) {
  char buf[96];
  std::snprintf(buf, sizeof(buf), "%s at reference time t=%.6f", what, t);
  return buf;
}

GroundState solve_or_report(const EigenSolver& solver, const RealField& V, double mass,
                            const EigenOptions& opts, double t) {
  try {
    return solver(V, mass, opts);
  } catch (const Error& e) {
    raise(e.code(), with_time(t, e.what()).c_str());
  }
}

}  // namespace

ReferenceTrajectory march_reference(const RealField& phi0, const RealField& phi_dot0, double mass,
                                    double T, const ReferenceOptions& options) {
  const Grid& g = phi0.grid;
  require_same_grid(phi0.grid, phi_dot0.grid, "march_reference");
  require(mass > 0.0, ErrorCode::InvalidArgument, "march_reference: mass must be positive");
  require(T > 0.0 && options.dt_ref > 0.0, ErrorCode::InvalidArgument,
          "march_reference: T and dt_ref must be positive");
  const auto steps = static_cast<std::size_t>(std::llround(T / options.dt_ref));
  require(steps >= 1 && std::abs(static_cast<double>(steps) * options.dt_ref - T) <
                            1e-9 * std::max(1.0, T),
          ErrorCode::InvalidArgument, "march_reference: T must be a multiple of dt_ref");

  SpectralReport startup = spectral_report(phi0, options.shooting);
  require(startup.negative_count == 1 && !startup.is_resonant, ErrorCode::AssumptionViolated,
          "initial potential must host exactly one bound state and no resonance");

  const EigenSolver solver =
      options.solver ? options.solver
                     : EigenSolver([](const RealField& V, double m, const EigenOptions& o) {
                         return ground_state(V, m, o);
                       });

  EigenOptions eig;
  eig.tol = std::min(1e-9, 0.1 * options.ref_tol);
  eig.gap_tol = options.gap_tol;

  ReferenceTrajectory traj;
  traj.grid = g;
  traj.dt_ref = options.dt_ref;
  traj.mass = mass;
  traj.times.reserve(steps + 1);
  traj.E.reserve(steps + 1);
  traj.Q.reserve(steps + 1);
  traj.V.reserve(steps + 1);
  traj.dV_dt.reserve(steps + 1);

  const std::size_t n = g.size;
  RealField A{g, std::vector<double>(n, 0.0)};
  RealField B{g, std::vector<double>(n, 0.0)};

  // V(t) = phi0 cos t + phi_dot0 sin t - (sin t A - cos t B)/2 with the
  // running moments A, B advanced by trapezoid; the closed-form derivative
  // reuses them because the sin(t - s) kernel vanishes at s = t.
  auto build_V = [&](double t, const RealField& Acc, const RealField& Bcc) {
    RealField V{g, std::vector<double>(n)};
    const double c = std::cos(t), s = std::sin(t);
    for (std::size_t j = 0; j < n; ++j)
      V.v[j] = phi0.v[j] * c + phi_dot0.v[j] * s - 0.5 * (s * Acc.v[j] - c * Bcc.v[j]);
    return V;
  };
  auto build_dV = [&](double t, const RealField& Acc, const RealField& Bcc) {
    RealField dV{g, std::vector<double>(n)};
    const double c = std::cos(t), s = std::sin(t);
    for (std::size_t j = 0; j < n; ++j)
      dV.v[j] = -phi0.v[j] * s + phi_dot0.v[j] * c - 0.5 * (c * Acc.v[j] + s * Bcc.v[j]);
    return dV;
  };

  GroundState gs = solve_or_report(solver, phi0, mass, eig, 0.0);
  require(gs.residual <= options.ref_tol, ErrorCode::NoConvergence,
          "initial eigen-residual exceeds ref_tol");
  traj.times.push_back(0.0);
  traj.E.push_back(gs.energy);
  traj.Q.push_back(gs.wavefunction);
  traj.V.push_back(phi0);
  traj.dV_dt.push_back(build_dV(0.0, A, B));

  const double dt = options.dt_ref;
  for (std::size_t i = 1; i <= steps; ++i) {
    const double t_prev = static_cast<double>(i - 1) * dt;
    const double t = static_cast<double>(i) * dt;
    const RealField& Qp = traj.Q.back();
    const double cp = std::cos(t_prev), sp = std::sin(t_prev);
    const double cc = std::cos(t), sc = std::sin(t);

    // Predictor: freeze Q across the step.
    RealField Ap = A, Bp = B;
    for (std::size_t j = 0; j < n; ++j) {
      const double qp2 = Qp.v[j] * Qp.v[j];
      Ap.v[j] += 0.5 * dt * (qp2 * cp + qp2 * cc);
      Bp.v[j] += 0.5 * dt * (qp2 * sp + qp2 * sc);
    }
    EigenOptions warm = eig;
    warm.warm_start = &Qp;
    warm.continuity_reference = &Qp;
    RealField Vp = build_V(t, Ap, Bp);
    GroundState pred = solve_or_report(solver, Vp, mass, warm, t);

    // Corrector: re-accumulate with the solved Q, rebuild V, and re-solve so
    // the stored triple satisfies the residual bound against the stored V.
    for (std::size_t j = 0; j < n; ++j) {
      const double qp2 = Qp.v[j] * Qp.v[j];
      const double qc2 = pred.wavefunction.v[j] * pred.wavefunction.v[j];
      A.v[j] += 0.5 * dt * (qp2 * cp + qc2 * cc);
      B.v[j] += 0.5 * dt * (qp2 * sp + qc2 * sc);
    }
    RealField Vc = build_V(t, A, B);
    warm.warm_start = &pred.wavefunction;
    GroundState corr = solve_or_report(solver, Vc, mass, warm, t);
    if (corr.residual > options.ref_tol)
      raise(ErrorCode::NoConvergence, with_time(t, "eigen-residual exceeds ref_tol").c_str());
    require(inner(Qp, corr.wavefunction) > 0.0, ErrorCode::NoConvergence,
            with_time(t, "ground-state sign continuity lost").c_str());

    traj.times.push_back(t);
    traj.E.push_back(corr.energy);
    traj.Q.push_back(std::move(corr.wavefunction));
    traj.V.push_back(std::move(Vc));
    traj.dV_dt.push_back(build_dV(t, A, B));
  }

  traj.cos_weighted = std::move(A);
  traj.sin_weighted = std::move(B);
  return traj;
}

void chi_and_rate(ReferenceTrajectory& traj) {
  const std::size_t m = traj.times.size();
  require(m >= 3, ErrorCode::InvalidArgument, "chi_and_rate: need at least three times");
  const double dt = traj.dt_ref;
  const std::size_t n = traj.grid.size;

  traj.dQ_dt.clear();
  traj.dQ_dt.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    RealField d{traj.grid, std::vector<double>(n)};
    if (i == 0) {
      for (std::size_t j = 0; j < n; ++j)
        d.v[j] = (-3.0 * traj.Q[0].v[j] + 4.0 * traj.Q[1].v[j] - traj.Q[2].v[j]) / (2.0 * dt);
    } else if (i + 1 == m) {
      for (std::size_t j = 0; j < n; ++j)
        d.v[j] =
            (3.0 * traj.Q[m - 1].v[j] - 4.0 * traj.Q[m - 2].v[j] + traj.Q[m - 3].v[j]) / (2.0 * dt);
    } else {
      for (std::size_t j = 0; j < n; ++j)
        d.v[j] = (traj.Q[i + 1].v[j] - traj.Q[i - 1].v[j]) / (2.0 * dt);
    }
    traj.dQ_dt.push_back(std::move(d));
  }

  traj.chi.clear();
  traj.chi.reserve(m);
  ResolventOptions ropts;
  for (std::size_t i = 0; i < m; ++i) {
    ropts.warm_start = traj.chi.empty() ? nullptr : &traj.chi.back();
    traj.chi.push_back(
        constrained_resolvent_solve(traj.V[i], traj.E[i], traj.Q[i], traj.dQ_dt[i], ropts));
  }

  traj.theta.assign(m, 0.0);
  for (std::size_t i = 1; i < m; ++i)
    traj.theta[i] = traj.theta[i - 1] + 0.5 * dt * (traj.E[i - 1] + traj.E[i]);
}

TStarReport monitor_tstar(const ReferenceTrajectory& traj, const ShootingOptions& options) {
  TStarReport report;
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    SpectralReport probe = spectral_report(traj.V[i], options);
    std::optional<ViolationKind> kind;
    if (probe.negative_count == 0)
      kind = ViolationKind::EigenvalueLoss;
    else if (probe.negative_count > 1)
      kind = ViolationKind::SecondBoundState;
    else if (probe.is_resonant)
      kind = ViolationKind::Resonance;
    if (kind) {
      report.first_violation_time = traj.times[i];
      report.violation_kind = kind;
      return report;
    }
  }
  report.horizon_reached = true;
  return report;
}

const char* violation_kind_name(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::SecondBoundState: return "SecondBoundState";
    case ViolationKind::Resonance: return "Resonance";
    case ViolationKind::EigenvalueLoss: return "EigenvalueLoss";
  }
  return "Unknown";
}

}  // namespace lplab
