#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "lplab/grid.hpp"
#include "lplab/spectral.hpp"

namespace lplab {

// Slow reference dynamics: V(t) is the harmonic field driven by the ground
// state density of -dxx + V(t) itself, marched causally; Q(t), E(t) are the
// instantaneous ground pair, chi the response of Q to its own motion.

using EigenSolver =
    std::function<GroundState(const RealField& potential, double mass, const EigenOptions&)>;

struct ReferenceTrajectory {
  Grid grid;
  double dt_ref = 0.0;
  double mass = 0.0;
  std::vector<double> times;
  std::vector<double> E;
  std::vector<double> theta;     // accumulated phase, integral of E
  std::vector<RealField> Q;      // ground state, norm pinned to mass
  std::vector<RealField> V;      // field potential
  std::vector<RealField> dV_dt;  // closed-form time derivative of V
  std::vector<RealField> dQ_dt;  // finite-difference time derivative of Q
  std::vector<RealField> chi;    // (H - E)^{-1} dQ_dt on the complement of Q
  RealField cos_weighted;        // accumulator: integral of Q^2 cos s ds
  RealField sin_weighted;        // accumulator: integral of Q^2 sin s ds
};

enum class ViolationKind { SecondBoundState, Resonance, EigenvalueLoss };

struct TStarReport {
  bool horizon_reached = false;
  std::optional<double> first_violation_time;
  std::optional<ViolationKind> violation_kind;
};

struct ReferenceOptions {
  double dt_ref = 1e-3;
  double ref_tol = 1e-8;   // eigen-residual required at every stored time
  double gap_tol = 1e-6;
  ShootingOptions shooting;
  EigenSolver solver;      // defaults to ground_state; injectable for oracles
};

// Marches (Q, V, E) from t = 0 to T on a uniform mesh. The initial potential
// must host exactly one bound state and no zero-energy resonance.
ReferenceTrajectory march_reference(const RealField& phi0, const RealField& phi_dot0, double mass,
                                    double T, const ReferenceOptions& options = {});

// Fills dQ_dt (second-order differences), chi (constrained resolvent), and
// theta (trapezoid of E) on a marched trajectory.
void chi_and_rate(ReferenceTrajectory& traj);

// Probes every stored potential for loss of the single-bound-state,
// non-resonant configuration.
TStarReport monitor_tstar(const ReferenceTrajectory& traj, const ShootingOptions& options = {});

const char* violation_kind_name(ViolationKind kind);

}  // namespace lplab
