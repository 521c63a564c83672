#pragma once

#include <functional>
#include <vector>

#include "lplab/grid.hpp"

namespace lplab {

// Coupled state of the fast wavefunction and the O(1) oscillator field:
//   i*eps*dt(psi) = -psi'' + phi*psi
//   -dtt(phi)     = phi + |psi|^2 / 2
struct PolaronState {
  double time = 0.0;
  Field psi;
  RealField phi;
  RealField phi_dot;
};

// Smooth one-sided damping layer on the outer fraction of the box. Off by
// default; long dispersive runs switch it on to absorb wrap-around radiation.
struct AbsorbingMask {
  bool enabled = false;
  double strength = 5.0;
  double fraction = 0.1;
};

struct LPParams {
  double epsilon = 0.1;
  double c_psi = 0.02;  // dt = c_psi * epsilon, kept at or below 0.05*epsilon
  bool coupling = true; // test hook: false freezes the field and drops phi*psi
  AbsorbingMask mask;

  double dt() const { return c_psi * epsilon; }
};

struct ConservedDiagnostics {
  double mass = 0.0;    // ||psi||_2^2
  double energy = 0.0;  // int |psi'|^2 + phi |psi|^2 dx + int phi^2 + phi_dot^2 dx
};

ConservedDiagnostics conserved(const PolaronState& state);

// One Strang step of size params.dt(): half kinetic, half field rotation with
// the source frozen at the midpoint modulus, full potential phase, second half
// field rotation, half kinetic.
PolaronState lp_step(PolaronState state, const LPParams& params);

// Reusable stepper holding spectral workspaces; semantics identical to lp_step.
class LpStepper {
 public:
  LpStepper(const Grid& grid, const LPParams& params);
  void step(PolaronState& state);
  const LPParams& params() const { return params_; }

 private:
  Grid grid_;
  LPParams params_;
  std::vector<double> kinetic_phase_;  // k^2 dt / (2 eps)
  std::vector<double> mask_rate_;
  std::vector<Complex> hat_;
  std::vector<double> source_;
};

struct DiagnosticsRow {
  double t = 0.0;
  double mass = 0.0;
  double energy = 0.0;
  double linf_psi = 0.0;
};

struct LPRun {
  std::vector<DiagnosticsRow> diagnostics;       // one row per step
  std::vector<PolaronState> checkpoints;         // every checkpoint_stride steps
  PolaronState final_state;
};

// Callback fires after every step (and once for the initial state).
using StepCallback = std::function<void(const PolaronState&)>;

LPRun evolve_lp(const PolaronState& initial, const LPParams& params, double horizon,
                std::size_t checkpoint_stride = 0, const StepCallback& on_step = {});

}  // namespace lplab
