#pragma once

#include <vector>

#include "lplab/adiabatic.hpp"
#include "lplab/dynamics.hpp"
#include "lplab/grid.hpp"

namespace lplab {

// Orthogonal projection onto the continuous spectrum of -d^2/dx^2 + V:
// f - <phi, f> phi, with phi the unit-norm ground state.
Field pc_project(const RealField& V, const Field& f);

// Unit-norm (1+x^2)^{-2} bump projected onto the continuous subspace of V.
// Algebraic localization keeps the <x>-weighted norms of the datum finite,
// which the weighted decay measurements need.
Field make_decay_datum(const RealField& V);

struct ProjectedOptions {
  bool project = true;       // false: plain flow, no spectral checks (free baseline)
  bool store_fields = true;  // keep the projected field per mesh time (residual checks need it)
  AbsorbingMask mask;        // damping layer for runs past the wrap-around time
};

// Flow of the continuous-spectrum component: the generator is rewritten as
// (-dxx + V(t)) - E(t)|phi(t)><phi(t)|, which is self-adjoint and agrees with
// H P_c on the range of P_c, so the full-space evolution is unitary and the
// projected samples P_c(t) psi(t) follow the projected equation.
struct ProjectedRun {
  Grid grid;
  double epsilon = 0.0;
  double dt = 0.0;       // integrator step
  double dt_store = 0.0; // storage interval = path mesh spacing
  std::size_t per = 0;   // dt_store / dt
  bool projected = true;

  std::vector<double> times;
  std::vector<double> E;          // instantaneous ground energy (empty when !projected)
  std::vector<RealField> V;       // potential mesh samples (store_fields only)
  std::vector<RealField> phi;     // unit ground states (store_fields && projected)
  std::vector<RealField> dphi_dt; // mesh-stencil rate of phi
  std::vector<Field> psi;         // projected field samples (store_fields only)

  std::vector<double> mass;       // ||psi||_2 of the marching state (exactly conserved)
  std::vector<double> pd_overlap; // |<phi, psi>| bound-state leakage of the splitting
  std::vector<double> winf_m1;    // ||<x>^{-1} psi~||_inf
  std::vector<double> linf;       // ||psi~||_inf
  std::vector<double> l2;         // ||psi~||_2
};

ProjectedRun evolve_projected(const AdiabaticPath& path, const Field& psi0, double epsilon,
                              double dt, const ProjectedOptions& opts = {});

enum class DecayNorm { WeightedInf, Inf, L2 };

struct DecayWindow {
  double t_lo = 0.0;
  double t_hi = 0.0;
};

struct DecayFit {
  double t_lo = 0.0;
  double t_hi = 0.0;
  double exponent = 0.0;   // least-squares slope of log(norm) against log(t)
  double amplitude = 0.0;  // exp(intercept)
  double r2 = 0.0;
  std::size_t samples = 0;
};

// Power-law fit of a stored norm series over the window. The window must
// start at or after 5*epsilon, clear of the near-field crossover.
DecayFit measure_decay(const ProjectedRun& run, DecayNorm kind, DecayWindow window);

// L_inf defect of the exact-propagation identity for the projected field:
// the stored sample at time t against the static propagator of V(t0) applied
// to the initial datum plus the bound-state overlap term and the three
// correction integrals (potential difference and the two bound-state rate
// couplings), assembled with trapezoid weights in a single backward sweep.
double duhamel_residual(const ProjectedRun& run, double t0, double t);

}  // namespace lplab
