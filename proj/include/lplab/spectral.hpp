#pragma once

#include <optional>
#include <vector>

#include "lplab/grid.hpp"

namespace lplab {

// H_W f = -f'' + W f, second derivative applied spectrally.
Field apply_hamiltonian(const RealField& W, const Field& f);
RealField apply_hamiltonian(const RealField& W, const RealField& f);

struct GroundState {
  double energy = 0.0;
  RealField wavefunction;  // ||psi||_2 equals the requested mass
  double residual = 0.0;   // ||H psi - E psi||_2 after normalization
};

struct EigenOptions {
  double tol = 1e-10;          // residual target for ||H q - E q||_2 at unit mass
  int lanczos_steps = 256;     // Krylov budget for the cold start
  int max_refinements = 60;    // Rayleigh-shift correction sweeps
  int max_cg_iterations = 800; // per correction solve
  double gap_tol = 1e-6;       // "negative" means below -gap_tol
  const RealField* continuity_reference = nullptr;  // fix sign by overlap
  const RealField* warm_start = nullptr;            // skip Lanczos, refine this
};

// Smallest eigenpair of H_W, normalized to ||psi||_2 = mass, sign fixed so the
// peak (or the overlap with continuity_reference) is positive.
GroundState ground_state(const RealField& W, double mass, const EigenOptions& opts = {});

// Ritz values of H_W from a fully reorthogonalized Lanczos sweep.
std::vector<double> lanczos_ritz_values(const RealField& W, int steps);

struct ShootingOptions {
  double rho_tol = 0.02;
  double boundary_tol = 1e-6;  // max |W| allowed on the outer 10% of nodes
};

struct SpectralReport {
  int negative_count = 0;        // bound states, by Sturm oscillation count
  double rho = 0.0;              // 0 = zero-energy resonance, ~0.5 generic
  bool is_resonant = false;      // rho < rho_tol
  RealField shooting_solution;   // zero-energy solution u with u(-L)=1, u'(-L)=0
};

SpectralReport spectral_report(const RealField& W, const ShootingOptions& opts = {});

struct ResolventOptions {
  double tol = 1e-10;            // ||residual||_2 target, relative to rhs
  int max_iterations = 4000;
  const RealField* warm_start = nullptr;
};

// Solve (H_W - E) chi = rhs restricted to the orthogonal complement of Q,
// where (E, Q) is the ground pair of H_W. Projection is applied to the
// right-hand side and every iterate; the solve is plain CG with a kinetic
// preconditioner (the projected operator is positive definite there).
RealField constrained_resolvent_solve(const RealField& W, double E, const RealField& Q,
                                      const RealField& rhs, const ResolventOptions& opts = {});

}  // namespace lplab
