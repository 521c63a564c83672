#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "lplab/grid.hpp"
#include "lplab/reference.hpp"
#include "lplab/spectral.hpp"

namespace lplab {

// Linear adiabatic laboratory: evolve i*eps dPsi/dt = H(t)Psi for a slowly
// varying potential family and compare against the instantaneous ground state
// with its accumulated dynamical phase.

using PotentialFn = std::function<void(double t, RealField& out)>;

struct AdiabaticPath {
  Grid grid;
  double dt_mesh = 0.0;
  std::vector<double> times;
  std::vector<RealField> V;  // mesh samples
  PotentialFn exact;         // optional exact evaluator; cubic mesh interpolation otherwise
  double mass = 1.0;         // deflation projector weight, norm of the tracked state
  bool deflate = false;      // apply the exact rank-one term -E |Phi><Phi|

  // Derived eigen-data (prepare_eigendata); Phi is real for our families, so
  // the geometric phase beta and Im<Phi, dPhi> vanish identically.
  std::vector<double> E;
  std::vector<double> theta;
  std::vector<double> beta;
  std::vector<RealField> Phi;      // unit-norm ground states
  std::vector<RealField> dPhi_dt;  // centered differences, one-sided ends
  std::vector<RealField> Xi;       // (H-E)^{-1} dPhi_dt on the complement of Phi
};

AdiabaticPath path_from_function(const Grid& grid, PotentialFn fn, double T, double dt_mesh);
AdiabaticPath path_from_reference(const ReferenceTrajectory& traj);

// Solves the ground pair along the mesh (warm-started), then the rate, the
// corrector Xi, and the phase integrals.
void prepare_eigendata(AdiabaticPath& path, double ref_tol = 1e-9);

// One Strang step of the time-dependent linear flow, potential sampled at the
// step midpoint, optional exact rank-one deflation factor. The deflate
// argument overrides the path's flag when supplied.
class SchrodingerEvolver {
 public:
  SchrodingerEvolver(const AdiabaticPath& path, double epsilon, double dt,
                     std::optional<bool> deflate = std::nullopt);

  void step(Field& psi, double t);
  double dt() const { return dt_; }

 private:
  const AdiabaticPath& path_;
  bool deflate_ = false;
  double epsilon_ = 0.0;
  double dt_ = 0.0;
  std::vector<double> kinetic_phase_;
  RealField v_mid_;
  RealField phi_mid_;
  std::vector<Complex> hat_;

  void sample_potential(double t, RealField& out) const;
};

// Psi at the path mesh times, starting from Psi(0) = Phi(0).
std::vector<Field> evolve_adiabatic(const AdiabaticPath& path, double epsilon, double dt);

struct AdiabaticErrorReport {
  std::vector<double> times;
  std::vector<double> lhs_l2;      // |Psi - e^{-i theta/eps - i beta} Phi|_2
  std::vector<double> rhs_l2;      // 2 eps sup_{s<=t} (|Xi| + int |dXi/dt|)
  std::vector<double> energy_lhs;  // <P Psi, (H-E) P Psi>, P = 1 - |Phi><Phi|
  std::vector<double> ratio;       // lhs/rhs (zero where rhs vanishes)
  std::vector<double> proj_l2;     // |P Psi|_2, bounded by the same right side
};

AdiabaticErrorReport adiabatic_bound_check(const AdiabaticPath& path, double epsilon, double dt);

}  // namespace lplab
