#pragma once

#include <string>
#include <vector>

#include "lplab/dynamics.hpp"
#include "lplab/reference.hpp"

namespace lplab {

struct DecompositionOptions {
  // Power-of-two zero-padding factor for the two sup norms; 1 = grid maxima.
  std::size_t oversample = 1;
};

// Per-stamp split of a coupled run against a reference trajectory:
//   alpha = mass^{-2} <Q, e^{i theta/eps} psi>,   R = e^{i theta/eps} psi - alpha Q,
//   R~ = R - i eps alpha chi,                     W = phi - V.
// theta is re-accumulated at stamp resolution by Gauss quadrature of the
// cubic interpolant of E, so the fast phase stays accurate over long runs.
struct DecompositionSeries {
  double epsilon = 0.0;
  double mass = 0.0;  // ||psi||_2 at the first stamp; equals the reference mass

  std::vector<double> t;
  std::vector<Complex> alpha;
  std::vector<double> psi_err;   // ||psi - e^{-i theta/eps} Q||_2
  std::vector<double> nR_l2;
  std::vector<double> nRt_l2;
  std::vector<double> nRt_linf;
  std::vector<double> nRt_winf;  // ||<x>^{-1} R~||_inf
  std::vector<double> nW_l2;
  std::vector<double> dW_l2;     // ||phi_dot - dV/dt||_2
  std::vector<double> dalpha2;   // |d|alpha|^2/dt|, centered differences
  std::vector<double> M1;        // running sup eps^{-1} ||R~||_2
  std::vector<double> M2;        // running sup eps^{-1} max{1,(eps/s)^{1/2}}^{-1} ||R~||_inf
  std::vector<double> M3;        // running sup eps^{-1}(eps+min{(eps/s)^{1/2},(eps/s)^{3/2}})^{-1} ||<x>^{-1}R~||_inf

  std::vector<double> qR_abs;    // |<Q, R>|  (orthogonality of the split)
  std::vector<double> qRt_abs;   // |<Q, R~>| (chi lives on the complement of Q)

  // ||centered FD of W across stamps - (phi_dot - dV/dt)||_2, one value per
  // interior stamp; both rates agree at second order in the stamp spacing.
  std::vector<double> dW_mismatch;

  // Per-stamp right side ingredients of the alpha rate equation
  //   d alpha/dt = mass^{-2}(<dQ/dt, R> - i eps^{-1} <Q, W (alpha Q + R)>).
  std::vector<Complex> rate_dQ_R;
  std::vector<Complex> rate_QWpsi;
};

// Streaming builder: feed stamps in increasing time (e.g. from the evolve
// callback), then take() the finished series. Holds O(1) fields regardless
// of the stamp count.
class Decomposer {
 public:
  Decomposer(const ReferenceTrajectory& ref, double epsilon,
             const DecompositionOptions& opts = {});
  void ingest(const PolaronState& state);
  DecompositionSeries take();

 private:
  const ReferenceTrajectory& ref_;
  DecompositionOptions opts_;
  DecompositionSeries out_;
  Grid fine_grid_;
  bool first_ = true;
  double theta_ = 0.0;
  double last_time_ = 0.0;
  RealField Q_, V_, dV_, dQ_, chi_;
  RealField W_prev2_, W_prev1_, dW_prev1_;
  std::vector<Complex> hat_, fine_hat_;
};

// One-shot wrapper over stored stamps.
DecompositionSeries decompose(const std::vector<PolaronState>& stamps,
                              const ReferenceTrajectory& ref, double epsilon,
                              const DecompositionOptions& opts = {});

struct AlphaResidualReport {
  std::vector<double> t;         // interior stamps
  std::vector<double> residual;  // |centered d alpha/dt - right side|
  double sup_residual = 0.0;
  double sup_rate = 0.0;         // sup |centered d alpha/dt|
};

// Self-consistency of the alpha rate equation on a finished series.
AlphaResidualReport alpha_residual_check(const DecompositionSeries& series);

// Piecewise envelope for |d|alpha|^2/dt| at unit constant:
//   eps for t <= eps;  eps (eps/t)^{3/2} for eps < t <= eps^{1/3};  eps^2 beyond.
// The three branches match at the joints.
double three_regime_envelope(double t, double epsilon);

// Minimal C with |d|alpha|^2/dt| <= C * envelope(t - t0) over all stamps.
double alpha_rate_envelope(const DecompositionSeries& series, double epsilon);

struct ScalingReport {
  std::string observable;
  std::vector<double> epsilons;
  std::vector<double> sup_values;  // sup over t, one per epsilon
  double slope = 0.0;              // log-log least squares
  double expected = 0.0;
  double band = 0.0;
  bool within = false;             // |slope - expected| <= band
};

// Epsilon-scaling fits over >= 3 series with strictly decreasing epsilon:
// psi_error (slope 1), field_error / field_rate_error / mass_defect (slope 2),
// M1 M2 M3 (bounded, slope 0).
std::vector<ScalingReport> scaling_fit(const std::vector<DecompositionSeries>& runs);

}  // namespace lplab
