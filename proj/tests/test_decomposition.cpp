#include <cmath>
#include <vector>

#include "doctest.h"

#include "lplab/decomposition.hpp"
#include "lplab/presets.hpp"

using namespace lplab;

namespace {

DecompositionSeries run_eps(const ReferenceTrajectory& traj, double eps, double c_psi,
                            std::size_t stride, std::size_t oversample = 1) {
  const Grid& g = traj.grid;
  PolaronState init;
  init.time = 0.0;
  init.psi = to_complex(traj.Q.front());
  init.phi = traj.V.front();
  init.phi_dot = odd_gaussian_velocity(g, 0.2);
  LPParams p;
  p.epsilon = eps;
  p.c_psi = c_psi;
  DecompositionOptions o;
  o.oversample = oversample;
  Decomposer dec(traj, eps, o);
  std::size_t count = 0;
  evolve_lp(init, p, 1.0, 0, [&](const PolaronState& s) {
    if (count % stride == 0) dec.ingest(s);
    ++count;
  });
  return dec.take();
}

struct SweepData {
  ReferenceTrajectory traj;
  std::vector<DecompositionSeries> sweep;  // eps 0.1, 0.05, 0.025; c = 0.02, stride 5
};

const SweepData& sweep_data() {
  static SweepData d = [] {
    SweepData out;
    Grid g = make_grid(40.0, 2048);
    ReferenceOptions ropt;
    ropt.dt_ref = 5e-3;
    out.traj = march_reference(sech_well(g, 1.5), odd_gaussian_velocity(g, 0.2), 1.0, 1.0, ropt);
    chi_and_rate(out.traj);
    for (double eps : {0.1, 0.05, 0.025}) out.sweep.push_back(run_eps(out.traj, eps, 0.02, 5));
    return out;
  }();
  return d;
}

// Frozen reference paired with exact e^{-iEt/eps} Q stamps: every decomposition
// quantity degenerates to zero or a constant, pinning signs and prefactors.
ReferenceTrajectory stub_traj(const Grid& g, double T, double dt) {
  RealField V = sech_well(g, 1.5);
  GroundState gs = ground_state(V, 1.0);
  ReferenceTrajectory traj;
  traj.grid = g;
  traj.dt_ref = dt;
  traj.mass = 1.0;
  RealField zero{g, std::vector<double>(g.size, 0.0)};
  const auto n = static_cast<std::size_t>(std::llround(T / dt)) + 1;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = dt * static_cast<double>(k);
    traj.times.push_back(t);
    traj.E.push_back(gs.energy);
    traj.theta.push_back(gs.energy * t);
    traj.Q.push_back(gs.wavefunction);
    traj.V.push_back(V);
    traj.dV_dt.push_back(zero);
    traj.dQ_dt.push_back(zero);
    traj.chi.push_back(zero);
  }
  return traj;
}

std::vector<PolaronState> stub_stamps(const ReferenceTrajectory& traj, double eps,
                                      std::size_t stride) {
  std::vector<PolaronState> stamps;
  for (std::size_t k = 0; k < traj.times.size(); k += stride) {
    PolaronState s;
    s.time = traj.times[k];
    s.psi = to_complex(traj.Q[k]);
    const Complex ph = std::polar(1.0, -traj.E[k] * traj.times[k] / eps);
    for (auto& z : s.psi.v) z *= ph;
    s.phi = traj.V[k];
    s.phi_dot = RealField{traj.grid, std::vector<double>(traj.grid.size, 0.0)};
    stamps.push_back(std::move(s));
  }
  return stamps;
}

// Single-stamp series with prescribed sup values, for the fit oracles.
DecompositionSeries synth_series(double eps, double psi, double w, double dw, double defect,
                                 double m1, double m2, double m3) {
  DecompositionSeries s;
  s.epsilon = eps;
  s.mass = 1.0;
  s.t = {0.0};
  s.alpha = {Complex(std::sqrt(1.0 - defect), 0.0)};
  s.psi_err = {psi};
  s.nR_l2 = {psi};
  s.nRt_l2 = {psi};
  s.nRt_linf = {psi};
  s.nRt_winf = {psi};
  s.nW_l2 = {w};
  s.dW_l2 = {dw};
  s.dalpha2 = {0.0};
  s.M1 = {m1};
  s.M2 = {m2};
  s.M3 = {m3};
  return s;
}

}  // namespace

TEST_SUITE("decomposition") {

TEST_CASE("initial stamp reproduces the corrector identities") {
  const auto& d = sweep_data();
  const DecompositionSeries& s = d.sweep[1];  // eps = 0.05
  CHECK(std::abs(s.alpha.front() - 1.0) < 1e-13);
  CHECK(s.nR_l2.front() < 1e-13);
  const double expected = 0.05 * norm(d.traj.chi.front());
  CHECK(s.nRt_l2.front() == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("per-stamp invariants on the standard run") {
  const auto& d = sweep_data();
  const DecompositionSeries& s = d.sweep[1];  // eps = 0.05

  double sup_R = 0.0;
  for (std::size_t k = 0; k < s.t.size(); ++k) {
    CHECK(std::abs(s.alpha[k]) <= 1.0 + 1e-10);
    const double defect = std::max(0.0, 1.0 - std::norm(s.alpha[k]));
    CHECK(std::abs(s.nR_l2[k] - s.mass * std::sqrt(defect)) < 1e-10);
    CHECK(s.qR_abs[k] < 1e-10);
    CHECK(s.qRt_abs[k] < 1e-9);
    if (k > 0) {
      CHECK(s.M1[k] >= s.M1[k - 1]);
      CHECK(s.M2[k] >= s.M2[k - 1]);
      CHECK(s.M3[k] >= s.M3[k - 1]);
    }
    sup_R = std::max(sup_R, s.nR_l2[k]);
  }
  // Order-eps remainder with an O(1) constant; measured 0.616.
  CHECK(sup_R / s.epsilon > 0.1);
  CHECK(sup_R / s.epsilon < 10.0);

  // The two field rates agree far below the field-error scale; measured 4.7e-7.
  for (double v : s.dW_mismatch) CHECK(v < 2e-6);
}

TEST_CASE("field rate agreement is second order in the stamp spacing") {
  const auto& d = sweep_data();
  // Fine spacings sit on a ~4e-7 interpolation floor, so probe the FD regime.
  DecompositionSeries coarse = run_eps(d.traj, 0.05, 0.02, 40);
  DecompositionSeries coarser = run_eps(d.traj, 0.05, 0.02, 80);
  double m40 = 0.0, m80 = 0.0;
  for (double v : coarse.dW_mismatch) m40 = std::max(m40, v);
  for (double v : coarser.dW_mismatch) m80 = std::max(m80, v);
  CHECK(m80 / m40 > 3.0);  // measured 3.68
  CHECK(m80 / m40 < 5.0);
}

TEST_CASE("stub pair zeroes the alpha rate equation") {
  Grid g = make_grid(40.0, 2048);
  ReferenceTrajectory stub = stub_traj(g, 0.5, 1e-2);
  DecompositionSeries s = decompose(stub_stamps(stub, 0.1, 5), stub, 0.1, {});
  for (const auto& a : s.alpha) CHECK(std::abs(a - 1.0) < 1e-13);
  AlphaResidualReport rep = alpha_residual_check(s);
  CHECK(rep.sup_residual < 1e-12);
  CHECK(rep.sup_rate < 1e-12);
  CHECK(alpha_rate_envelope(s, 0.1) < 1e-9);
}

TEST_CASE("alpha rate equation holds within budget and refines at second order") {
  const auto& d = sweep_data();
  AlphaResidualReport rep = alpha_residual_check(d.sweep[1]);
  CHECK(rep.sup_residual / rep.sup_rate <= 0.05);  // measured 0.039

  double res[3] = {rep.sup_residual, 0.0, 0.0};
  res[1] = alpha_residual_check(run_eps(d.traj, 0.05, 0.01, 5)).sup_residual;
  res[2] = alpha_residual_check(run_eps(d.traj, 0.05, 0.005, 5)).sup_residual;
  const double s01 = std::log2(res[0] / res[1]);
  const double s12 = std::log2(res[1] / res[2]);
  CHECK(s01 > 1.8);  // measured 2.000
  CHECK(s01 < 2.2);
  CHECK(s12 > 1.8);  // measured 2.000
  CHECK(s12 < 2.2);
}

TEST_CASE("three-regime envelope: joints, oracle, and epsilon stability") {
  for (double eps : {0.1, 0.05, 0.02}) {
    const double t13 = std::pow(eps, 1.0 / 3.0);
    CHECK(three_regime_envelope(0.0, eps) == eps);
    CHECK(three_regime_envelope(eps, eps) == doctest::Approx(eps).epsilon(1e-14));
    CHECK(three_regime_envelope(t13, eps) == doctest::Approx(eps * eps).epsilon(1e-12));
    CHECK(three_regime_envelope(t13 * (1.0 + 1e-9), eps) == eps * eps);
    CHECK(three_regime_envelope(2.0 * eps, eps) ==
          doctest::Approx(eps * std::pow(0.5, 1.5)).epsilon(1e-14));
  }

  // Series whose rate matches the envelope exactly recovers C = 1; the oracle
  // exercises the maximization, not the finite differencing.
  DecompositionSeries synth;
  synth.epsilon = 0.05;
  for (int i = 0; i <= 100; ++i) {
    const double t = 0.008 * static_cast<double>(i);
    synth.t.push_back(t);
    synth.dalpha2.push_back(three_regime_envelope(t, 0.05));
  }
  CHECK(alpha_rate_envelope(synth, 0.05) == doctest::Approx(1.0).epsilon(1e-12));
  for (auto& v : synth.dalpha2) v *= 2.5;
  CHECK(alpha_rate_envelope(synth, 0.05) == doctest::Approx(2.5).epsilon(1e-12));

  // Minimal C stays within x3 as eps halves; measured 1.60 / 2.39 / 2.97.
  const auto& d = sweep_data();
  double c[3];
  for (int i = 0; i < 3; ++i) {
    c[i] = alpha_rate_envelope(d.sweep[i], d.sweep[i].epsilon);
    CHECK(c[i] > 0.5);
    CHECK(c[i] < 5.0);
  }
  const double spread = std::max({c[0], c[1], c[2]}) / std::min({c[0], c[1], c[2]});
  CHECK(spread < 3.0);  // measured 1.86
}

TEST_CASE("scaling fit recovers synthetic exponents exactly") {
  std::vector<DecompositionSeries> runs;
  for (double eps : {0.1, 0.05, 0.025})
    runs.push_back(synth_series(eps, 3.0 * std::pow(eps, 1.37), 0.7 * std::pow(eps, 2.4),
                                0.2 * std::pow(eps, 2.4), 0.5 * std::pow(eps, 2.2),
                                1.1 * std::pow(eps, 0.05), 0.6 * std::pow(eps, -0.12),
                                2.0));
  auto reports = scaling_fit(runs);
  auto find = [&](const char* name) -> const ScalingReport& {
    for (const auto& r : reports)
      if (r.observable == name) return r;
    REQUIRE(false);
    return reports.front();
  };
  CHECK(std::abs(find("psi_error").slope - 1.37) < 1e-10);
  CHECK(find("psi_error").within == false);
  CHECK(std::abs(find("field_error").slope - 2.4) < 1e-10);
  CHECK(std::abs(find("field_rate_error").slope - 2.4) < 1e-10);
  CHECK(std::abs(find("field_total").slope - 2.4) < 1e-10);
  CHECK(std::abs(find("mass_defect").slope - 2.2) < 1e-10);
  CHECK(std::abs(find("M1").slope - 0.05) < 1e-10);
  CHECK(std::abs(find("M2").slope + 0.12) < 1e-10);
  CHECK(std::abs(find("M3").slope) < 1e-10);
  CHECK(find("M3").within == true);
}

TEST_CASE("standard sweep scaling slopes") {
  const auto& d = sweep_data();
  auto reports = scaling_fit(d.sweep);
  auto find = [&](const char* name) -> const ScalingReport& {
    for (const auto& r : reports)
      if (r.observable == name) return r;
    REQUIRE(false);
    return reports.front();
  };

  // Remainder is first order in eps; measured slope 0.8379.
  CHECK(find("psi_error").slope > 0.8);
  CHECK(find("psi_error").slope < 1.2);
  CHECK(find("psi_error").within);

  // Field error and its rate are second order; measured 1.962 / 1.838 / 1.868.
  CHECK(find("field_error").slope > 1.7);
  CHECK(find("field_error").slope < 2.3);
  CHECK(find("field_error").within);
  CHECK(find("field_rate_error").within);
  CHECK(find("field_total").within);
  CHECK(find("mass_defect").within);  // measured 1.672, tracks 2x psi slope

  // The weighted remainder suprema are bounded but not flat on this eps range:
  // the supremum sits at t = 1 where the corrector norm has grown ~19x, and a
  // secular ~eps^{1.75} term still dominates the eps-independent mid-run
  // plateau (~0.037). The values are converged in dt, dt_ref, and N; at
  // eps = 0.0125 the suprema bend toward the plateau. Frozen measured slopes:
  // M1 +0.657, M2 +0.781, M3 -0.342.
  CHECK(find("M1").slope > 0.4);
  CHECK(find("M1").slope < 0.9);
  CHECK(find("M2").slope > 0.5);
  CHECK(find("M2").slope < 1.0);
  CHECK(find("M3").slope > -0.6);
  CHECK(find("M3").slope < -0.1);
  CHECK_FALSE(find("M1").within);
  CHECK_FALSE(find("M2").within);
  CHECK_FALSE(find("M3").within);
}

TEST_CASE("oversampled sup norms refine the grid maxima consistently") {
  const auto& d = sweep_data();
  DecompositionSeries fine = run_eps(d.traj, 0.05, 0.02, 25, 4);
  const DecompositionSeries& plain = d.sweep[1];
  for (std::size_t k = 0; k < fine.t.size(); ++k) {
    REQUIRE(fine.t[k] == doctest::Approx(plain.t[5 * k]).epsilon(1e-12));
    // Trigonometric interpolation passes through the collocation nodes, so the
    // refined maximum can only move up, and only by a sliver; measured 4.5e-5.
    CHECK(fine.nRt_linf[k] >= plain.nRt_linf[5 * k] * (1.0 - 1e-12));
    CHECK(std::abs(fine.nRt_linf[k] - plain.nRt_linf[5 * k]) <
          2e-4 * plain.nRt_linf[5 * k]);
    // The weighted argmax sits in the oscillatory far field, so it moves a bit
    // more between nodes; measured 4.3e-4.
    CHECK(std::abs(fine.nRt_winf[k] - plain.nRt_winf[5 * k]) <
          1e-3 * plain.nRt_winf[5 * k]);
  }
}

TEST_CASE("validation and error paths") {
  Grid g = make_grid(20.0, 256);
  ReferenceTrajectory stub = stub_traj(g, 0.05, 0.0125);
  auto stamps = stub_stamps(stub, 0.1, 1);

  PolaronState beyond = stamps.front();
  beyond.time = 2.0;
  {
    Decomposer dec(stub, 0.1, {});
    CHECK_THROWS_AS(dec.ingest(beyond), Error);
  }
  {
    Decomposer dec(stub, 0.1, {});
    dec.ingest(stamps[2]);
    CHECK_THROWS_AS(dec.ingest(stamps[1]), Error);
  }
  {
    PolaronState heavy = stamps.front();
    for (auto& z : heavy.psi.v) z *= 2.0;
    Decomposer dec(stub, 0.1, {});
    CHECK_THROWS_AS(dec.ingest(heavy), Error);
  }
  {
    DecompositionOptions bad;
    bad.oversample = 3;
    CHECK_THROWS_AS(Decomposer(stub, 0.1, bad), Error);
  }
  {
    ReferenceTrajectory bare = stub;
    bare.chi.clear();
    CHECK_THROWS_AS(Decomposer(bare, 0.1, {}), Error);
  }

  DecompositionSeries two = decompose({stamps[0], stamps[1]}, stub, 0.1, {});
  CHECK_THROWS_AS(alpha_residual_check(two), Error);

  std::vector<DecompositionSeries> short_list(2);
  CHECK_THROWS_AS(scaling_fit(short_list), Error);
  std::vector<DecompositionSeries> unordered;
  for (double eps : {0.025, 0.05, 0.1})
    unordered.push_back(synth_series(eps, 1, 1, 1, 0.5, 1, 1, 1));
  CHECK_THROWS_AS(scaling_fit(unordered), Error);
}

}  // TEST_SUITE
