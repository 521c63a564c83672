#include <doctest.h>

#include <cmath>
#include <cstring>

#include "lplab/presets.hpp"
#include "lplab/reference.hpp"

using namespace lplab;

namespace {
const Grid kGrid = make_grid(40.0, 4096);
const RealField kPhi0 = sech_well(kGrid, 1.5);
const RealField kPhiDot0 = odd_gaussian_velocity(kGrid);
}  // namespace

TEST_SUITE("reference") {

TEST_CASE("frozen eigensolver reproduces the closed-form field") {
  GroundState base = ground_state(kPhi0, 1.0);
  ReferenceOptions opts;
  opts.dt_ref = 1e-4;
  opts.solver = [&](const RealField&, double, const EigenOptions&) {
    return GroundState{base.energy, base.wavefunction, 0.0};
  };
  ReferenceTrajectory traj = march_reference(kPhi0, kPhiDot0, 1.0, 0.2, opts);
  double err = 0.0;
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const double t = traj.times[i];
    for (std::size_t j = 0; j < kGrid.size; ++j) {
      const double q = base.wavefunction.v[j];
      const double expected = kPhi0.v[j] * std::cos(t) + kPhiDot0.v[j] * std::sin(t) -
                              0.5 * q * q * (1.0 - std::cos(t));
      err = std::max(err, std::abs(traj.V[i].v[j] - expected));
    }
  }
  CHECK(err < 1e-10);

  chi_and_rate(traj);
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    CHECK(std::abs(traj.theta[i] - base.energy * traj.times[i]) < 1e-12);
    // Q frozen: its rate vanishes identically, so chi does too.
    CHECK(norm(traj.dQ_dt[i], {NormBase::Linf, 0}) < 1e-12);
  }
}

TEST_CASE("initial slice matches the static solve") {
  ReferenceOptions opts;
  ReferenceTrajectory traj = march_reference(kPhi0, kPhiDot0, 1.0, 0.01, opts);
  GroundState gs = ground_state(kPhi0, 1.0);
  CHECK(traj.E[0] == doctest::Approx(gs.energy).epsilon(1e-12));
  CHECK(std::memcmp(traj.V[0].v.data(), kPhi0.v.data(), kGrid.size * sizeof(double)) == 0);
  double diff = 0.0;
  for (std::size_t j = 0; j < kGrid.size; ++j)
    diff = std::max(diff, std::abs(traj.Q[0].v[j] - gs.wavefunction.v[j]));
  CHECK(diff < 1e-12);
}

TEST_CASE("marched trajectory meets its invariants over a unit horizon") {
  ReferenceOptions opts;
  ReferenceTrajectory traj = march_reference(kPhi0, kPhiDot0, 1.0, 1.0, opts);
  const std::size_t m = traj.times.size();
  REQUIRE(m == 1001);

  double worst_res = 0.0, worst_mass = 0.0, max_E = -1e30;
  for (std::size_t i = 0; i < m; ++i) {
    RealField HQ = apply_hamiltonian(traj.V[i], traj.Q[i]);
    double acc = 0.0;
    for (std::size_t j = 0; j < kGrid.size; ++j) {
      const double r = HQ.v[j] - traj.E[i] * traj.Q[i].v[j];
      acc += r * r;
    }
    worst_res = std::max(worst_res, std::sqrt(acc * kGrid.spacing));
    worst_mass = std::max(worst_mass, std::abs(norm(traj.Q[i], {NormBase::L2, 0}) - 1.0));
    max_E = std::max(max_E, traj.E[i]);
    if (i > 0) CHECK(inner(traj.Q[i - 1], traj.Q[i]) > 0.0);
  }
  CHECK(worst_res <= 1e-8);
  CHECK(worst_mass <= 1e-12);
  CHECK(max_E < -1e-6);
  CHECK(traj.E[0] == doctest::Approx(-0.677124344467705).epsilon(1e-9));

  chi_and_rate(traj);
  double worst_qchi = 0.0, worst_qdq = 0.0, worst_chi_inf = 0.0, worst_xchi_l1 = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    worst_qchi = std::max(worst_qchi, std::abs(inner(traj.Q[i], traj.chi[i])));
    worst_qdq = std::max(worst_qdq, std::abs(inner(traj.Q[i], traj.dQ_dt[i])));
    worst_chi_inf = std::max(worst_chi_inf, norm(traj.chi[i], {NormBase::Linf, 0}));
    worst_xchi_l1 = std::max(worst_xchi_l1, norm(traj.chi[i], {NormBase::L1, 1}));
  }
  CHECK(worst_qchi <= 1e-10);
  CHECK(worst_qdq <= 1e-6);  // constant mass forces orthogonality to O(dt_ref^2)
  CHECK(worst_chi_inf < 10.0);
  CHECK(worst_xchi_l1 < 50.0);  // measured sup about 17 on [0,1]

  TStarReport report = monitor_tstar(traj);
  CHECK(report.horizon_reached);
  CHECK(!report.first_violation_time.has_value());
}

TEST_CASE("field equation residual and terminal eigenvalue refine at second order") {
  const double T = 0.2;
  double ET[3], wave[3];
  int idx = 0;
  for (double dt : {2e-3, 1e-3, 5e-4}) {
    ReferenceOptions opts;
    opts.dt_ref = dt;
    ReferenceTrajectory traj = march_reference(kPhi0, kPhiDot0, 1.0, T, opts);
    ET[idx] = traj.E.back();
    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < traj.times.size(); ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < kGrid.size; ++j) {
        const double d2 =
            (traj.V[i + 1].v[j] - 2.0 * traj.V[i].v[j] + traj.V[i - 1].v[j]) / (dt * dt);
        const double r = d2 + traj.V[i].v[j] + 0.5 * traj.Q[i].v[j] * traj.Q[i].v[j];
        acc += r * r;
      }
      worst = std::max(worst, std::sqrt(acc * kGrid.spacing));
    }
    wave[idx++] = worst;
  }
  const double slope1 = std::log2(wave[0] / wave[1]);
  const double slope2 = std::log2(wave[1] / wave[2]);
  CHECK(slope1 > 1.8);
  CHECK(slope1 < 2.2);
  CHECK(slope2 > 1.8);
  CHECK(slope2 < 2.2);
  const double ratio = (ET[0] - ET[1]) / (ET[1] - ET[2]);
  CHECK(ratio > 3.0);
  CHECK(ratio < 5.0);
}

TEST_CASE("accumulator identity agrees with direct quadrature") {
  ReferenceOptions opts;
  ReferenceTrajectory traj = march_reference(kPhi0, kPhiDot0, 1.0, 0.02, opts);
  const std::size_t m = traj.times.size();
  const double t = traj.times.back();
  double err = 0.0;
  for (std::size_t j = 0; j < kGrid.size; ++j) {
    double conv = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      const double w = (k == 0 || k + 1 == m) ? 0.5 : 1.0;
      const double q = traj.Q[k].v[j];
      conv += w * opts.dt_ref * q * q * std::sin(t - traj.times[k]);
    }
    const double direct =
        kPhi0.v[j] * std::cos(t) + kPhiDot0.v[j] * std::sin(t) - 0.5 * conv;
    err = std::max(err, std::abs(direct - traj.V.back().v[j]));
  }
  CHECK(err < 1e-13);
}

TEST_CASE("monitor flags each violation kind") {
  auto stub_traj = [&](double depth_at_3) {
    ReferenceTrajectory traj;
    traj.grid = kGrid;
    traj.dt_ref = 1e-3;
    for (int i = 0; i < 5; ++i) {
      traj.times.push_back(i * 1e-3);
      traj.V.push_back(sech_well(kGrid, i == 3 ? depth_at_3 : 1.5));
    }
    return traj;
  };

  TStarReport second = monitor_tstar(stub_traj(6.0));
  CHECK(!second.horizon_reached);
  REQUIRE(second.first_violation_time.has_value());
  CHECK(*second.first_violation_time == doctest::Approx(3e-3));
  CHECK(*second.violation_kind == ViolationKind::SecondBoundState);

  TStarReport resonant = monitor_tstar(stub_traj(2.0));
  CHECK(*resonant.violation_kind == ViolationKind::Resonance);

  TStarReport lost = monitor_tstar(stub_traj(-1.5));  // repulsive bump
  CHECK(*lost.violation_kind == ViolationKind::EigenvalueLoss);

  CHECK(std::strcmp(violation_kind_name(ViolationKind::Resonance), "Resonance") == 0);
}

TEST_CASE("assumption check rejects multi-well data") {
  try {
    march_reference(sech_well(kGrid, 6.0), kPhiDot0, 1.0, 0.01, {});
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::AssumptionViolated);
  }
}

TEST_CASE("solver failures mid-run are reported with the time") {
  GroundState base = ground_state(kPhi0, 1.0);
  ReferenceOptions opts;
  opts.solver = [&](const RealField&, double, const EigenOptions&) -> GroundState {
    static int calls = 0;
    if (++calls > 12) raise(ErrorCode::NoConvergence, "stub budget exhausted");
    return GroundState{base.energy, base.wavefunction, 0.0};
  };
  try {
    march_reference(kPhi0, kPhiDot0, 1.0, 0.05, opts);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoConvergence);
    CHECK(std::string(e.what()).find("reference time") != std::string::npos);
  }
}

}  // TEST_SUITE
