#include <doctest.h>

#include <cmath>

#include "lplab/grid.hpp"
#include "lplab/spectral.hpp"

using namespace lplab;

namespace {

// Wells -a*sech^2(x) have ground energy -s^2 with s(s+1) = a.
double well_ground_energy(double depth) {
  const double s = 0.5 * (std::sqrt(1.0 + 4.0 * depth) - 1.0);
  return -s * s;
}

RealField sech_well(const Grid& g, double depth) {
  return make_real_field(g, [depth](double x) { return -depth / std::pow(std::cosh(x), 2); });
}

const Grid kGrid = make_grid(40.0, 4096);

}  // namespace

TEST_SUITE("spectral") {

TEST_CASE("hamiltonian annihilates the sech eigenpair") {
  RealField W = sech_well(kGrid, 2.0);
  RealField f = make_real_field(kGrid, [](double x) { return 1.0 / std::cosh(x); });
  RealField Hf = apply_hamiltonian(W, f);
  double err = 0.0;
  for (std::size_t j = 0; j < kGrid.size; ++j) err = std::max(err, std::abs(Hf.v[j] + f.v[j]));
  CHECK(err < 1e-8);
}

TEST_CASE("ground state of the depth-1.5 well") {
  GroundState gs = ground_state(sech_well(kGrid, 1.5), 1.0);
  CHECK(gs.energy == doctest::Approx(well_ground_energy(1.5)).epsilon(1e-9));
  CHECK(gs.energy == doctest::Approx(-0.677124344467705).epsilon(1e-9));
  CHECK(gs.residual <= 1e-9);
  CHECK(std::abs(norm(gs.wavefunction, {NormBase::L2, 0}) - 1.0) < 1e-13);
}

TEST_CASE("ground state of the depth-2 well matches sech") {
  GroundState gs = ground_state(sech_well(kGrid, 2.0), 1.0);
  CHECK(gs.energy == doctest::Approx(-1.0).epsilon(1e-10));
  RealField exact =
      make_real_field(kGrid, [](double x) { return 1.0 / (std::sqrt(2.0) * std::cosh(x)); });
  RealField diff = exact;
  for (std::size_t j = 0; j < kGrid.size; ++j) diff.v[j] -= gs.wavefunction.v[j];
  CHECK(norm(diff, {NormBase::L2, 0}) < 1e-6);
}

TEST_CASE("deeper wells and mass scaling") {
  GroundState gs = ground_state(sech_well(kGrid, 6.0), 2.5);
  CHECK(gs.energy == doctest::Approx(-4.0).epsilon(1e-10));
  CHECK(std::abs(norm(gs.wavefunction, {NormBase::L2, 0}) - 2.5) < 1e-12);
  // Positive-peak sign convention.
  double peak = 0.0;
  for (double x : gs.wavefunction.v) peak = std::abs(x) > std::abs(peak) ? x : peak;
  CHECK(peak > 0.0);
}

TEST_CASE("repulsive potential has no bound state") {
  RealField W = make_real_field(kGrid, [](double x) { return 1.0 / std::pow(std::cosh(x), 2); });
  try {
    ground_state(W, 1.0);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoNegativeEigenvalue);
  }
}

TEST_CASE("warm started solves track a perturbed well") {
  GroundState cold = ground_state(sech_well(kGrid, 1.5), 1.0);
  RealField W2 = make_real_field(kGrid, [](double x) {
    return -1.5 / std::pow(std::cosh(x), 2) + 0.01 * std::exp(-x * x);
  });
  EigenOptions opts;
  opts.warm_start = &cold.wavefunction;
  opts.continuity_reference = &cold.wavefunction;
  GroundState warm = ground_state(W2, 1.0, opts);
  GroundState check = ground_state(W2, 1.0);
  CHECK(warm.energy == doctest::Approx(check.energy).epsilon(1e-11));
  CHECK(warm.residual <= 1e-10);
  CHECK(inner(warm.wavefunction, cold.wavefunction) > 0.9);
}

TEST_CASE("ritz spectrum counts bound states") {
  auto ritz6 = lanczos_ritz_values(sech_well(kGrid, 6.0), 600);
  int negatives6 = 0;
  for (double t : ritz6)
    if (t < -1e-6) ++negatives6;
  CHECK(negatives6 == 2);
  CHECK(ritz6[0] == doctest::Approx(-4.0).epsilon(1e-6));
  CHECK(ritz6[1] == doctest::Approx(-1.0).epsilon(1e-6));

  auto ritz15 = lanczos_ritz_values(sech_well(kGrid, 1.5), 256);
  int negatives15 = 0;
  for (double t : ritz15)
    if (t < -1e-6) ++negatives15;
  CHECK(negatives15 == 1);
}

TEST_CASE("shooting dichotomy across the sech family") {
  struct Case {
    double depth;
    bool resonant;
    int count;
  };
  for (const Case& c : {Case{1.5, false, 1}, Case{2.0, true, 1}, Case{2.5, false, 2},
                        Case{6.0, true, 2}}) {
    SpectralReport rep = spectral_report(sech_well(kGrid, c.depth));
    CAPTURE(c.depth);
    CHECK(rep.is_resonant == c.resonant);
    CHECK(rep.negative_count == c.count);
    if (c.resonant)
      CHECK(rep.rho < 0.02);
    else
      CHECK(rep.rho > 0.1);
    CHECK(rep.shooting_solution.v[0] == 1.0);
  }
}

TEST_CASE("report counts agree with the ritz spectrum") {
  for (double depth : {1.5, 2.0, 6.0}) {
    SpectralReport rep = spectral_report(sech_well(kGrid, depth));
    auto ritz = lanczos_ritz_values(sech_well(kGrid, depth), 256);
    int negatives = 0;
    for (double t : ritz)
      if (t < -1e-6) ++negatives;
    CAPTURE(depth);
    CHECK(rep.negative_count == negatives);
  }
}

TEST_CASE("delocalized potentials are rejected by the shooting probe") {
  Grid small = make_grid(5.0, 256);
  RealField W = sech_well(small, 1.5);
  try {
    spectral_report(W);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::PotentialNotLocalized);
  }
}

TEST_CASE("constrained resolvent inverts a forward application") {
  RealField W = sech_well(kGrid, 1.5);
  GroundState gs = ground_state(W, 1.0);
  RealField f = make_real_field(kGrid, [](double x) { return std::cos(x) * std::exp(-x * x); });
  // Project onto the complement of Q.
  const double overlap = inner(gs.wavefunction, f);
  RealField target = f;
  for (std::size_t j = 0; j < kGrid.size; ++j) target.v[j] -= overlap * gs.wavefunction.v[j];
  RealField rhs = apply_hamiltonian(W, target);
  for (std::size_t j = 0; j < kGrid.size; ++j) rhs.v[j] -= gs.energy * target.v[j];

  RealField chi = constrained_resolvent_solve(W, gs.energy, gs.wavefunction, rhs);
  RealField diff = chi;
  for (std::size_t j = 0; j < kGrid.size; ++j) diff.v[j] -= target.v[j];
  CHECK(norm(diff, {NormBase::L2, 0}) < 1e-7);
  CHECK(std::abs(inner(gs.wavefunction, chi)) < 1e-10);
}

TEST_CASE("resolvent of a parallel right-hand side is zero") {
  RealField W = sech_well(kGrid, 1.5);
  GroundState gs = ground_state(W, 1.0);
  RealField chi = constrained_resolvent_solve(W, gs.energy, gs.wavefunction, gs.wavefunction);
  CHECK(norm(chi, {NormBase::L2, 0}) < 1e-14);
}

}  // TEST_SUITE
