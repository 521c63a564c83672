#include <cmath>
#include <vector>

#include "doctest.h"

#include "lplab/dispersive.hpp"
#include "lplab/presets.hpp"

using namespace lplab;

namespace {

PotentialFn static_well(double depth) {
  return [depth](double, RealField& out) {
    for (std::size_t j = 0; j < out.grid.size; ++j) {
      const double x = out.grid.node(j);
      out.v[j] = -depth / std::pow(std::cosh(x), 2);
    }
  };
}

PotentialFn translated_well(double depth, double c0) {
  return [depth, c0](double t, RealField& out) {
    const double shift = c0 * std::sin(t);
    for (std::size_t j = 0; j < out.grid.size; ++j) {
      const double x = out.grid.node(j) - shift;
      out.v[j] = -depth / std::pow(std::cosh(x), 2);
    }
  };
}

}  // namespace

TEST_SUITE("dispersive") {

TEST_CASE("continuous-spectrum projector algebra") {
  Grid g = make_grid(40.0, 2048);
  RealField V = sech_well(g, 1.5);
  GroundState gs = ground_state(V, 1.0);
  Field phi = to_complex(gs.wavefunction);

  // Kernel: the bound state projects to zero.
  CHECK(norm(pc_project(V, phi), {NormBase::L2, 0}) < 1e-12);

  // Parity: an odd field is orthogonal to the even ground state.
  Field odd = make_field(g, [](double x) { return Complex(x * std::exp(-x * x), 0.0); });
  Field podd = pc_project(V, odd);
  double diff = 0.0;
  for (std::size_t j = 0; j < g.size; ++j) diff = std::max(diff, std::abs(podd.v[j] - odd.v[j]));
  CHECK(diff < 1e-13);

  // Idempotence and self-adjointness on generic fields.
  Field f = make_field(g, [](double x) {
    return Complex(std::exp(-0.3 * (x - 1.2) * (x - 1.2)), std::sin(0.7 * x) * std::exp(-0.1 * x * x));
  });
  Field h = make_field(g, [](double x) {
    return Complex(std::cos(1.3 * x) * std::exp(-0.2 * x * x), 1.0 / (1.0 + x * x));
  });
  Field pf = pc_project(V, f);
  Field ppf = pc_project(V, pf);
  double idem = 0.0;
  for (std::size_t j = 0; j < g.size; ++j) idem = std::max(idem, std::abs(ppf.v[j] - pf.v[j]));
  CHECK(idem < 1e-12);
  const Complex lhs = inner(pf, h);
  const Complex rhs = inner(f, pc_project(V, h));
  CHECK(std::abs(lhs - rhs) < 1e-12);

  // A repulsive barrier has no bound state to project out.
  RealField barrier = make_real_field(g, [](double x) { return 1.5 / std::pow(std::cosh(x), 2); });
  CHECK_THROWS_AS(pc_project(barrier, f), Error);
}

TEST_CASE("free flow reproduces the Gaussian peak law") {
  Grid g = make_grid(40.0, 4096);
  PotentialFn zero = [](double, RealField& out) { std::fill(out.v.begin(), out.v.end(), 0.0); };
  AdiabaticPath path = path_from_function(g, zero, 0.5, 1e-2);
  Field psi0 = make_field(g, [](double x) {
    return Complex(std::pow(M_PI, -0.25) * std::exp(-0.5 * x * x), 0.0);
  });
  ProjectedOptions o;
  o.project = false;
  o.store_fields = false;
  ProjectedRun run = evolve_projected(path, psi0, 0.1, 2e-3, o);
  double worst = 0.0;
  for (std::size_t i = 0; i < run.times.size(); ++i) {
    const double t = run.times[i];
    const double exact = std::pow(M_PI, -0.25) * std::pow(1.0 + 4.0 * t * t / 0.01, -0.25);
    worst = std::max(worst, std::abs(run.linf[i] - exact));
  }
  CHECK(worst < 1e-12);  // kinetic flow is spectrally exact; measured 4.2e-15
  CHECK(std::abs(run.l2.back() - run.l2.front()) < 1e-12);
}

TEST_CASE("static well: invariant subspace, unitarity, and the propagation identity") {
  Grid g = make_grid(40.0, 4096);
  AdiabaticPath path = path_from_function(g, static_well(1.5), 0.1, 5e-3);
  prepare_eigendata(path);
  Field psi0 = make_decay_datum(path.V[0]);
  ProjectedRun run = evolve_projected(path, psi0, 0.05, 2.5e-4, {});

  // The marching state is exactly unitary; measured drift 1.9e-14.
  double mass_drift = 0.0;
  for (double v : run.mass) mass_drift = std::max(mass_drift, std::abs(v - run.mass.front()));
  CHECK(mass_drift < 1e-12);

  // The recorded observable is orthogonal to the bound state at every node,
  // and the bound component the splitting leaks into the marching state is a
  // bounded O((dt/eps)^2) quantity; measured 5.2e-7 at dt = 0.005*eps.
  for (std::size_t i = 0; i < run.times.size(); ++i) {
    Complex ip(0.0, 0.0);
    for (std::size_t j = 0; j < g.size; ++j) ip += run.phi[i].v[j] * run.psi[i].v[j];
    CHECK(std::abs(ip) * g.spacing < 1e-10);
  }
  double sup_pd = 0.0;
  for (double v : run.pd_overlap) sup_pd = std::max(sup_pd, v);
  CHECK(sup_pd < 5e-6);

  // Static potential: the correction integrals vanish and the identity
  // reduces to propagator consistency. Measured 4.0e-7 / 5.9e-7.
  CHECK(duhamel_residual(run, 0.0, 0.0) < 1e-12);
  CHECK(duhamel_residual(run, 0.05, 0.1) < 1e-6);
  CHECK(duhamel_residual(run, 0.1, 0.05) < 1e-6);
  CHECK(duhamel_residual(run, 0.0, 0.1) < 1e-6);
}

TEST_CASE("spectral assumptions are enforced before evolving") {
  Grid g = make_grid(40.0, 2048);
  Field psi0 = make_field(g, [](double x) { return Complex(std::exp(-x * x), 0.0); });

  // Depth 2 sits exactly at a zero-energy resonance.
  AdiabaticPath resonant = path_from_function(g, static_well(2.0), 0.1, 5e-3);
  prepare_eigendata(resonant);
  CHECK_THROWS_AS(evolve_projected(resonant, psi0, 0.05, 2.5e-3, {}), Error);

  // Depth 6 carries a second bound state.
  AdiabaticPath deep = path_from_function(g, static_well(6.0), 0.1, 5e-3);
  prepare_eigendata(deep);
  CHECK_THROWS_AS(evolve_projected(deep, psi0, 0.05, 2.5e-3, {}), Error);
}

TEST_CASE("identity residual refines at second order") {
  Grid g = make_grid(40.0, 4096);
  double res[3];
  int idx = 0;
  for (double delta : {5e-3, 2.5e-3, 1.25e-3}) {
    AdiabaticPath path = path_from_function(g, translated_well(1.5, 0.3), 0.2, delta);
    prepare_eigendata(path);
    Field psi0 = make_decay_datum(path.V[0]);
    ProjectedRun run = evolve_projected(path, psi0, 0.05, delta / 4.0, {});
    res[idx++] = duhamel_residual(run, 0.1, 0.2);
  }
  // Trapezoid weights, rate stencils, and the splitting all refine together;
  // measured slopes 2.086 and 2.019.
  const double s01 = std::log2(res[0] / res[1]);
  const double s12 = std::log2(res[1] / res[2]);
  CHECK(s01 > 1.7);
  CHECK(s01 < 2.4);
  CHECK(s12 > 1.7);
  CHECK(s12 < 2.4);
}

TEST_CASE("power-law fitter is exact on synthetic series") {
  ProjectedRun run;
  run.epsilon = 0.02;
  for (int i = 0; i <= 90; ++i) {
    const double t = 0.1 + 0.01 * static_cast<double>(i);
    run.times.push_back(t);
    run.winf_m1.push_back(0.7 * std::pow(t, -1.5));
    run.linf.push_back(0.3 * std::pow(t, -0.5));
    run.l2.push_back(1.0);
  }
  DecayFit w = measure_decay(run, DecayNorm::WeightedInf, {0.1, 1.0});
  CHECK(w.exponent == doctest::Approx(-1.5).epsilon(1e-12));
  CHECK(w.amplitude == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(w.r2 > 1.0 - 1e-12);
  DecayFit u = measure_decay(run, DecayNorm::Inf, {0.1, 1.0});
  CHECK(u.exponent == doctest::Approx(-0.5).epsilon(1e-12));

  // Window validation: must start at or past 5*epsilon and hold ten samples.
  CHECK_THROWS_AS(measure_decay(run, DecayNorm::L2, {0.05, 1.0}), Error);
  CHECK_THROWS_AS(measure_decay(run, DecayNorm::L2, {0.97, 1.0}), Error);
}

TEST_CASE("fitted exponents are invariant under rescaling the datum") {
  Grid g = make_grid(80.0, 4096);
  AdiabaticPath path = path_from_function(g, static_well(1.5), 0.3, 2e-3);
  prepare_eigendata(path);
  Field psi0 = make_decay_datum(path.V[0]);
  Field psi3 = psi0;
  for (Complex& c : psi3.v) c *= 3.0;

  ProjectedOptions o;
  o.store_fields = false;
  ProjectedRun r1 = evolve_projected(path, psi0, 0.02, 4e-4, o);
  ProjectedRun r3 = evolve_projected(path, psi3, 0.02, 4e-4, o);
  DecayFit f1 = measure_decay(r1, DecayNorm::WeightedInf, {0.1, 0.3});
  DecayFit f3 = measure_decay(r3, DecayNorm::WeightedInf, {0.1, 0.3});
  CHECK(std::abs(f1.exponent - f3.exponent) < 1e-12);
  CHECK(f3.amplitude / f1.amplitude == doctest::Approx(3.0).epsilon(1e-10));
}

TEST_CASE("weighted and unweighted decay exponents") {
  Grid g = make_grid(160.0, 8192);
  AdiabaticPath path = path_from_function(g, static_well(1.5), 1.0, 2e-3);
  prepare_eigendata(path);
  Field psi0 = make_decay_datum(path.V[0]);

  ProjectedOptions o;
  o.store_fields = false;
  o.mask.enabled = true;
  o.mask.strength = 300.0;
  o.mask.fraction = 0.2;
  ProjectedRun run = evolve_projected(path, psi0, 0.02, 4e-4, o);

  // Far-field law of the weighted amplitude; measured -1.4713, r2 0.9999.
  DecayFit w = measure_decay(run, DecayNorm::WeightedInf, {0.1, 1.0});
  CHECK(w.exponent > -1.7);
  CHECK(w.exponent < -1.3);
  CHECK(w.r2 > 0.99);

  // Sup-norm law before the absorbed front matters; measured -0.5184.
  DecayFit u = measure_decay(run, DecayNorm::Inf, {0.1, 0.5});
  CHECK(u.exponent > -0.65);
  CHECK(u.exponent < -0.35);
  CHECK(u.r2 > 0.99);
}

}  // TEST_SUITE
