// Acceptance suite: ten numbered criteria, one [PASS]/[FAIL] block each, with
// every tolerance pinned in code and every measured value printed.  Exit code
// is the number of failed criteria.  Two clauses are known to sit outside
// their target bands at this resolution and are reported honestly: the
// absolute energy-drift budget in criterion 3 (the splitting's measured
// constant is ~6e-6 at dt = 0.02*eps) and the flatness of the weighted
// remainder suprema in criterion 5 (a secular term still dominates the
// eps-independent plateau on eps >= 0.025; the values are converged in dt,
// dt_ref, and N).

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <string>
#include <vector>

#include "lplab/adiabatic.hpp"
#include "lplab/decomposition.hpp"
#include "lplab/dispersive.hpp"
#include "lplab/dynamics.hpp"
#include "lplab/presets.hpp"
#include "lplab/reference.hpp"
#include "lplab/spectral.hpp"

using namespace lplab;

namespace {

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

double secs_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Criterion {
  int index = 0;
  const char* title = "";
  bool ok = true;
  std::vector<std::string> lines;

  void clause(bool pass, const std::string& text) {
    ok = ok && pass;
    lines.push_back(std::string(pass ? "    ok    " : "    FAIL  ") + text);
  }
};

template <class Body>
bool run_criterion(int index, const char* title, Body&& body) {
  Criterion c;
  c.index = index;
  c.title = title;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(c);
  } catch (const std::exception& e) {
    c.ok = false;
    c.lines.push_back(std::string("    FAIL  threw: ") + e.what());
  }
  std::printf("[%s] criterion %d: %s  (%.1f s)\n", c.ok ? "PASS" : "FAIL", c.index, c.title,
              secs_since(t0));
  for (const auto& line : c.lines) std::printf("%s\n", line.c_str());
  std::fflush(stdout);
  return c.ok;
}

RealField sech_well_of(const Grid& g, double depth) {
  return make_real_field(g, [depth](double x) { return -depth / std::pow(std::cosh(x), 2); });
}

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

DecompositionSeries run_eps(const ReferenceTrajectory& traj, double eps, double c_psi,
                            std::size_t stride) {
  PolaronState init;
  init.psi = to_complex(traj.Q.front());
  init.phi = traj.V.front();
  init.phi_dot = odd_gaussian_velocity(traj.grid, 0.2);
  LPParams p;
  p.epsilon = eps;
  p.c_psi = c_psi;
  Decomposer dec(traj, eps, {});
  std::size_t count = 0;
  evolve_lp(init, p, 1.0, 0, [&](const PolaronState& s) {
    if (count % stride == 0) dec.ingest(s);
    ++count;
  });
  return dec.take();
}

const ScalingReport& find_report(const std::vector<ScalingReport>& reports, const char* name) {
  for (const auto& r : reports)
    if (r.observable == name) return r;
  raise(ErrorCode::InvalidArgument, std::string("missing scaling observable ") + name);
}

struct SweepData {
  ReferenceTrajectory traj;
  std::vector<DecompositionSeries> runs;  // eps 0.1, 0.05, 0.025 at c_psi = 0.02, stride 5
  bool ready = false;
};

}  // namespace

int main() {
  std::printf("lplab acceptance suite\n----------------------\n");
  int failed = 0;
  SweepData sweep;

  // 1. Closed-form eigenpairs of the sech^2 wells, with a wall-clock budget.
  failed += !run_criterion(1, "closed-form sech-well eigenpairs", [](Criterion& c) {
    const auto t0 = std::chrono::steady_clock::now();
    const Grid g = make_grid(40.0, 4096);
    const GroundState shallow = ground_state(sech_well_of(g, 1.5), 1.0);
    const double s15 = 0.5 * (std::sqrt(7.0) - 1.0);
    const double err15 = std::abs(shallow.energy - (-s15 * s15));
    c.clause(err15 <= 1e-6,
             fmt("depth-1.5 ground energy error %.3g (tolerance 1e-6)", err15));

    const GroundState exact_depth = ground_state(sech_well_of(g, 2.0), 1.0);
    const double err2 = std::abs(exact_depth.energy - (-1.0));
    c.clause(err2 <= 1e-8, fmt("depth-2 ground energy error %.3g (tolerance 1e-8)", err2));

    const RealField sech_norm =
        make_real_field(g, [](double x) { return 1.0 / (std::sqrt(2.0) * std::cosh(x)); });
    const double sign = inner(exact_depth.wavefunction, sech_norm) >= 0.0 ? 1.0 : -1.0;
    double acc = 0.0;
    for (std::size_t j = 0; j < g.size; ++j) {
      const double d = sign * exact_depth.wavefunction.v[j] - sech_norm.v[j];
      acc += d * d;
    }
    const double dist = std::sqrt(acc * g.spacing);
    c.clause(dist < 1e-6,
             fmt("depth-2 eigenfunction L2 distance to sech/sqrt(2): %.3g (tolerance 1e-6)",
                 dist));

    const double secs = secs_since(t0);
    c.clause(secs < 5.0, fmt("runtime %.2f s (budget 5 s)", secs));
  });

  // 2. Bound-state count and zero-energy resonance dichotomy.
  failed += !run_criterion(2, "resonance dichotomy across the sech family", [](Criterion& c) {
    const Grid g = make_grid(40.0, 4096);
    struct Case {
      double depth;
      bool resonant;
      int count;  // -1: count not asserted at this depth
    };
    for (const Case& k :
         {Case{1.5, false, 1}, Case{2.0, true, 1}, Case{2.5, false, -1}, Case{6.0, true, 2}}) {
      const SpectralReport rep = spectral_report(sech_well_of(g, k.depth));
      c.clause(rep.is_resonant == k.resonant,
               fmt("depth %.1f resonant = %s (expected %s)", k.depth,
                   rep.is_resonant ? "true" : "false", k.resonant ? "true" : "false"));
      if (k.count >= 0)
        c.clause(rep.negative_count == k.count,
                 fmt("depth %.1f bound states = %d (expected %d)", k.depth, rep.negative_count,
                     k.count));
    }
  });

  // 3. Conservation laws of the coupled splitting.
  failed += !run_criterion(3, "conservation laws under the splitting", [](Criterion& c) {
    const Grid g = make_grid(40.0, 4096);
    const PolaronState s0 = standard_polaron_state(g);
    auto drift_at = [&](double c_psi, double* mass_step) {
      LPParams p;
      p.epsilon = 0.1;
      p.c_psi = c_psi;
      const LPRun run = evolve_lp(s0, p, 1.0);
      const double e0 = run.diagnostics.front().energy;
      double drift = 0.0, step = 0.0;
      for (std::size_t i = 0; i < run.diagnostics.size(); ++i) {
        drift = std::max(drift, std::abs(run.diagnostics[i].energy - e0) / std::abs(e0));
        if (i > 0)
          step = std::max(step, std::abs(run.diagnostics[i].mass - run.diagnostics[i - 1].mass) /
                                    run.diagnostics[i - 1].mass);
      }
      if (mass_step) *mass_step = step;
      return drift;
    };
    double mass_step = 0.0;
    const double fine = drift_at(0.02, &mass_step);
    c.clause(mass_step <= 1e-12,
             fmt("per-step relative mass drift %.3g (tolerance 1e-12)", mass_step));
    c.clause(fine <= 1e-6,
             fmt("relative energy drift %.3g over [0,1] at dt = 0.02*eps (tolerance 1e-6)",
                 fine));
    const double coarse = drift_at(0.04, nullptr);
    const double slope = std::log2(coarse / fine);
    c.clause(slope >= 1.8 && slope <= 2.2,
             fmt("energy-drift refinement slope %.3f (band [1.8, 2.2])", slope));
  });

  // 4. Self-consistency of the marched comparison dynamics.
  failed += !run_criterion(4, "reference dynamics self-consistency", [](Criterion& c) {
    const Grid g = make_grid(40.0, 4096);
    const RealField phi0 = sech_well(g, 1.5);
    const RealField phid0 = odd_gaussian_velocity(g);

    const ReferenceTrajectory traj = march_reference(phi0, phid0, 1.0, 1.0, {});
    double worst_res = 0.0, worst_mass = 0.0;
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
      const RealField HQ = apply_hamiltonian(traj.V[i], traj.Q[i]);
      double acc = 0.0;
      for (std::size_t j = 0; j < g.size; ++j) {
        const double r = HQ.v[j] - traj.E[i] * traj.Q[i].v[j];
        acc += r * r;
      }
      worst_res = std::max(worst_res, std::sqrt(acc * g.spacing));
      worst_mass = std::max(worst_mass, std::abs(norm(traj.Q[i], {NormBase::L2, 0}) - 1.0));
    }
    c.clause(worst_res <= 1e-8,
             fmt("sup eigen-residual ||(-dxx + V - E) Q||_2 = %.3g (tolerance 1e-8)", worst_res));
    c.clause(worst_mass <= 1e-12,
             fmt("sup | ||Q_t||_2 - ||Q_0||_2 | = %.3g (tolerance 1e-12, round-off)",
                 worst_mass));

    double wave[3];
    int idx = 0;
    for (double dt : {2e-3, 1e-3, 5e-4}) {
      ReferenceOptions opts;
      opts.dt_ref = dt;
      const ReferenceTrajectory fine = march_reference(phi0, phid0, 1.0, 0.2, opts);
      double worst = 0.0;
      for (std::size_t i = 1; i + 1 < fine.times.size(); ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < g.size; ++j) {
          const double d2 =
              (fine.V[i + 1].v[j] - 2.0 * fine.V[i].v[j] + fine.V[i - 1].v[j]) / (dt * dt);
          const double r = d2 + fine.V[i].v[j] + 0.5 * fine.Q[i].v[j] * fine.Q[i].v[j];
          acc += r * r;
        }
        worst = std::max(worst, std::sqrt(acc * g.spacing));
      }
      wave[idx++] = worst;
    }
    const double s01 = std::log2(wave[0] / wave[1]);
    const double s12 = std::log2(wave[1] / wave[2]);
    c.clause(s01 >= 1.8 && s01 <= 2.2,
             fmt("field-equation residual slope (dt_ref 2e-3 -> 1e-3): %.3f (band [1.8, 2.2])",
                 s01));
    c.clause(s12 >= 1.8 && s12 <= 2.2,
             fmt("field-equation residual slope (dt_ref 1e-3 -> 5e-4): %.3f (band [1.8, 2.2])",
                 s12));
  });

  // 5. Epsilon-scaling of the coupled-run errors (the headline sweep).
  failed += !run_criterion(5, "epsilon-scaling of the coupled-run errors",
                           [&sweep](Criterion& c) {
    const auto t0 = std::chrono::steady_clock::now();
    const Grid g = make_grid(40.0, 2048);
    ReferenceOptions ropt;
    ropt.dt_ref = 5e-3;
    sweep.traj =
        march_reference(sech_well(g, 1.5), odd_gaussian_velocity(g, 0.2), 1.0, 1.0, ropt);
    chi_and_rate(sweep.traj);
    for (double eps : {0.1, 0.05, 0.025}) sweep.runs.push_back(run_eps(sweep.traj, eps, 0.02, 5));
    sweep.ready = true;

    const auto reports = scaling_fit(sweep.runs);
    const ScalingReport& psi = find_report(reports, "psi_error");
    c.clause(psi.slope >= 0.8 && psi.slope <= 1.2,
             fmt("sup_t ||psi - e^{-i theta/eps} Q||_2 slope %.4f (band [0.8, 1.2])", psi.slope));
    const ScalingReport& field = find_report(reports, "field_total");
    c.clause(field.slope >= 1.7 && field.slope <= 2.3,
             fmt("sup_t (||phi - V||_2 + ||phi_dot - dV/dt||_2) slope %.4f (band [1.7, 2.3])",
                 field.slope));
    for (const char* name : {"M1", "M2", "M3"}) {
      const ScalingReport& m = find_report(reports, name);
      c.clause(m.slope >= -0.3 && m.slope <= 0.3,
               fmt("%s slope %.4f (band [-0.3, 0.3]); suprema %.4g / %.4g / %.4g at eps 0.1 / "
                   "0.05 / 0.025",
                   name, m.slope, m.sup_values[0], m.sup_values[1], m.sup_values[2]));
    }
    const double secs = secs_since(t0);
    c.clause(secs <= 1800.0, fmt("sweep runtime %.1f s (budget 1800 s)", secs));
  });

  // 6. Algebraic identities of the remainder decomposition, on the same sweep.
  failed += !run_criterion(6, "decomposition identities", [&sweep](Criterion& c) {
    require(sweep.ready, ErrorCode::InvalidArgument, "sweep unavailable (criterion 5 threw)");
    double worst_rid = 0.0, worst_qr = 0.0, worst_a0 = 0.0, worst_rt0 = 0.0;
    const double chi0 = norm(sweep.traj.chi.front(), {NormBase::L2, 0});
    for (const auto& s : sweep.runs) {
      worst_a0 = std::max(worst_a0, std::abs(s.alpha.front() - 1.0));
      worst_rt0 = std::max(worst_rt0, std::abs(s.nRt_l2.front() - s.epsilon * chi0));
      for (std::size_t k = 0; k < s.t.size(); ++k) {
        const double defect = std::max(0.0, 1.0 - std::norm(s.alpha[k]));
        worst_rid = std::max(worst_rid, std::abs(s.nR_l2[k] - s.mass * std::sqrt(defect)));
        worst_qr = std::max(worst_qr, s.qR_abs[k]);
      }
    }
    c.clause(worst_rid <= 1e-8,
             fmt("sup | ||R||_2 - ||psi_0||_2 sqrt(1 - |alpha|^2) | = %.3g (tolerance 1e-8)",
                 worst_rid));
    c.clause(worst_qr <= 1e-10, fmt("sup |<Q, R>| = %.3g (tolerance 1e-10)", worst_qr));
    c.clause(worst_a0 <= 1e-10, fmt("sup |alpha(0) - 1| = %.3g (tolerance 1e-10)", worst_a0));
    c.clause(worst_rt0 <= 1e-10,
             fmt("sup | ||R~(0)||_2 - eps ||chi_0||_2 | = %.3g (tolerance 1e-10)", worst_rt0));
  });

  // 7. First-order adiabatic bound with its explicit constant, plus the
  //    second-order excess-energy rate.
  failed += !run_criterion(7, "adiabatic bound with explicit constant", [](Criterion& c) {
    const Grid g = make_grid(40.0, 4096);
    AdiabaticPath path = path_from_function(g, translated_well(1.5, 0.3), 1.0, 1e-2);
    prepare_eigendata(path);

    const double eps[3] = {0.1, 0.05, 0.025};
    double sup_lhs[3], sup_en[3], worst_ratio = 0.0;
    for (int k = 0; k < 3; ++k) {
      const AdiabaticErrorReport rep = adiabatic_bound_check(path, eps[k], 0.02 * eps[k]);
      sup_lhs[k] = 0.0;
      sup_en[k] = 0.0;
      for (std::size_t i = 0; i < rep.times.size(); ++i) {
        sup_lhs[k] = std::max(sup_lhs[k], rep.lhs_l2[i]);
        sup_en[k] = std::max(sup_en[k], rep.energy_lhs[i]);
        if (k == 1) worst_ratio = std::max(worst_ratio, rep.ratio[i]);
      }
    }
    c.clause(worst_ratio <= 1.1,
             fmt("sup_t lhs/rhs = %.4f at eps = 0.05 (tolerance 1.1)", worst_ratio));
    const double r01 = sup_lhs[0] / sup_lhs[1];
    const double r12 = sup_lhs[1] / sup_lhs[2];
    c.clause(r01 >= 1.6 && r01 <= 2.4,
             fmt("sup lhs halving ratio (eps 0.1 -> 0.05): %.3f (band [1.6, 2.4])", r01));
    c.clause(r12 >= 1.6 && r12 <= 2.4,
             fmt("sup lhs halving ratio (eps 0.05 -> 0.025): %.3f (band [1.6, 2.4])", r12));
    const double s01 = std::log2(sup_en[0] / sup_en[1]);
    const double s12 = std::log2(sup_en[1] / sup_en[2]);
    c.clause(s01 >= 1.7 && s01 <= 2.3,
             fmt("excess-energy slope (eps 0.1 -> 0.05): %.3f (band [1.7, 2.3])", s01));
    c.clause(s12 >= 1.7 && s12 <= 2.3,
             fmt("excess-energy slope (eps 0.05 -> 0.025): %.3f (band [1.7, 2.3])", s12));
  });

  // 8. Dispersive decay rates of the projected flow.
  failed += !run_criterion(8, "dispersive decay rates", [](Criterion& c) {
    const Grid g = make_grid(160.0, 8192);
    AdiabaticPath path = path_from_function(g, static_well(1.5), 1.0, 2e-3);
    prepare_eigendata(path);
    const Field psi0 = make_decay_datum(path.V[0]);
    ProjectedOptions o;
    o.store_fields = false;
    o.mask.enabled = true;
    o.mask.strength = 300.0;
    o.mask.fraction = 0.2;
    const ProjectedRun run = evolve_projected(path, psi0, 0.02, 4e-4, o);

    const DecayFit w = measure_decay(run, DecayNorm::WeightedInf, {0.1, 1.0});
    c.clause(std::abs(w.exponent + 1.5) <= 0.2,
             fmt("weighted-amplitude exponent %.4f on [5*eps, 1] (target -1.5 +/- 0.2, r2 %.4f)",
                 w.exponent, w.r2));
    const DecayFit u = measure_decay(run, DecayNorm::Inf, {0.1, 0.5});
    c.clause(std::abs(u.exponent + 0.5) <= 0.15,
             fmt("sup-norm exponent %.4f on [5*eps, 0.5] (target -0.5 +/- 0.15, r2 %.4f)",
                 u.exponent, u.r2));

    const Grid gf = make_grid(40.0, 4096);
    PotentialFn zero = [](double, RealField& out) {
      std::fill(out.v.begin(), out.v.end(), 0.0);
    };
    AdiabaticPath free_path = path_from_function(gf, zero, 0.5, 1e-2);
    const Field gauss = make_field(gf, [](double x) {
      return Complex(std::pow(M_PI, -0.25) * std::exp(-0.5 * x * x), 0.0);
    });
    ProjectedOptions of;
    of.project = false;
    of.store_fields = false;
    const ProjectedRun fr = evolve_projected(free_path, gauss, 0.1, 2e-3, of);
    double worst = 0.0;
    for (std::size_t i = 0; i < fr.times.size(); ++i) {
      const double t = fr.times[i];
      const double exact = std::pow(M_PI, -0.25) * std::pow(1.0 + 4.0 * t * t / 0.01, -0.25);
      worst = std::max(worst, std::abs(fr.linf[i] - exact));
    }
    c.clause(worst <= 1e-6,
             fmt("free-Gaussian peak deviation from the closed form: %.3g (tolerance 1e-6)",
                 worst));
  });

  // 9. Degeneration and refinement of the propagation identity.
  failed += !run_criterion(9, "propagation identity degeneration and refinement",
                           [](Criterion& c) {
    const Grid g = make_grid(40.0, 4096);
    AdiabaticPath path = path_from_function(g, static_well(1.5), 0.1, 5e-3);
    prepare_eigendata(path);
    const Field psi0 = make_decay_datum(path.V[0]);
    const ProjectedRun run = evolve_projected(path, psi0, 0.05, 2.5e-4, {});
    const double exact0 = duhamel_residual(run, 0.0, 0.0);
    c.clause(exact0 <= 1e-12, fmt("identity at (0, 0): %.3g (tolerance 1e-12)", exact0));
    const double worst_static =
        std::max({duhamel_residual(run, 0.05, 0.1), duhamel_residual(run, 0.1, 0.05),
                  duhamel_residual(run, 0.0, 0.1)});
    c.clause(worst_static <= 1e-6,
             fmt("static-potential residual over three windows: %.3g (tolerance 1e-6)",
                 worst_static));

    double res[3];
    int idx = 0;
    for (double delta : {5e-3, 2.5e-3, 1.25e-3}) {
      AdiabaticPath moving = path_from_function(g, translated_well(1.5, 0.3), 0.2, delta);
      prepare_eigendata(moving);
      const Field datum = make_decay_datum(moving.V[0]);
      const ProjectedRun mrun = evolve_projected(moving, datum, 0.05, delta / 4.0, {});
      res[idx++] = duhamel_residual(mrun, 0.1, 0.2);
    }
    const double s01 = std::log2(res[0] / res[1]);
    const double s12 = std::log2(res[1] / res[2]);
    c.clause(s01 >= 1.7 && s01 <= 2.3,
             fmt("moving-well residual slope (mesh 5e-3 -> 2.5e-3): %.3f (band [1.7, 2.3])",
                 s01));
    c.clause(s12 >= 1.7 && s12 <= 2.3,
             fmt("moving-well residual slope (mesh 2.5e-3 -> 1.25e-3): %.3f (band [1.7, 2.3])",
                 s12));
  });

  // 10. Residual of the effective modulation equation, on the same sweep.
  failed += !run_criterion(10, "effective rate equation residual", [&sweep](Criterion& c) {
    require(sweep.ready, ErrorCode::InvalidArgument, "sweep unavailable (criterion 5 threw)");
    const AlphaResidualReport rep = alpha_residual_check(sweep.runs[1]);  // eps = 0.05
    const double ratio = rep.sup_residual / rep.sup_rate;
    c.clause(ratio <= 0.05,
             fmt("sup residual / sup |d alpha/dt| = %.4f at eps = 0.05 (tolerance 0.05)",
                 ratio));
    double res[3] = {rep.sup_residual, 0.0, 0.0};
    res[1] = alpha_residual_check(run_eps(sweep.traj, 0.05, 0.01, 5)).sup_residual;
    res[2] = alpha_residual_check(run_eps(sweep.traj, 0.05, 0.005, 5)).sup_residual;
    const double s01 = std::log2(res[0] / res[1]);
    const double s12 = std::log2(res[1] / res[2]);
    c.clause(s01 >= 1.8 && s01 <= 2.2,
             fmt("residual refinement slope (c 0.02 -> 0.01): %.3f (band [1.8, 2.2])", s01));
    c.clause(s12 >= 1.8 && s12 <= 2.2,
             fmt("residual refinement slope (c 0.01 -> 0.005): %.3f (band [1.8, 2.2])", s12));
  });

  std::printf("----------------------\n%d/10 criteria passed\n", 10 - failed);
  return failed;
}
