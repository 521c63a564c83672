#include "lplab/dispersive.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "lplab/errors.hpp"
#include "lplab/fft.hpp"
#include "lplab/spectral.hpp"

namespace lplab {

namespace {

void project_out(const RealField& phi, const Field& f, Field& out, Complex* overlap = nullptr) {
  require_same_grid(phi.grid, f.grid, "pc_project");
  const std::size_t n = f.grid.size;
  Complex ip(0.0, 0.0);
  for (std::size_t j = 0; j < n; ++j) ip += phi.v[j] * f.v[j];
  ip *= f.grid.spacing;
  out.grid = f.grid;
  out.v.resize(n);
  for (std::size_t j = 0; j < n; ++j) out.v[j] = f.v[j] - ip * phi.v[j];
  if (overlap) *overlap = ip;
}

std::vector<double> mask_rate(const Grid& g, const AbsorbingMask& mask) {
  std::vector<double> rate;
  if (!mask.enabled) return rate;
  require(mask.strength > 0.0 && mask.fraction > 0.0 && mask.fraction < 0.5,
          ErrorCode::ValidationError, "absorbing mask needs strength > 0 and fraction in (0, 1/2)");
  rate.assign(g.size, 0.0);
  const double L = g.half_width;
  const double x0 = (1.0 - mask.fraction) * L;
  for (std::size_t j = 0; j < g.size; ++j) {
    const double ax = std::abs(g.node(j));
    if (ax > x0) {
      const double u = (ax - x0) / (L - x0);
      rate[j] = mask.strength * u * u;
    }
  }
  return rate;
}

}  // namespace

Field pc_project(const RealField& V, const Field& f) {
  GroundState gs = ground_state(V, 1.0);
  Field out;
  project_out(gs.wavefunction, f, out);
  return out;
}

Field make_decay_datum(const RealField& V) {
  RealField bump = make_real_field(V.grid, [](double x) {
    const double w = 1.0 + x * x;
    return 1.0 / (w * w);
  });
  const double nrm = norm(bump, {NormBase::L2, 0});
  for (double& b : bump.v) b /= nrm;
  return pc_project(V, to_complex(bump));
}

ProjectedRun evolve_projected(const AdiabaticPath& path, const Field& psi0, double epsilon,
                              double dt, const ProjectedOptions& opts) {
  require_same_grid(path.grid, psi0.grid, "evolve_projected");
  require(all_finite(psi0), ErrorCode::NonFiniteSample, "evolve_projected: initial datum");
  const std::size_t m = path.times.size();
  require(m >= 4, ErrorCode::InsufficientSamples, "evolve_projected: need four mesh points");
  if (opts.project)
    require(!path.Phi.empty(), ErrorCode::InvalidArgument,
            "evolve_projected: prepare_eigendata first");

  // The spectral hypotheses (exactly one bound state, no zero-energy
  // resonance) are checked on mesh samples of the potential, strided so long
  // paths stay cheap; the endpoints are always included.
  if (opts.project) {
    const std::size_t stride = std::max<std::size_t>(1, m / 64);
    for (std::size_t i = 0; i < m; i += (i + stride < m ? stride : 1)) {
      SpectralReport rep = spectral_report(path.V[i]);
      require(rep.negative_count == 1, ErrorCode::AssumptionViolated,
              "evolve_projected: potential must carry exactly one bound state");
      require(!rep.is_resonant, ErrorCode::AssumptionViolated,
              "evolve_projected: potential has a zero-energy resonance");
    }
  }

  const auto per = static_cast<std::size_t>(std::llround(path.dt_mesh / dt));
  require(per >= 1 && std::abs(static_cast<double>(per) * dt - path.dt_mesh) < 1e-12,
          ErrorCode::InvalidArgument, "evolve_projected: dt must divide the mesh spacing");

  ProjectedRun run;
  run.grid = path.grid;
  run.epsilon = epsilon;
  run.dt = dt;
  run.dt_store = path.dt_mesh;
  run.per = per;
  run.projected = opts.project;
  run.times = path.times;
  if (opts.project) run.E = path.E;
  if (opts.store_fields) {
    run.V = path.V;
    if (opts.project) {
      run.phi = path.Phi;
      run.dphi_dt = path.dPhi_dt;
    }
  }

  SchrodingerEvolver evolver(path, epsilon, dt, opts.project);
  const std::vector<double> rate = mask_rate(path.grid, opts.mask);
  const std::size_t n = path.grid.size;

  Field psi = psi0;
  if (opts.project) {
    Field projected;
    project_out(path.Phi[0], psi, projected);
    psi = std::move(projected);
  }

  // The marching state is never re-projected: the rank-one factor keeps the
  // full-space flow exactly unitary, and the recorded observable is the
  // projection of the state at each mesh node. pd_overlap tracks the bound
  // component the splitting leaks into the marching state, a bounded
  // O((dt/eps)^2) quantity with no secular growth.
  Field tilde;
  auto record = [&](std::size_t i) {
    Complex overlap(0.0, 0.0);
    if (opts.project) {
      project_out(path.Phi[i], psi, tilde, &overlap);
    } else {
      tilde = psi;
    }
    require(all_finite(tilde), ErrorCode::NonFiniteSample, "evolve_projected: evolved field");
    run.mass.push_back(norm(psi, {NormBase::L2, 0}));
    run.pd_overlap.push_back(std::abs(overlap));
    run.winf_m1.push_back(norm(tilde, {NormBase::Linf, -1}));
    run.linf.push_back(norm(tilde, {NormBase::Linf, 0}));
    run.l2.push_back(norm(tilde, {NormBase::L2, 0}));
    if (opts.store_fields) run.psi.push_back(tilde);
  };

  record(0);
  for (std::size_t i = 1; i < m; ++i) {
    const double t_base = path.times[i - 1];
    for (std::size_t k = 0; k < per; ++k) {
      evolver.step(psi, t_base + static_cast<double>(k) * dt);
      if (!rate.empty()) {
        for (std::size_t j = 0; j < n; ++j)
          if (rate[j] != 0.0) psi.v[j] *= std::exp(-dt * rate[j]);
      }
    }
    record(i);
  }
  return run;
}

DecayFit measure_decay(const ProjectedRun& run, DecayNorm kind, DecayWindow window) {
  require(window.t_lo > 0.0 && window.t_hi > window.t_lo, ErrorCode::InvalidArgument,
          "measure_decay: window must satisfy 0 < t_lo < t_hi");
  require(window.t_lo >= 5.0 * run.epsilon - 1e-12, ErrorCode::ValidationError,
          "measure_decay: window must start at or after 5*epsilon");
  const std::vector<double>* series = nullptr;
  switch (kind) {
    case DecayNorm::WeightedInf: series = &run.winf_m1; break;
    case DecayNorm::Inf: series = &run.linf; break;
    case DecayNorm::L2: series = &run.l2; break;
  }
  require(series->size() == run.times.size(), ErrorCode::InvalidArgument,
          "measure_decay: norm series incomplete");

  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0, syy = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < run.times.size(); ++i) {
    const double t = run.times[i];
    const double y = (*series)[i];
    if (t < window.t_lo - 1e-12 || t > window.t_hi + 1e-12 || y <= 0.0) continue;
    const double lx = std::log(t);
    const double ly = std::log(y);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    syy += ly * ly;
    ++count;
  }
  require(count >= 10, ErrorCode::InsufficientSamples,
          "measure_decay: need at least ten samples in the window");

  const double denom = static_cast<double>(count) * sxx - sx * sx;
  const double slope = (static_cast<double>(count) * sxy - sx * sy) / denom;
  const double intercept = (sy - slope * sx) / static_cast<double>(count);
  const double ss_tot = syy - sy * sy / static_cast<double>(count);
  double ss_res = 0.0;
  for (std::size_t i = 0; i < run.times.size(); ++i) {
    const double t = run.times[i];
    const double y = (*series)[i];
    if (t < window.t_lo - 1e-12 || t > window.t_hi + 1e-12 || y <= 0.0) continue;
    const double r = std::log(y) - (intercept + slope * std::log(t));
    ss_res += r * r;
  }

  DecayFit fit;
  fit.t_lo = window.t_lo;
  fit.t_hi = window.t_hi;
  fit.exponent = slope;
  fit.amplitude = std::exp(intercept);
  fit.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  fit.samples = count;
  return fit;
}

double duhamel_residual(const ProjectedRun& run, double t0, double t) {
  require(!run.psi.empty() && run.psi.size() == run.times.size(), ErrorCode::InvalidArgument,
          "duhamel_residual: run does not retain fields");
  const double tol = 1e-9 * std::max(1.0, std::abs(run.times.back()));
  auto locate = [&](double s, const char* what) {
    for (std::size_t i = 0; i < run.times.size(); ++i)
      if (std::abs(run.times[i] - s) < tol) return i;
    raise(ErrorCode::InvalidArgument, what);
    return std::size_t{0};
  };
  const std::size_t i0 = locate(t0, "duhamel_residual: t0 is not a stored time");
  const std::size_t it = locate(t, "duhamel_residual: t is not a stored time");

  const Grid& g = run.grid;
  const std::size_t n = g.size;
  const double eps = run.epsilon;
  const double delta = run.dt_store;
  const bool bound = run.projected;
  const RealField& V0 = run.V[i0];

  // Static reference propagator over one storage interval, factored exactly
  // like the evolution steps (kinetic half, full V(t0) phase, kinetic half).
  std::vector<double> kin(n), pot(n);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t mm = 0; mm < n; ++mm) {
    const double k = g.wavenumber(mm);
    kin[mm] = k * k * run.dt / (2.0 * eps);
  }
  for (std::size_t j = 0; j < n; ++j) pot[j] = V0.v[j] * run.dt / eps;
  std::vector<Complex> hat(n);
  auto propagate_interval = [&](Field& f) {
    for (std::size_t k = 0; k < run.per; ++k) {
      fft::forward(f.v, hat);
      for (std::size_t mm = 0; mm < n; ++mm) hat[mm] *= std::polar(inv_n, -kin[mm]);
      fft::inverse(hat, f.v);
      for (std::size_t j = 0; j < n; ++j) f.v[j] *= std::polar(1.0, -pot[j]);
      fft::forward(f.v, hat);
      for (std::size_t mm = 0; mm < n; ++mm) hat[mm] *= std::polar(inv_n, -kin[mm]);
      fft::inverse(hat, f.v);
    }
  };

  // Integrand at node k: P_c(t0) applied to the potential-difference drive
  // plus the two bound-state rate couplings; the inner integral I1 is a
  // running trapezoid of <dphi/ds, psi~>.
  Complex I1(0.0, 0.0);
  Complex h_prev(0.0, 0.0);
  auto rate_overlap = [&](std::size_t k) {
    Complex h(0.0, 0.0);
    if (!bound) return h;
    for (std::size_t j = 0; j < n; ++j) h += run.dphi_dt[k].v[j] * run.psi[k].v[j];
    return h * g.spacing;
  };
  Field gk{g, std::vector<Complex>(n)};
  Field work{g, std::vector<Complex>(n)};
  const Complex inv_ieps(0.0, -1.0 / eps);  // 1/(i eps)
  auto integrand = [&](std::size_t k, Complex h) {
    for (std::size_t j = 0; j < n; ++j) {
      Complex val = inv_ieps * (run.V[k].v[j] - V0.v[j]) * run.psi[k].v[j];
      if (bound) val -= h * run.phi[k].v[j] + I1 * run.dphi_dt[k].v[j];
      work.v[j] = val;
    }
    if (bound) {
      project_out(run.phi[i0], work, gk);
    } else {
      gk.v = work.v;
    }
  };

  // Single backward sweep: the free term rides along with the quadrature
  // accumulator because every term shares the same static propagator.
  Field acc{g, std::vector<Complex>(n)};
  if (bound) {
    project_out(run.phi[i0], run.psi[0], acc);
  } else {
    acc.v = run.psi[0].v;
  }
  h_prev = rate_overlap(0);
  if (it > 0) {
    integrand(0, h_prev);
    const double w0 = 0.5 * delta;
    for (std::size_t j = 0; j < n; ++j) acc.v[j] += w0 * gk.v[j];
    for (std::size_t k = 1; k <= it; ++k) {
      propagate_interval(acc);
      const Complex h = rate_overlap(k);
      I1 += 0.5 * delta * (h_prev + h);
      h_prev = h;
      integrand(k, h);
      const double w = (k == it) ? 0.5 * delta : delta;
      for (std::size_t j = 0; j < n; ++j) acc.v[j] += w * gk.v[j];
    }
  }

  if (bound) {
    Complex pd(0.0, 0.0);
    for (std::size_t j = 0; j < n; ++j) pd += run.phi[i0].v[j] * run.psi[it].v[j];
    pd *= g.spacing;
    for (std::size_t j = 0; j < n; ++j) acc.v[j] += pd * run.phi[i0].v[j];
  }

  double worst = 0.0;
  for (std::size_t j = 0; j < n; ++j) worst = std::max(worst, std::abs(acc.v[j] - run.psi[it].v[j]));
  return worst;
}

}  // namespace lplab
