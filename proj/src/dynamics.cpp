#include "lplab/dynamics.hpp"

#include <cmath>

#include "lplab/fft.hpp"
#include "lplab/spectral.hpp"

namespace lplab {
namespace {

void check_state(const PolaronState& s, const char* where) {
  if (!all_finite(s.psi) || !all_finite(s.phi) || !all_finite(s.phi_dot))
    raise(ErrorCode::NonFiniteSample,
          std::string(where) + ": non-finite sample at t = " + std::to_string(s.time));
}

}  // namespace

ConservedDiagnostics conserved(const PolaronState& state) {
  const Grid& g = state.psi.grid;
  Field dpsi = spectral_derivative(state.psi, 1);
  double kinetic = 0.0, coupling = 0.0, field = 0.0;
  for (std::size_t j = 0; j < g.size; ++j) {
    kinetic += std::norm(dpsi.v[j]);
    coupling += state.phi.v[j] * std::norm(state.psi.v[j]);
    field += state.phi.v[j] * state.phi.v[j] + state.phi_dot.v[j] * state.phi_dot.v[j];
  }
  double mass = 0.0;
  for (const auto& z : state.psi.v) mass += std::norm(z);
  ConservedDiagnostics out;
  out.mass = g.spacing * mass;
  out.energy = g.spacing * (kinetic + coupling + field);
  return out;
}

LpStepper::LpStepper(const Grid& grid, const LPParams& params) : grid_(grid), params_(params) {
  require(params.epsilon > 0.0, ErrorCode::ValidationError, "epsilon must be positive");
  // Negative c_psi steps backward in time; the magnitude cap applies either way.
  require(params.c_psi != 0.0 && std::abs(params.c_psi) <= 0.05 + 1e-12,
          ErrorCode::ValidationError, "|dt| may not exceed 0.05*epsilon");
  const double dt = params.dt();
  kinetic_phase_.resize(grid.size);
  for (std::size_t m = 0; m < grid.size; ++m) {
    const double k = grid.wavenumber(m);
    kinetic_phase_[m] = k * k * dt / (2.0 * params.epsilon);
  }
  if (params.mask.enabled) {
    require(params.mask.strength > 0.0 && params.mask.fraction > 0.0 &&
                params.mask.fraction < 0.5,
            ErrorCode::ValidationError, "absorbing mask: bad strength/fraction");
    mask_rate_.resize(grid.size, 0.0);
    const double L = grid.half_width;
    const double x0 = (1.0 - params.mask.fraction) * L;
    for (std::size_t j = 0; j < grid.size; ++j) {
      const double ax = std::abs(grid.node(j));
      if (ax > x0) {
        const double u = (ax - x0) / (L - x0);  // 0 at the layer edge, 1 at the wall
        mask_rate_[j] = params.mask.strength * u * u;
      }
    }
  }
  hat_.resize(grid.size);
  source_.resize(grid.size);
}

void LpStepper::step(PolaronState& state) {
  require_same_grid(grid_, state.psi.grid, "lp_step");
  const double dt = params_.dt();
  const double eps = params_.epsilon;
  const std::size_t n = grid_.size;
  const double inv_n = 1.0 / static_cast<double>(n);

  auto kinetic_half = [&](Field& psi) {
    fft::forward(psi.v, hat_);
    for (std::size_t m = 0; m < n; ++m)
      hat_[m] *= std::polar(inv_n, -kinetic_phase_[m]);
    fft::inverse(hat_, psi.v);
  };

  kinetic_half(state.psi);

  // Field source frozen at the Strang midpoint; the potential phase below
  // leaves |psi| unchanged, so both half-rotations see the same source.
  if (params_.coupling) {
    for (std::size_t j = 0; j < n; ++j) source_[j] = -0.5 * std::norm(state.psi.v[j]);
  } else {
    std::fill(source_.begin(), source_.end(), 0.0);
  }

  const double c = std::cos(0.5 * dt), s = std::sin(0.5 * dt);
  auto field_half = [&]() {
    for (std::size_t j = 0; j < n; ++j) {
      const double p = state.phi.v[j] - source_[j];
      const double q = state.phi_dot.v[j];
      state.phi.v[j] = p * c + q * s + source_[j];
      state.phi_dot.v[j] = -p * s + q * c;
    }
  };

  field_half();
  if (params_.coupling) {
    for (std::size_t j = 0; j < n; ++j)
      state.psi.v[j] *= std::polar(1.0, -state.phi.v[j] * dt / eps);
  }
  field_half();

  kinetic_half(state.psi);

  if (params_.mask.enabled) {
    for (std::size_t j = 0; j < n; ++j)
      if (mask_rate_[j] != 0.0) state.psi.v[j] *= std::exp(-dt * mask_rate_[j]);
  }

  state.time += dt;
  check_state(state, "lp_step");
}

PolaronState lp_step(PolaronState state, const LPParams& params) {
  LpStepper stepper(state.psi.grid, params);
  stepper.step(state);
  return state;
}

LPRun evolve_lp(const PolaronState& initial, const LPParams& params, double horizon,
                std::size_t checkpoint_stride, const StepCallback& on_step) {
  require(horizon > 0.0, ErrorCode::ValidationError, "evolve horizon must be positive");
  require(params.c_psi > 0.0, ErrorCode::ValidationError, "evolve_lp only marches forward");
  require_same_grid(initial.psi.grid, initial.phi.grid, "evolve_lp");
  require_same_grid(initial.psi.grid, initial.phi_dot.grid, "evolve_lp");
  check_state(initial, "evolve_lp initial state");

  const double dt = params.dt();
  const auto steps = static_cast<std::size_t>(std::llround(horizon / dt));
  require(steps >= 1, ErrorCode::ValidationError, "horizon shorter than one step");
  require(std::abs(static_cast<double>(steps) * dt - horizon) < 1e-9 * std::max(1.0, horizon),
          ErrorCode::ValidationError, "horizon must be an integer number of steps");

  LpStepper stepper(initial.psi.grid, params);
  PolaronState state = initial;
  const double t0 = initial.time;

  LPRun run;
  run.diagnostics.reserve(steps + 1);
  auto record = [&](const PolaronState& s) {
    ConservedDiagnostics c = conserved(s);
    run.diagnostics.push_back({s.time, c.mass, c.energy, norm(s.psi, {NormBase::Linf, 0})});
  };
  record(state);
  if (on_step) on_step(state);

  for (std::size_t i = 1; i <= steps; ++i) {
    stepper.step(state);
    state.time = t0 + static_cast<double>(i) * dt;  // avoid additive drift
    record(state);
    if (on_step) on_step(state);
    if (checkpoint_stride > 0 && (i % checkpoint_stride == 0) && i != steps)
      run.checkpoints.push_back(state);
  }
  run.final_state = std::move(state);
  return run;
}

}  // namespace lplab
