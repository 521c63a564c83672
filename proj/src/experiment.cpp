#include "lplab/experiment.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <thread>

#include "lplab/adiabatic.hpp"
#include "lplab/decomposition.hpp"
#include "lplab/dispersive.hpp"
#include "lplab/dynamics.hpp"
#include "lplab/presets.hpp"
#include "lplab/reference.hpp"
#include "lplab/spectral.hpp"
#include "lplab/svg.hpp"

#ifndef LPLAB_VERSION
#define LPLAB_VERSION "0.0.0"
#endif

namespace lplab {
namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

std::string iso_utc_now() {
  const std::time_t tt = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string fmt_g(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return buf;
}

std::string eps_dir_name(double eps) { return "eps_" + fmt_g(eps); }

// Runs one stage under try/catch, timing it and hashing whatever files the
// body registered, so partially emitted artifacts of a failed stage still
// land in the manifest.
class StageRunner {
 public:
  StageRunner(fs::path root, bool verbose) : root_(std::move(root)), verbose_(verbose) {}

  const fs::path& root() const { return root_; }

  StageStatus run(const std::string& name,
                  const std::function<void(std::vector<fs::path>&)>& body) {
    StageStatus stage;
    stage.name = name;
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<fs::path> files;
    try {
      body(files);
      stage.ok = true;
    } catch (const Error& e) {
      stage.error = e.what();
      stage.error_code = error_code_name(e.code());
      stage.exit_class = exit_class_for(e.code());
    } catch (const std::exception& e) {
      stage.error = e.what();
      stage.error_code = "Unhandled";
      stage.exit_class = 3;
    }
    stage.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    for (const fs::path& p : files) {
      std::error_code ec;
      if (!fs::is_regular_file(p, ec)) continue;
      EmittedFile f;
      f.path = fs::relative(p, root_).generic_string();
      f.fnv1a = hex64(fnv1a_file(p.string()));
      f.bytes = fs::file_size(p);
      stage.files.push_back(std::move(f));
    }
    if (verbose_) {
      std::lock_guard<std::mutex> lock(log_mutex_);
      std::fprintf(stderr, "[lplab] %s: %s (%.2fs)%s%s\n", name.c_str(),
                   stage.ok ? "ok" : "failed", stage.seconds, stage.ok ? "" : " ",
                   stage.ok ? "" : stage.error.c_str());
    }
    return stage;
  }

  static StageStatus skipped(const std::string& name, const std::string& reason) {
    StageStatus stage;
    stage.name = name;
    stage.ok = false;
    stage.error = "skipped: " + reason;
    stage.error_code = "Skipped";
    stage.exit_class = 3;
    return stage;
  }

 private:
  fs::path root_;
  bool verbose_ = false;
  std::mutex log_mutex_;
};

void run_pool(std::size_t n, std::size_t workers, const std::function<void(std::size_t)>& fn) {
  workers = std::min(std::max<std::size_t>(workers, 1), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    });
  for (auto& t : pool) t.join();
}

void emit_csv(std::vector<fs::path>& files, const fs::path& path, const CsvTable& table) {
  write_csv(path.string(), table);
  files.push_back(path);
}

void emit_json(std::vector<fs::path>& files, const fs::path& path, const ordered_json& value) {
  write_text(path.string(), value.dump(2) + "\n");
  files.push_back(path);
}

void emit_svg(std::vector<fs::path>& files, const fs::path& path, const PlotSpec& spec) {
  write_plot_svg(path.string(), spec);
  files.push_back(path);
}

// Snapshot matrix: x plus the field at up to 17 evenly spaced stored times.
CsvTable snapshot_table(const std::vector<double>& times, const std::vector<RealField>& fields) {
  CsvTable table;
  const Grid& g = fields.front().grid;
  table.columns.push_back("x");
  std::vector<double> xs(g.size);
  for (std::size_t j = 0; j < g.size; ++j) xs[j] = g.node(j);
  table.data.push_back(std::move(xs));

  const std::size_t m = times.size();
  const std::size_t want = std::min<std::size_t>(m, 17);
  std::size_t last = m;  // dedup marker
  for (std::size_t k = 0; k < want; ++k) {
    const std::size_t i = want == 1 ? 0 : (k * (m - 1)) / (want - 1);
    if (i == last) continue;
    last = i;
    table.columns.push_back("t=" + fmt_g(times[i]));
    table.data.push_back(fields[i].v);
  }
  return table;
}

CsvTable diagnostics_table(const LPRun& run) {
  CsvTable t;
  t.columns = {"t", "mass", "energy", "linf_psi"};
  t.data.resize(4);
  for (const auto& row : run.diagnostics) {
    t.data[0].push_back(row.t);
    t.data[1].push_back(row.mass);
    t.data[2].push_back(row.energy);
    t.data[3].push_back(row.linf_psi);
  }
  return t;
}

CsvTable decomposition_table(const DecompositionSeries& s) {
  CsvTable t;
  t.columns = {"t",       "re_alpha", "im_alpha", "psi_err", "nR_l2",  "nRt_l2",
               "nRt_linf", "nRt_winf", "nW_l2",    "dW_l2",   "dalpha2", "M1",
               "M2",       "M3",       "qR_abs",   "qRt_abs"};
  t.data.resize(t.columns.size());
  for (std::size_t i = 0; i < s.t.size(); ++i) {
    std::size_t c = 0;
    t.data[c++].push_back(s.t[i]);
    t.data[c++].push_back(s.alpha[i].real());
    t.data[c++].push_back(s.alpha[i].imag());
    t.data[c++].push_back(s.psi_err[i]);
    t.data[c++].push_back(s.nR_l2[i]);
    t.data[c++].push_back(s.nRt_l2[i]);
    t.data[c++].push_back(s.nRt_linf[i]);
    t.data[c++].push_back(s.nRt_winf[i]);
    t.data[c++].push_back(s.nW_l2[i]);
    t.data[c++].push_back(s.dW_l2[i]);
    t.data[c++].push_back(s.dalpha2[i]);
    t.data[c++].push_back(s.M1[i]);
    t.data[c++].push_back(s.M2[i]);
    t.data[c++].push_back(s.M3[i]);
    t.data[c++].push_back(s.qR_abs[i]);
    t.data[c++].push_back(s.qRt_abs[i]);
  }
  return t;
}

struct ReferenceArtifacts {
  ReferenceTrajectory traj;
  TStarReport tstar;
};

// March + rates + spectral monitoring, with times.csv, snapshot matrices for
// (Q, V, chi, dV_dt, dQ_dt), and tstar.json.
StageStatus reference_stage(StageRunner& runner, const ExperimentConfig& cfg,
                            const InitialData& init, std::optional<ReferenceArtifacts>& out) {
  return runner.run("reference", [&](std::vector<fs::path>& files) {
    const fs::path dir = runner.root() / "reference";
    fs::create_directories(dir);

    ReferenceOptions ropt;
    ropt.dt_ref = cfg.dt_ref;
    ropt.ref_tol = cfg.tolerances.ref_tol;
    ropt.gap_tol = cfg.tolerances.gap_tol;
    ropt.shooting.rho_tol = cfg.tolerances.rho_tol;
    ReferenceArtifacts art;
    art.traj = march_reference(init.phi0, init.phi_dot0, cfg.mass, cfg.T, ropt);
    chi_and_rate(art.traj);
    art.tstar = monitor_tstar(art.traj, ropt.shooting);

    CsvTable times;
    times.columns = {"t", "E", "theta"};
    times.data = {art.traj.times, art.traj.E, art.traj.theta};
    emit_csv(files, dir / "times.csv", times);
    emit_csv(files, dir / "Q.csv", snapshot_table(art.traj.times, art.traj.Q));
    emit_csv(files, dir / "V.csv", snapshot_table(art.traj.times, art.traj.V));
    emit_csv(files, dir / "chi.csv", snapshot_table(art.traj.times, art.traj.chi));
    emit_csv(files, dir / "dV_dt.csv", snapshot_table(art.traj.times, art.traj.dV_dt));
    emit_csv(files, dir / "dQ_dt.csv", snapshot_table(art.traj.times, art.traj.dQ_dt));

    ordered_json tstar;
    tstar["horizon_reached"] = art.tstar.horizon_reached;
    tstar["first_violation_time"] = art.tstar.first_violation_time
                                        ? ordered_json(*art.tstar.first_violation_time)
                                        : ordered_json(nullptr);
    tstar["violation_kind"] = art.tstar.violation_kind
                                  ? ordered_json(violation_kind_name(*art.tstar.violation_kind))
                                  : ordered_json(nullptr);
    emit_json(files, dir / "tstar.json", tstar);
    out = std::move(art);
  });
}

std::size_t stamp_stride(const ExperimentConfig& cfg, double eps) {
  if (cfg.checkpoint_stride > 0) return cfg.checkpoint_stride;
  const auto steps =
      static_cast<std::size_t>(std::llround(cfg.T / (cfg.c_psi * eps)));
  return std::max<std::size_t>(1, steps / 200);
}

struct EpsOutcome {
  StageStatus stage;
  std::shared_ptr<DecompositionSeries> series;  // set only when the stage succeeded
};

// Coupled run + streaming decomposition for one epsilon.
EpsOutcome decompose_epsilon(StageRunner& runner, const ExperimentConfig& cfg,
                             const InitialData& init, const ReferenceTrajectory& traj,
                             double eps) {
  EpsOutcome outcome;
  outcome.stage = runner.run(eps_dir_name(eps), [&](std::vector<fs::path>& files) {
    const fs::path dir = runner.root() / eps_dir_name(eps);
    fs::create_directories(dir);

    LPParams params;
    params.epsilon = eps;
    params.c_psi = cfg.c_psi;
    const std::size_t stride = stamp_stride(cfg, eps);

    PolaronState initial;
    initial.time = 0.0;
    initial.psi = to_complex(traj.Q.front());
    initial.phi = init.phi0;
    initial.phi_dot = init.phi_dot0;

    Decomposer decomposer(traj, eps);
    std::size_t count = 0;
    LPRun run = evolve_lp(initial, params, cfg.T, 0, [&](const PolaronState& state) {
      if (count % stride == 0) decomposer.ingest(state);
      ++count;
    });
    emit_csv(files, dir / "diagnostics.csv", diagnostics_table(run));

    auto series = std::make_shared<DecompositionSeries>(decomposer.take());
    emit_csv(files, dir / "decomposition.csv", decomposition_table(*series));

    PlotSpec alpha_plot;
    alpha_plot.title = "alpha trajectory, eps=" + fmt_g(eps);
    alpha_plot.x_label = "Re alpha";
    alpha_plot.y_label = "Im alpha";
    PlotSeries path;
    path.label = "alpha(t)";
    path.markers = false;
    for (const Complex& a : series->alpha) {
      path.x.push_back(a.real());
      path.y.push_back(a.imag());
    }
    alpha_plot.series.push_back(std::move(path));
    emit_svg(files, dir / "alpha.svg", alpha_plot);

    // Needs >= 3 stamps; a starved stamp stride fails here with the CSVs
    // already on disk, which is exactly the partial-output contract.
    AlphaResidualReport residual = alpha_residual_check(*series);
    ordered_json rj;
    rj["sup_residual"] = residual.sup_residual;
    rj["sup_rate"] = residual.sup_rate;
    rj["ratio"] = residual.sup_rate > 0.0 ? residual.sup_residual / residual.sup_rate : 0.0;
    rj["envelope_constant"] = alpha_rate_envelope(*series, eps);
    emit_json(files, dir / "alpha_residual.json", rj);

    outcome.series = std::move(series);
  });
  if (!outcome.stage.ok) outcome.series.reset();
  return outcome;
}

StageStatus evolve_epsilon(StageRunner& runner, const ExperimentConfig& cfg,
                           const InitialData& init, const Field& psi0, double eps) {
  return runner.run(eps_dir_name(eps), [&](std::vector<fs::path>& files) {
    const fs::path dir = runner.root() / eps_dir_name(eps);
    fs::create_directories(dir);

    LPParams params;
    params.epsilon = eps;
    params.c_psi = cfg.c_psi;

    PolaronState initial;
    initial.time = 0.0;
    initial.psi = psi0;
    initial.phi = init.phi0;
    initial.phi_dot = init.phi_dot0;

    std::vector<double> snap_times;
    std::vector<std::vector<double>> snap_abs;
    std::size_t count = 0;
    StepCallback on_step;
    if (cfg.checkpoint_stride > 0) {
      on_step = [&](const PolaronState& state) {
        if (count % cfg.checkpoint_stride == 0) {
          snap_times.push_back(state.time);
          std::vector<double> abs_psi(state.psi.v.size());
          for (std::size_t j = 0; j < abs_psi.size(); ++j) abs_psi[j] = std::abs(state.psi.v[j]);
          snap_abs.push_back(std::move(abs_psi));
        }
        ++count;
      };
    }
    LPRun run = evolve_lp(initial, params, cfg.T, 0, on_step);
    emit_csv(files, dir / "diagnostics.csv", diagnostics_table(run));

    CsvTable final_state;
    final_state.columns = {"x", "re_psi", "im_psi", "phi", "phi_dot"};
    final_state.data.resize(5);
    const Grid& g = init.grid;
    for (std::size_t j = 0; j < g.size; ++j) {
      final_state.data[0].push_back(g.node(j));
      final_state.data[1].push_back(run.final_state.psi.v[j].real());
      final_state.data[2].push_back(run.final_state.psi.v[j].imag());
      final_state.data[3].push_back(run.final_state.phi.v[j]);
      final_state.data[4].push_back(run.final_state.phi_dot.v[j]);
    }
    emit_csv(files, dir / "final_state.csv", final_state);

    if (!snap_times.empty()) {
      CsvTable snaps;
      snaps.columns.push_back("x");
      snaps.data.push_back(final_state.data[0]);
      for (std::size_t k = 0; k < snap_times.size(); ++k) {
        snaps.columns.push_back("t=" + fmt_g(snap_times[k]));
        snaps.data.push_back(std::move(snap_abs[k]));
      }
      emit_csv(files, dir / "abs_psi.csv", snaps);
    }
  });
}

StageStatus adiabatic_epsilon(StageRunner& runner, const ExperimentConfig& cfg,
                              const AdiabaticPath& path, double eps) {
  return runner.run(eps_dir_name(eps), [&](std::vector<fs::path>& files) {
    const fs::path dir = runner.root() / eps_dir_name(eps);
    fs::create_directories(dir);

    const double dt = cfg.c_psi * eps;
    AdiabaticErrorReport rep = adiabatic_bound_check(path, eps, dt);

    CsvTable table;
    table.columns = {"t", "lhs_l2", "rhs_l2", "energy_lhs", "ratio", "proj_l2"};
    table.data = {rep.times, rep.lhs_l2, rep.rhs_l2, rep.energy_lhs, rep.ratio, rep.proj_l2};
    emit_csv(files, dir / "adiabatic.csv", table);

    double sup_lhs = 0.0, sup_rhs = 0.0, worst_ratio = 0.0, sup_energy = 0.0;
    for (std::size_t i = 0; i < rep.times.size(); ++i) {
      sup_lhs = std::max(sup_lhs, rep.lhs_l2[i]);
      sup_rhs = std::max(sup_rhs, rep.rhs_l2[i]);
      worst_ratio = std::max(worst_ratio, rep.ratio[i]);
      sup_energy = std::max(sup_energy, rep.energy_lhs[i]);
    }
    ordered_json summary;
    summary["epsilon"] = eps;
    summary["dt"] = dt;
    summary["sup_lhs"] = sup_lhs;
    summary["sup_rhs"] = sup_rhs;
    summary["worst_ratio"] = worst_ratio;
    summary["sup_energy_lhs"] = sup_energy;
    emit_json(files, dir / "adiabatic.json", summary);

    PlotSpec plot;
    plot.title = "adiabatic error against its envelope, eps=" + fmt_g(eps);
    plot.x_label = "t";
    plot.y_label = "L2 size";
    plot.series.push_back({"lhs", rep.times, rep.lhs_l2, true, false});
    plot.series.push_back({"rhs envelope", rep.times, rep.rhs_l2, true, false});
    emit_svg(files, dir / "bound.svg", plot);
  });
}

ordered_json decay_fit_json(const DecayFit& fit) {
  ordered_json j;
  j["t_lo"] = fit.t_lo;
  j["t_hi"] = fit.t_hi;
  j["exponent"] = fit.exponent;
  j["amplitude"] = fit.amplitude;
  j["r2"] = fit.r2;
  j["samples"] = fit.samples;
  return j;
}

StageStatus dispersive_epsilon(StageRunner& runner, const ExperimentConfig& cfg,
                               const AdiabaticPath& path, const Field& psi0, double dt_mesh,
                               double eps) {
  return runner.run(eps_dir_name(eps), [&](std::vector<fs::path>& files) {
    const fs::path dir = runner.root() / eps_dir_name(eps);
    fs::create_directories(dir);

    ProjectedOptions opts;
    opts.store_fields = false;
    opts.mask.enabled = true;
    opts.mask.strength = 300.0;
    opts.mask.fraction = 0.2;
    // Snap the step so an integer number of steps spans each mesh interval.
    const double dt_raw = cfg.c_psi * eps;
    const auto per = std::max<long long>(1, std::llround(dt_mesh / dt_raw));
    const double dt = dt_mesh / static_cast<double>(per);

    ProjectedRun run = evolve_projected(path, psi0, eps, dt, opts);

    CsvTable norms;
    norms.columns = {"t", "winf_m1", "linf", "l2", "mass", "pd_overlap"};
    norms.data = {run.times, run.winf_m1, run.linf, run.l2, run.mass, run.pd_overlap};
    emit_csv(files, dir / "norms.csv", norms);

    PlotSpec plot;
    plot.title = "norm decay, eps=" + fmt_g(eps);
    plot.x_label = "t";
    plot.y_label = "norm";
    plot.log_x = true;
    plot.log_y = true;
    plot.series.push_back({"weighted sup", run.times, run.winf_m1, true, false});
    plot.series.push_back({"sup", run.times, run.linf, true, false});
    plot.series.push_back({"L2", run.times, run.l2, true, false});
    emit_svg(files, dir / "norms.svg", plot);

    // Windows clear of the near-field crossover; the early-time sup-norm law
    // is read off before the absorbed front matters.
    const double w_lo = 5.0 * eps;
    const double u_hi = std::min(cfg.T, std::max(0.5 * cfg.T, w_lo + 25.0 * dt_mesh));
    DecayFit weighted = measure_decay(run, DecayNorm::WeightedInf, {w_lo, cfg.T});
    DecayFit unweighted = measure_decay(run, DecayNorm::Inf, {w_lo, u_hi});

    ordered_json fits;
    fits["epsilon"] = eps;
    fits["weighted"] = decay_fit_json(weighted);
    fits["weighted"]["norm"] = "winf_m1";
    fits["unweighted"] = decay_fit_json(unweighted);
    fits["unweighted"]["norm"] = "linf";
    emit_json(files, dir / "decay.json", fits);
  });
}

StageStatus scaling_stage(StageRunner& runner, const std::vector<EpsOutcome>& outcomes) {
  return runner.run("scaling", [&](std::vector<fs::path>& files) {
    std::vector<DecompositionSeries> series;
    for (const EpsOutcome& o : outcomes)
      if (o.series) series.push_back(*o.series);
    std::vector<ScalingReport> reports = scaling_fit(series);

    ordered_json out = ordered_json::array();
    for (const ScalingReport& r : reports) {
      ordered_json j;
      j["observable"] = r.observable;
      j["epsilons"] = r.epsilons;
      j["sup_values"] = r.sup_values;
      j["slope"] = r.slope;
      j["expected"] = r.expected;
      j["band"] = r.band;
      j["within"] = r.within;
      out.push_back(j);
    }
    write_text((runner.root() / "scaling.json").string(), out.dump(2) + "\n");
    files.push_back(runner.root() / "scaling.json");

    PlotSpec scaling_plot;
    scaling_plot.title = "epsilon scaling of the remainder observables";
    scaling_plot.x_label = "epsilon";
    scaling_plot.y_label = "sup over t";
    scaling_plot.log_x = true;
    scaling_plot.log_y = true;
    for (const ScalingReport& r : reports) {
      char label[96];
      std::snprintf(label, sizeof label, "%s slope=%.3g", r.observable.c_str(), r.slope);
      scaling_plot.series.push_back({label, r.epsilons, r.sup_values, true, true});
    }
    emit_svg(files, runner.root() / "scaling.svg", scaling_plot);

    PlotSpec norm_plot;
    norm_plot.title = "corrected remainder size along the run";
    norm_plot.x_label = "t";
    norm_plot.y_label = "L2 norm";
    norm_plot.log_y = true;
    for (const DecompositionSeries& s : series)
      norm_plot.series.push_back({"eps=" + fmt_g(s.epsilon), s.t, s.nRt_l2, true, false});
    emit_svg(files, runner.root() / "norms.svg", norm_plot);
  });
}

}  // namespace

int exit_class_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::ParseError:
    case ErrorCode::ValidationError:
    case ErrorCode::InvalidArgument:
    case ErrorCode::NonPowerOfTwo:
    case ErrorCode::InsufficientSamples:
    case ErrorCode::HorizonMismatch:
      return 2;
    default:
      return 3;
  }
}

RunManifest run_experiment(const ExperimentConfig& cfg_in, const RunOptions& opts) {
  ExperimentConfig cfg = cfg_in;
  if (!opts.output_root.empty()) cfg.output_dir = opts.output_root;
  validate_config(cfg);
  InitialData init = load_initial_data(cfg);

  const fs::path root = fs::absolute(cfg.output_dir);
  std::error_code ec;
  fs::create_directories(root, ec);
  require(!ec && fs::is_directory(root), ErrorCode::IoError,
          "cannot create output root \"" + root.string() + "\"");

  RunManifest manifest;
  manifest.config_echo = config_echo_json(cfg);
  manifest.code_version = LPLAB_VERSION;
  manifest.started_at = iso_utc_now();

  StageRunner runner(root, opts.verbose);
  const std::vector<double>& eps = cfg.epsilons;

  switch (cfg.kind) {
    case ExperimentKind::Reference: {
      std::optional<ReferenceArtifacts> ref;
      manifest.stages.push_back(reference_stage(runner, cfg, init, ref));
      break;
    }

    case ExperimentKind::Evolve: {
      Field psi0;
      StageStatus setup = runner.run("ground_state", [&](std::vector<fs::path>&) {
        psi0 = to_complex(ground_state(init.phi0, cfg.mass).wavefunction);
      });
      const bool setup_ok = setup.ok;
      manifest.stages.push_back(std::move(setup));
      std::vector<StageStatus> stages(eps.size());
      if (setup_ok) {
        run_pool(eps.size(), opts.workers, [&](std::size_t i) {
          stages[i] = evolve_epsilon(runner, cfg, init, psi0, eps[i]);
        });
      } else {
        for (std::size_t i = 0; i < eps.size(); ++i)
          stages[i] = StageRunner::skipped(eps_dir_name(eps[i]), "ground_state stage failed");
      }
      for (auto& s : stages) manifest.stages.push_back(std::move(s));
      break;
    }

    case ExperimentKind::Decompose:
    case ExperimentKind::Sweep: {
      std::optional<ReferenceArtifacts> ref;
      manifest.stages.push_back(reference_stage(runner, cfg, init, ref));
      std::vector<EpsOutcome> outcomes(eps.size());
      if (ref) {
        run_pool(eps.size(), opts.workers, [&](std::size_t i) {
          outcomes[i] = decompose_epsilon(runner, cfg, init, ref->traj, eps[i]);
        });
      } else {
        for (std::size_t i = 0; i < eps.size(); ++i)
          outcomes[i].stage = StageRunner::skipped(eps_dir_name(eps[i]), "reference stage failed");
      }
      for (auto& o : outcomes) manifest.stages.push_back(std::move(o.stage));
      if (cfg.kind == ExperimentKind::Sweep)
        manifest.stages.push_back(scaling_stage(runner, outcomes));
      break;
    }

    case ExperimentKind::Adiabatic: {
      std::optional<ReferenceArtifacts> ref;
      manifest.stages.push_back(reference_stage(runner, cfg, init, ref));
      std::optional<AdiabaticPath> path;
      if (ref) {
        StageStatus prep = runner.run("eigendata", [&](std::vector<fs::path>&) {
          AdiabaticPath p = path_from_reference(ref->traj);
          prepare_eigendata(p, cfg.tolerances.ref_tol);
          path = std::move(p);
        });
        if (!prep.ok) path.reset();
        manifest.stages.push_back(std::move(prep));
      } else {
        manifest.stages.push_back(StageRunner::skipped("eigendata", "reference stage failed"));
      }
      std::vector<StageStatus> stages(eps.size());
      if (path) {
        run_pool(eps.size(), opts.workers, [&](std::size_t i) {
          stages[i] = adiabatic_epsilon(runner, cfg, *path, eps[i]);
        });
      } else {
        for (std::size_t i = 0; i < eps.size(); ++i)
          stages[i] = StageRunner::skipped(eps_dir_name(eps[i]), "eigendata stage failed");
      }
      for (auto& s : stages) manifest.stages.push_back(std::move(s));
      break;
    }

    case ExperimentKind::Dispersive: {
      std::optional<AdiabaticPath> path;
      Field psi0;
      double dt_mesh = 0.0;
      StageStatus prep = runner.run("eigendata", [&](std::vector<fs::path>&) {
        const auto n_mesh = std::max<long long>(
            2, std::llround(cfg.T / std::max(cfg.T / 500.0, cfg.dt_ref)));
        dt_mesh = cfg.T / static_cast<double>(n_mesh);
        PotentialFn fn = [phi0 = init.phi0](double, RealField& out) {
          require_same_grid(out.grid, phi0.grid, "dispersive potential");
          out.v = phi0.v;
        };
        AdiabaticPath p = path_from_function(init.grid, fn, cfg.T, dt_mesh);
        prepare_eigendata(p, cfg.tolerances.ref_tol);
        psi0 = make_decay_datum(p.V.front());
        path = std::move(p);
      });
      if (!prep.ok) path.reset();
      manifest.stages.push_back(std::move(prep));
      std::vector<StageStatus> stages(eps.size());
      if (path) {
        run_pool(eps.size(), opts.workers, [&](std::size_t i) {
          stages[i] = dispersive_epsilon(runner, cfg, *path, psi0, dt_mesh, eps[i]);
        });
      } else {
        for (std::size_t i = 0; i < eps.size(); ++i)
          stages[i] = StageRunner::skipped(eps_dir_name(eps[i]), "eigendata stage failed");
      }
      for (auto& s : stages) manifest.stages.push_back(std::move(s));
      break;
    }
  }

  manifest.finished_at = iso_utc_now();
  write_manifest((root / "manifest.json").string(), manifest);
  return manifest;
}

}  // namespace lplab
