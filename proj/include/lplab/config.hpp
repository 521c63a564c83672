#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lplab/grid.hpp"

namespace lplab {

enum class ExperimentKind { Reference, Evolve, Decompose, Adiabatic, Dispersive, Sweep };

const char* kind_name(ExperimentKind kind);
ExperimentKind kind_from_name(const std::string& name);  // ValidationError on unknown

struct GridSpec {
  double L = 0.0;       // half-width of the periodic box [-L, L)
  std::size_t N = 0;    // node count, power of two
};

// phi0 = -a sech^2(x - center), phi_dot0 = velocity_amplitude * x * exp(-x^2).
struct PresetSpec {
  std::string name = "poschl_teller";
  double a = 1.5;
  double velocity_amplitude = 0.2;
  double center = 0.0;
};

// Sample files for (phi0, phi_dot0): one sample per data line, last
// comma-separated token taken as the value, exactly N data lines.
struct InitialFiles {
  std::string phi0;
  std::string phi_dot0;
};

struct Tolerances {
  double ref_tol = 1e-8;  // eigen-residual required along the reference march
  double rho_tol = 0.02;  // zero-energy-resonance detection threshold
  double gap_tol = 1e-6;  // "negative eigenvalue" means below -gap_tol
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::Evolve;
  GridSpec grid;
  std::optional<PresetSpec> preset;        // exactly one of preset / initial_data
  std::optional<InitialFiles> initial_data;
  double mass = 1.0;
  std::vector<double> epsilons;
  double T = 0.0;
  double dt_ref = 1e-3;
  double c_psi = 0.02;
  Tolerances tolerances;
  std::string output_dir = "lplab_out";
  std::size_t checkpoint_stride = 0;  // 0 = automatic (roughly 200 stamps)
};

// JSON loader: unknown keys and type mismatches are ParseError (with the key,
// and the line for syntax errors); out-of-range values are ValidationError
// naming the field. Defaults are filled as documented in the README.
ExperimentConfig parse_config(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text);

// Value-range checks shared by both loaders and by programmatic configs.
void validate_config(const ExperimentConfig& cfg);

// Normalized JSON echo of a validated config, defaults filled, fixed key
// order; embedded verbatim in the run manifest.
std::string config_echo_json(const ExperimentConfig& cfg);

struct InitialData {
  Grid grid;
  RealField phi0;
  RealField phi_dot0;
};

// Materializes the grid and the initial fields (reads the sample files for
// file-based data; ValidationError on count mismatch or unreadable files).
InitialData load_initial_data(const ExperimentConfig& cfg);

}  // namespace lplab
