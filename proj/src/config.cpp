#include "lplab/config.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "lplab/errors.hpp"
#include "lplab/presets.hpp"

namespace lplab {
namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

const char* const kKindNames[] = {"reference", "evolve",     "decompose",
                                  "adiabatic", "dispersive", "sweep"};

void reject_unknown_keys(const json& obj, const char* where,
                         std::initializer_list<const char*> allowed) {
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* key : allowed) {
      if (item.key() == key) {
        known = true;
        break;
      }
    }
    if (!known)
      raise(ErrorCode::ParseError,
            std::string("config: unknown key \"") + item.key() + "\" in " + where);
  }
}

const json& get_required(const json& obj, const char* key, const char* where) {
  auto it = obj.find(key);
  if (it == obj.end())
    raise(ErrorCode::ParseError,
          std::string("config: missing key \"") + key + "\" in " + where);
  return *it;
}

template <typename T>
T get_as(const json& obj, const char* key, const char* where) {
  try {
    return get_required(obj, key, where).get<T>();
  } catch (const json::exception& e) {
    raise(ErrorCode::ParseError, std::string("config: key \"") + key + "\" in " + where +
                                     " has the wrong type (" + e.what() + ")");
  }
}

template <typename T>
void get_optional(const json& obj, const char* key, const char* where, T& out) {
  if (obj.find(key) == obj.end()) return;
  out = get_as<T>(obj, key, where);
}

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

ExperimentConfig from_json(const json& root) {
  if (!root.is_object()) raise(ErrorCode::ParseError, "config: top level must be a JSON object");
  reject_unknown_keys(root, "the top level",
                      {"kind", "grid", "preset", "initial_data", "mass", "epsilons", "T",
                       "dt_ref", "c_psi", "tolerances", "output_dir", "checkpoint_stride"});

  ExperimentConfig cfg;
  cfg.kind = kind_from_name(get_as<std::string>(root, "kind", "the top level"));

  const json& grid = get_required(root, "grid", "the top level");
  if (!grid.is_object()) raise(ErrorCode::ParseError, "config: \"grid\" must be an object");
  reject_unknown_keys(grid, "\"grid\"", {"L", "N"});
  cfg.grid.L = get_as<double>(grid, "L", "\"grid\"");
  cfg.grid.N = get_as<std::size_t>(grid, "N", "\"grid\"");

  if (root.contains("preset")) {
    const json& preset = root.at("preset");
    if (!preset.is_object()) raise(ErrorCode::ParseError, "config: \"preset\" must be an object");
    reject_unknown_keys(preset, "\"preset\"", {"name", "a", "velocity_amplitude", "center"});
    PresetSpec spec;
    get_optional(preset, "name", "\"preset\"", spec.name);
    get_optional(preset, "a", "\"preset\"", spec.a);
    get_optional(preset, "velocity_amplitude", "\"preset\"", spec.velocity_amplitude);
    get_optional(preset, "center", "\"preset\"", spec.center);
    cfg.preset = spec;
  }

  if (root.contains("initial_data")) {
    const json& init = root.at("initial_data");
    if (!init.is_object())
      raise(ErrorCode::ParseError, "config: \"initial_data\" must be an object");
    reject_unknown_keys(init, "\"initial_data\"", {"phi0", "phi_dot0"});
    InitialFiles files;
    files.phi0 = get_as<std::string>(init, "phi0", "\"initial_data\"");
    files.phi_dot0 = get_as<std::string>(init, "phi_dot0", "\"initial_data\"");
    cfg.initial_data = files;
  }

  get_optional(root, "mass", "the top level", cfg.mass);
  cfg.epsilons = get_as<std::vector<double>>(root, "epsilons", "the top level");
  cfg.T = get_as<double>(root, "T", "the top level");
  get_optional(root, "dt_ref", "the top level", cfg.dt_ref);
  get_optional(root, "c_psi", "the top level", cfg.c_psi);

  if (root.contains("tolerances")) {
    const json& tol = root.at("tolerances");
    if (!tol.is_object()) raise(ErrorCode::ParseError, "config: \"tolerances\" must be an object");
    reject_unknown_keys(tol, "\"tolerances\"", {"ref_tol", "rho_tol", "gap_tol"});
    get_optional(tol, "ref_tol", "\"tolerances\"", cfg.tolerances.ref_tol);
    get_optional(tol, "rho_tol", "\"tolerances\"", cfg.tolerances.rho_tol);
    get_optional(tol, "gap_tol", "\"tolerances\"", cfg.tolerances.gap_tol);
  }

  get_optional(root, "output_dir", "the top level", cfg.output_dir);
  get_optional(root, "checkpoint_stride", "the top level", cfg.checkpoint_stride);

  if (!cfg.preset && !cfg.initial_data) cfg.preset = PresetSpec{};
  validate_config(cfg);
  return cfg;
}

std::vector<double> read_sample_file(const std::string& path, const char* field,
                                     std::size_t expected) {
  std::ifstream in(path);
  if (!in)
    raise(ErrorCode::ValidationError,
          std::string(field) + ": cannot open sample file \"" + path + "\"");
  std::vector<double> values;
  values.reserve(expected);
  std::string line;
  std::size_t line_no = 0;
  bool header_allowed = true;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto comma = line.find_last_of(',');
    const std::string token =
        line.substr(comma == std::string::npos ? first : comma + 1);
    char* end = nullptr;
    const double value = std::strtod(token.c_str(), &end);
    while (end && (*end == ' ' || *end == '\t' || *end == '\r')) ++end;
    if (end == token.c_str() || (end && *end != '\0')) {
      if (header_allowed) {  // a single leading label row is tolerated
        header_allowed = false;
        continue;
      }
      raise(ErrorCode::ParseError, std::string(field) + ": non-numeric sample on line " +
                                       std::to_string(line_no) + " of \"" + path + "\"");
    }
    header_allowed = false;
    if (!std::isfinite(value))
      raise(ErrorCode::ValidationError, std::string(field) + ": non-finite sample on line " +
                                            std::to_string(line_no) + " of \"" + path + "\"");
    values.push_back(value);
  }
  if (values.size() != expected)
    raise(ErrorCode::ValidationError,
          std::string(field) + ": expected " + std::to_string(expected) + " samples in \"" +
              path + "\", found " + std::to_string(values.size()));
  return values;
}

}  // namespace

const char* kind_name(ExperimentKind kind) { return kKindNames[static_cast<int>(kind)]; }

ExperimentKind kind_from_name(const std::string& name) {
  for (int i = 0; i < 6; ++i)
    if (name == kKindNames[i]) return static_cast<ExperimentKind>(i);
  raise(ErrorCode::ValidationError,
        "kind must be one of reference, evolve, decompose, adiabatic, dispersive, sweep; got \"" +
            name + "\"");
}

void validate_config(const ExperimentConfig& cfg) {
  require(cfg.grid.L > 0.0, ErrorCode::ValidationError, "L must be positive");
  require(is_power_of_two(cfg.grid.N), ErrorCode::ValidationError, "N must be a power of two");
  require(cfg.grid.N >= 256, ErrorCode::ValidationError, "N must be at least 256");
  require(bool(cfg.preset) != bool(cfg.initial_data), ErrorCode::ValidationError,
          "exactly one of preset and initial_data must be given");
  if (cfg.preset) {
    require(cfg.preset->name == "poschl_teller", ErrorCode::ValidationError,
            "preset.name must be \"poschl_teller\"");
    require(cfg.preset->a > 0.0, ErrorCode::ValidationError, "preset.a must be positive");
    require(std::isfinite(cfg.preset->velocity_amplitude), ErrorCode::ValidationError,
            "preset.velocity_amplitude must be finite");
    require(std::isfinite(cfg.preset->center), ErrorCode::ValidationError,
            "preset.center must be finite");
  }
  require(cfg.mass > 0.0, ErrorCode::ValidationError, "mass must be positive");
  require(!cfg.epsilons.empty(), ErrorCode::ValidationError, "epsilons must be non-empty");
  for (double eps : cfg.epsilons)
    require(eps > 0.0 && eps <= 1.0, ErrorCode::ValidationError,
            "epsilons must lie in (0, 1]");
  for (std::size_t i = 0; i < cfg.epsilons.size(); ++i)
    for (std::size_t j = i + 1; j < cfg.epsilons.size(); ++j)
      require(cfg.epsilons[i] != cfg.epsilons[j], ErrorCode::ValidationError,
              "epsilons must be distinct");
  if (cfg.kind == ExperimentKind::Sweep) {
    require(cfg.epsilons.size() >= 3, ErrorCode::ValidationError,
            "sweep requires at least three epsilons");
    for (std::size_t i = 1; i < cfg.epsilons.size(); ++i)
      require(cfg.epsilons[i] < cfg.epsilons[i - 1], ErrorCode::ValidationError,
              "sweep epsilons must be strictly decreasing");
  }
  require(cfg.T > 0.0, ErrorCode::ValidationError, "T must be positive");
  require(cfg.dt_ref > 0.0 && cfg.dt_ref <= cfg.T, ErrorCode::ValidationError,
          "dt_ref must lie in (0, T]");
  require(cfg.c_psi > 0.0 && cfg.c_psi <= 0.05, ErrorCode::ValidationError,
          "c_psi must lie in (0, 0.05]");
  require(cfg.tolerances.ref_tol > 0.0, ErrorCode::ValidationError,
          "tolerances.ref_tol must be positive");
  require(cfg.tolerances.rho_tol > 0.0, ErrorCode::ValidationError,
          "tolerances.rho_tol must be positive");
  require(cfg.tolerances.gap_tol > 0.0, ErrorCode::ValidationError,
          "tolerances.gap_tol must be positive");
  require(!cfg.output_dir.empty(), ErrorCode::ValidationError, "output_dir must be non-empty");
}

ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(ErrorCode::ParseError, "config: cannot open \"" + path + "\"");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

ExperimentConfig parse_config_text(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    raise(ErrorCode::ParseError, std::string("config: ") + e.what());
  }
  return from_json(root);
}

std::string config_echo_json(const ExperimentConfig& cfg) {
  ordered_json out;
  out["kind"] = kind_name(cfg.kind);
  out["grid"] = {{"L", cfg.grid.L}, {"N", cfg.grid.N}};
  if (cfg.preset) {
    out["preset"] = {{"name", cfg.preset->name},
                     {"a", cfg.preset->a},
                     {"velocity_amplitude", cfg.preset->velocity_amplitude},
                     {"center", cfg.preset->center}};
  } else {
    out["initial_data"] = {{"phi0", cfg.initial_data->phi0},
                           {"phi_dot0", cfg.initial_data->phi_dot0}};
  }
  out["mass"] = cfg.mass;
  out["epsilons"] = cfg.epsilons;
  out["T"] = cfg.T;
  out["dt_ref"] = cfg.dt_ref;
  out["c_psi"] = cfg.c_psi;
  out["tolerances"] = {{"ref_tol", cfg.tolerances.ref_tol},
                       {"rho_tol", cfg.tolerances.rho_tol},
                       {"gap_tol", cfg.tolerances.gap_tol}};
  out["output_dir"] = cfg.output_dir;
  out["checkpoint_stride"] = cfg.checkpoint_stride;
  return out.dump(2);
}

InitialData load_initial_data(const ExperimentConfig& cfg) {
  validate_config(cfg);
  InitialData data;
  data.grid = make_grid(cfg.grid.L, cfg.grid.N);
  if (cfg.preset) {
    data.phi0 = sech_well(data.grid, cfg.preset->a, cfg.preset->center);
    data.phi_dot0 = odd_gaussian_velocity(data.grid, cfg.preset->velocity_amplitude);
    return data;
  }
  data.phi0 = RealField{data.grid,
                        read_sample_file(cfg.initial_data->phi0, "initial_data.phi0", cfg.grid.N)};
  data.phi_dot0 = RealField{
      data.grid,
      read_sample_file(cfg.initial_data->phi_dot0, "initial_data.phi_dot0", cfg.grid.N)};
  return data;
}

}  // namespace lplab
