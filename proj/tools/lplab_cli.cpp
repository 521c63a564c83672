#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <string>

#include "lplab/capi.h"

namespace {

struct SubcommandSpec {
  const char* name;
  const char* description;
};

constexpr SubcommandSpec kSubcommands[] = {
    {"reference", "march the slow reference dynamics and emit its snapshots"},
    {"evolve", "integrate the coupled system, one run per epsilon"},
    {"decompose", "coupled runs split against the reference trajectory"},
    {"adiabatic", "linear adiabatic bound checks along the reference path"},
    {"dispersive", "projected linear flow with decay-rate fits"},
    {"sweep", "decompose over the epsilon list, then scaling fits and plots"},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Landau-Pekar polaron simulation and verification suite"};
  app.require_subcommand(1);
  app.set_version_flag("--version", lplab_version());

  std::string config_path;
  std::string out_dir;
  int workers = 1;
  bool verbose = false;
  for (const SubcommandSpec& spec : kSubcommands) {
    CLI::App* sub = app.add_subcommand(spec.name, spec.description);
    sub->add_option("--config", config_path, "JSON experiment config")->required();
    sub->add_option("--out", out_dir, "output root (overrides LP_LAB_OUT and the config)");
    sub->add_option("--workers", workers, "concurrent per-epsilon workers")
        ->check(CLI::PositiveNumber);
    sub->add_flag("--verbose", verbose, "log stage progress to stderr");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : LPLAB_STATUS_VALIDATION;
  }
  const std::string kind = app.get_subcommands().front()->get_name();

  lplab_experiment* exp = nullptr;
  int rc = lplab_experiment_open(config_path.c_str(), &exp);
  if (rc != LPLAB_OK) {
    std::fprintf(stderr, "error: %s\n", lplab_last_error());
    return rc;
  }

  rc = lplab_experiment_set_kind(exp, kind.c_str());
  if (rc == LPLAB_OK && !out_dir.empty())
    rc = lplab_experiment_set_output_root(exp, out_dir.c_str());
  if (rc == LPLAB_OK && out_dir.empty()) {
    const char* env_root = std::getenv("LP_LAB_OUT");
    if (env_root && *env_root) rc = lplab_experiment_set_output_root(exp, env_root);
  }
  if (rc == LPLAB_OK) rc = lplab_experiment_set_workers(exp, workers);
  if (rc == LPLAB_OK) rc = lplab_experiment_set_verbose(exp, verbose ? 1 : 0);
  if (rc != LPLAB_OK) {
    std::fprintf(stderr, "error: %s\n", lplab_last_error());
    lplab_experiment_close(exp);
    return rc;
  }

  rc = lplab_experiment_run(exp);
  const char* manifest = lplab_experiment_manifest_path(exp);
  if (*manifest) std::printf("manifest: %s\n", manifest);
  if (rc != LPLAB_OK) {
    std::fprintf(stderr, "error: %s\n", lplab_last_error());
    const int failed = lplab_experiment_failed_stages(exp);
    if (failed > 0) std::fprintf(stderr, "failed stages: %d (see manifest)\n", failed);
  }
  lplab_experiment_close(exp);
  return rc;
}
