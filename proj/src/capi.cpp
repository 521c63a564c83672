#include "lplab/capi.h"

#include <filesystem>
#include <memory>
#include <string>

#include "lplab/config.hpp"
#include "lplab/errors.hpp"
#include "lplab/experiment.hpp"

#ifndef LPLAB_VERSION
#define LPLAB_VERSION "0.0.0"
#endif

struct lplab_experiment {
  lplab::ExperimentConfig cfg;
  lplab::RunOptions opts;
  std::string manifest_path;
  int failed_stages = 0;
};

namespace {

thread_local std::string g_last_error;

int fail(int status, const std::string& message) {
  g_last_error = message;
  return status;
}

template <typename Fn>
int guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return LPLAB_OK;
  } catch (const lplab::Error& e) {
    return fail(lplab::exit_class_for(e.code()), e.what());
  } catch (const std::exception& e) {
    return fail(LPLAB_STATUS_NUMERICAL, e.what());
  }
}

}  // namespace

extern "C" {

const char* lplab_version(void) { return LPLAB_VERSION; }

const char* lplab_last_error(void) { return g_last_error.c_str(); }

int lplab_experiment_open(const char* config_path, lplab_experiment** out) {
  if (!out) return fail(LPLAB_STATUS_VALIDATION, "null output handle");
  *out = nullptr;
  if (!config_path) return fail(LPLAB_STATUS_VALIDATION, "null config path");
  return guarded([&] {
    auto handle = std::make_unique<lplab_experiment>();
    handle->cfg = lplab::parse_config(config_path);
    *out = handle.release();
  });
}

int lplab_experiment_set_kind(lplab_experiment* exp, const char* kind) {
  if (!exp || !kind) return fail(LPLAB_STATUS_VALIDATION, "null argument");
  return guarded([&] {
    lplab::ExperimentConfig updated = exp->cfg;
    updated.kind = lplab::kind_from_name(kind);
    lplab::validate_config(updated);  // kind-dependent rules (e.g. sweep epsilons)
    exp->cfg = updated;
  });
}

int lplab_experiment_set_output_root(lplab_experiment* exp, const char* dir) {
  if (!exp || !dir) return fail(LPLAB_STATUS_VALIDATION, "null argument");
  if (!*dir) return fail(LPLAB_STATUS_VALIDATION, "output root must be non-empty");
  exp->opts.output_root = dir;
  g_last_error.clear();
  return LPLAB_OK;
}

int lplab_experiment_set_workers(lplab_experiment* exp, int workers) {
  if (!exp) return fail(LPLAB_STATUS_VALIDATION, "null argument");
  if (workers < 1) return fail(LPLAB_STATUS_VALIDATION, "workers must be at least 1");
  exp->opts.workers = static_cast<std::size_t>(workers);
  g_last_error.clear();
  return LPLAB_OK;
}

int lplab_experiment_set_verbose(lplab_experiment* exp, int verbose) {
  if (!exp) return fail(LPLAB_STATUS_VALIDATION, "null argument");
  exp->opts.verbose = verbose != 0;
  g_last_error.clear();
  return LPLAB_OK;
}

int lplab_experiment_run(lplab_experiment* exp) {
  if (!exp) return fail(LPLAB_STATUS_VALIDATION, "null argument");
  int status = LPLAB_OK;
  std::string failure_message;
  const int rc = guarded([&] {
    lplab::RunManifest manifest = lplab::run_experiment(exp->cfg, exp->opts);
    const std::string root = exp->opts.output_root.empty() ? exp->cfg.output_dir
                                                           : exp->opts.output_root;
    exp->manifest_path = (std::filesystem::absolute(root) / "manifest.json").string();
    exp->failed_stages = 0;
    for (const auto& stage : manifest.stages)
      if (!stage.ok) ++exp->failed_stages;
    if (const lplab::StageStatus* failure = manifest.first_failure()) {
      status = failure->exit_class;
      failure_message = "stage " + failure->name + " failed: " + failure->error;
    }
  });
  if (rc != LPLAB_OK) return rc;
  if (status != LPLAB_OK) return fail(status, failure_message);
  return LPLAB_OK;
}

const char* lplab_experiment_manifest_path(const lplab_experiment* exp) {
  return exp ? exp->manifest_path.c_str() : "";
}

int lplab_experiment_failed_stages(const lplab_experiment* exp) {
  return exp ? exp->failed_stages : -1;
}

void lplab_experiment_close(lplab_experiment* exp) { delete exp; }

}  // extern "C"
