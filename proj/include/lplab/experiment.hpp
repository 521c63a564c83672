#pragma once

#include <cstddef>
#include <string>

#include "lplab/config.hpp"
#include "lplab/errors.hpp"
#include "lplab/io.hpp"

namespace lplab {

struct RunOptions {
  std::string output_root;  // overrides cfg.output_dir when non-empty
  std::size_t workers = 1;  // concurrent per-epsilon runs (sweeps)
  bool verbose = false;     // stage progress on stderr
};

// Maps an error to the process exit class: 2 for config/validation-type
// failures, 3 for numerical or I/O failures at runtime.
int exit_class_for(ErrorCode code);

// Executes the configured pipeline, writing artifacts and manifest.json
// under the output root. Stage failures are recorded in the manifest with
// partial outputs preserved; only pre-flight failures (invalid config,
// unreadable initial data, uncreatable output root) throw.
RunManifest run_experiment(const ExperimentConfig& cfg, const RunOptions& opts = {});

}  // namespace lplab
