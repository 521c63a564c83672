#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace lplab {

// Column-oriented table written as CSV with %.17g samples, so every double
// round-trips bit-exactly and reruns of a deterministic pipeline reproduce
// the file bytes.
struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> data;  // one vector per column, equal lengths
};

void write_csv(const std::string& path, const CsvTable& table);
void write_text(const std::string& path, const std::string& text);

// FNV-1a (64-bit) content hashes; the manifest stores them as 16-digit hex.
std::uint64_t fnv1a(const void* data, std::size_t size);
std::uint64_t fnv1a_file(const std::string& path);
std::string hex64(std::uint64_t value);

struct EmittedFile {
  std::string path;  // relative to the run root
  std::string fnv1a;
  std::uint64_t bytes = 0;
};

struct StageStatus {
  std::string name;
  bool ok = false;
  std::string error;       // empty when ok
  std::string error_code;  // ErrorCode name when failed
  int exit_class = 0;      // 0 ok, 2 validation-type failure, 3 numerical/runtime
  double seconds = 0.0;
  std::vector<EmittedFile> files;
};

struct RunManifest {
  std::string config_echo;  // normalized config JSON text
  std::string code_version;
  std::string started_at;  // ISO-8601 UTC
  std::string finished_at;
  std::vector<StageStatus> stages;

  bool ok() const;
  const StageStatus* first_failure() const;
};

std::string manifest_to_json(const RunManifest& manifest);
void write_manifest(const std::string& path, const RunManifest& manifest);

}  // namespace lplab
