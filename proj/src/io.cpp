#include "lplab/io.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>

#include "lplab/errors.hpp"

namespace lplab {
namespace {

constexpr std::uint64_t kFnvOffset = 14695981039346656037ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

}  // namespace

void write_csv(const std::string& path, const CsvTable& table) {
  require(!table.columns.empty() && table.columns.size() == table.data.size(),
          ErrorCode::InvalidArgument, "write_csv: column names and data must match");
  const std::size_t rows = table.data.front().size();
  for (const auto& col : table.data)
    require(col.size() == rows, ErrorCode::InvalidArgument,
            "write_csv: columns must have equal length");

  std::string out;
  out.reserve(rows * table.columns.size() * 24 + 256);
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    if (c) out += ',';
    out += table.columns[c];
  }
  out += '\n';
  char buf[40];
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", table.data[c][r]);
      if (c) out += ',';
      out += buf;
    }
    out += '\n';
  }
  write_text(path, out);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) raise(ErrorCode::IoError, "cannot open \"" + path + "\" for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.flush();
  if (!out) raise(ErrorCode::IoError, "short write to \"" + path + "\"");
}

std::uint64_t fnv1a(const void* data, std::size_t size) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  std::uint64_t h = kFnvOffset;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= bytes[i];
    h *= kFnvPrime;
  }
  return h;
}

std::uint64_t fnv1a_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::IoError, "cannot open \"" + path + "\" for hashing");
  std::uint64_t h = kFnvOffset;
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    const auto n = static_cast<std::size_t>(in.gcount());
    for (std::size_t i = 0; i < n; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= kFnvPrime;
    }
    if (!in) break;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

bool RunManifest::ok() const {
  for (const auto& stage : stages)
    if (!stage.ok) return false;
  return true;
}

const StageStatus* RunManifest::first_failure() const {
  for (const auto& stage : stages)
    if (!stage.ok) return &stage;
  return nullptr;
}

std::string manifest_to_json(const RunManifest& manifest) {
  nlohmann::ordered_json out;
  try {
    out["config"] = nlohmann::ordered_json::parse(manifest.config_echo);
  } catch (const nlohmann::json::parse_error&) {
    out["config"] = manifest.config_echo;  // echo was not JSON; keep it verbatim
  }
  out["code_version"] = manifest.code_version;
  out["started_at"] = manifest.started_at;
  out["finished_at"] = manifest.finished_at;
  out["ok"] = manifest.ok();
  auto stages = nlohmann::ordered_json::array();
  for (const auto& stage : manifest.stages) {
    nlohmann::ordered_json s;
    s["name"] = stage.name;
    s["status"] = stage.ok ? "ok" : "failed";
    if (!stage.ok) {
      s["error"] = stage.error;
      s["error_code"] = stage.error_code;
      s["exit_class"] = stage.exit_class;
    }
    s["seconds"] = stage.seconds;
    auto files = nlohmann::ordered_json::array();
    for (const auto& f : stage.files)
      files.push_back({{"path", f.path}, {"fnv1a", f.fnv1a}, {"bytes", f.bytes}});
    s["files"] = files;
    stages.push_back(s);
  }
  out["stages"] = stages;
  return out.dump(2) + "\n";
}

void write_manifest(const std::string& path, const RunManifest& manifest) {
  write_text(path, manifest_to_json(manifest));
}

}  // namespace lplab
