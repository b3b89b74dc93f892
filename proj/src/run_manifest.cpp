#include "tempostyle/run_manifest.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>

#ifndef TEMPOSTYLE_VERSION
#define TEMPOSTYLE_VERSION "unknown"
#endif

namespace tempostyle {

std::string code_version() { return TEMPOSTYLE_VERSION; }

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Json RunManifest::to_json() const {
  Json j{{"command", command},
         {"config_hash", config_hash},
         {"code_version", code_version()},
         {"seed", seed},
         {"config", config},
         {"status", status},
         {"started_at", started_at},
         {"finished_at", finished_at.empty() ? Json(nullptr) : Json(finished_at)},
         {"artifacts", artifacts}};
  if (!error.empty()) j["error"] = error;
  return j;
}

void RunManifest::write(const std::string& run_dir) const {
  std::filesystem::create_directories(run_dir);
  write_json_file_atomic((std::filesystem::path(run_dir) / "manifest.json").string(), to_json());
}

RunManifest begin_run(const std::string& command, const Json& config, uint64_t seed) {
  RunManifest m;
  m.command = command;
  m.config = config;
  m.config_hash = json_hash(config);
  m.seed = seed;
  m.started_at = utc_timestamp();
  return m;
}

}  // namespace tempostyle
