#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "tempostyle/json_util.hpp"

namespace tempostyle {

/// Build version string compiled into the library.
std::string code_version();

/// manifest.json of a run directory. Written atomically at job start (status "running")
/// and again at completion ("ok" or "failed").
struct RunManifest {
  std::string command;
  std::string config_hash;
  uint64_t seed = 0;
  Json config = Json::object();
  std::string status = "running";
  std::string started_at;
  std::string finished_at;
  std::string error;
  std::map<std::string, std::string> artifacts;  // role -> path relative to the run dir

  Json to_json() const;
  void write(const std::string& run_dir) const;
};

/// Starts a manifest for `command` with the config hash filled in.
RunManifest begin_run(const std::string& command, const Json& config, uint64_t seed);
/// Current UTC time as ISO-8601.
std::string utc_timestamp();

}  // namespace tempostyle
