#pragma once

#include <cstdint>
#include <initializer_list>
#include <string>
#include <string_view>

#include <json.hpp>

namespace tempostyle {

using Json = nlohmann::json;

/// Rejects keys not listed in `allowed`, naming the offending key. Throws ConfigError.
void require_known_keys(const Json& obj, std::initializer_list<std::string_view> allowed,
                        std::string_view context);

/// 64-bit FNV-1a over bytes.
uint64_t fnv1a64(std::string_view bytes, uint64_t seed = 14695981039346656037ull);

/// Hex digest of the canonical (sorted-key, compact) serialization.
std::string json_hash(const Json& j);

std::string hex64(uint64_t v);

/// Reads and parses a JSON file. Throws IoError / ConfigError.
Json read_json_file(const std::string& path);
/// Writes via a temporary file and rename so readers never see partial content.
void write_json_file_atomic(const std::string& path, const Json& j);

template <typename T>
T json_get_or(const Json& j, const char* key, T fallback) {
  auto it = j.find(key);
  return it == j.end() ? fallback : it->get<T>();
}

}  // namespace tempostyle
