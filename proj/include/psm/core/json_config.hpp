#pragma once

#include <algorithm>
#include <array>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "psm/core/error.hpp"
#include "psm/core/vec.hpp"

namespace psm {

using Json = nlohmann::json;

/// Parses JSON text; // and /* */ comments are allowed.
inline Json parse_json_text(std::string_view text) {
  try {
    return Json::parse(text.begin(), text.end(), nullptr, true, true);
  } catch (const Json::parse_error& e) {
    throw ParseError(e.byte, e.what());
  }
}

inline Json parse_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open");
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_json_text(ss.str());
  } catch (const ParseError& e) {
    throw IoError(path.string(), e.what());
  }
}

/// Typed, path-aware view of a JSON object. Errors carry the dotted key
/// path; `finish` rejects keys that were never read.
class JsonObject {
 public:
  JsonObject(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_, "expected an object");
  }

  [[nodiscard]] const std::string& path() const noexcept { return path_; }
  [[nodiscard]] bool has(const std::string& key) const { return j_.contains(key); }
  [[nodiscard]] std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  [[nodiscard]] const Json& raw(const std::string& key) {
    seen_.push_back(key);
    auto it = j_.find(key);
    if (it == j_.end()) throw ConfigError(key_path(key), "missing required key");
    return *it;
  }

  [[nodiscard]] double number(const std::string& key) {
    const Json& v = raw(key);
    if (!v.is_number()) throw ConfigError(key_path(key), "expected a number");
    return v.get<double>();
  }
  [[nodiscard]] double number(const std::string& key, double fallback) { return has(key) ? number(key) : mark(key, fallback); }

  [[nodiscard]] double positive(const std::string& key) {
    const double v = number(key);
    if (!(v > 0.0)) throw ConfigError(key_path(key), "must be positive");
    return v;
  }
  [[nodiscard]] double positive(const std::string& key, double fallback) { return has(key) ? positive(key) : mark(key, fallback); }

  [[nodiscard]] std::size_t count(const std::string& key) {
    const Json& v = raw(key);
    if (!v.is_number_integer() || v.get<long long>() < 0) throw ConfigError(key_path(key), "expected a non-negative integer");
    return v.get<std::size_t>();
  }
  [[nodiscard]] std::size_t count(const std::string& key, std::size_t fallback) { return has(key) ? count(key) : mark(key, fallback); }

  [[nodiscard]] int integer(const std::string& key) {
    const Json& v = raw(key);
    if (!v.is_number_integer()) throw ConfigError(key_path(key), "expected an integer");
    return v.get<int>();
  }
  [[nodiscard]] int integer(const std::string& key, int fallback) { return has(key) ? integer(key) : mark(key, fallback); }

  [[nodiscard]] bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return mark(key, fallback);
    const Json& v = raw(key);
    if (!v.is_boolean()) throw ConfigError(key_path(key), "expected true or false");
    return v.get<bool>();
  }

  [[nodiscard]] std::string string(const std::string& key) {
    const Json& v = raw(key);
    if (!v.is_string()) throw ConfigError(key_path(key), "expected a string");
    return v.get<std::string>();
  }
  [[nodiscard]] std::string string(const std::string& key, std::string fallback) {
    return has(key) ? string(key) : mark(key, std::move(fallback));
  }

  [[nodiscard]] Vec3 vec3(const std::string& key) {
    const Json& v = raw(key);
    if (!v.is_array() || v.size() != 3 || !std::all_of(v.begin(), v.end(), [](const Json& e) { return e.is_number(); }))
      throw ConfigError(key_path(key), "expected an array of 3 numbers");
    return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
  }
  [[nodiscard]] Vec3 vec3(const std::string& key, const Vec3& fallback) { return has(key) ? vec3(key) : mark(key, fallback); }

  [[nodiscard]] std::array<std::size_t, 3> extents(const std::string& key) {
    const Json& v = raw(key);
    if (!v.is_array() || v.size() != 3 ||
        !std::all_of(v.begin(), v.end(), [](const Json& e) { return e.is_number_integer() && e.get<long long>() > 0; }))
      throw ConfigError(key_path(key), "expected an array of 3 positive integers");
    return {v[0].get<std::size_t>(), v[1].get<std::size_t>(), v[2].get<std::size_t>()};
  }

  [[nodiscard]] JsonObject object(const std::string& key) { return {raw(key), key_path(key)}; }

  /// Rejects keys not consumed by any accessor.
  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (std::find(seen_.begin(), seen_.end(), it.key()) == seen_.end())
        throw ConfigError(key_path(it.key()), "unknown key");
  }

 private:
  template <typename T>
  T mark(const std::string& key, T v) {
    seen_.push_back(key);
    return v;
  }

  const Json& j_;
  std::string path_;
  std::vector<std::string> seen_;
};

}  // namespace psm
