#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>

namespace spearlab {

// Key-value configuration tree. The on-disk format is a TOML subset:
// [section] headers, `key = value` lines, `#` comments, values are quoted
// strings, integers, floats or true/false. Keys are addressed as
// "section.key". Environment variables override leaf keys:
// SPEARLAB_SECTION_KEY=... wins over the file value.
class Config {
 public:
  Config() = default;

  static Config parse(const std::string& text);
  static Config load(const std::filesystem::path& file, bool apply_env = true);

  bool has(const std::string& key) const;
  std::optional<std::string> get(const std::string& key) const;
  std::string get_or(const std::string& key, const std::string& fallback) const;
  /// Throws ConfigInvalidError when the key is absent.
  std::string require(const std::string& key) const;
  int64_t get_int(const std::string& key, int64_t fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  void set(const std::string& key, const std::string& value);
  void apply_env_overrides(const char* prefix = "SPEARLAB");

  const std::map<std::string, std::string>& entries() const { return entries_; }

  /// Keys under "section." with the prefix stripped.
  std::map<std::string, std::string> section(const std::string& name) const;

 private:
  std::map<std::string, std::string> entries_;
};

}  // namespace spearlab
