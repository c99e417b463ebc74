#include "spearlab/config.hpp"

#include <cctype>
#include <cstdlib>
#include <stdexcept>

#include "spearlab/errors.hpp"
#include "spearlab/util.hpp"

extern char** environ;

namespace spearlab {

namespace {

std::string unquote(const std::string& v) {
  if (v.size() >= 2 && ((v.front() == '"' && v.back() == '"') ||
                        (v.front() == '\'' && v.back() == '\''))) {
    return v.substr(1, v.size() - 2);
  }
  return v;
}

}  // namespace

Config Config::parse(const std::string& text) {
  Config cfg;
  std::string section;
  int lineno = 0;
  for (const std::string& raw : split_lines(text)) {
    ++lineno;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigInvalidError("unterminated section header at line " + std::to_string(lineno));
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigInvalidError("expected key = value at line " + std::to_string(lineno));
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = unquote(trim(line.substr(eq + 1)));
    if (key.empty()) {
      throw ConfigInvalidError("empty key at line " + std::to_string(lineno));
    }
    cfg.entries_[section.empty() ? key : section + "." + key] = value;
  }
  return cfg;
}

Config Config::load(const std::filesystem::path& file, bool apply_env) {
  if (!std::filesystem::exists(file)) {
    throw ConfigInvalidError("config file not found: " + file.string());
  }
  Config cfg = parse(read_file(file));
  if (apply_env) cfg.apply_env_overrides();
  return cfg;
}

bool Config::has(const std::string& key) const { return entries_.count(key) > 0; }

std::optional<std::string> Config::get(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::string Config::get_or(const std::string& key, const std::string& fallback) const {
  auto v = get(key);
  return v ? *v : fallback;
}

std::string Config::require(const std::string& key) const {
  auto v = get(key);
  if (!v) throw ConfigInvalidError("missing required config key: " + key);
  return *v;
}

int64_t Config::get_int(const std::string& key, int64_t fallback) const {
  auto v = get(key);
  if (!v) return fallback;
  try {
    return std::stoll(*v);
  } catch (const std::exception&) {
    throw ConfigInvalidError("config key " + key + " is not an integer: " + *v);
  }
}

double Config::get_double(const std::string& key, double fallback) const {
  auto v = get(key);
  if (!v) return fallback;
  try {
    return std::stod(*v);
  } catch (const std::exception&) {
    throw ConfigInvalidError("config key " + key + " is not a number: " + *v);
  }
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  auto v = get(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes") return true;
  if (*v == "false" || *v == "0" || *v == "no") return false;
  throw ConfigInvalidError("config key " + key + " is not a boolean: " + *v);
}

void Config::set(const std::string& key, const std::string& value) {
  entries_[key] = value;
}

void Config::apply_env_overrides(const char* prefix) {
  // SPEARLAB_GATEWAY_PORT overrides gateway.port.
  std::string pfx = std::string(prefix) + "_";
  for (char** env = environ; env != nullptr && *env != nullptr; ++env) {
    std::string entry(*env);
    size_t eq = entry.find('=');
    if (eq == std::string::npos) continue;
    std::string name = entry.substr(0, eq);
    if (name.rfind(pfx, 0) != 0) continue;
    std::string rest = name.substr(pfx.size());
    std::string key;
    for (char c : rest) {
      key.push_back(c == '_' ? '.' : static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    // Only the first '_' becomes the section separator; later ones stay
    // part of the key (gateway.templates_dir).
    size_t dot = key.find('.');
    if (dot != std::string::npos) {
      for (size_t i = dot + 1; i < key.size(); ++i) {
        if (key[i] == '.') key[i] = '_';
      }
    }
    entries_[key] = entry.substr(eq + 1);
  }
}

std::map<std::string, std::string> Config::section(const std::string& name) const {
  std::map<std::string, std::string> out;
  std::string pfx = name + ".";
  for (const auto& [k, v] : entries_) {
    if (k.rfind(pfx, 0) == 0) out[k.substr(pfx.size())] = v;
  }
  return out;
}

}  // namespace spearlab
