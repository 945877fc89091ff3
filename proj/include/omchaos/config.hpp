#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "omchaos/errors.hpp"
#include "omchaos/model.hpp"

namespace omchaos {

/// Flat key=value configuration with section prefixes (model.*,
/// experiment.*). Blank lines and '#' comments are ignored. Values may be
/// overridden by environment variables: key 'model.cavity_length' maps to
/// OMCHAOS_MODEL_CAVITY_LENGTH.
class KeyValueConfig {
 public:
  KeyValueConfig() = default;

  static KeyValueConfig from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    KeyValueConfig cfg;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      cfg.parse_line(line, path.string(), line_no);
    }
    return cfg;
  }

  static KeyValueConfig from_text(const std::string& text,
                                  const std::string& origin = "<inline>") {
    KeyValueConfig cfg;
    std::string line;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      const std::size_t nl = text.find('\n', pos);
      line = text.substr(pos, nl == std::string::npos ? nl : nl - pos);
      ++line_no;
      cfg.parse_line(line, origin, line_no);
      if (nl == std::string::npos) break;
      pos = nl + 1;
    }
    return cfg;
  }

  void set(const std::string& key, const std::string& value) {
    values_[key] = value;
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  /// Replaces any key that has a matching OMCHAOS_* environment variable.
  void apply_env_overrides(const char* prefix = "OMCHAOS_") {
    // Also pick up env keys for values not present in the file.
    for (auto& [key, value] : values_) {
      if (const auto env = env_for(key, prefix)) value = *env;
    }
  }

  /// Environment lookup for keys absent from the file.
  std::optional<std::string> env_value(const std::string& key,
                                       const char* prefix = "OMCHAOS_") const {
    return env_for(key, prefix);
  }

  std::string get_string(const std::string& key,
                         const std::string& fallback) const {
    if (const auto env = env_for(key, "OMCHAOS_")) return *env;
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  double get_double(const std::string& key, double fallback) const {
    const auto text = raw(key);
    if (!text) return fallback;
    return parse_double(*text, key);
  }

  std::int64_t get_int(const std::string& key, std::int64_t fallback) const {
    const auto text = raw(key);
    if (!text) return fallback;
    std::int64_t v = 0;
    const char* begin = text->data();
    const char* end = begin + text->size();
    const auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc{} || ptr != end) {
      throw ConfigError("config key '" + key + "': not an integer: " + *text);
    }
    return v;
  }

  bool get_bool(const std::string& key, bool fallback) const {
    const auto text = raw(key);
    if (!text) return fallback;
    if (*text == "true" || *text == "1" || *text == "yes") return true;
    if (*text == "false" || *text == "0" || *text == "no") return false;
    throw ConfigError("config key '" + key + "': not a boolean: " + *text);
  }

  std::vector<double> get_double_list(const std::string& key,
                                      const std::vector<double>& fallback) const {
    const auto text = raw(key);
    if (!text) return fallback;
    std::vector<double> out;
    std::size_t pos = 0;
    while (pos < text->size()) {
      std::size_t comma = text->find(',', pos);
      if (comma == std::string::npos) comma = text->size();
      out.push_back(parse_double(trim(text->substr(pos, comma - pos)), key));
      pos = comma + 1;
    }
    if (out.empty()) throw ConfigError("config key '" + key + "': empty list");
    return out;
  }

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  static std::string trim(std::string s) {
    const auto issp = [](unsigned char c) { return std::isspace(c) != 0; };
    s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), issp));
    s.erase(std::find_if_not(s.rbegin(), s.rend(), issp).base(), s.end());
    return s;
  }

  static double parse_double(const std::string& text, const std::string& key) {
    double v = 0.0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    const auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc{} || ptr != end) {
      throw ConfigError("config key '" + key + "': not a number: " + text);
    }
    return v;
  }

  static std::optional<std::string> env_for(const std::string& key,
                                            const char* prefix) {
    std::string name = prefix;
    for (char c : key) {
      name += (c == '.') ? '_' : static_cast<char>(
                                     std::toupper(static_cast<unsigned char>(c)));
    }
    if (const char* v = std::getenv(name.c_str())) return std::string(v);
    return std::nullopt;
  }

  std::optional<std::string> raw(const std::string& key) const {
    if (const auto env = env_for(key, "OMCHAOS_")) return env;
    const auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
  }

  void parse_line(const std::string& raw_line, const std::string& origin,
                  int line_no) {
    std::string line = raw_line;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) return;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(origin + ":" + std::to_string(line_no) +
                        ": expected 'key = value', got: " + line);
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw ConfigError(origin + ":" + std::to_string(line_no) +
                        ": empty key");
    }
    values_[key] = value;
  }

  std::map<std::string, std::string> values_;
};

/// Loads physical parameters: optional flat SI-unit parameter file (keys
/// named exactly as the fields, no prefix) via model.params_file, then
/// individual model.<field> keys on top. Unknown keys in the flat file are
/// rejected with their location.
inline PhysicalParams load_physical_params(const KeyValueConfig& cfg) {
  PhysicalParams p = reference_params();

  const auto apply = [&](const std::string& key, const std::string& value,
                         const std::string& where) {
    double v = 0.0;
    const char* begin = value.data();
    const auto [ptr, ec] = std::from_chars(begin, begin + value.size(), v);
    if (ec != std::errc{} || ptr != begin + value.size()) {
      throw ConfigError(where + ": parameter '" + key +
                        "': not a number: " + value);
    }
    if (key == "cavity_length") p.cavity_length = v;
    else if (key == "mirror_mass") p.mirror_mass = v;
    else if (key == "mirror_freq") p.mirror_freq = v;
    else if (key == "pump_wavelength") p.pump_wavelength = v;
    else if (key == "cavity_decay") p.cavity_decay = v;
    else if (key == "cavity_pump_detuning") p.cavity_pump_detuning = v;
    else if (key == "atom_number") p.atom_number = v;
    else if (key == "vacuum_rabi") p.vacuum_rabi = v;
    else if (key == "atom_mass") p.atom_mass = v;
    else if (key == "mirror_damping") p.mirror_damping = v;
    else if (key == "sidemode_damping") p.sidemode_damping = v;
    else if (key == "pump_rate") p.pump_rate = v;
    else throw ConfigError(where + ": unknown parameter '" + key + "'");
  };

  const std::string params_file = cfg.get_string("model.params_file", "");
  if (!params_file.empty()) {
    const KeyValueConfig flat = KeyValueConfig::from_file(params_file);
    for (const auto& [key, value] : flat.values()) {
      apply(key, value, params_file);
    }
  }
  for (const auto& [key, value] : cfg.values()) {
    if (key.rfind("model.", 0) == 0 && key != "model.params_file") {
      apply(key.substr(6), cfg.get_string(key, value), "config");
    }
  }
  return p;
}

}  // namespace omchaos
