#ifndef NOONSIM_CONFIG_HPP
#define NOONSIM_CONFIG_HPP

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "analysis.hpp"
#include "protocol.hpp"
#include "spin_model.hpp"
#include "thermometry.hpp"

namespace noonsim {

/// Raised for malformed or out-of-range configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Flat `key = value` text. '#' starts a comment; blank lines are ignored.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(const std::string& text) {
    KeyValueConfig cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
      const std::string key = trim(line.substr(0, eq));
      if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
      if (!known_keys().count(key)) throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
      cfg.values_[key] = trim(line.substr(eq + 1));
    }
    return cfg;
  }

  static const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys = {
        "preset", "name", "n_satellites", "gamma_central", "gamma_satellite", "j_coupling", "t2_collective",
        "t2_independent", "t2_central", "isolated_fraction", "delta", "t_max", "n_times", "decoherence",
        "encode_central", "inept_gain", "noise_sigma", "seed", "epsilon", "zero_pad_factor", "window_bins",
        "line_shape", "linewidth_hz", "t_max_list", "cal_temp_low", "cal_temp_high", "sweep_start", "sweep_stop",
        "sweep_step", "sensitivity", "anchor_temp", "anchor_field", "instrument_offset", "thermometer_l"};
    return keys;
  }

  void set(const std::string& key, const std::string& value) {
    if (!known_keys().count(key)) throw ConfigError("unknown key '" + key + "'");
    values_[key] = value;
  }

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::optional<std::string> text(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
  }

  std::optional<double> number(const std::string& key) const {
    auto t = text(key);
    if (!t) return std::nullopt;
    return parse_double(key, *t);
  }

  std::optional<long long> integer(const std::string& key) const {
    auto t = text(key);
    if (!t) return std::nullopt;
    long long v = 0;
    auto [p, ec] = std::from_chars(t->data(), t->data() + t->size(), v);
    if (ec != std::errc() || p != t->data() + t->size()) throw ConfigError(key + ": expected an integer, got '" + *t + "'");
    return v;
  }

  std::optional<bool> boolean(const std::string& key) const {
    auto t = text(key);
    if (!t) return std::nullopt;
    std::string v = *t;
    std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError(key + ": expected a boolean, got '" + *t + "'");
  }

  std::optional<std::vector<double>> number_list(const std::string& key) const {
    auto t = text(key);
    if (!t) return std::nullopt;
    std::vector<double> out;
    std::istringstream in(*t);
    std::string item;
    while (std::getline(in, item, ',')) {
      item = trim(item);
      if (!item.empty()) out.push_back(parse_double(key, item));
    }
    return out;
  }

 private:
  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
  }

  static double parse_double(const std::string& key, const std::string& t) {
    try {
      std::size_t used = 0;
      const double v = std::stod(t, &used);
      if (used != t.size()) throw std::invalid_argument(t);
      return v;
    } catch (const std::exception&) {
      throw ConfigError(key + ": expected a number, got '" + t + "'");
    }
  }

  std::map<std::string, std::string> values_;
};

/// Preset (default hexafluorophosphate) with any explicit overrides applied.
inline SpinSystem spin_system_from(const KeyValueConfig& c) {
  SpinSystem s = presets::by_name(c.text("preset").value_or("pf6"));
  if (auto v = c.text("name")) s.name = *v;
  if (auto v = c.integer("n_satellites")) s.n_satellites = static_cast<int>(*v);
  if (auto v = c.number("gamma_central")) s.gamma_central = *v;
  if (auto v = c.number("gamma_satellite")) s.gamma_satellite = *v;
  if (auto v = c.number("j_coupling")) s.j_coupling = *v;
  if (auto v = c.number("t2_collective")) s.t2_collective = *v;
  if (auto v = c.number("t2_independent")) s.t2_independent = *v;
  if (auto v = c.number("t2_central")) s.t2_central = *v;
  if (auto v = c.number("isolated_fraction")) s.isolated_fraction = *v;
  try {
    validate(s);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return s;
}

inline EncodingConfig encoding_config_from(const KeyValueConfig& c, EncodingConfig e = {}) {
  if (auto v = c.number("delta")) e.delta = *v;
  if (auto v = c.number("t_max")) e.t_max = *v;
  if (auto v = c.integer("n_times")) e.n_times = static_cast<int>(*v);
  if (auto v = c.boolean("decoherence")) e.decoherence_on = *v;
  if (auto v = c.boolean("encode_central")) e.encode_central = *v;
  if (auto v = c.number("inept_gain")) e.inept_gain = *v;
  if (auto v = c.number("noise_sigma")) e.noise_sigma = *v;
  if (auto v = c.integer("seed")) e.seed = static_cast<std::uint64_t>(*v);
  if (auto v = c.number("epsilon")) e.epsilon = *v;
  try {
    validate(e);
  } catch (const std::invalid_argument& ex) {
    throw ConfigError(ex.what());
  }
  return e;
}

inline AnalysisOptions analysis_options_from(const KeyValueConfig& c) {
  AnalysisOptions o;
  if (auto v = c.integer("zero_pad_factor")) o.zero_pad_factor = static_cast<int>(*v);
  if (auto v = c.integer("window_bins")) o.window_bins = static_cast<int>(*v);
  if (auto v = c.text("line_shape")) {
    try {
      o.shape = line_shape_from_string(*v);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  if (o.zero_pad_factor < 1) throw ConfigError("zero_pad_factor must be >= 1");
  if (o.window_bins < 5) throw ConfigError("window_bins must be >= 5");
  return o;
}

inline ThermometerSettings thermometer_settings_from(const KeyValueConfig& c) {
  ThermometerSettings t;
  if (auto v = c.number("anchor_temp")) t.truth.anchor_temp = *v;
  if (auto v = c.number("anchor_field")) t.truth.anchor_field = *v;
  if (auto v = c.number("sensitivity")) t.truth.sensitivity = *v;
  if (auto v = c.number("instrument_offset")) t.instrument_offset = *v;
  if (auto v = c.number("cal_temp_low")) t.cal_temp_low = *v;
  if (auto v = c.number("cal_temp_high")) t.cal_temp_high = *v;
  if (auto v = c.integer("thermometer_l")) t.line_l = static_cast<int>(*v);
  if (t.truth.sensitivity == 0.0) throw ConfigError("sensitivity must be nonzero");
  t.analysis = analysis_options_from(c);
  return t;
}

}  // namespace noonsim

#endif
