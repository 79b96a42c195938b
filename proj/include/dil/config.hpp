#pragma once

// Flat-key experiment configuration:
//
//   # comment
//   grid.L = 5
//   grid.n = 96
//   sweep.c_values = [0, 0.1, 0.2]
//
// Unknown or repeated keys are errors. Every key can be overridden from the
// environment as DIL_<KEY> with '.' replaced by '_' and letters upper-cased
// (grid.L -> DIL_GRID_L, model.f1_series -> DIL_MODEL_F1_SERIES).

#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "dil/error.hpp"
#include "dil/lattice.hpp"
#include "dil/spectral.hpp"
#include "dil/susy.hpp"

namespace dil {

struct ExperimentConfig {
  double grid_L = 5.0;
  int grid_n = 96;
  ModelSpec model;
  double solver_tol = 1e-8;
  int solver_k = 6;
  int solver_max_iterations = 200;
  double gap_threshold = 0.5;
  std::optional<double> loc_radius;  // L/2 when unset
  double loc_min = 0.95;
  std::vector<double> c_values{0.0, 0.1, 0.2, 0.3, 0.4, 0.5};
  std::uint64_t seed = 20240611;
  double winding_radius = 1.0;
  int winding_samples = 256;

  GridSpec grid() const { return {grid_L, grid_n}; }
  double resolved_loc_radius() const { return loc_radius.value_or(grid_L / 2.0); }

  SolverOptions solver() const {
    SolverOptions o;
    o.tol = solver_tol;
    o.max_iterations = solver_max_iterations;
    o.seed = seed;
    return o;
  }

  IndexParams index_params() const {
    IndexParams p;
    p.gap_threshold = gap_threshold;
    p.loc_radius = resolved_loc_radius();
    p.loc_min = loc_min;
    p.k = solver_k;
    p.solver = solver();
    p.winding_radius = winding_radius;
    p.winding_samples = winding_samples;
    return p;
  }

  void validate() const {
    auto fail = [](const std::string& key, const std::string& why) { throw ConfigError(key + ": " + why); };
    if (!(grid_L > 0.0) || !std::isfinite(grid_L)) fail("grid.L", "must be a positive finite number");
    if (grid_n < 8) fail("grid.n", "must be >= 8 (got " + std::to_string(grid_n) + ")");
    try {
      model.validate();
    } catch (const InvariantError& e) {
      fail("model", e.what());
    }
    if (!(solver_tol > 0.0)) fail("solver.tol", "must be positive");
    if (solver_k < 1) fail("solver.k", "must be >= 1");
    if (solver_max_iterations < 1) fail("solver.max_iterations", "must be >= 1");
    if (!(gap_threshold > 0.0)) fail("index.gap_threshold", "must be positive");
    const double r = resolved_loc_radius();
    if (!(r > 0.0) || r > grid_L) fail("index.loc_radius", "must lie in (0, grid.L]");
    if (!(loc_min > 0.0) || loc_min > 1.0) fail("index.loc_min", "must lie in (0, 1]");
    for (double c : c_values) {
      if (!std::isfinite(c) || c >= 1.0) fail("sweep.c_values", "every entry must be finite and < 1");
    }
    if (!(winding_radius > 0.0)) fail("winding.radius", "must be positive");
    if (winding_samples < 64) fail("winding.samples", "must be >= 64");
  }
};

namespace detail {

inline std::string trim_copy(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return std::string(s);
}

inline double parse_real(const std::string& key, const std::string& text) {
  const std::string t = trim_copy(text);
  if (t.empty()) throw ConfigError(key + ": expected a number, got an empty value");
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size() || errno == ERANGE || !std::isfinite(v)) {
    throw ConfigError(key + ": expected a finite number, got '" + t + "'");
  }
  return v;
}

inline long long parse_integer(const std::string& key, const std::string& text) {
  const std::string t = trim_copy(text);
  char* end = nullptr;
  errno = 0;
  const long long v = std::strtoll(t.c_str(), &end, 10);
  if (t.empty() || end != t.c_str() + t.size() || errno == ERANGE) {
    throw ConfigError(key + ": expected an integer, got '" + t + "'");
  }
  return v;
}

inline std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::string t = trim_copy(text);
  if (!t.empty() && t.front() == '[') {
    if (t.back() != ']') throw ConfigError(key + ": unterminated list");
    t = t.substr(1, t.size() - 2);
  }
  std::vector<double> out;
  if (trim_copy(t).empty()) return out;
  std::stringstream ss(t);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_real(key, item));
  return out;
}

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;

inline const std::map<std::string, Setter>& config_setters() {
  static const std::map<std::string, Setter> setters = {
      {"grid.L", [](ExperimentConfig& c, const std::string& v) { c.grid_L = parse_real("grid.L", v); }},
      {"grid.n",
       [](ExperimentConfig& c, const std::string& v) { c.grid_n = static_cast<int>(parse_integer("grid.n", v)); }},
      {"model.t", [](ExperimentConfig& c, const std::string& v) { c.model.t = parse_real("model.t", v); }},
      {"model.epsilon",
       [](ExperimentConfig& c, const std::string& v) { c.model.epsilon = parse_real("model.epsilon", v); }},
      {"model.f1", [](ExperimentConfig& c, const std::string& v) { c.model.f1 = parse_real("model.f1", v); }},
      {"model.f1_series",
       [](ExperimentConfig& c, const std::string& v) { c.model.f1_series = parse_list("model.f1_series", v); }},
      {"model.f2", [](ExperimentConfig& c, const std::string& v) { c.model.f2 = parse_real("model.f2", v); }},
      {"solver.tol", [](ExperimentConfig& c, const std::string& v) { c.solver_tol = parse_real("solver.tol", v); }},
      {"solver.k",
       [](ExperimentConfig& c, const std::string& v) { c.solver_k = static_cast<int>(parse_integer("solver.k", v)); }},
      {"solver.max_iterations",
       [](ExperimentConfig& c, const std::string& v) {
         c.solver_max_iterations = static_cast<int>(parse_integer("solver.max_iterations", v));
       }},
      {"index.gap_threshold",
       [](ExperimentConfig& c, const std::string& v) { c.gap_threshold = parse_real("index.gap_threshold", v); }},
      {"index.loc_radius",
       [](ExperimentConfig& c, const std::string& v) { c.loc_radius = parse_real("index.loc_radius", v); }},
      {"index.loc_min", [](ExperimentConfig& c, const std::string& v) { c.loc_min = parse_real("index.loc_min", v); }},
      {"sweep.c_values",
       [](ExperimentConfig& c, const std::string& v) { c.c_values = parse_list("sweep.c_values", v); }},
      {"seed",
       [](ExperimentConfig& c, const std::string& v) {
         const long long s = parse_integer("seed", v);
         if (s < 0) throw ConfigError("seed: must be non-negative");
         c.seed = static_cast<std::uint64_t>(s);
       }},
      {"winding.radius",
       [](ExperimentConfig& c, const std::string& v) { c.winding_radius = parse_real("winding.radius", v); }},
      {"winding.samples",
       [](ExperimentConfig& c, const std::string& v) {
         c.winding_samples = static_cast<int>(parse_integer("winding.samples", v));
       }},
  };
  return setters;
}

}  // namespace detail

inline std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& [k, _] : detail::config_setters()) keys.push_back(k);
  return keys;
}

inline std::string env_name(const std::string& key) {
  std::string out = "DIL_";
  for (char ch : key) out += (ch == '.') ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  return out;
}

inline void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  const auto& setters = detail::config_setters();
  const auto it = setters.find(key);
  if (it == setters.end()) throw ConfigError("unknown config key '" + key + "'");
  it->second(cfg, value);
}

inline ExperimentConfig parse_config(std::istream& in, const std::string& source = "<config>") {
  ExperimentConfig cfg;
  std::set<std::string> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    const std::string body = detail::trim_copy(std::string_view(line).substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    const std::string where = source + ":" + std::to_string(lineno);
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
    const std::string key = detail::trim_copy(std::string_view(body).substr(0, eq));
    if (!seen.insert(key).second) throw ConfigError(where + ": duplicate key '" + key + "'");
    try {
      set_config_value(cfg, key, body.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(where + ": " + e.what());
    }
  }
  return cfg;
}

inline ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in, path);
}

// `lookup` abstracts getenv so tests can inject an environment.
inline void apply_env_overrides(ExperimentConfig& cfg,
                                const std::function<const char*(const char*)>& lookup = [](const char* n) {
                                  return static_cast<const char*>(std::getenv(n));
                                }) {
  for (const auto& key : config_keys()) {
    const std::string name = env_name(key);
    if (const char* v = lookup(name.c_str())) {
      try {
        set_config_value(cfg, key, v);
      } catch (const ConfigError& e) {
        throw ConfigError("environment " + name + ": " + e.what());
      }
    }
  }
}

}  // namespace dil
