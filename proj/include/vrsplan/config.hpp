#pragma once

// Flat key-value configuration with [section] headers, parsed without any
// third-party INI dependency so the accepted grammar stays strict: blank
// lines, full-line comments (# or ;), section headers, and key = value pairs.
// Unknown sections or keys are errors, not warnings. Environment overrides
// exist only for the output directory and the seed.

#include <cctype>
#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "vrsplan/ocp.hpp"
#include "vrsplan/rotor_aero.hpp"
#include "vrsplan/vehicle_dynamics.hpp"

namespace vrsplan {

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what, int line = 0)
      : std::runtime_error(line > 0 ? "config line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_ = 0;
};

struct ProjectConfig {
  RotorParams rotor;
  VehicleParams vehicle;
  SolverSettings solver;
  std::string output_dir = ".";

  void validate() const {
    rotor.validate();
    vehicle.validate();
    solver.validate();
    if (output_dir.empty()) throw ConfigError("output directory must not be empty");
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

inline double parse_double_strict(const std::string& v, int line) {
  double out = 0.0;
  const char* b = v.data();
  const char* e = v.data() + v.size();
  auto res = std::from_chars(b, e, out);
  if (res.ec != std::errc() || res.ptr != e) {
    throw ConfigError("expected a number, got '" + v + "'", line);
  }
  return out;
}

inline long long parse_int_strict(const std::string& v, int line) {
  long long out = 0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw ConfigError("expected an integer, got '" + v + "'", line);
  }
  return out;
}

inline std::uint64_t parse_uint_strict(const std::string& v, int line) {
  std::uint64_t out = 0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size()) {
    throw ConfigError("expected an unsigned integer, got '" + v + "'", line);
  }
  return out;
}

inline bool parse_bool_strict(const std::string& v, int line) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("expected true/false, got '" + v + "'", line);
}

}  // namespace detail

inline ProjectConfig parse_config(std::istream& in) {
  ProjectConfig cfg;
  std::string section;
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string line = detail::trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("unterminated section header", lineno);
      section = detail::trim(line.substr(1, line.size() - 2));
      if (section != "rotor" && section != "vehicle" && section != "solver" &&
          section != "output") {
        throw ConfigError("unknown section [" + section + "]", lineno);
      }
      continue;
    }
    const size_t eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key = value", lineno);
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string val = detail::trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("empty key", lineno);
    if (section.empty()) throw ConfigError("key '" + key + "' appears before any section", lineno);

    auto num = [&] { return detail::parse_double_strict(val, lineno); };
    auto integer = [&] { return int(detail::parse_int_strict(val, lineno)); };
    auto boolean = [&] { return detail::parse_bool_strict(val, lineno); };

    if (section == "rotor") {
      if (key == "hover_thrust") cfg.rotor.hover_thrust = num();
      else if (key == "air_density") cfg.rotor.air_density = num();
      else if (key == "disk_diameter") cfg.rotor.disk_diameter = num();
      else if (key == "onera_k") cfg.rotor.onera_k = num();
      else if (key == "eps_vrs") cfg.rotor.eps_vrs = num();
      else if (key == "eps_tws") cfg.rotor.eps_tws = num();
      else if (key == "cone_angle_deg") cfg.rotor.cone_angle = num() * M_PI / 180.0;
      else throw ConfigError("unknown key '" + key + "' in [rotor]", lineno);
    } else if (section == "vehicle") {
      if (key == "mass") cfg.vehicle.mass = num();
      else if (key == "inertia_xx") cfg.vehicle.inertia_diag[0] = num();
      else if (key == "inertia_yy") cfg.vehicle.inertia_diag[1] = num();
      else if (key == "inertia_zz") cfg.vehicle.inertia_diag[2] = num();
      else if (key == "arm_length") cfg.vehicle.arm_length = num();
      else if (key == "kappa") cfg.vehicle.kappa = num();
      else if (key == "gravity") cfg.vehicle.gravity = num();
      else if (key == "physical_thrust") cfg.vehicle.physical_thrust = boolean();
      else throw ConfigError("unknown key '" + key + "' in [vehicle]", lineno);
    } else if (section == "solver") {
      if (key == "nodes") cfg.solver.nodes = integer();
      else if (key == "restarts") cfg.solver.restarts = integer();
      else if (key == "seed") cfg.solver.seed = detail::parse_uint_strict(val, lineno);
      else if (key == "t_f_init") cfg.solver.t_f_init = num();
      else if (key == "t_f_min") cfg.solver.t_f_min = num();
      else if (key == "t_f_max") cfg.solver.t_f_max = num();
      else if (key == "feas_tol") cfg.solver.feas_tol = num();
      else if (key == "opt_tol") cfg.solver.opt_tol = num();
      else if (key == "smoothing_eps") cfg.solver.smoothing_eps = num();
      else if (key == "margin_buffer") cfg.solver.margin_buffer = num();
      else if (key == "max_outer") cfg.solver.max_outer = integer();
      else if (key == "max_inner") cfg.solver.max_inner = integer();
      else if (key == "mu_init") cfg.solver.mu_init = num();
      else if (key == "mu_factor") cfg.solver.mu_factor = num();
      else if (key == "mu_max") cfg.solver.mu_max = num();
      else if (key == "refine_rounds") cfg.solver.refine_rounds = integer();
      else if (key == "refine_tol") cfg.solver.refine_tol = num();
      else if (key == "parallel_restarts") cfg.solver.parallel_restarts = boolean();
      else throw ConfigError("unknown key '" + key + "' in [solver]", lineno);
    } else {  // output
      if (key == "directory") cfg.output_dir = val;
      else throw ConfigError("unknown key '" + key + "' in [output]", lineno);
    }
  }
  cfg.validate();
  return cfg;
}

inline ProjectConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in);
}

// Environment overrides: VRSPLAN_OUTPUT_DIR and VRSPLAN_SEED only.
inline void apply_env_overrides(ProjectConfig& cfg) {
  if (const char* dir = std::getenv("VRSPLAN_OUTPUT_DIR")) {
    if (*dir) cfg.output_dir = dir;
  }
  if (const char* seed = std::getenv("VRSPLAN_SEED")) {
    cfg.solver.seed = detail::parse_uint_strict(seed, 0);
  }
}

}  // namespace vrsplan
