#pragma once

// File formats: CSV for grids and time series, JSON for structured artifacts.
// All floating-point output uses shortest round-trip formatting, and key
// order is fixed, so identical inputs produce byte-identical files.

#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "vrsplan/atlas.hpp"
#include "vrsplan/config.hpp"
#include "vrsplan/ocp.hpp"
#include "vrsplan/validate.hpp"

namespace vrsplan {

using ordered_json = nlohmann::ordered_json;

inline std::string format_double(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

// ---------------------------------------------------------------------------
// CSV

inline void write_atlas_csv(std::ostream& os, const AtlasGrid& grid) {
  os << "vH_norm,vz_norm,epsilon,label,margin\n";
  for (int i = 0; i < grid.window.vh_count; ++i) {
    for (int j = 0; j < grid.window.vz_count; ++j) {
      const AtlasCell& c = grid.at(i, j);
      os << format_double(grid.vh_norm[size_t(i)]) << ',' << format_double(grid.vz_norm[size_t(j)])
         << ',' << format_double(c.eps) << ',' << to_string(c.regime) << ','
         << format_double(c.margin) << '\n';
    }
  }
}

inline void write_profile_csv(std::ostream& os, const ProfileAnalysis& prof) {
  os << "t,Z,Zdot,label\n";
  for (const ProfileSample& s : prof.samples) {
    os << format_double(s.t) << ',' << format_double(s.z) << ',' << format_double(s.z_rate) << ','
       << to_string(s.regime) << '\n';
  }
}

inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj, const OcpSpec& spec) {
  os << "t";
  for (const auto& vs : spec.states) os << ',' << vs.name;
  for (const auto& vs : spec.inputs) os << ',' << vs.name;
  if (!traj.margin.empty()) os << ",margin";
  os << '\n';
  for (int i = 0; i < traj.nodes(); ++i) {
    os << format_double(traj.t[size_t(i)]);
    for (int c = 0; c < spec.nx(); ++c) os << ',' << format_double(traj.x[size_t(i)][c]);
    for (int c = 0; c < spec.nu(); ++c) os << ',' << format_double(traj.u[size_t(i)][c]);
    if (!traj.margin.empty()) os << ',' << format_double(traj.margin[size_t(i)]);
    os << '\n';
  }
}

// ---------------------------------------------------------------------------
// JSON helpers

class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

inline ordered_json bound_to_json(double v) {
  if (std::isinf(v)) return v > 0 ? ordered_json("inf") : ordered_json("-inf");
  return ordered_json(v);
}

inline double bound_from_json(const ordered_json& j, const std::string& field) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf") return kUnbounded;
    if (s == "-inf") return -kUnbounded;
    throw ParseError(field + ": unrecognized bound '" + s + "'");
  }
  if (!j.is_number()) throw ParseError(field + ": expected a number or inf string");
  return j.get<double>();
}

template <class T>
T require_field(const ordered_json& j, const std::string& key, const std::string& ctx) {
  if (!j.contains(key)) throw ParseError(ctx + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(ctx + ": field '" + key + "' has the wrong type (" + e.what() + ")");
  }
}

}  // namespace detail

inline ordered_json rotor_to_json(const RotorParams& p) {
  return ordered_json{{"hover_thrust", p.hover_thrust},
                      {"air_density", p.air_density},
                      {"disk_diameter", p.disk_diameter},
                      {"onera_k", p.onera_k},
                      {"eps_vrs", p.eps_vrs},
                      {"eps_tws", p.eps_tws},
                      {"cone_angle", p.cone_angle}};
}

inline RotorParams rotor_from_json(const ordered_json& j) {
  RotorParams p;
  p.hover_thrust = detail::require_field<double>(j, "hover_thrust", "rotor");
  p.air_density = detail::require_field<double>(j, "air_density", "rotor");
  p.disk_diameter = detail::require_field<double>(j, "disk_diameter", "rotor");
  p.onera_k = detail::require_field<double>(j, "onera_k", "rotor");
  p.eps_vrs = detail::require_field<double>(j, "eps_vrs", "rotor");
  p.eps_tws = detail::require_field<double>(j, "eps_tws", "rotor");
  p.cone_angle = detail::require_field<double>(j, "cone_angle", "rotor");
  return p;
}

inline ordered_json vehicle_to_json(const VehicleParams& p) {
  return ordered_json{{"mass", p.mass},
                      {"inertia", {p.inertia_diag[0], p.inertia_diag[1], p.inertia_diag[2]}},
                      {"arm_length", p.arm_length},
                      {"kappa", p.kappa},
                      {"gravity", p.gravity},
                      {"physical_thrust", p.physical_thrust}};
}

inline VehicleParams vehicle_from_json(const ordered_json& j) {
  VehicleParams p;
  p.mass = detail::require_field<double>(j, "mass", "vehicle");
  const auto inertia = detail::require_field<std::vector<double>>(j, "inertia", "vehicle");
  if (inertia.size() != 3) throw ParseError("vehicle: inertia must have 3 entries");
  p.inertia_diag = Vector3d(inertia[0], inertia[1], inertia[2]);
  p.arm_length = detail::require_field<double>(j, "arm_length", "vehicle");
  p.kappa = detail::require_field<double>(j, "kappa", "vehicle");
  p.gravity = detail::require_field<double>(j, "gravity", "vehicle");
  p.physical_thrust = detail::require_field<bool>(j, "physical_thrust", "vehicle");
  return p;
}

inline ordered_json solver_to_json(const SolverSettings& s) {
  return ordered_json{{"nodes", s.nodes},
                      {"restarts", s.restarts},
                      {"seed", s.seed},
                      {"t_f_init", s.t_f_init},
                      {"t_f_min", s.t_f_min},
                      {"t_f_max", s.t_f_max},
                      {"feas_tol", s.feas_tol},
                      {"opt_tol", s.opt_tol},
                      {"smoothing_eps", s.smoothing_eps},
                      {"margin_buffer", s.margin_buffer},
                      {"max_outer", s.max_outer},
                      {"max_inner", s.max_inner},
                      {"mu_init", s.mu_init},
                      {"mu_factor", s.mu_factor},
                      {"mu_max", s.mu_max},
                      {"refine_rounds", s.refine_rounds},
                      {"refine_tol", s.refine_tol},
                      {"parallel_restarts", s.parallel_restarts}};
}

inline SolverSettings solver_from_json(const ordered_json& j) {
  SolverSettings s;
  s.nodes = detail::require_field<int>(j, "nodes", "solver");
  s.restarts = detail::require_field<int>(j, "restarts", "solver");
  s.seed = detail::require_field<std::uint64_t>(j, "seed", "solver");
  s.t_f_init = detail::require_field<double>(j, "t_f_init", "solver");
  s.t_f_min = detail::require_field<double>(j, "t_f_min", "solver");
  s.t_f_max = detail::require_field<double>(j, "t_f_max", "solver");
  s.feas_tol = detail::require_field<double>(j, "feas_tol", "solver");
  s.opt_tol = detail::require_field<double>(j, "opt_tol", "solver");
  s.smoothing_eps = detail::require_field<double>(j, "smoothing_eps", "solver");
  s.margin_buffer = detail::require_field<double>(j, "margin_buffer", "solver");
  s.max_outer = detail::require_field<int>(j, "max_outer", "solver");
  s.max_inner = detail::require_field<int>(j, "max_inner", "solver");
  s.mu_init = detail::require_field<double>(j, "mu_init", "solver");
  s.mu_factor = detail::require_field<double>(j, "mu_factor", "solver");
  s.mu_max = detail::require_field<double>(j, "mu_max", "solver");
  s.refine_rounds = detail::require_field<int>(j, "refine_rounds", "solver");
  s.refine_tol = detail::require_field<double>(j, "refine_tol", "solver");
  s.parallel_restarts = detail::require_field<bool>(j, "parallel_restarts", "solver");
  return s;
}

inline ordered_json varspec_to_json(const VarSpec& vs) {
  ordered_json j{{"name", vs.name},
                 {"lo", detail::bound_to_json(vs.lo)},
                 {"hi", detail::bound_to_json(vs.hi)}};
  if (vs.initial) j["initial"] = *vs.initial;
  if (vs.final) j["final"] = *vs.final;
  return j;
}

inline VarSpec varspec_from_json(const ordered_json& j) {
  VarSpec vs;
  vs.name = detail::require_field<std::string>(j, "name", "variable");
  if (!j.contains("lo") || !j.contains("hi")) {
    throw ParseError("variable '" + vs.name + "': missing lo/hi bounds");
  }
  vs.lo = detail::bound_from_json(j.at("lo"), vs.name + ".lo");
  vs.hi = detail::bound_from_json(j.at("hi"), vs.name + ".hi");
  if (j.contains("initial")) vs.initial = j.at("initial").get<double>();
  if (j.contains("final")) vs.final = j.at("final").get<double>();
  return vs;
}

inline ordered_json ocp_spec_to_json(const OcpSpec& spec) {
  ordered_json j;
  j["model"] = to_string(spec.model);
  j["scenario"] = spec.scenario;
  j["path_constraint"] = spec.path_constraint;
  j["cone_angle"] = spec.cone_angle;
  j["rotor"] = rotor_to_json(spec.rotor);
  j["vehicle"] = vehicle_to_json(spec.vehicle);
  j["solver"] = solver_to_json(spec.solver);
  ordered_json states = ordered_json::array();
  for (const auto& vs : spec.states) states.push_back(varspec_to_json(vs));
  j["states"] = std::move(states);
  ordered_json inputs = ordered_json::array();
  for (const auto& vs : spec.inputs) inputs.push_back(varspec_to_json(vs));
  j["inputs"] = std::move(inputs);
  if (!spec.mesh_tau.empty()) j["mesh_tau"] = spec.mesh_tau;
  j["refinement_round"] = spec.refinement_round;
  return j;
}

inline OcpSpec ocp_spec_from_json(const ordered_json& j) {
  OcpSpec spec;
  const std::string model = detail::require_field<std::string>(j, "model", "spec");
  if (model == "planar") spec.model = ModelKind::Planar;
  else if (model == "full3d") spec.model = ModelKind::Full3d;
  else throw ParseError("spec: unknown model '" + model + "'");
  spec.scenario = detail::require_field<std::string>(j, "scenario", "spec");
  spec.path_constraint = detail::require_field<bool>(j, "path_constraint", "spec");
  spec.cone_angle = detail::require_field<double>(j, "cone_angle", "spec");
  if (!j.contains("rotor") || !j.contains("vehicle") || !j.contains("solver")) {
    throw ParseError("spec: missing rotor/vehicle/solver blocks");
  }
  spec.rotor = rotor_from_json(j.at("rotor"));
  spec.vehicle = vehicle_from_json(j.at("vehicle"));
  spec.solver = solver_from_json(j.at("solver"));
  if (!j.contains("states") || !j.at("states").is_array()) {
    throw ParseError("spec: missing states array");
  }
  for (const auto& e : j.at("states")) spec.states.push_back(varspec_from_json(e));
  if (!j.contains("inputs") || !j.at("inputs").is_array()) {
    throw ParseError("spec: missing inputs array");
  }
  for (const auto& e : j.at("inputs")) spec.inputs.push_back(varspec_from_json(e));
  if (j.contains("mesh_tau")) spec.mesh_tau = j.at("mesh_tau").get<std::vector<double>>();
  if (j.contains("refinement_round")) spec.refinement_round = j.at("refinement_round").get<int>();
  spec.validate();
  return spec;
}

inline ordered_json stats_to_json(const SolveStats& s) {
  return ordered_json{{"converged", s.converged},
                      {"outer_iterations", s.outer_iterations},
                      {"inner_iterations", s.inner_iterations},
                      {"restarts", s.restarts},
                      {"best_restart", s.best_restart},
                      {"refinement_rounds", s.refinement_rounds},
                      {"objective", s.objective},
                      {"max_eq_violation", s.max_eq_violation},
                      {"max_ineq_violation", s.max_ineq_violation},
                      {"grad_norm", s.grad_norm},
                      {"message", s.message}};
}

inline SolveStats stats_from_json(const ordered_json& j) {
  SolveStats s;
  s.converged = detail::require_field<bool>(j, "converged", "solver metadata");
  s.outer_iterations = detail::require_field<int>(j, "outer_iterations", "solver metadata");
  s.inner_iterations = detail::require_field<int>(j, "inner_iterations", "solver metadata");
  s.restarts = detail::require_field<int>(j, "restarts", "solver metadata");
  s.best_restart = detail::require_field<int>(j, "best_restart", "solver metadata");
  s.refinement_rounds = detail::require_field<int>(j, "refinement_rounds", "solver metadata");
  s.objective = detail::require_field<double>(j, "objective", "solver metadata");
  s.max_eq_violation = detail::require_field<double>(j, "max_eq_violation", "solver metadata");
  s.max_ineq_violation = detail::require_field<double>(j, "max_ineq_violation", "solver metadata");
  s.grad_norm = detail::require_field<double>(j, "grad_norm", "solver metadata");
  s.message = detail::require_field<std::string>(j, "message", "solver metadata");
  return s;
}

constexpr int kTrajectorySchemaVersion = 1;

inline ordered_json trajectory_to_json(const Trajectory& traj, const OcpSpec& spec,
                                       const std::optional<ordered_json>& config_echo = {}) {
  ordered_json j;
  j["schema_version"] = kTrajectorySchemaVersion;
  j["model"] = to_string(traj.model);
  j["scenario"] = traj.scenario;
  j["t_f"] = traj.t_f;
  ordered_json nodes = ordered_json::array();
  for (int i = 0; i < traj.nodes(); ++i) {
    ordered_json n;
    n["t"] = traj.t[size_t(i)];
    n["tau"] = traj.tau[size_t(i)];
    n["state"] = std::vector<double>(traj.x[size_t(i)].data(),
                                     traj.x[size_t(i)].data() + traj.x[size_t(i)].size());
    n["input"] = std::vector<double>(traj.u[size_t(i)].data(),
                                     traj.u[size_t(i)].data() + traj.u[size_t(i)].size());
    if (!traj.margin.empty()) n["margin"] = traj.margin[size_t(i)];
    nodes.push_back(std::move(n));
  }
  j["nodes"] = std::move(nodes);
  ordered_json mult;
  ordered_json defect = ordered_json::array();
  for (const Vec& m : traj.defect_multipliers) {
    defect.push_back(std::vector<double>(m.data(), m.data() + m.size()));
  }
  mult["defect"] = std::move(defect);
  mult["path"] = traj.path_multipliers;
  j["multipliers"] = std::move(mult);
  j["solver"] = stats_to_json(traj.stats);
  j["spec"] = ocp_spec_to_json(spec);
  if (config_echo) j["config"] = *config_echo;
  return j;
}

struct TrajectoryFile {
  Trajectory trajectory;
  OcpSpec spec;
};

inline TrajectoryFile trajectory_from_json(const ordered_json& j) {
  const int version = detail::require_field<int>(j, "schema_version", "trajectory");
  if (version != kTrajectorySchemaVersion) {
    throw ParseError("trajectory: unsupported schema_version " + std::to_string(version));
  }
  TrajectoryFile out;
  if (!j.contains("spec")) throw ParseError("trajectory: missing spec echo");
  out.spec = ocp_spec_from_json(j.at("spec"));
  Trajectory& traj = out.trajectory;
  const std::string model = detail::require_field<std::string>(j, "model", "trajectory");
  traj.model = model == "full3d" ? ModelKind::Full3d : ModelKind::Planar;
  if (model != "planar" && model != "full3d") {
    throw ParseError("trajectory: unknown model '" + model + "'");
  }
  traj.scenario = detail::require_field<std::string>(j, "scenario", "trajectory");
  traj.t_f = detail::require_field<double>(j, "t_f", "trajectory");
  if (!j.contains("nodes") || !j.at("nodes").is_array() || j.at("nodes").size() < 2) {
    throw ParseError("trajectory: missing or short nodes array");
  }
  const int nx = out.spec.nx();
  const int nu = out.spec.nu();
  for (const auto& n : j.at("nodes")) {
    traj.t.push_back(detail::require_field<double>(n, "t", "node"));
    traj.tau.push_back(detail::require_field<double>(n, "tau", "node"));
    const auto xs = detail::require_field<std::vector<double>>(n, "state", "node");
    const auto us = detail::require_field<std::vector<double>>(n, "input", "node");
    if (int(xs.size()) != nx) throw ParseError("node: state has wrong length");
    if (int(us.size()) != nu) throw ParseError("node: input has wrong length");
    traj.x.push_back(Eigen::Map<const Vec>(xs.data(), nx));
    traj.u.push_back(Eigen::Map<const Vec>(us.data(), nu));
    if (n.contains("margin")) traj.margin.push_back(n.at("margin").get<double>());
  }
  if (!traj.margin.empty() && traj.margin.size() != traj.x.size()) {
    throw ParseError("trajectory: margin present on only some nodes");
  }
  if (j.contains("multipliers")) {
    const auto& mult = j.at("multipliers");
    if (mult.contains("defect")) {
      for (const auto& m : mult.at("defect")) {
        const auto v = m.get<std::vector<double>>();
        if (int(v.size()) != nx) throw ParseError("multipliers: defect row has wrong length");
        traj.defect_multipliers.push_back(Eigen::Map<const Vec>(v.data(), nx));
      }
    }
    if (mult.contains("path")) {
      traj.path_multipliers = mult.at("path").get<std::vector<double>>();
    }
  }
  if (j.contains("solver")) traj.stats = stats_from_json(j.at("solver"));
  return out;
}

inline ordered_json validation_to_json(const ValidationReport& rep) {
  return ordered_json{{"ok", rep.ok},
                      {"position_divergence", rep.position_divergence},
                      {"velocity_divergence", rep.velocity_divergence},
                      {"divergence_tolerance", rep.divergence_tolerance},
                      {"min_margin", rep.min_margin},
                      {"min_margin_time", rep.min_margin_time},
                      {"margin_tolerance", rep.margin_tolerance},
                      {"max_boundary_error", rep.max_boundary_error},
                      {"boundary_tolerance", rep.boundary_tolerance},
                      {"max_bound_violation", rep.max_bound_violation},
                      {"bound_tolerance", rep.bound_tolerance},
                      {"failures", rep.failures}};
}

inline ordered_json config_to_json(const ProjectConfig& cfg) {
  ordered_json j;
  j["rotor"] = rotor_to_json(cfg.rotor);
  j["vehicle"] = vehicle_to_json(cfg.vehicle);
  j["solver"] = solver_to_json(cfg.solver);
  j["output_dir"] = cfg.output_dir;
  return j;
}

// ---------------------------------------------------------------------------
// File helpers

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  os << content;
  if (!os) throw std::runtime_error("failed while writing '" + path + "'");
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace vrsplan
