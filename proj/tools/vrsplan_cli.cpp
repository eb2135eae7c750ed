// Command-line front end.
//
// Exit codes are a stable contract:
//   0  success / velocity allowed
//   2  usage, parse, or I/O error
//   3  velocity prohibited by the envelope model
//   4  solve failure
//   5  validation failure

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vrsplan/vrsplan.hpp"

namespace fs = std::filesystem;
using namespace vrsplan;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitProhibited = 3;
constexpr int kExitSolveFailure = 4;
constexpr int kExitValidationFailure = 5;

std::optional<std::uint64_t> env_seed() {
  if (const char* seed = std::getenv("VRSPLAN_SEED")) {
    return detail::parse_uint_strict(seed, 0);
  }
  return std::nullopt;
}

// Relative output paths land in the configured output directory.
fs::path resolve_output(const ProjectConfig& cfg, const std::string& out) {
  fs::path p(out);
  if (p.is_relative()) p = fs::path(cfg.output_dir) / p;
  if (p.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(p.parent_path(), ec);  // unwritable paths fail at open time
  }
  return p;
}

int cmd_atlas(const ProjectConfig& cfg, const std::string& out, const std::vector<int>& resolution,
              const std::vector<double>& range) {
  AtlasWindow window;
  if (!resolution.empty()) {
    window.vh_count = resolution[0];
    window.vz_count = resolution[1];
  }
  if (!range.empty()) {
    window.vh_min = range[0];
    window.vh_max = range[1];
    window.vz_min = range[2];
    window.vz_max = range[3];
  }
  const AtlasGrid grid = build_atlas(cfg.rotor, window);
  std::ostringstream body;
  write_atlas_csv(body, grid);
  const fs::path path = resolve_output(cfg, out);
  write_text_file(path.string(), body.str());
  std::cout << "atlas: " << grid.window.vh_count << "x" << grid.window.vz_count << " cells -> "
            << path.string() << "\n";
  return kExitOk;
}

int cmd_classify(const ProjectConfig& cfg, double vh_norm, double vz_norm) {
  const double v_h = hover_induced_velocity(cfg.rotor);
  const DiskVelocity v{vh_norm * v_h, vz_norm * v_h};
  const DiskAnalysis a = analyze_disk_velocity(v, cfg.rotor);
  std::cout << "label=" << to_string(a.onera.regime) << " combined=" << to_string(a.combined.regime)
            << " eps=" << format_double(a.eps) << " onera_margin=" << format_double(a.onera_margin)
            << " cone_margin=" << format_double(a.cone_margin)
            << " v_i_norm=" << format_double(a.v_i / a.v_h) << "\n";
  return allowed(a.combined) ? kExitOk : kExitProhibited;
}

// Scenario presets tune a few solver fields (mesh density, initial duration,
// restart count). Config values win only where the user moved them off the
// library defaults; otherwise the preset's calibration is kept.
void overlay_solver_settings(OcpSpec& spec, const SolverSettings& cfg_solver) {
  const SolverSettings preset = spec.solver;
  const SolverSettings defaults;
  spec.solver = cfg_solver;
  auto keep_preset = [&](auto member) {
    if (preset.*member != defaults.*member && cfg_solver.*member == defaults.*member) {
      spec.solver.*member = preset.*member;
    }
  };
  keep_preset(&SolverSettings::nodes);
  keep_preset(&SolverSettings::t_f_init);
  keep_preset(&SolverSettings::restarts);
  keep_preset(&SolverSettings::seed);
  keep_preset(&SolverSettings::refine_rounds);
}

int cmd_plan(const ProjectConfig& cfg, const std::string& scenario_name,
             const std::string& spec_path, const std::string& out) {
  OcpSpec spec;
  if (!spec_path.empty()) {
    spec = ocp_spec_from_json(ordered_json::parse(read_text_file(spec_path)));
  } else {
    const auto sc = scenario_from_string(scenario_name);
    if (!sc) {
      std::cerr << "plan: unknown scenario '" << scenario_name << "'\n";
      return kExitUsage;
    }
    spec = build_scenario(*sc, cfg.rotor, cfg.vehicle);
    overlay_solver_settings(spec, cfg.solver);
  }
  if (const auto seed = env_seed()) spec.solver.seed = *seed;
  spec.validate();

  const fs::path json_path = resolve_output(cfg, out);
  fs::path csv_path = json_path;
  csv_path.replace_extension(".csv");

  Trajectory traj;
  try {
    traj = solve(spec);
  } catch (const PlanError& e) {
    ordered_json diag;
    diag["schema_version"] = kTrajectorySchemaVersion;
    diag["error"] = e.what();
    diag["scenario"] = spec.scenario;
    diag["solver"] = stats_to_json(e.stats());
    write_text_file(json_path.string(), diag.dump(2) + "\n");
    std::cerr << "plan: " << e.what() << "\n";
    return kExitSolveFailure;
  }

  const ordered_json j = trajectory_to_json(traj, spec, config_to_json(cfg));
  write_text_file(json_path.string(), j.dump(2) + "\n");
  std::ostringstream csv;
  write_trajectory_csv(csv, traj, spec);
  write_text_file(csv_path.string(), csv.str());
  std::cout << "plan: " << spec.scenario << " t_f=" << format_double(traj.t_f) << " s, "
            << traj.nodes() << " nodes -> " << json_path.string() << "\n";
  return kExitOk;
}

int cmd_validate(const ProjectConfig&, const std::string& traj_path) {
  const TrajectoryFile file = trajectory_from_json(ordered_json::parse(read_text_file(traj_path)));
  const ValidationReport rep = validate_trajectory(file.trajectory, file.spec);
  std::cout << validation_to_json(rep).dump(2) << "\n";
  return rep.ok ? kExitOk : kExitValidationFailure;
}

int cmd_profile(const ProjectConfig& cfg, const ProfileParams& prof, const std::string& out) {
  const ProfileAnalysis analysis = analyze_profile(cfg.rotor, prof);
  if (!out.empty()) {
    std::ostringstream csv;
    write_profile_csv(csv, analysis);
    write_text_file(resolve_output(cfg, out).string(), csv.str());
  }
  auto entry = [&](Regime r) {
    const auto it = analysis.first_entry.find(r);
    return it == analysis.first_entry.end() ? std::string("never") : format_double(it->second) + " s";
  };
  std::cout << "profile: first VRS entry " << entry(Regime::Vrs) << ", first TWS entry "
            << entry(Regime::Tws) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Flight-envelope modeling and minimum-time descent planning for multirotors"};
  app.require_subcommand(1);

  std::string config_path;
  app.add_option("--config", config_path, "Configuration file (key = value sections)");

  auto* atlas = app.add_subcommand("atlas", "Write a regime atlas over normalized velocity space");
  std::string atlas_out = "atlas.csv";
  std::vector<int> atlas_resolution;
  std::vector<double> atlas_range;
  atlas->add_option("--out", atlas_out, "Output CSV path");
  atlas->add_option("--resolution", atlas_resolution, "Grid size: vH count, vz count")
      ->expected(2);
  atlas->add_option("--range", atlas_range, "Window: vH min, vH max, vz min, vz max")->expected(4);

  auto* classify = app.add_subcommand("classify", "Classify one disk velocity (normalized by v_h)");
  double vh_norm = 0.0, vz_norm = 0.0;
  classify->add_option("--vh", vh_norm, "In-plane speed / v_h")->required();
  classify->add_option("--vz", vz_norm, "Axial speed / v_h, climb-positive")->required();

  auto* plan = app.add_subcommand("plan", "Solve a minimum-time descent scenario");
  std::string scenario_name, spec_path, plan_out = "trajectory.json";
  auto* scn = plan->add_option("--scenario", scenario_name,
                               "Preset: zigzag-fixedY, boundedY-2, boundedY-5, freeY-10, "
                               "flip-fixedY, flip-freeY, helix-3d");
  auto* spc = plan->add_option("--spec", spec_path, "Problem description JSON");
  plan->add_option("--out", plan_out, "Output JSON path (CSV written alongside)");
  scn->excludes(spc);

  auto* validate = app.add_subcommand("validate", "Re-simulate and check a planned trajectory");
  std::string traj_path;
  validate->add_option("--traj", traj_path, "Trajectory JSON produced by plan")->required();

  auto* profile = app.add_subcommand("profile", "Classify an oscillatory vertical descent profile");
  ProfileParams prof;
  std::string profile_out;
  profile->add_option("--A", prof.amplitude, "Oscillation amplitude [m]");
  profile->add_option("--omega0", prof.omega0, "Chirp rate [rad/s^2]");
  profile->add_option("--z0", prof.z0, "Mean depth [m]");
  profile->add_option("--duration", prof.duration, "Profile length [s]");
  profile->add_option("--out", profile_out, "Optional CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    ProjectConfig cfg;
    if (!config_path.empty()) cfg = load_config(config_path);
    apply_env_overrides(cfg);
    cfg.validate();

    if (atlas->parsed()) return cmd_atlas(cfg, atlas_out, atlas_resolution, atlas_range);
    if (classify->parsed()) return cmd_classify(cfg, vh_norm, vz_norm);
    if (plan->parsed()) {
      if (scenario_name.empty() && spec_path.empty()) {
        std::cerr << "plan: one of --scenario or --spec is required\n";
        return kExitUsage;
      }
      return cmd_plan(cfg, scenario_name, spec_path, plan_out);
    }
    if (validate->parsed()) return cmd_validate(cfg, traj_path);
    if (profile->parsed()) {
      if (prof.duration < 0.0) {
        std::cerr << "profile: duration must be nonnegative\n";
        return kExitUsage;
      }
      return cmd_profile(cfg, prof, profile_out);
    }
    return kExitUsage;
  } catch (const PlanError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSolveFailure;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}
