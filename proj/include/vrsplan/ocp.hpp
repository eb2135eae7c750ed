#pragma once

// Optimal-control problem description for minimum-time descent planning:
// decision variables are the final time t_f plus states and inputs on a
// normalized time mesh tau in [0,1]. Scenario presets cover the planar
// zigzag/flip descent family and a 3D return-to-start descent.

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vrsplan/rotor_aero.hpp"
#include "vrsplan/vehicle_dynamics.hpp"

namespace vrsplan {

enum class ModelKind { Planar, Full3d };

inline const char* to_string(ModelKind m) {
  return m == ModelKind::Planar ? "planar" : "full3d";
}

constexpr double kUnbounded = std::numeric_limits<double>::infinity();

// Admissible interval plus optional pinned boundary values for one state or
// input component.
struct VarSpec {
  std::string name;
  double lo = -kUnbounded;
  double hi = kUnbounded;
  std::optional<double> initial;
  std::optional<double> final;
};

// The margin buffer fades in with squared disk speed; full strength is
// reached a few multiples of this fraction of v_h.
inline constexpr double kBufferSpeedFrac = 0.2;

struct SolverSettings {
  int nodes = 60;          // collocation node count (nodes-1 intervals)
  int restarts = 5;        // seeded initializations explored per solve
  std::uint64_t seed = 1;
  double t_f_init = 0.0;   // 0 = derive from descent distance
  double t_f_min = 0.05;
  double t_f_max = 60.0;
  double feas_tol = 1e-8;      // target max constraint violation
  double opt_tol = 1e-6;       // target stationarity
  double smoothing_eps = 1e-3; // path-margin smoothing, relative to v_h
  double margin_buffer = 1.2e-2; // speed-scaled node margin floor; absorbs inter-node sag
  int max_outer = 40;
  int max_inner = 4000;
  double mu_init = 10.0;
  double mu_factor = 5.0;
  double mu_max = 1e7;
  int refine_rounds = 3;       // mesh-refinement passes applied inside solve()
  double refine_tol = 2e-3;    // per-interval re-integration error triggering a split
  bool parallel_restarts = true;

  void validate() const {
    auto require = [](bool ok, const char* what) {
      if (!ok) throw std::invalid_argument(std::string("SolverSettings: ") + what);
    };
    require(nodes >= 10, "nodes must be >= 10");
    require(restarts >= 1, "restarts must be >= 1");
    require(t_f_min > 0.0 && t_f_max > t_f_min, "t_f bounds must satisfy 0 < min < max");
    require(feas_tol > 0.0 && opt_tol > 0.0, "tolerances must be > 0");
    require(smoothing_eps > 0.0, "smoothing_eps must be > 0");
    require(margin_buffer >= 0.0 && margin_buffer < 0.1, "margin_buffer must be in [0, 0.1)");
    require(mu_init > 0.0 && mu_factor > 1.0 && mu_max >= mu_init, "penalty schedule invalid");
    require(max_outer >= 1 && max_inner >= 10, "iteration limits too small");
    require(refine_rounds >= 0 && refine_rounds <= 3, "refine_rounds must be in [0,3]");
  }
};

struct OcpSpec {
  ModelKind model = ModelKind::Planar;
  std::string scenario = "custom";
  RotorParams rotor;
  VehicleParams vehicle;
  std::vector<VarSpec> states;
  std::vector<VarSpec> inputs;
  bool path_constraint = true;
  double cone_angle = 20.0 * M_PI / 180.0;
  std::vector<double> mesh_tau;  // empty = uniform with solver.nodes points
  SolverSettings solver;
  int refinement_round = 0;

  int nx() const { return int(states.size()); }
  int nu() const { return int(inputs.size()); }

  std::vector<double> mesh() const {
    if (!mesh_tau.empty()) return mesh_tau;
    std::vector<double> tau(solver.nodes);
    for (int i = 0; i < solver.nodes; ++i) tau[i] = double(i) / (solver.nodes - 1);
    return tau;
  }

  void validate() const {
    rotor.validate();
    vehicle.validate();
    solver.validate();
    auto require = [](bool ok, const std::string& what) {
      if (!ok) throw std::invalid_argument("OcpSpec: " + what);
    };
    const int want_nx = model == ModelKind::Planar ? kPlanarStateDim : kFullStateDim;
    const int want_nu = model == ModelKind::Planar ? kPlanarInputDim : kFullInputDim;
    require(nx() == want_nx, "state spec count does not match the model");
    require(nu() == want_nu, "input spec count does not match the model");
    require(cone_angle > 0.0 && cone_angle < M_PI / 2.0, "cone_angle must lie in (0, pi/2)");
    for (const auto& vs : states) check_var(vs, require);
    for (const auto& vs : inputs) check_var(vs, require);
    if (!mesh_tau.empty()) {
      require(mesh_tau.size() >= 10, "mesh must have at least 10 nodes");
      require(mesh_tau.front() == 0.0 && mesh_tau.back() == 1.0, "mesh must span [0,1]");
      for (size_t i = 0; i + 1 < mesh_tau.size(); ++i) {
        require(mesh_tau[i + 1] > mesh_tau[i], "mesh must be strictly increasing");
      }
    }
  }

 private:
  template <class Req>
  static void check_var(const VarSpec& vs, Req require) {
    require(vs.lo <= vs.hi, vs.name + ": lo must be <= hi");
    auto inside = [&](double v) { return v >= vs.lo - 1e-12 && v <= vs.hi + 1e-12; };
    require(!vs.initial || inside(*vs.initial), vs.name + ": initial value outside bounds");
    require(!vs.final || inside(*vs.final), vs.name + ": final value outside bounds");
  }
};

// ---------------------------------------------------------------------------
// Scenario presets

enum class Scenario {
  ZigzagFixedY,   // Y pinned back to 0, roll boxed
  BoundedY2,      // |Y| <= 2, final Y free
  BoundedY5,      // |Y| <= 5, final Y free
  FreeY10,        // |Y| <= 10, final Y free
  FlipFixedY,     // roll free, Y pinned back to 0
  FlipFreeY,      // roll free, final Y free
  Helix3d,        // full 3D descent returning above the start point
};

inline const char* to_string(Scenario s) {
  switch (s) {
    case Scenario::ZigzagFixedY: return "zigzag-fixedY";
    case Scenario::BoundedY2: return "boundedY-2";
    case Scenario::BoundedY5: return "boundedY-5";
    case Scenario::FreeY10: return "freeY-10";
    case Scenario::FlipFixedY: return "flip-fixedY";
    case Scenario::FlipFreeY: return "flip-freeY";
    case Scenario::Helix3d: return "helix-3d";
  }
  return "?";
}

inline std::optional<Scenario> scenario_from_string(const std::string& s) {
  for (Scenario sc : {Scenario::ZigzagFixedY, Scenario::BoundedY2, Scenario::BoundedY5,
                      Scenario::FreeY10, Scenario::FlipFixedY, Scenario::FlipFreeY,
                      Scenario::Helix3d}) {
    if (s == to_string(sc)) return sc;
  }
  return std::nullopt;
}

inline OcpSpec build_scenario(Scenario sc, const RotorParams& rotor = RotorParams{},
                              const VehicleParams& vehicle = VehicleParams{}) {
  OcpSpec spec;
  spec.rotor = rotor;
  spec.vehicle = vehicle;
  spec.cone_angle = rotor.cone_angle;
  spec.scenario = to_string(sc);
  const double g = vehicle.gravity;
  const double pi = M_PI;

  if (sc != Scenario::Helix3d) {
    spec.model = ModelKind::Planar;
    spec.states = {
        {"Y", -15.0, 15.0, 0.0, 0.0},
        {"VY", -10.0, 10.0, 0.0, 0.0},
        {"Z", -15.0, 15.0, 0.0, 5.0},
        {"VZ", -10.0, 10.0, 0.0, 0.0},
        {"phi", -pi / 3.0, pi / 3.0, 0.0, 0.0},
    };
    spec.inputs = {
        {"f_coll", vehicle.physical_thrust ? 0.0 : -20.0, 20.0, g, g},
        {"omega_x", -1.0, 1.0, 0.0, 0.0},
    };
    switch (sc) {
      case Scenario::ZigzagFixedY:
        break;
      case Scenario::BoundedY2:
        spec.states[0] = {"Y", -2.0, 2.0, 0.0, std::nullopt};
        break;
      case Scenario::BoundedY5:
        spec.states[0] = {"Y", -5.0, 5.0, 0.0, std::nullopt};
        break;
      case Scenario::FreeY10:
        spec.states[0] = {"Y", -10.0, 10.0, 0.0, std::nullopt};
        break;
      case Scenario::FlipFixedY:
      case Scenario::FlipFreeY:
        // Flip maneuvers free the roll channel. The roll-rate box is widened
        // to [-2pi, 2pi]: inverting out and back is about a full turn of
        // roll travel, which the non-flip rate box cannot deliver within the
        // expected maneuver duration.
        spec.states[4] = {"phi", -kUnbounded, kUnbounded, 0.0, 0.0};
        spec.inputs[1] = {"omega_x", -2.0 * pi, 2.0 * pi, 0.0, 0.0};
        spec.solver.nodes = 80;
        // Inverted dives finish several times faster than the generic
        // 2 s/m guess; starting near the dive timescale keeps the restarts
        // inside that basin.
        spec.solver.t_f_init = 3.0;
        if (sc == Scenario::FlipFreeY) spec.states[0].final.reset();
        break;
      default:
        break;
    }
  } else {
    spec.model = ModelKind::Full3d;
    const double t_hover = vehicle.hover_thrust_per_motor();
    spec.states = {
        {"X", -10.0, 10.0, 0.0, 0.0},
        {"Y", -10.0, 10.0, 0.0, 0.0},
        {"Z", -1.0, 6.0, 0.0, 5.0},
        {"VX", -10.0, 10.0, 0.0, 0.0},
        {"VY", -10.0, 10.0, 0.0, 0.0},
        {"VZ", -10.0, 10.0, 0.0, 0.0},
        {"q0", -1.05, 1.05, 1.0, 1.0},
        {"q1", -1.05, 1.05, 0.0, 0.0},
        {"q2", -1.05, 1.05, 0.0, 0.0},
        {"q3", -1.05, 1.05, 0.0, 0.0},
        {"wx", -3.0, 3.0, 0.0, 0.0},
        {"wy", -3.0, 3.0, 0.0, 0.0},
        {"wz", -3.0, 3.0, 0.0, 0.0},
    };
    spec.inputs = {
        {"T1", 0.0, 2.0 * t_hover, t_hover, t_hover},
        {"T2", 0.0, 2.0 * t_hover, t_hover, t_hover},
        {"T3", 0.0, 2.0 * t_hover, t_hover, t_hover},
        {"T4", 0.0, 2.0 * t_hover, t_hover, t_hover},
    };
  }
  spec.validate();
  return spec;
}

// Expected minimum-time descent durations in the scenario family's reference
// configuration; used by tests and reporting only, never by the solver.
inline std::optional<double> reference_duration(Scenario sc) {
  switch (sc) {
    case Scenario::ZigzagFixedY: return 5.33;
    case Scenario::BoundedY2: return 6.80;
    case Scenario::BoundedY5: return 4.60;
    case Scenario::FreeY10: return 3.39;
    case Scenario::FlipFixedY: return 2.27;
    case Scenario::FlipFreeY: return 2.08;
    case Scenario::Helix3d: return std::nullopt;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Model function bundle consumed by the transcription

struct ModelFunctions {
  int nx = 0;
  int nu = 0;
  std::vector<std::string> state_names, input_names;
  std::function<Vec(const Vec& x, const Vec& u)> rhs;
  // Optional analytic Jacobians; transcription falls back to finite differences.
  std::function<void(const Vec& x, const Vec& u, Eigen::MatrixXd& A, Eigen::MatrixXd& B)>
      rhs_jacobians;
  // Smoothed path margin enforced as margin(x) >= 0; null disables the path
  // constraint for this model instance.
  std::function<double(const Vec& x)> path_margin;
  std::function<void(const Vec& x, Vec& grad)> path_margin_grad;
  // Raw margin for independent re-checks (unsmoothed).
  std::function<double(const Vec& x)> raw_margin;
  // Extra per-node equalities (e.g. quaternion unit norm).
  std::function<Vec(const Vec& x)> node_eq;
  std::function<void(const Vec& x, Eigen::MatrixXd& J)> node_eq_jac;
  // Component index sets used by the validator's divergence report.
  std::vector<int> position_idx, velocity_idx;
  // Post-integration state projection (quaternion renormalization).
  std::function<void(Vec& x)> poststep;
};

namespace detail {

// Smoothed |v|: sqrt(v^2 + e^2) - e. Lower bound of |v|, exact at v = 0, so a
// nonnegative smoothed margin implies the raw margin is nonnegative too.
inline double smooth_abs_lower(double v, double e) {
  return std::sqrt(v * v + e * e) - e;
}

}  // namespace detail

inline ModelFunctions make_model(const OcpSpec& spec) {
  ModelFunctions m;
  const VehicleParams veh = spec.vehicle;
  const RotorParams rotor = spec.rotor;
  const double v_h = hover_induced_velocity(rotor);
  const double tan_cone = std::tan(spec.cone_angle);
  const double eps = spec.solver.smoothing_eps * v_h;

  if (spec.model == ModelKind::Planar) {
    m.nx = kPlanarStateDim;
    m.nu = kPlanarInputDim;
    m.state_names = {"Y", "VY", "Z", "VZ", "phi"};
    m.input_names = {"f_coll", "omega_x"};
    m.rhs = [veh](const Vec& x, const Vec& u) { return planar_rhs(x, u, veh); };
    m.rhs_jacobians = [veh](const Vec& x, const Vec& u, Eigen::MatrixXd& A, Eigen::MatrixXd& B) {
      planar_jacobians(x, u, veh, A, B);
    };
    if (spec.path_constraint) {
      m.path_margin = [v_h, tan_cone, eps](const Vec& x) {
        const double vy = x[1], vz = x[3], phi = x[4];
        const double c = std::cos(phi), s = std::sin(phi);
        const double a = c * vy + s * vz;   // in-plane airspeed (signed)
        const double b = s * vy - c * vz;   // climb-positive axial airspeed
        return (b + detail::smooth_abs_lower(a, eps) * tan_cone) / v_h;
      };
      m.path_margin_grad = [v_h, tan_cone, eps](const Vec& x, Vec& grad) {
        const double vy = x[1], vz = x[3], phi = x[4];
        const double c = std::cos(phi), s = std::sin(phi);
        const double a = c * vy + s * vz;
        const double b = s * vy - c * vz;
        const double r = std::sqrt(a * a + eps * eps);
        const double k = tan_cone * a / r;
        grad.setZero(kPlanarStateDim);
        grad[1] = (s + k * c) / v_h;
        grad[3] = (-c + k * s) / v_h;
        grad[4] = (a - k * b) / v_h;
      };
      m.raw_margin = [rotor](const Vec& x) {
        return simplified_margin(planar_disk_velocity(x), rotor);
      };
    }
    m.position_idx = {0, 2};
    m.velocity_idx = {1, 3};
  } else {
    m.nx = kFullStateDim;
    m.nu = kFullInputDim;
    m.state_names = {"X", "Y", "Z", "VX", "VY", "VZ", "q0", "q1", "q2", "q3", "wx", "wy", "wz"};
    m.input_names = {"T1", "T2", "T3", "T4"};
    m.rhs = [veh](const Vec& x, const Vec& u) { return full3d_rhs(x, u, veh); };
    if (spec.path_constraint) {
      m.path_margin = [v_h, tan_cone, eps](const Vec& x) {
        const Vector3d V = x.segment<3>(3);
        const Vector3d rel = quat_to_matrix(x.segment<4>(6)).transpose() * (-V);
        const double a = std::hypot(rel[0], rel[1]);
        return (rel[2] + detail::smooth_abs_lower(a, eps) * tan_cone) / v_h;
      };
      m.raw_margin = [rotor](const Vec& x) {
        return simplified_margin(full3d_disk_velocity(x), rotor);
      };
    }
    m.node_eq = [](const Vec& x) {
      Vec r(1);
      r[0] = x.segment<4>(6).squaredNorm() - 1.0;
      return r;
    };
    m.node_eq_jac = [](const Vec& x, Eigen::MatrixXd& J) {
      J.setZero(1, kFullStateDim);
      for (int k = 0; k < 4; ++k) J(0, 6 + k) = 2.0 * x[6 + k];
    };
    m.poststep = full3d_poststep;
    m.position_idx = {0, 1, 2};
    m.velocity_idx = {3, 4, 5};
  }
  return m;
}

// ---------------------------------------------------------------------------
// Solution container

struct SolveStats {
  bool converged = false;
  int outer_iterations = 0;
  int inner_iterations = 0;
  int restarts = 0;
  int best_restart = -1;
  int refinement_rounds = 0;
  double objective = 0.0;
  double max_eq_violation = 0.0;
  double max_ineq_violation = 0.0;
  double grad_norm = 0.0;
  std::string message;
};

struct Trajectory {
  ModelKind model = ModelKind::Planar;
  std::string scenario = "custom";
  double t_f = 0.0;
  std::vector<double> tau;   // normalized node times
  std::vector<double> t;     // physical node times
  std::vector<Vec> x;
  std::vector<Vec> u;
  std::vector<double> margin;             // enforced (smoothed) path margin per node
  std::vector<Vec> defect_multipliers;    // per interval, length nx
  std::vector<double> path_multipliers;   // per node (0 when path constraint off)
  SolveStats stats;

  int nodes() const { return int(x.size()); }
};

class PlanError : public std::runtime_error {
 public:
  PlanError(const std::string& what, SolveStats stats)
      : std::runtime_error(what), stats_(std::move(stats)) {}
  const SolveStats& stats() const { return stats_; }

 private:
  SolveStats stats_;
};

}  // namespace vrsplan
