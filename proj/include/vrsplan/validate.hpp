#pragma once

// Independent acceptance check for a planned trajectory. The validator
// re-integrates the piecewise-linear input schedule with RK4 at ten times the
// node resolution and never reuses the planner's defect values, so it catches
// transcription artifacts (coarse meshes, smoothing side effects) rather than
// re-stating them:
//
//  * re-integration divergence at the nodes, positions and velocities
//    separately, scaled by descent distance (5 m reference),
//  * the raw (unsmoothed) flight-envelope margin on the dense path,
//  * pinned boundary values,
//  * variable bounds at the nodes and the final-time box.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "vrsplan/integrator.hpp"
#include "vrsplan/ocp.hpp"

namespace vrsplan {

struct ValidationReport {
  bool ok = true;
  double position_divergence = 0.0;
  double velocity_divergence = 0.0;
  double divergence_tolerance = 0.05;
  double min_margin = 0.0;        // raw margin over the dense re-integrated path
  double min_margin_time = 0.0;   // dense time where the minimum occurred
  double margin_tolerance = 1e-3; // allowed undershoot below zero
  double max_boundary_error = 0.0;
  double max_bound_violation = 0.0;
  double boundary_tolerance = 1e-3;
  double bound_tolerance = 1e-3;
  std::vector<std::string> failures;
};

inline ValidationReport validate_trajectory(const Trajectory& traj, const OcpSpec& spec,
                                            int oversample = 10) {
  const ModelFunctions model = make_model(spec);
  ValidationReport rep;
  const int N = traj.nodes();
  if (N < 2 || traj.t_f <= 0.0) {
    rep.ok = false;
    rep.failures.push_back("trajectory is empty or has a nonpositive duration");
    return rep;
  }

  // Dense grid: every node interval split `oversample` times.
  std::vector<double> dense;
  dense.reserve(size_t(N - 1) * size_t(oversample) + 1);
  for (int i = 0; i + 1 < N; ++i) {
    for (int k = 0; k < oversample; ++k) {
      const double w = double(k) / oversample;
      dense.push_back(traj.t[size_t(i)] + w * (traj.t[size_t(i) + 1] - traj.t[size_t(i)]));
    }
  }
  dense.push_back(traj.t.back());

  const auto sim = integrate_rk4(model.rhs, traj.x[0], dense, traj.t, traj.u, 1, model.poststep);

  // Divergence at the nodes, normalized by descent distance.
  const int z_idx = model.position_idx.back();
  const double descent = std::abs(traj.x.back()[z_idx] - traj.x.front()[z_idx]);
  const double scale = std::max(1.0, descent / 5.0);
  for (int i = 0; i < N; ++i) {
    const Vec& ref = sim.x[size_t(i) * size_t(oversample)];
    for (int c : model.position_idx) {
      rep.position_divergence =
          std::max(rep.position_divergence, std::abs(ref[c] - traj.x[size_t(i)][c]));
    }
    for (int c : model.velocity_idx) {
      rep.velocity_divergence =
          std::max(rep.velocity_divergence, std::abs(ref[c] - traj.x[size_t(i)][c]));
    }
  }
  const double div_tol = rep.divergence_tolerance * scale;
  if (rep.position_divergence > div_tol) {
    rep.ok = false;
    rep.failures.push_back("re-integrated position diverges from the plan by " +
                           std::to_string(rep.position_divergence) + " m");
  }
  if (rep.velocity_divergence > div_tol) {
    rep.ok = false;
    rep.failures.push_back("re-integrated velocity diverges from the plan by " +
                           std::to_string(rep.velocity_divergence) + " m/s");
  }

  // Raw envelope margin along the dense path.
  if (model.raw_margin) {
    rep.min_margin = model.raw_margin(sim.x[0]);
    rep.min_margin_time = sim.t[0];
    for (size_t s = 0; s < sim.x.size(); ++s) {
      const double m = model.raw_margin(sim.x[s]);
      if (m < rep.min_margin) {
        rep.min_margin = m;
        rep.min_margin_time = sim.t[s];
      }
    }
    if (rep.min_margin < -rep.margin_tolerance) {
      rep.ok = false;
      rep.failures.push_back("flight-envelope margin dips to " + std::to_string(rep.min_margin));
    }
  }

  // Pinned boundary values.
  auto check_pin = [&](double have, double want) {
    rep.max_boundary_error = std::max(rep.max_boundary_error, std::abs(have - want));
  };
  for (int c = 0; c < model.nx; ++c) {
    if (spec.states[size_t(c)].initial) check_pin(traj.x.front()[c], *spec.states[size_t(c)].initial);
    if (spec.states[size_t(c)].final) check_pin(traj.x.back()[c], *spec.states[size_t(c)].final);
  }
  for (int c = 0; c < model.nu; ++c) {
    if (spec.inputs[size_t(c)].initial) check_pin(traj.u.front()[c], *spec.inputs[size_t(c)].initial);
    if (spec.inputs[size_t(c)].final) check_pin(traj.u.back()[c], *spec.inputs[size_t(c)].final);
  }
  if (rep.max_boundary_error > rep.boundary_tolerance) {
    rep.ok = false;
    rep.failures.push_back("boundary conditions missed by " +
                           std::to_string(rep.max_boundary_error));
  }

  // Variable bounds at the nodes plus the final-time box.
  auto bound_viol = [](double v, const VarSpec& vs) {
    double viol = 0.0;
    if (std::isfinite(vs.lo)) viol = std::max(viol, vs.lo - v);
    if (std::isfinite(vs.hi)) viol = std::max(viol, v - vs.hi);
    return viol;
  };
  for (int i = 0; i < N; ++i) {
    for (int c = 0; c < model.nx; ++c) {
      rep.max_bound_violation =
          std::max(rep.max_bound_violation, bound_viol(traj.x[size_t(i)][c], spec.states[size_t(c)]));
    }
    for (int c = 0; c < model.nu; ++c) {
      rep.max_bound_violation =
          std::max(rep.max_bound_violation, bound_viol(traj.u[size_t(i)][c], spec.inputs[size_t(c)]));
    }
  }
  rep.max_bound_violation = std::max(
      rep.max_bound_violation,
      std::max(spec.solver.t_f_min - traj.t_f, traj.t_f - spec.solver.t_f_max));
  rep.max_bound_violation = std::max(rep.max_bound_violation, 0.0);
  if (rep.max_bound_violation > rep.bound_tolerance) {
    rep.ok = false;
    rep.failures.push_back("variable bounds violated by " +
                           std::to_string(rep.max_bound_violation));
  }

  return rep;
}

}  // namespace vrsplan
