#pragma once

// First-order optimality diagnostics recovered from the transcription
// multipliers. For a minimum-time problem the Hamiltonian
//
//   H(t) = 1 + lambda(t) . f(x, u) + lambda_C(t) * C(x)
//
// with C the enforced path constraint (margin minus the speed-scaled buffer)
// is zero along an optimal arc (free final time), so its node values are a
// direct quality measure for a solution; the constraint term is bounded by
// the complementary-slackness residual |lambda_C * C|.
//
// Multiplier mapping: the defect multiplier of interval i estimates the
// negated costate at the interval midpoint, and the path multiplier of node i
// is the constraint density integrated against that node's trapezoid weight:
// eta_i = mult_i / (t_f * w_i). Costates at the nodes come from linear
// interpolation (extrapolation at the ends) of the midpoint samples, which is
// exact whenever the true costate is affine in time.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "vrsplan/ocp.hpp"

namespace vrsplan {

struct PmpDiagnostics {
  std::vector<Vec> costate;          // lambda at each node
  std::vector<double> path_density;  // eta at each node (>= 0)
  std::vector<double> hamiltonian;   // H at each node
  double max_abs_hamiltonian = 0.0;
  double hamiltonian_spread = 0.0;   // max - min over nodes
  double max_complementarity = 0.0;  // max |eta_i * margin_i|
};

inline PmpDiagnostics pmp_diagnostics(const Trajectory& traj, const ModelFunctions& model,
                                      double margin_buffer = 0.0, double buffer_speed = 0.0) {
  const int N = traj.nodes();
  if (N < 3) throw std::invalid_argument("pmp_diagnostics: need at least 3 nodes");
  if (int(traj.defect_multipliers.size()) != N - 1) {
    throw std::invalid_argument("pmp_diagnostics: defect multipliers missing");
  }

  // Midpoint costate samples.
  std::vector<double> tm(size_t(N - 1));
  for (int i = 0; i + 1 < N; ++i) tm[size_t(i)] = 0.5 * (traj.t[size_t(i)] + traj.t[size_t(i) + 1]);

  PmpDiagnostics diag;
  diag.costate.resize(size_t(N));
  for (int j = 0; j < N; ++j) {
    const double tq = traj.t[size_t(j)];
    auto it = std::upper_bound(tm.begin(), tm.end(), tq);
    int k = int(it - tm.begin()) - 1;
    k = std::clamp(k, 0, N - 3);
    const double w = (tq - tm[size_t(k)]) / (tm[size_t(k) + 1] - tm[size_t(k)]);
    diag.costate[size_t(j)] =
        -((1.0 - w) * traj.defect_multipliers[size_t(k)] + w * traj.defect_multipliers[size_t(k) + 1]);
  }

  // Path-constraint density via trapezoid quadrature weights.
  diag.path_density.assign(size_t(N), 0.0);
  const bool has_path = !traj.margin.empty() && traj.path_multipliers.size() == size_t(N);
  if (has_path) {
    for (int i = 0; i < N; ++i) {
      double w = 0.0;
      if (i > 0) w += 0.5 * (traj.tau[size_t(i)] - traj.tau[size_t(i) - 1]);
      if (i + 1 < N) w += 0.5 * (traj.tau[size_t(i) + 1] - traj.tau[size_t(i)]);
      diag.path_density[size_t(i)] = traj.path_multipliers[size_t(i)] / (traj.t_f * w);
    }
  }

  diag.hamiltonian.resize(size_t(N));
  double h_min = 0.0, h_max = 0.0;
  for (int i = 0; i < N; ++i) {
    const Vec f = model.rhs(traj.x[size_t(i)], traj.u[size_t(i)]);
    double H = 1.0 + diag.costate[size_t(i)].dot(f);
    if (has_path) {
      // C is the constraint actually enforced: margin minus the speed-scaled
      // buffer, active at 0. Must match the transcription's buffer_at.
      double buf = 0.0;
      if (margin_buffer > 0.0 && i > 0 && i + 1 < N) {
        buf = margin_buffer;
        if (buffer_speed > 0.0 && !model.velocity_idx.empty()) {
          double q = 0.0;
          for (int c : model.velocity_idx) {
            const double v = traj.x[size_t(i)][c];
            q += v * v;
          }
          buf *= q / (q + buffer_speed * buffer_speed);
        }
      }
      const double cs = diag.path_density[size_t(i)] * (traj.margin[size_t(i)] - buf);
      H += cs;
      diag.max_complementarity = std::max(diag.max_complementarity, std::abs(cs));
    }
    diag.hamiltonian[size_t(i)] = H;
    diag.max_abs_hamiltonian = std::max(diag.max_abs_hamiltonian, std::abs(H));
    if (i == 0) {
      h_min = h_max = H;
    } else {
      h_min = std::min(h_min, H);
      h_max = std::max(h_max, H);
    }
  }
  diag.hamiltonian_spread = h_max - h_min;
  return diag;
}

inline PmpDiagnostics pmp_diagnostics(const Trajectory& traj, const OcpSpec& spec) {
  return pmp_diagnostics(traj, make_model(spec), spec.solver.margin_buffer,
                         kBufferSpeedFrac * hover_induced_velocity(spec.rotor));
}

}  // namespace vrsplan
