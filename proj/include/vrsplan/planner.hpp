#pragma once

// Minimum-time descent planning on top of the trapezoidal transcription:
//  * seeded multi-start (perturbed straight-line initializations),
//  * augmented-Lagrangian solve per restart,
//  * Gauss-Newton feasibility polish at fixed final time,
//  * optional mesh refinement driven by re-integration error and by
//    curvature of the path-constraint margin.
//
// Restart perturbations come in +/- pairs drawn from one RNG stream, so the
// initialization set is closed under the lateral mirror map. Combined with
// deterministic result merging this keeps solves reproducible and makes
// mirrored problems produce mirrored solutions.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <random>
#include <stdexcept>
#include <thread>
#include <utility>
#include <vector>

#include "vrsplan/integrator.hpp"
#include "vrsplan/nlp.hpp"
#include "vrsplan/transcription.hpp"

namespace vrsplan {

namespace detail {

struct Perturbation {
  int mode = 1;          // half-sine mode count over tau in [0,1]
  int phi_mode = 1;      // roll uses its own mode (a dive swings down and back)
  double amp_pos = 0.0;  // lateral position amplitude
  double amp_phi = 0.0;  // roll amplitude (planar only)
  double angle = 0.0;    // lateral direction (3D only)
  double tf_scale = 1.0; // shared by both members of a +/- pair
};

inline std::vector<Perturbation> draw_perturbations(const OcpSpec& spec, int pairs) {
  std::mt19937_64 rng(spec.solver.seed);
  std::uniform_real_distribution<double> un(0.0, 1.0);
  const bool planar = spec.model == ModelKind::Planar;

  double half = 4.0;
  bool lat_bounded = false;
  const VarSpec& lat = spec.states[planar ? 0 : 1];
  if (std::isfinite(lat.lo) && std::isfinite(lat.hi)) {
    half = 0.5 * (lat.hi - lat.lo);
    lat_bounded = true;
  }
  const double cap = std::min(0.8 * half, 4.0);

  // A lateral corridor of width W descends about W*tan(cone) per traverse,
  // so narrow corridors need several reversals; seed the sine modes there.
  double dz = 5.0;
  if (spec.states[2].initial && spec.states[2].final) {
    dz = std::abs(*spec.states[2].final - *spec.states[2].initial);
  }
  int base_mode = 1;
  if (lat_bounded) {
    const double per_pass = 2.0 * half * std::tan(spec.rotor.cone_angle);
    if (per_pass > 1e-9) {
      base_mode = std::clamp(int(std::lround(dz / per_pass)), 1, 5);
    }
  }
  std::vector<int> mode_seq;
  for (int m = 0; int(mode_seq.size()) < pairs; ++m) {
    const int cand = (m == 0) ? base_mode : (m == 1 ? base_mode + 1 : m - 1);
    if (std::find(mode_seq.begin(), mode_seq.end(), cand) == mode_seq.end()) {
      mode_seq.push_back(cand);
    }
  }

  // Scenarios with a free roll interval admit inverted arcs. Those dive by
  // swinging the roll far out and back within the descent (one full sine),
  // so give the roll its own mode and let it reach well past a quarter turn.
  double phi_half = M_PI;
  bool phi_free = true;
  if (planar && std::isfinite(spec.states[4].lo) && std::isfinite(spec.states[4].hi)) {
    phi_half = std::min(phi_half, 0.5 * (spec.states[4].hi - spec.states[4].lo));
    phi_free = phi_half > 0.5 * M_PI;
  }

  std::vector<Perturbation> out;
  out.reserve(size_t(pairs));
  for (int p = 0; p < pairs; ++p) {
    Perturbation pe;
    pe.mode = mode_seq[size_t(p)];
    pe.phi_mode = phi_free ? 2 : pe.mode;
    pe.amp_pos = cap * (0.35 + 0.55 * un(rng));
    if (planar) {
      pe.amp_phi = phi_free ? phi_half * (0.45 + 0.40 * un(rng))
                            : 0.7 * phi_half * (0.3 + 0.6 * un(rng));
    } else {
      pe.angle = 2.0 * M_PI * un(rng);
    }
    pe.tf_scale = 1.0 + 0.15 * (2.0 * un(rng) - 1.0);
    out.push_back(pe);
  }
  return out;
}

// Constructed initialization for free-roll planar scenarios: invert, dive,
// brake inverted, return upright. Descending fully inverted keeps the flow
// through the disk on the healthy side at zero lateral speed, so the fast
// basin holds the roll near a half turn through the middle of the descent;
// sine-shaped perturbations of the straight-line guess never reach it.
inline Vec inverted_dive_guess(const Transcription& tr, double t_f0) {
  Vec z = tr.initial_guess(t_f0);
  const auto& tau = tr.tau();
  const double g = 9.81;
  const double z0 = z[tr.ix(0, 2)];
  const double delta = z[tr.ix(tr.nodes() - 1, 2)] - z0;
  const double r = 0.2;    // roll ramp fraction at either end
  const double rho = 0.3;  // dive fraction of the descent window
  auto smoothstep = [](double x) { return x * x * (3.0 - 2.0 * x); };
  auto dsmoothstep = [](double x) { return 6.0 * x * (1.0 - x); };
  // Triangular vertical-speed profile over the inverted window, with the
  // collective matched to it: inverted, positive collective adds to gravity
  // (the dive) and braking needs the collective pushed past -g.
  const double T = (1.0 - 2.0 * r) * t_f0;
  const double v_pk = 2.0 * delta / T;
  const double a_dive = v_pk / (rho * T);
  const double a_brake = v_pk / ((1.0 - rho) * T);
  for (int i = 0; i < tr.nodes(); ++i) {
    const double s = tau[i];
    double phi = M_PI, dphi = 0.0;
    if (s < r) {
      phi = M_PI * smoothstep(s / r);
      dphi = M_PI * dsmoothstep(s / r) / r;
    } else if (s > 1.0 - r) {
      phi = M_PI * smoothstep((1.0 - s) / r);
      dphi = -M_PI * dsmoothstep((1.0 - s) / r) / r;
    }
    double zz = z0, vz = 0.0, f = g;
    if (s >= r && s <= 1.0 - r) {
      const double td = (s - r) * t_f0;
      const double t_sw = rho * T;
      if (td <= t_sw) {
        vz = a_dive * td;
        zz = z0 + 0.5 * a_dive * td * td;
        f = a_dive - g;
      } else {
        vz = v_pk - a_brake * (td - t_sw);
        zz = z0 + 0.5 * v_pk * t_sw + v_pk * (td - t_sw) - 0.5 * a_brake * (td - t_sw) * (td - t_sw);
        f = -(a_brake + g);
      }
    } else if (s > 1.0 - r) {
      zz = z0 + delta;
    }
    z[tr.ix(i, 2)] = zz;
    z[tr.ix(i, 3)] = vz;
    z[tr.ix(i, 4)] = phi;
    z[tr.iu(i, 0)] = f;
    z[tr.iu(i, 1)] = dphi / t_f0;
  }
  return z;
}

inline void apply_perturbation(const Transcription& tr, Vec& z, const Perturbation& pe, double sign,
                               bool planar, double t_f0) {
  const auto& tau = tr.tau();
  for (int i = 0; i < tr.nodes(); ++i) {
    const double ph = pe.mode * M_PI * tau[i];
    const double s = std::sin(ph);
    const double c = std::cos(ph);
    const double dpos = sign * pe.amp_pos * s;
    const double dvel = sign * pe.amp_pos * pe.mode * M_PI * c / t_f0;
    if (planar) {
      const double php = pe.phi_mode * M_PI * tau[i];
      z[tr.ix(i, 0)] += dpos;
      z[tr.ix(i, 1)] += dvel;
      z[tr.ix(i, 4)] += sign * pe.amp_phi * std::sin(php);
      z[tr.iu(i, 1)] += sign * pe.amp_phi * pe.phi_mode * M_PI * std::cos(php) / t_f0;
    } else {
      const double ca = std::cos(pe.angle), sa = std::sin(pe.angle);
      z[tr.ix(i, 0)] += dpos * ca;
      z[tr.ix(i, 1)] += dpos * sa;
      z[tr.ix(i, 3)] += dvel * ca;
      z[tr.ix(i, 4)] += dvel * sa;
    }
  }
  z[0] *= pe.tf_scale;
}

struct RestartRun {
  AlmResult alm;
  double t_f = 0.0;
  double viol = 0.0;
};

struct PolishOutcome {
  int iterations = 0;
  double residual = 0.0;
};

// Gauss-Newton projection onto the constraint manifold at fixed t_f. Active
// inequality rows are kept in the residual so the step slides along, not
// through, active bounds and the path constraint.
inline PolishOutcome feasibility_polish(Transcription& tr, Vec& z, int max_iters = 12,
                                        double target = 1e-10) {
  PolishOutcome out;
  tr.set_z(z);
  auto sq_residual = [&]() {
    double v = tr.h().squaredNorm();
    for (Eigen::Index j = 0; j < tr.g().size(); ++j) {
      const double gp = std::max(0.0, tr.g()[j]);
      v += gp * gp;
    }
    return v;
  };
  double damping = 1e-9;
  for (int it = 0; it < max_iters; ++it) {
    const Vec& h = tr.h();
    const Vec& g = tr.g();
    const double max_h = h.size() ? h.cwiseAbs().maxCoeff() : 0.0;
    const double max_g = g.size() ? std::max(0.0, g.maxCoeff()) : 0.0;
    out.residual = std::max(max_h, max_g);
    if (out.residual <= target) break;

    // Only rows that are actually violated enter the residual. Rows merely
    // touching zero must stay free to move into the interior; the line
    // search metric charges for any the step pushes back out.
    std::vector<int> act;
    for (int j = 0; j < int(g.size()); ++j) {
      if (g[j] > 0.0) act.push_back(j);
    }
    Vec r(tr.n_eq() + int(act.size()));
    r.head(tr.n_eq()) = h;
    for (int k = 0; k < int(act.size()); ++k) r[tr.n_eq() + k] = std::max(0.0, g[act[k]]);

    Eigen::SparseMatrix<double> J = tr.jacobian(act, /*fix_tf=*/true);
    const Vec rhs = -J.transpose() * r;
    const Eigen::SparseMatrix<double> JtJ0 = Eigen::SparseMatrix<double>(J.transpose() * J);
    const double phi0 = sq_residual();

    // Levenberg iteration: a raw Gauss-Newton step frequently overshoots from
    // the shallow stall points the ALM leaves behind; escalating the damping
    // bends the step toward steepest descent until something sticks.
    bool accepted = false;
    for (int esc = 0; esc < 7 && !accepted; ++esc) {
      Eigen::SparseMatrix<double> JtJ = JtJ0;
      for (int d = 0; d < JtJ.rows(); ++d) JtJ.coeffRef(d, d) += damping;
      Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(JtJ);
      if (ldlt.info() != Eigen::Success) {
        damping *= 100.0;
        continue;
      }
      const Vec step = ldlt.solve(rhs);
      double alpha = 1.0;
      for (int bt = 0; bt < 6; ++bt) {
        Vec z_try = z + alpha * step;
        z_try[0] = z[0];  // t_f stays put
        tr.set_z(z_try);
        if (sq_residual() < phi0) {
          z = std::move(z_try);
          accepted = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!accepted) damping *= 100.0;
    }
    ++out.iterations;
    if (!accepted) {
      tr.set_z(z);
      break;
    }
    damping = std::max(1e-9, damping * 0.1);
  }
  const double max_h = tr.h().size() ? tr.h().cwiseAbs().maxCoeff() : 0.0;
  const double max_g = tr.g().size() ? std::max(0.0, tr.g().maxCoeff()) : 0.0;
  out.residual = std::max(max_h, max_g);
  return out;
}

// The ALM frequently stalls a decade or two short of the feasibility gate
// with the active set already settled. Two tools clean such points up:
// a Gauss-Newton projection (cheap, but helpless when the violation sits on
// a constrained arc where the correction must be shared among many active
// rows), and a short warm-started continuation at stiffer penalty, which
// distributes exactly that correction. The projection minimizes a sum of
// squares and can trade the max violation up, so each result is kept only
// when it actually helps.
inline RestartRun run_restart(const OcpSpec& spec, const Vec& z0, const AlmOptions& opt) {
  Transcription tr = transcribe(spec);
  RestartRun out;
  out.alm = solve_alm(tr, z0, opt);
  out.t_f = out.alm.z[0];
  out.viol = std::max(out.alm.max_eq, out.alm.max_ineq);

  auto try_polish = [&](const Vec& from) {
    Vec z = from;
    feasibility_polish(tr, z);
    tr.set_z(z);
    const double max_h = tr.h().size() ? tr.h().cwiseAbs().maxCoeff() : 0.0;
    const double max_g = tr.g().size() ? std::max(0.0, tr.g().maxCoeff()) : 0.0;
    if (std::max(max_h, max_g) < out.viol) {
      out.alm.z = std::move(z);
      out.viol = std::max(max_h, max_g);
      out.t_f = out.alm.z[0];
    }
  };

  try_polish(out.alm.z);
  AlmResult cur = out.alm;
  for (double mu : {1e3, 1e4}) {
    if (out.viol <= opt.feas_tol || out.viol > 1e-4) break;
    AlmOptions copt = opt;
    copt.mu_init = std::max(opt.mu_init, mu);
    copt.max_outer = 6;
    AlmResult cont = solve_alm(tr, cur.z, copt, &cur.lam_eq, &cur.lam_ineq);
    const double cv = std::max(cont.max_eq, cont.max_ineq);
    if (cv < out.viol) {
      out.alm = cont;
      out.viol = cv;
      out.t_f = cont.z[0];
    }
    try_polish(cont.z);
    cur = std::move(cont);
    if (out.viol < std::max(cur.max_eq, cur.max_ineq)) cur.z = out.alm.z;
  }
  return out;
}

// Interpolate a decision vector onto a new mesh (linear in tau; quaternion
// blocks are renormalized through the model poststep).
inline Vec interpolate_z(const Transcription& from, const Vec& z, const Transcription& to) {
  Vec out = Vec::Zero(to.dim());
  out[0] = z[0];
  const auto& ta = from.tau();
  const auto& tb = to.tau();
  for (int j = 0; j < to.nodes(); ++j) {
    const double tq = tb[j];
    auto it = std::upper_bound(ta.begin(), ta.end(), tq);
    int k = int(it - ta.begin()) - 1;
    k = std::clamp(k, 0, from.nodes() - 2);
    const double w = (tq - ta[k]) / (ta[k + 1] - ta[k]);
    Vec xq = (1.0 - w) * z.segment(from.ix(k), from.nx()) +
             w * z.segment(from.ix(k + 1), from.nx());
    if (to.model().poststep) to.model().poststep(xq);
    out.segment(to.ix(j), to.nx()) = xq;
    out.segment(to.iu(j), to.nu()) = (1.0 - w) * z.segment(from.iu(k), from.nu()) +
                                     w * z.segment(from.iu(k + 1), from.nu());
  }
  return out;
}

// Carry augmented-Lagrangian multiplier estimates onto a refined mesh so the
// re-solve keeps the parent's active set instead of rebuilding it from zero.
// Mesh refinement only inserts nodes, so every parent row has a natural image:
// defect and midpoint rows copy from the parent interval containing them,
// per-node rows interpolate linearly in tau.
inline void interpolate_multipliers(const Transcription& from, const AlmResult& cur,
                                    const Transcription& to, Vec& lam_out, Vec& nu_out) {
  const auto& ta = from.tau();
  const auto& tb = to.tau();
  auto bracket = [&](double tq) {
    auto it = std::upper_bound(ta.begin(), ta.end(), tq);
    int k = int(it - ta.begin()) - 1;
    return std::clamp(k, 0, from.nodes() - 2);
  };

  lam_out = Vec::Zero(to.n_eq());
  for (int j = 0; j + 1 < to.nodes(); ++j) {
    const int k = bracket(0.5 * (tb[j] + tb[j + 1]));
    lam_out.segment(j * to.nx(), to.nx()) = cur.lam_eq.segment(k * from.nx(), from.nx());
  }
  const int n_bc = int(to.bc_rows().size());
  lam_out.segment(to.eq_bc_offset(), n_bc) = cur.lam_eq.segment(from.eq_bc_offset(), n_bc);
  const int ne_rows = (to.n_eq() - to.eq_node_offset()) / std::max(1, to.nodes());
  for (int j = 0; j < to.nodes() && ne_rows > 0; ++j) {
    const int k = bracket(tb[j]);
    const double w = (tb[j] - ta[k]) / (ta[k + 1] - ta[k]);
    lam_out.segment(to.eq_node_offset() + j * ne_rows, ne_rows) =
        (1.0 - w) * cur.lam_eq.segment(from.eq_node_offset() + k * ne_rows, ne_rows) +
        w * cur.lam_eq.segment(from.eq_node_offset() + (k + 1) * ne_rows, ne_rows);
  }

  nu_out = Vec::Zero(to.n_ineq());
  if (to.has_path()) {
    for (int j = 0; j < to.nodes(); ++j) {
      const int k = bracket(tb[j]);
      const double w = (tb[j] - ta[k]) / (ta[k + 1] - ta[k]);
      nu_out[j] = (1.0 - w) * cur.lam_ineq[k] + w * cur.lam_ineq[k + 1];
    }
    for (int j = 0; j < to.mid_rows(); ++j) {
      const int k = bracket(0.5 * (tb[j] + tb[j + 1]));
      nu_out[to.ineq_mid_offset() + j] = cur.lam_ineq[from.ineq_mid_offset() + k];
    }
  }
  // Bound rows: two t_f rows, then a fixed-size block per node.
  const int kb = (int(from.bound_rows().size()) - 2) / from.nodes();
  nu_out[to.ineq_bound_offset()] = cur.lam_ineq[from.ineq_bound_offset()];
  nu_out[to.ineq_bound_offset() + 1] = cur.lam_ineq[from.ineq_bound_offset() + 1];
  for (int j = 0; j < to.nodes() && kb > 0; ++j) {
    const int k = bracket(tb[j]);
    const double w = (tb[j] - ta[k]) / (ta[k + 1] - ta[k]);
    for (int c = 0; c < kb; ++c) {
      nu_out[to.ineq_bound_offset() + 2 + j * kb + c] =
          (1.0 - w) * cur.lam_ineq[from.ineq_bound_offset() + 2 + k * kb + c] +
          w * cur.lam_ineq[from.ineq_bound_offset() + 2 + (k + 1) * kb + c];
    }
  }
}

}  // namespace detail

// Per-interval quality report for a solved trajectory: RK4 re-integration
// mismatch at the right endpoint, the deepest raw-margin dip along the
// re-integrated path (node margins can hide inter-node sag), and second
// differences of the path margin (large values flag constraint activity
// changes worth resolving).
struct IntervalErrorReport {
  std::vector<double> integration_error;
  std::vector<double> margin_dip;
  std::vector<double> margin_dip_pos;  // fractional position of the dip within the interval
  std::vector<double> margin_kink;
  double max_integration_error = 0.0;
};

inline IntervalErrorReport interval_error_report(const ModelFunctions& model,
                                                 const Trajectory& traj) {
  const int N = traj.nodes();
  IntervalErrorReport rep;
  rep.integration_error.assign(size_t(N - 1), 0.0);
  rep.margin_dip.assign(size_t(N - 1), std::numeric_limits<double>::infinity());
  rep.margin_dip_pos.assign(size_t(N - 1), 0.5);
  rep.margin_kink.assign(size_t(N), 0.0);
  for (int i = 0; i + 1 < N; ++i) {
    std::vector<double> tg(7);
    for (int s = 0; s < 7; ++s) tg[size_t(s)] = traj.t[i] + (traj.t[i + 1] - traj.t[i]) * s / 6.0;
    const auto res = integrate_rk4(model.rhs, traj.x[i], tg, traj.t, traj.u, 2, model.poststep);
    const double e = (res.x.back() - traj.x[size_t(i) + 1]).lpNorm<Eigen::Infinity>();
    rep.integration_error[size_t(i)] = e;
    rep.max_integration_error = std::max(rep.max_integration_error, e);
    if (model.raw_margin) {
      double dip = std::numeric_limits<double>::infinity();
      for (size_t s = 0; s < res.x.size(); ++s) {
        const double m = model.raw_margin(res.x[s]);
        if (m < dip) {
          dip = m;
          rep.margin_dip_pos[size_t(i)] = double(s) / double(res.x.size() - 1);
        }
      }
      rep.margin_dip[size_t(i)] = dip;
    }
  }
  if (!traj.margin.empty()) {
    for (int i = 1; i + 1 < N; ++i) {
      rep.margin_kink[size_t(i)] = std::abs(traj.margin[size_t(i) + 1] -
                                            2.0 * traj.margin[size_t(i)] +
                                            traj.margin[size_t(i) - 1]);
    }
  }
  return rep;
}

// Produces a refined spec with a node inserted into every flagged interval:
// at the deepest dense-margin dip when one was found there (pinning the
// margin at the exact exposure point), at the midpoint otherwise. Intervals
// adjacent to a dip are split too, since the re-solve shifts boundary arcs
// and a lone new node is easily outflanked. Returns the spec unchanged when
// nothing needs splitting, when the round budget (3) is exhausted, or when
// the node cap (8x the base count) is hit.
inline OcpSpec refine_mesh(const Trajectory& traj, const OcpSpec& spec) {
  if (spec.refinement_round >= 3) return spec;
  const int N = traj.nodes();
  const int cap = 8 * spec.solver.nodes;
  if (N >= cap) return spec;

  const auto rep = interval_error_report(make_model(spec), traj);
  const double kink_tol = 0.02;
  const double dip_tol = 2.5e-4;  // quarter of the validator's margin slack
  const int M = N - 1;
  std::vector<double> score(size_t(M), 0.0);
  std::vector<double> where(size_t(M), 0.5);
  for (int i = 0; i < M; ++i) {
    if (rep.integration_error[size_t(i)] > spec.solver.refine_tol) {
      score[size_t(i)] += rep.integration_error[size_t(i)];
    }
    const double kink = std::max(rep.margin_kink[size_t(i)], rep.margin_kink[size_t(i) + 1]);
    if (kink > kink_tol) score[size_t(i)] += kink;
    if (rep.margin_dip[size_t(i)] < -dip_tol) {
      const double depth = -rep.margin_dip[size_t(i)];
      score[size_t(i)] += depth;
      where[size_t(i)] = std::clamp(rep.margin_dip_pos[size_t(i)], 0.15, 0.85);
      if (i > 0) score[size_t(i - 1)] = std::max(score[size_t(i - 1)], 0.25 * depth);
      if (i + 1 < M) score[size_t(i + 1)] = std::max(score[size_t(i + 1)], 0.25 * depth);
    }
  }
  std::vector<std::pair<double, int>> flagged;
  for (int i = 0; i < M; ++i) {
    if (score[size_t(i)] > 0.0) flagged.emplace_back(score[size_t(i)], i);
  }
  if (flagged.empty()) return spec;

  std::stable_sort(flagged.begin(), flagged.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  // Splitting every flagged interval at once drags the re-solve far from the
  // incumbent; each round takes only the worst quarter of the mesh.
  const int budget = std::min(cap - N, std::max(6, M / 4));
  std::vector<bool> split(size_t(M), false);
  int used = 0;
  for (const auto& [sc, i] : flagged) {
    if (used >= budget) break;
    split[size_t(i)] = true;
    ++used;
  }
  if (used == 0) return spec;

  OcpSpec out = spec;
  out.mesh_tau.clear();
  for (int i = 0; i < M; ++i) {
    out.mesh_tau.push_back(traj.tau[size_t(i)]);
    if (split[size_t(i)]) {
      out.mesh_tau.push_back(traj.tau[size_t(i)] +
                             where[size_t(i)] * (traj.tau[size_t(i) + 1] - traj.tau[size_t(i)]));
    }
  }
  out.mesh_tau.push_back(traj.tau.back());
  out.refinement_round = spec.refinement_round + 1;
  return out;
}

namespace detail {

inline Trajectory assemble_trajectory(const OcpSpec& spec, Transcription& tr,
                                      const AlmResult& alm) {
  Trajectory traj;
  traj.model = spec.model;
  traj.scenario = spec.scenario;
  const Vec& z = tr.z();
  traj.t_f = z[0];
  traj.tau = tr.tau();
  traj.t.resize(traj.tau.size());
  for (size_t i = 0; i < traj.tau.size(); ++i) traj.t[i] = traj.tau[i] * traj.t_f;
  const int N = tr.nodes();
  traj.x.reserve(size_t(N));
  traj.u.reserve(size_t(N));
  for (int i = 0; i < N; ++i) {
    traj.x.push_back(z.segment(tr.ix(i), tr.nx()));
    traj.u.push_back(z.segment(tr.iu(i), tr.nu()));
  }
  if (tr.has_path()) {
    traj.margin.resize(size_t(N));
    for (int i = 0; i < N; ++i) traj.margin[size_t(i)] = tr.margin(i);
  }
  traj.defect_multipliers.reserve(size_t(N - 1));
  for (int i = 0; i + 1 < N; ++i) {
    traj.defect_multipliers.push_back(alm.lam_eq.segment(i * tr.nx(), tr.nx()));
  }
  traj.path_multipliers.assign(size_t(N), 0.0);
  if (tr.has_path()) {
    for (int i = 0; i < N; ++i) traj.path_multipliers[size_t(i)] = alm.lam_ineq[i];
  }
  return traj;
}

inline AlmOptions alm_options(const SolverSettings& s) {
  AlmOptions opt;
  opt.feas_tol = s.feas_tol;
  opt.opt_tol = s.opt_tol;
  opt.mu_init = s.mu_init;
  opt.mu_factor = s.mu_factor;
  opt.mu_max = s.mu_max;
  opt.max_outer = s.max_outer;
  opt.max_inner = s.max_inner;
  return opt;
}

}  // namespace detail

// Solves the minimum-time descent problem described by `spec`. Throws
// PlanError if no restart reaches acceptable feasibility.
inline Trajectory solve(const OcpSpec& spec_in) {
  OcpSpec spec = spec_in;
  spec.validate();
  const bool planar = spec.model == ModelKind::Planar;

  double dz = 5.0;
  const VarSpec& zvar = spec.states[2];
  if (zvar.initial && zvar.final) dz = std::abs(*zvar.final - *zvar.initial);
  double t_f0 = spec.solver.t_f_init > 0.0 ? spec.solver.t_f_init : std::max(2.0, 2.0 * dz);
  t_f0 = std::clamp(t_f0, spec.solver.t_f_min, spec.solver.t_f_max);

  Transcription master = transcribe(spec);
  const int R = spec.solver.restarts;
  const int pairs = (R + 1) / 2;
  const auto perts = detail::draw_perturbations(spec, pairs);

  const bool phi_free =
      planar && !(std::isfinite(spec.states[4].lo) && std::isfinite(spec.states[4].hi));
  std::vector<Vec> inits;
  inits.reserve(size_t(R));
  {
    // The plain straight-line start collapses into the degenerate short-time
    // well on free-roll problems; the constructed dive replaces it there.
    Vec z0 = phi_free ? detail::inverted_dive_guess(master, t_f0) : master.initial_guess(t_f0);
    master.clamp_to_bounds(z0);
    inits.push_back(std::move(z0));
  }
  for (int p = 0; int(inits.size()) < R; ++p) {
    for (double sign : {1.0, -1.0}) {
      if (int(inits.size()) >= R) break;
      Vec z = master.initial_guess(t_f0);
      detail::apply_perturbation(master, z, perts[size_t(p)], sign, planar, t_f0);
      master.clamp_to_bounds(z);
      inits.push_back(std::move(z));
    }
  }

  const AlmOptions opt = detail::alm_options(spec.solver);
  std::vector<detail::RestartRun> runs(static_cast<size_t>(R));
  const bool parallel =
      spec.solver.parallel_restarts && R > 1 && std::thread::hardware_concurrency() > 1;
  if (parallel) {
    std::vector<std::future<detail::RestartRun>> futs;
    futs.reserve(size_t(R));
    for (int k = 0; k < R; ++k) {
      futs.push_back(std::async(std::launch::async, detail::run_restart, std::cref(spec),
                                std::cref(inits[size_t(k)]), std::cref(opt)));
    }
    for (int k = 0; k < R; ++k) runs[size_t(k)] = futs[size_t(k)].get();
  } else {
    for (int k = 0; k < R; ++k) runs[size_t(k)] = detail::run_restart(spec, inits[size_t(k)], opt);
  }

  const double feas_ok = 1e-6;
  int best = 0;
  for (int k = 1; k < R; ++k) {
    const bool fk = runs[size_t(k)].viol <= feas_ok;
    const bool fb = runs[size_t(best)].viol <= feas_ok;
    if (fk && !fb) {
      best = k;
    } else if (fk == fb) {
      const bool better = fk ? (runs[size_t(k)].t_f < runs[size_t(best)].t_f)
                             : (runs[size_t(k)].viol < runs[size_t(best)].viol);
      if (better) best = k;
    }
  }

  SolveStats stats;
  stats.restarts = R;
  stats.best_restart = best;
  for (const auto& r : runs) {
    stats.outer_iterations += r.alm.outer;
    stats.inner_iterations += r.alm.inner_total;
  }

  AlmResult cur = runs[size_t(best)].alm;
  OcpSpec cur_spec = spec;
  Transcription cur_tr = transcribe(cur_spec);
  detail::feasibility_polish(cur_tr, cur.z);
  cur_tr.set_z(cur.z);

  for (int round = 0; round < spec.solver.refine_rounds; ++round) {
    Trajectory probe = detail::assemble_trajectory(cur_spec, cur_tr, cur);
    OcpSpec next_spec = refine_mesh(probe, cur_spec);
    if (next_spec.refinement_round == cur_spec.refinement_round) break;
    Transcription next_tr = transcribe(next_spec);
    Vec z_new = detail::interpolate_z(cur_tr, cur.z, next_tr);
    next_tr.clamp_to_bounds(z_new);
    // Interpolation onto the new mesh perturbs the defects; project back
    // onto the constraint manifold so the re-solve starts warm, and carry the
    // multiplier estimates over so the active set survives the transfer.
    detail::feasibility_polish(next_tr, z_new);
    Vec lam_new, nu_new;
    detail::interpolate_multipliers(cur_tr, cur, next_tr, lam_new, nu_new);
    const double cur_h = cur_tr.h().size() ? cur_tr.h().cwiseAbs().maxCoeff() : 0.0;
    const double cur_g = cur_tr.g().size() ? std::max(0.0, cur_tr.g().maxCoeff()) : 0.0;
    const double viol_ok = std::max(feas_ok, std::max(cur_h, cur_g));

    auto attempt = [&](double mu_floor, int outer_cap) {
      AlmOptions ropt = opt;
      ropt.mu_init = std::max(opt.mu_init, mu_floor);
      if (outer_cap > 0) ropt.max_outer = outer_cap;
      AlmResult r = solve_alm(next_tr, z_new, ropt, &lam_new, &nu_new);
      stats.outer_iterations += r.outer;
      stats.inner_iterations += r.inner_total;
      detail::feasibility_polish(next_tr, r.z);
      next_tr.set_z(r.z);
      return r;
    };

    // First attempt runs at mild penalty so a finer mesh may walk into a
    // faster basin the coarse one could not represent. When that wanders
    // somewhere the remaining budget cannot make feasible, retry stiff: high
    // penalty with the carried multipliers stays near the incumbent and just
    // cleans up what the new mesh flagged.
    AlmResult refined = attempt(100.0, 0);
    double rh = next_tr.h().size() ? next_tr.h().cwiseAbs().maxCoeff() : 0.0;
    double rg = next_tr.g().size() ? std::max(0.0, next_tr.g().maxCoeff()) : 0.0;
    if (std::max(rh, rg) > viol_ok) {
      refined = attempt(1e3, 8);
      rh = next_tr.h().size() ? next_tr.h().cwiseAbs().maxCoeff() : 0.0;
      rg = next_tr.g().size() ? std::max(0.0, next_tr.g().maxCoeff()) : 0.0;
    }
    // A refinement round exists to resolve the incumbent more accurately, not
    // to re-optimize: keep the previous solution when the re-solve loses
    // feasibility or drifts to a materially slower basin. Genuine accuracy
    // corrections move t_f by far less than the 5% allowance.
    if (std::max(rh, rg) > viol_ok) break;
    if (refined.z[0] > 1.05 * cur.z[0]) break;
    cur = std::move(refined);
    cur_spec = std::move(next_spec);
    cur_tr = std::move(next_tr);
    ++stats.refinement_rounds;
  }

  const double max_h = cur_tr.h().size() ? cur_tr.h().cwiseAbs().maxCoeff() : 0.0;
  const double max_g = cur_tr.g().size() ? std::max(0.0, cur_tr.g().maxCoeff()) : 0.0;
  stats.max_eq_violation = max_h;
  stats.max_ineq_violation = max_g;
  stats.objective = cur_tr.z()[0];
  stats.grad_norm = cur.grad_norm;
  // Converged here means the returned point satisfies all constraints after
  // polishing; the ALM message records how the optimization phase ended.
  stats.converged = std::max(max_h, max_g) <= feas_ok;
  stats.message = cur.message;

  if (std::max(max_h, max_g) > 1e-5) {
    stats.message = "no feasible trajectory found";
    throw PlanError("no feasible trajectory found (violation " + std::to_string(std::max(max_h, max_g)) + ")",
                    stats);
  }

  Trajectory traj = detail::assemble_trajectory(cur_spec, cur_tr, cur);
  traj.stats = stats;
  return traj;
}

}  // namespace vrsplan
