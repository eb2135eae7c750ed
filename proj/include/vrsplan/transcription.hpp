#pragma once

// Trapezoidal direct collocation of the minimum-time OCP on a normalized
// mesh tau in [0,1] with the final time as a decision variable.
//
// Decision vector layout:   z = [ t_f | x_0 .. x_{N-1} | u_0 .. u_{N-1} ]
// Equality rows:            [ defects | pinned boundary values | per-node extras ]
// Inequality rows (g<=0):   [ buffer - path margin per node
//                           | buffer - path margin per interval midpoint
//                           | variable/box bounds ]
//
// Midpoint rows evaluate the margin on the quadratic arc implied by the
// trapezoidal defects. Node-only enforcement misses sign changes of the
// in-plane wind component between nodes (the |.| cushion in the cone margin
// collapses at the crossing), so boundary-riding arcs can dip outside the
// envelope mid-interval; checking the arc midpoint halves that exposure.
//
// The evaluator caches per-node dynamics values and Jacobians so the
// augmented-Lagrangian solver can assemble weighted constraint gradients
// without forming a full Jacobian.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "vrsplan/ocp.hpp"

namespace vrsplan {

struct BoundRow {
  int z_index = 0;
  double value = 0.0;
  bool upper = true;  // g = z - value (upper) or value - z (lower)
};

struct BcRow {
  int z_index = 0;
  double value = 0.0;  // h = z - value
};

class Transcription {
 public:
  Transcription(ModelFunctions model, std::vector<double> tau, std::vector<VarSpec> states,
                std::vector<VarSpec> inputs, double t_f_min, double t_f_max,
                double margin_buffer = 0.0, double buffer_speed = 0.0)
      : model_(std::move(model)),
        tau_(std::move(tau)),
        states_(std::move(states)),
        inputs_(std::move(inputs)),
        margin_buffer_(margin_buffer),
        buffer_speed_(buffer_speed) {
    N_ = int(tau_.size());
    if (N_ < 2) throw std::invalid_argument("Transcription: mesh needs at least 2 nodes");
    nx_ = model_.nx;
    nu_ = model_.nu;
    if (int(states_.size()) != nx_ || int(inputs_.size()) != nu_) {
      throw std::invalid_argument("Transcription: variable specs do not match model dims");
    }
    dtau_.resize(N_ - 1);
    for (int i = 0; i + 1 < N_; ++i) dtau_[i] = tau_[i + 1] - tau_[i];
    n_ = 1 + N_ * (nx_ + nu_);

    // Pinned boundary values.
    for (int c = 0; c < nx_; ++c) {
      if (states_[c].initial) bc_rows_.push_back({ix(0, c), *states_[c].initial});
      if (states_[c].final) bc_rows_.push_back({ix(N_ - 1, c), *states_[c].final});
    }
    for (int c = 0; c < nu_; ++c) {
      if (inputs_[c].initial) bc_rows_.push_back({iu(0, c), *inputs_[c].initial});
      if (inputs_[c].final) bc_rows_.push_back({iu(N_ - 1, c), *inputs_[c].final});
    }

    node_eq_rows_ = 0;
    if (model_.node_eq) {
      Vec probe(nx_);
      probe.setZero();
      node_eq_rows_ = int(model_.node_eq(probe).size());
    }
    n_eq_ = (N_ - 1) * nx_ + int(bc_rows_.size()) + N_ * node_eq_rows_;

    // Box bounds as inequality rows; infinite bounds are skipped.
    bound_rows_.push_back({0, t_f_min, false});
    bound_rows_.push_back({0, t_f_max, true});
    for (int i = 0; i < N_; ++i) {
      for (int c = 0; c < nx_; ++c) {
        if (std::isfinite(states_[c].lo)) bound_rows_.push_back({ix(i, c), states_[c].lo, false});
        if (std::isfinite(states_[c].hi)) bound_rows_.push_back({ix(i, c), states_[c].hi, true});
      }
      for (int c = 0; c < nu_; ++c) {
        if (std::isfinite(inputs_[c].lo)) bound_rows_.push_back({iu(i, c), inputs_[c].lo, false});
        if (std::isfinite(inputs_[c].hi)) bound_rows_.push_back({iu(i, c), inputs_[c].hi, true});
      }
    }
    path_rows_ = model_.path_margin ? N_ : 0;
    mid_rows_ = model_.path_margin ? N_ - 1 : 0;
    n_ineq_ = path_rows_ + mid_rows_ + int(bound_rows_.size());

    f_.assign(N_, Vec::Zero(nx_));
    A_.assign(N_, Eigen::MatrixXd());
    B_.assign(N_, Eigen::MatrixXd());
    margin_.assign(N_, 0.0);
    margin_grad_.assign(N_, Vec());
    xm_.assign(size_t(std::max(0, N_ - 1)), Vec());
    margin_mid_.assign(size_t(std::max(0, N_ - 1)), 0.0);
    margin_grad_mid_.assign(size_t(std::max(0, N_ - 1)), Vec());
    node_eq_val_.assign(N_, Vec());
    node_eq_jac_.assign(N_, Eigen::MatrixXd());
    h_.resize(n_eq_);
    g_.resize(n_ineq_);
  }

  int dim() const { return n_; }
  int n_eq() const { return n_eq_; }
  int n_ineq() const { return n_ineq_; }
  int nodes() const { return N_; }
  int intervals() const { return N_ - 1; }
  int nx() const { return nx_; }
  int nu() const { return nu_; }
  const std::vector<double>& tau() const { return tau_; }
  const ModelFunctions& model() const { return model_; }
  const std::vector<BcRow>& bc_rows() const { return bc_rows_; }
  const std::vector<BoundRow>& bound_rows() const { return bound_rows_; }

  int ix(int i, int c = 0) const { return 1 + i * nx_ + c; }
  int iu(int i, int c = 0) const { return 1 + N_ * nx_ + i * nu_ + c; }

  int eq_defect_offset() const { return 0; }
  int eq_bc_offset() const { return (N_ - 1) * nx_; }
  int eq_node_offset() const { return eq_bc_offset() + int(bc_rows_.size()); }
  int ineq_path_offset() const { return 0; }
  int ineq_mid_offset() const { return path_rows_; }
  int ineq_bound_offset() const { return path_rows_ + mid_rows_; }
  int mid_rows() const { return mid_rows_; }
  bool has_path() const { return path_rows_ > 0; }

  // Straight-line initialization between pinned boundary values (components
  // without pins hold the nearest pinned value, or a bounded default).
  Vec initial_guess(double t_f0) const {
    Vec z = Vec::Zero(n_);
    z[0] = t_f0;
    for (int c = 0; c < nx_; ++c) {
      const double a = states_[c].initial ? *states_[c].initial
                                          : (states_[c].final ? *states_[c].final : fallback(states_[c]));
      const double b = states_[c].final ? *states_[c].final : a;
      for (int i = 0; i < N_; ++i) z[ix(i, c)] = a + (b - a) * tau_[i];
    }
    for (int c = 0; c < nu_; ++c) {
      const double a = inputs_[c].initial ? *inputs_[c].initial
                                          : (inputs_[c].final ? *inputs_[c].final : fallback(inputs_[c]));
      const double b = inputs_[c].final ? *inputs_[c].final : a;
      for (int i = 0; i < N_; ++i) z[iu(i, c)] = a + (b - a) * tau_[i];
    }
    return z;
  }

  void clamp_to_bounds(Vec& z) const {
    for (const auto& br : bound_rows_) {
      double& v = z[br.z_index];
      v = br.upper ? std::min(v, br.value) : std::max(v, br.value);
    }
  }

  void set_z(const Vec& z) {
    if (int(z.size()) != n_) throw std::invalid_argument("Transcription: bad decision size");
    z_ = z;
    jac_ready_ = false;
    const double t_f = z_[0];
    for (int i = 0; i < N_; ++i) {
      const Vec xi = z_.segment(ix(i), nx_);
      const Vec ui = z_.segment(iu(i), nu_);
      f_[i] = model_.rhs(xi, ui);
      if (path_rows_ > 0) margin_[i] = model_.path_margin(xi);
      if (node_eq_rows_ > 0) node_eq_val_[i] = model_.node_eq(xi);
    }
    // Defects.
    for (int i = 0; i + 1 < N_; ++i) {
      const double c = 0.5 * t_f * dtau_[i];
      h_.segment(i * nx_, nx_) =
          z_.segment(ix(i + 1), nx_) - z_.segment(ix(i), nx_) - c * (f_[i] + f_[i + 1]);
    }
    // Pinned boundary values.
    int r = eq_bc_offset();
    for (const auto& bc : bc_rows_) h_[r++] = z_[bc.z_index] - bc.value;
    // Per-node extras.
    for (int i = 0; i < N_; ++i) {
      if (node_eq_rows_ > 0) h_.segment(eq_node_offset() + i * node_eq_rows_, node_eq_rows_) = node_eq_val_[i];
    }
    // Path rows; the buffer keeps dense (inter-node) margins nonnegative.
    for (int i = 0; i < path_rows_; ++i) g_[i] = buffer_at(i) - margin_[i];
    // Midpoint rows on the quadratic arc x(s) consistent with the defects.
    for (int i = 0; i < mid_rows_; ++i) {
      const double c8 = 0.125 * t_f * dtau_[i];
      xm_[size_t(i)] = 0.5 * (z_.segment(ix(i), nx_) + z_.segment(ix(i + 1), nx_)) +
                       c8 * (f_[i] - f_[i + 1]);
      margin_mid_[size_t(i)] = model_.path_margin(xm_[size_t(i)]);
      g_[path_rows_ + i] = buffer_mid_at(i) - margin_mid_[size_t(i)];
    }
    // Bound rows.
    int s = ineq_bound_offset();
    for (const auto& br : bound_rows_) {
      g_[s++] = br.upper ? (z_[br.z_index] - br.value) : (br.value - z_[br.z_index]);
    }
  }

  const Vec& z() const { return z_; }
  double objective() const { return z_[0]; }
  const Vec& h() const { return h_; }
  const Vec& g() const { return g_; }
  double margin(int i) const { return margin_[i]; }
  double margin_mid(int i) const { return margin_mid_[size_t(i)]; }
  const Vec& midpoint_state(int i) const { return xm_[size_t(i)]; }
  const Vec& node_rhs(int i) const { return f_[i]; }

  // Effective path-margin floor at node i. Scaling by squared speed keeps the
  // rest state feasible (the envelope boundary passes through it, and
  // boundary conditions commonly pin it) while boundary-riding arcs at speed
  // get the full buffer. Endpoints are exempt outright.
  double buffer_at(int i) const {
    if (margin_buffer_ == 0.0 || i == 0 || i == N_ - 1) return 0.0;
    if (buffer_speed_ <= 0.0 || model_.velocity_idx.empty()) return margin_buffer_;
    const double vr2 = buffer_speed_ * buffer_speed_;
    double q = 0.0;
    for (int c : model_.velocity_idx) {
      const double v = z_[ix(i, c)];
      q += v * v;
    }
    return margin_buffer_ * q / (q + vr2);
  }

  // Floor for midpoint rows. The speed scaling alone keeps near-rest
  // midpoints feasible (margin capacity grows linearly with speed, the
  // buffer only quadratically), so no endpoint exemption is needed.
  double buffer_mid_at(int i) const {
    if (margin_buffer_ == 0.0) return 0.0;
    if (buffer_speed_ <= 0.0 || model_.velocity_idx.empty()) return margin_buffer_;
    const double vr2 = buffer_speed_ * buffer_speed_;
    double q = 0.0;
    for (int c : model_.velocity_idx) {
      const double v = xm_[size_t(i)][c];
      q += v * v;
    }
    return margin_buffer_ * q / (q + vr2);
  }

  // Gradient of wf * t_f + wh . h + wg . g at the current point.
  Vec weighted_gradient(double wf, const Vec& wh, const Vec& wg) {
    ensure_jacobians();
    Vec grad = Vec::Zero(n_);
    grad[0] += wf;
    const double t_f = z_[0];
    for (int i = 0; i + 1 < N_; ++i) {
      const auto w = wh.segment(i * nx_, nx_);
      const double c = 0.5 * t_f * dtau_[i];
      grad.segment(ix(i + 1), nx_) += w - c * (A_[i + 1].transpose() * w);
      grad.segment(ix(i), nx_) += -w - c * (A_[i].transpose() * w);
      grad.segment(iu(i + 1), nu_) += -c * (B_[i + 1].transpose() * w);
      grad.segment(iu(i), nu_) += -c * (B_[i].transpose() * w);
      grad[0] += -0.5 * dtau_[i] * (f_[i] + f_[i + 1]).dot(w);
    }
    int r = eq_bc_offset();
    for (const auto& bc : bc_rows_) grad[bc.z_index] += wh[r++];
    if (node_eq_rows_ > 0) {
      for (int i = 0; i < N_; ++i) {
        const auto w = wh.segment(eq_node_offset() + i * node_eq_rows_, node_eq_rows_);
        grad.segment(ix(i), nx_) += node_eq_jac_[i].transpose() * w;
      }
    }
    for (int i = 0; i < path_rows_; ++i) {
      if (wg[i] != 0.0) {
        grad.segment(ix(i), nx_) -= wg[i] * margin_grad_[i];
        add_buffer_grad(i, wg[i], grad);
      }
    }
    for (int i = 0; i < mid_rows_; ++i) {
      const double w = wg[path_rows_ + i];
      if (w == 0.0) continue;
      const Vec G = mid_row_state_grad(i);
      const double c8 = 0.125 * t_f * dtau_[i];
      grad.segment(ix(i), nx_) += w * (0.5 * G + c8 * (A_[i].transpose() * G));
      grad.segment(ix(i + 1), nx_) += w * (0.5 * G - c8 * (A_[i + 1].transpose() * G));
      grad.segment(iu(i), nu_) += (w * c8) * (B_[i].transpose() * G);
      grad.segment(iu(i + 1), nu_) += (-w * c8) * (B_[i + 1].transpose() * G);
      grad[0] += w * 0.125 * dtau_[i] * (f_[i] - f_[i + 1]).dot(G);
    }
    int s = ineq_bound_offset();
    for (const auto& br : bound_rows_) {
      const double w = wg[s++];
      if (w != 0.0) grad[br.z_index] += br.upper ? w : -w;
    }
    return grad;
  }

  // Sparse Jacobian of [h ; selected g rows] at the current point. When
  // fix_tf is set the t_f column is omitted (treated as constant).
  Eigen::SparseMatrix<double> jacobian(const std::vector<int>& ineq_rows, bool fix_tf) {
    ensure_jacobians();
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(size_t(n_eq_) * (2 * nx_ + nu_ + 2));
    const double t_f = z_[0];
    for (int i = 0; i + 1 < N_; ++i) {
      const double c = 0.5 * t_f * dtau_[i];
      const int r0 = i * nx_;
      for (int a = 0; a < nx_; ++a) {
        for (int b = 0; b < nx_; ++b) {
          const double va = -((a == b) ? 1.0 : 0.0) - c * A_[i](a, b);
          const double vb = ((a == b) ? 1.0 : 0.0) - c * A_[i + 1](a, b);
          if (va != 0.0) trips.emplace_back(r0 + a, ix(i, b), va);
          if (vb != 0.0) trips.emplace_back(r0 + a, ix(i + 1, b), vb);
        }
        for (int b = 0; b < nu_; ++b) {
          const double va = -c * B_[i](a, b);
          const double vb = -c * B_[i + 1](a, b);
          if (va != 0.0) trips.emplace_back(r0 + a, iu(i, b), va);
          if (vb != 0.0) trips.emplace_back(r0 + a, iu(i + 1, b), vb);
        }
        if (!fix_tf) {
          const double vt = -0.5 * dtau_[i] * (f_[i][a] + f_[i + 1][a]);
          if (vt != 0.0) trips.emplace_back(r0 + a, 0, vt);
        }
      }
    }
    int r = eq_bc_offset();
    for (const auto& bc : bc_rows_) trips.emplace_back(r++, bc.z_index, 1.0);
    if (node_eq_rows_ > 0) {
      for (int i = 0; i < N_; ++i) {
        const int r0 = eq_node_offset() + i * node_eq_rows_;
        for (int a = 0; a < node_eq_rows_; ++a) {
          for (int b = 0; b < nx_; ++b) {
            const double v = node_eq_jac_[i](a, b);
            if (v != 0.0) trips.emplace_back(r0 + a, ix(i, b), v);
          }
        }
      }
    }
    int row = n_eq_;
    for (int j : ineq_rows) {
      if (j < path_rows_) {
        const int i = j;
        for (int b = 0; b < nx_; ++b) {
          const double v = -margin_grad_[i][b];
          if (v != 0.0) trips.emplace_back(row, ix(i, b), v);
        }
        const double d = buffer_slope(i);
        if (d != 0.0) {
          for (int c : model_.velocity_idx) {
            trips.emplace_back(row, ix(i, c), d * 2.0 * z_[ix(i, c)]);
          }
        }
      } else if (j < path_rows_ + mid_rows_) {
        const int i = j - path_rows_;
        const Vec G = mid_row_state_grad(i);
        const double c8 = 0.125 * t_f * dtau_[i];
        const Vec gx0 = 0.5 * G + c8 * (A_[i].transpose() * G);
        const Vec gx1 = 0.5 * G - c8 * (A_[i + 1].transpose() * G);
        const Vec gu0 = c8 * (B_[i].transpose() * G);
        const Vec gu1 = -c8 * (B_[i + 1].transpose() * G);
        for (int b = 0; b < nx_; ++b) {
          if (gx0[b] != 0.0) trips.emplace_back(row, ix(i, b), gx0[b]);
          if (gx1[b] != 0.0) trips.emplace_back(row, ix(i + 1, b), gx1[b]);
        }
        for (int b = 0; b < nu_; ++b) {
          if (gu0[b] != 0.0) trips.emplace_back(row, iu(i, b), gu0[b]);
          if (gu1[b] != 0.0) trips.emplace_back(row, iu(i + 1, b), gu1[b]);
        }
        if (!fix_tf) {
          const double vt = 0.125 * dtau_[i] * (f_[i] - f_[i + 1]).dot(G);
          if (vt != 0.0) trips.emplace_back(row, 0, vt);
        }
      } else {
        const auto& br = bound_rows_[j - path_rows_ - mid_rows_];
        if (!(fix_tf && br.z_index == 0)) {
          trips.emplace_back(row, br.z_index, br.upper ? 1.0 : -1.0);
        }
      }
      ++row;
    }
    Eigen::SparseMatrix<double> J(row, n_);
    J.setFromTriplets(trips.begin(), trips.end());
    return J;
  }

 private:
  static double fallback(const VarSpec& vs) {
    if (std::isfinite(vs.lo) && std::isfinite(vs.hi)) return 0.5 * (vs.lo + vs.hi);
    if (std::isfinite(vs.lo)) return vs.lo;
    if (std::isfinite(vs.hi)) return vs.hi;
    return 0.0;
  }

  // d(buffer_at(i))/dq, where q is the squared speed; 0 when the buffer is
  // constant or exempt at this node.
  double buffer_slope(int i) const {
    if (margin_buffer_ == 0.0 || i == 0 || i == N_ - 1) return 0.0;
    if (buffer_speed_ <= 0.0 || model_.velocity_idx.empty()) return 0.0;
    const double vr2 = buffer_speed_ * buffer_speed_;
    double q = 0.0;
    for (int c : model_.velocity_idx) {
      const double v = z_[ix(i, c)];
      q += v * v;
    }
    const double denom = q + vr2;
    return margin_buffer_ * vr2 / (denom * denom);
  }

  void add_buffer_grad(int i, double w, Vec& grad) const {
    const double d = buffer_slope(i);
    if (d == 0.0) return;
    for (int c : model_.velocity_idx) grad[ix(i, c)] += w * d * 2.0 * z_[ix(i, c)];
  }

  // d(buffer_mid - margin)/d(x_mid) for midpoint row i; callers chain it
  // through the arc midpoint's dependence on the interval endpoints and t_f.
  Vec mid_row_state_grad(int i) const {
    Vec G = -margin_grad_mid_[size_t(i)];
    if (margin_buffer_ != 0.0 && buffer_speed_ > 0.0 && !model_.velocity_idx.empty()) {
      const double vr2 = buffer_speed_ * buffer_speed_;
      double q = 0.0;
      for (int c : model_.velocity_idx) {
        const double v = xm_[size_t(i)][c];
        q += v * v;
      }
      const double denom = q + vr2;
      const double d = margin_buffer_ * vr2 / (denom * denom);
      for (int c : model_.velocity_idx) G[c] += d * 2.0 * xm_[size_t(i)][c];
    }
    return G;
  }

  void ensure_jacobians() {
    if (jac_ready_) return;
    for (int i = 0; i < N_; ++i) {
      const Vec xi = z_.segment(ix(i), nx_);
      const Vec ui = z_.segment(iu(i), nu_);
      if (model_.rhs_jacobians) {
        model_.rhs_jacobians(xi, ui, A_[i], B_[i]);
      } else {
        fd_rhs_jacobians(xi, ui, A_[i], B_[i]);
      }
      if (path_rows_ > 0) {
        if (model_.path_margin_grad) {
          model_.path_margin_grad(xi, margin_grad_[i]);
        } else {
          fd_margin_grad(xi, margin_grad_[i]);
        }
      }
      if (node_eq_rows_ > 0) {
        if (model_.node_eq_jac) {
          model_.node_eq_jac(xi, node_eq_jac_[i]);
        } else {
          fd_node_eq_jac(xi, node_eq_jac_[i]);
        }
      }
    }
    for (int i = 0; i < mid_rows_; ++i) {
      if (model_.path_margin_grad) {
        model_.path_margin_grad(xm_[size_t(i)], margin_grad_mid_[size_t(i)]);
      } else {
        fd_margin_grad(xm_[size_t(i)], margin_grad_mid_[size_t(i)]);
      }
    }
    jac_ready_ = true;
  }

  void fd_rhs_jacobians(const Vec& x, const Vec& u, Eigen::MatrixXd& A, Eigen::MatrixXd& B) const {
    A.resize(nx_, nx_);
    B.resize(nx_, nu_);
    Vec xp = x, xm = x, up = u, um = u;
    for (int c = 0; c < nx_; ++c) {
      const double step = 1e-6 * (1.0 + std::abs(x[c]));
      xp[c] = x[c] + step;
      xm[c] = x[c] - step;
      A.col(c) = (model_.rhs(xp, u) - model_.rhs(xm, u)) / (2.0 * step);
      xp[c] = x[c];
      xm[c] = x[c];
    }
    for (int c = 0; c < nu_; ++c) {
      const double step = 1e-6 * (1.0 + std::abs(u[c]));
      up[c] = u[c] + step;
      um[c] = u[c] - step;
      B.col(c) = (model_.rhs(x, up) - model_.rhs(x, um)) / (2.0 * step);
      up[c] = u[c];
      um[c] = u[c];
    }
  }

  void fd_margin_grad(const Vec& x, Vec& grad) const {
    grad.resize(nx_);
    Vec xp = x, xm = x;
    for (int c = 0; c < nx_; ++c) {
      const double step = 1e-6 * (1.0 + std::abs(x[c]));
      xp[c] = x[c] + step;
      xm[c] = x[c] - step;
      grad[c] = (model_.path_margin(xp) - model_.path_margin(xm)) / (2.0 * step);
      xp[c] = x[c];
      xm[c] = x[c];
    }
  }

  void fd_node_eq_jac(const Vec& x, Eigen::MatrixXd& J) const {
    J.resize(node_eq_rows_, nx_);
    Vec xp = x, xm = x;
    for (int c = 0; c < nx_; ++c) {
      const double step = 1e-6 * (1.0 + std::abs(x[c]));
      xp[c] = x[c] + step;
      xm[c] = x[c] - step;
      J.col(c) = (model_.node_eq(xp) - model_.node_eq(xm)) / (2.0 * step);
      xp[c] = x[c];
      xm[c] = x[c];
    }
  }

  ModelFunctions model_;
  std::vector<double> tau_, dtau_;
  std::vector<VarSpec> states_, inputs_;
  int N_ = 0, nx_ = 0, nu_ = 0, n_ = 0, n_eq_ = 0, n_ineq_ = 0;
  int node_eq_rows_ = 0, path_rows_ = 0, mid_rows_ = 0;
  double margin_buffer_ = 0.0;
  double buffer_speed_ = 0.0;
  std::vector<BcRow> bc_rows_;
  std::vector<BoundRow> bound_rows_;

  Vec z_;
  bool jac_ready_ = false;
  std::vector<Vec> f_;
  std::vector<Eigen::MatrixXd> A_, B_;
  std::vector<double> margin_;
  std::vector<Vec> margin_grad_;
  std::vector<Vec> xm_;
  std::vector<double> margin_mid_;
  std::vector<Vec> margin_grad_mid_;
  std::vector<Vec> node_eq_val_;
  std::vector<Eigen::MatrixXd> node_eq_jac_;
  Vec h_, g_;
};

// Convenience: transcribe an OCP spec on its mesh.
inline Transcription transcribe(const OcpSpec& spec) {
  spec.validate();
  const double v_h = hover_induced_velocity(spec.rotor);
  return Transcription(make_model(spec), spec.mesh(), spec.states, spec.inputs,
                       spec.solver.t_f_min, spec.solver.t_f_max, spec.solver.margin_buffer,
                       kBufferSpeedFrac * v_h);
}

}  // namespace vrsplan
