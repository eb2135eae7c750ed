#pragma once

// Dense augmented-Lagrangian solver over a generic constrained problem:
//
//   min f(z)   s.t.  h(z) = 0,  g(z) <= 0
//
// The problem type must provide:
//   int dim();  void set_z(const Vec&);  double objective();
//   const Vec& h();  const Vec& g();
//   Vec weighted_gradient(double wf, const Vec& wh, const Vec& wg);
//
// Inner iterations minimize the augmented Lagrangian with L-BFGS and a strong
// Wolfe line search; outer iterations update multipliers (safeguarded) and
// the penalty. Everything is deterministic for a given starting point.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace vrsplan {

using Vec = Eigen::VectorXd;

struct AlmOptions {
  double feas_tol = 1e-8;
  double opt_tol = 1e-6;
  double mu_init = 10.0;
  double mu_factor = 5.0;
  double mu_max = 1e7;
  int max_outer = 40;
  int max_inner = 1500;
  int lbfgs_mem = 12;
  double multiplier_cap = 1e10;
};

struct AlmResult {
  Vec z;
  Vec lam_eq;    // equality multiplier estimates
  Vec lam_ineq;  // inequality multiplier estimates (>= 0)
  bool converged = false;
  int outer = 0;
  int inner_total = 0;
  double objective = 0.0;
  double max_eq = 0.0;    // final max |h|
  double max_ineq = 0.0;  // final max(g, 0)
  double grad_norm = 0.0;
  std::string message;
};

namespace detail {

template <class Problem>
double al_value_grad(Problem& prob, const Vec& z, const Vec& lam, const Vec& nu, double mu,
                     Vec* grad) {
  prob.set_z(z);
  const Vec& h = prob.h();
  const Vec& g = prob.g();
  double val = prob.objective();
  val += lam.dot(h) + 0.5 * mu * h.squaredNorm();
  Vec wg(g.size());
  for (Eigen::Index j = 0; j < g.size(); ++j) {
    const double t = nu[j] + mu * g[j];
    if (t > 0.0) {
      val += (t * t - nu[j] * nu[j]) / (2.0 * mu);
      wg[j] = t;
    } else {
      val += -nu[j] * nu[j] / (2.0 * mu);
      wg[j] = 0.0;
    }
  }
  if (grad) {
    const Vec wh = lam + mu * h;
    *grad = prob.weighted_gradient(1.0, wh, wg);
  }
  return val;
}

struct LbfgsStats {
  int iters = 0;
  double final_grad_norm = 0.0;
  double final_value = 0.0;
};

// L-BFGS with strong Wolfe line search, minimizing the augmented Lagrangian
// at fixed multipliers/penalty. Returns the best point found.
template <class Problem>
LbfgsStats lbfgs_minimize(Problem& prob, Vec& z, const Vec& lam, const Vec& nu, double mu,
                          double grad_tol, int max_iters, int mem) {
  const double c1 = 1e-4, c2 = 0.9;
  LbfgsStats stats;
  Vec grad;
  double val = al_value_grad(prob, z, lam, nu, mu, &grad);

  std::vector<Vec> S, Y;
  std::vector<double> rho;
  double gamma = 1.0;

  for (int it = 0; it < max_iters; ++it) {
    stats.final_grad_norm = grad.lpNorm<Eigen::Infinity>();
    if (stats.final_grad_norm <= grad_tol) break;

    // Two-loop recursion.
    Vec d = -grad;
    const int m = int(S.size());
    std::vector<double> alpha(m);
    for (int i = m - 1; i >= 0; --i) {
      alpha[i] = rho[i] * S[i].dot(d);
      d -= alpha[i] * Y[i];
    }
    d *= gamma;
    for (int i = 0; i < m; ++i) {
      const double beta = rho[i] * Y[i].dot(d);
      d += (alpha[i] - beta) * S[i];
    }

    double d0 = grad.dot(d);
    if (!(d0 < 0.0)) {  // not a descent direction; reset memory
      S.clear();
      Y.clear();
      rho.clear();
      d = -grad;
      d0 = grad.dot(d);
      gamma = 1.0;
    }

    // Strong Wolfe line search.
    const double f0 = val;
    double a_prev = 0.0, f_prev = f0;
    double a = 1.0;
    double a_lo = -1.0, a_hi = -1.0, f_lo = 0.0;
    bool have_bracket = false;
    Vec g_trial;
    double f_trial = f0;
    double a_accept = -1.0;
    Vec z_trial;

    for (int ls = 0; ls < 20; ++ls) {
      z_trial = z + a * d;
      f_trial = al_value_grad(prob, z_trial, lam, nu, mu, &g_trial);
      if (f_trial > f0 + c1 * a * d0 || (ls > 0 && f_trial >= f_prev)) {
        a_lo = a_prev;
        f_lo = f_prev;
        a_hi = a;
        have_bracket = true;
        break;
      }
      const double dphi = g_trial.dot(d);
      if (std::abs(dphi) <= -c2 * d0) {
        a_accept = a;
        break;
      }
      if (dphi >= 0.0) {
        a_lo = a;
        f_lo = f_trial;
        a_hi = a_prev;
        have_bracket = true;
        break;
      }
      a_prev = a;
      f_prev = f_trial;
      a = std::min(2.5 * a, 1e8);
    }

    if (a_accept < 0.0 && have_bracket) {
      for (int zi = 0; zi < 25; ++zi) {
        a = 0.5 * (a_lo + a_hi);
        z_trial = z + a * d;
        f_trial = al_value_grad(prob, z_trial, lam, nu, mu, &g_trial);
        if (f_trial > f0 + c1 * a * d0 || f_trial >= f_lo) {
          a_hi = a;
        } else {
          const double dphi = g_trial.dot(d);
          if (std::abs(dphi) <= -c2 * d0) {
            a_accept = a;
            break;
          }
          if (dphi * (a_hi - a_lo) >= 0.0) a_hi = a_lo;
          a_lo = a;
          f_lo = f_trial;
        }
        if (std::abs(a_hi - a_lo) < 1e-14 * (1.0 + std::abs(a_lo))) break;
      }
      if (a_accept < 0.0 && f_trial < f0) a_accept = a;  // sufficient decrease only
    }
    if (a_accept < 0.0) {
      // Line search failed; take any simple decrease along d.
      bool ok = false;
      a = 1.0;
      for (int bt = 0; bt < 30; ++bt) {
        z_trial = z + a * d;
        f_trial = al_value_grad(prob, z_trial, lam, nu, mu, &g_trial);
        if (f_trial < f0 + c1 * a * d0) {
          ok = true;
          break;
        }
        a *= 0.3;
      }
      if (!ok) {
        ++stats.iters;
        break;  // stuck; outer loop will adjust penalty/multipliers
      }
      a_accept = a;
    }

    const Vec s = z_trial - z;
    const Vec y = g_trial - grad;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      S.push_back(s);
      Y.push_back(y);
      rho.push_back(1.0 / sy);
      gamma = sy / y.squaredNorm();
      if (int(S.size()) > mem) {
        S.erase(S.begin());
        Y.erase(Y.begin());
        rho.erase(rho.begin());
      }
    }
    z = z_trial;
    val = f_trial;
    grad = g_trial;
    ++stats.iters;
  }
  stats.final_value = val;
  stats.final_grad_norm = grad.lpNorm<Eigen::Infinity>();
  // Leave the problem evaluated at the returned point.
  prob.set_z(z);
  return stats;
}

}  // namespace detail

template <class Problem>
AlmResult solve_alm(Problem& prob, const Vec& z0, const AlmOptions& opt, const Vec* lam_warm = nullptr,
                    const Vec* nu_warm = nullptr) {
  AlmResult res;
  Vec z = z0;
  prob.set_z(z);
  Vec lam = lam_warm && lam_warm->size() == prob.h().size() ? *lam_warm
                                                            : Vec::Zero(prob.h().size());
  Vec nu = nu_warm && nu_warm->size() == prob.g().size() ? *nu_warm : Vec::Zero(prob.g().size());
  double mu = opt.mu_init;
  double omega = 1e-2;
  double eta = 0.1;

  double viol = 0.0, grad_norm = 0.0;
  double prev_obj = std::numeric_limits<double>::infinity();
  double prev_viol = std::numeric_limits<double>::infinity();
  int stall = 0;
  for (int outer = 0; outer < opt.max_outer; ++outer) {
    res.outer = outer + 1;
    const auto st = detail::lbfgs_minimize(prob, z, lam, nu, mu, omega, opt.max_inner, opt.lbfgs_mem);
    res.inner_total += st.iters;
    grad_norm = st.final_grad_norm;

    const Vec& h = prob.h();
    const Vec& g = prob.g();
    const double max_h = h.size() ? h.cwiseAbs().maxCoeff() : 0.0;
    const double max_g = g.size() ? std::max(0.0, g.maxCoeff()) : 0.0;
    viol = std::max(max_h, max_g);

    // Outer iterations that barely move the objective and no longer reduce
    // the violation are burning the inner budget on a plateau; three in a row
    // end the solve (the caller polishes feasibility separately).
    const double obj_now = prob.objective();
    const bool no_obj = std::abs(obj_now - prev_obj) <= 1e-4 * (1.0 + std::abs(obj_now));
    const bool no_viol = viol >= 0.5 * prev_viol || viol <= 10.0 * opt.feas_tol;
    stall = ((no_obj && no_viol) || st.iters <= 1) ? stall + 1 : 0;
    prev_obj = obj_now;
    prev_viol = viol;
    if (stall >= 3) {
      res.message = "stalled";
      break;
    }

    if (viol <= std::max(eta, opt.feas_tol)) {
      lam += mu * h;
      for (Eigen::Index j = 0; j < g.size(); ++j) nu[j] = std::max(0.0, nu[j] + mu * g[j]);
      lam = lam.cwiseMax(-opt.multiplier_cap).cwiseMin(opt.multiplier_cap);
      nu = nu.cwiseMin(opt.multiplier_cap);
      if (viol <= opt.feas_tol && grad_norm <= opt.opt_tol) {
        res.converged = true;
        break;
      }
      eta = std::max(0.02 * opt.feas_tol, eta / std::pow(mu, 0.9));
      omega = std::max(0.2 * opt.opt_tol, 0.2 * omega);
    } else {
      mu = std::min(mu * opt.mu_factor, opt.mu_max);
      eta = std::max(0.02 * opt.feas_tol, 0.1 / std::pow(mu, 0.1));
      omega = std::max(0.2 * opt.opt_tol, std::min(omega, 1.0 / mu));
    }
  }

  prob.set_z(z);
  res.z = z;
  res.lam_eq = lam;
  res.lam_ineq = nu;
  res.objective = prob.objective();
  res.max_eq = prob.h().size() ? prob.h().cwiseAbs().maxCoeff() : 0.0;
  res.max_ineq = prob.g().size() ? std::max(0.0, prob.g().maxCoeff()) : 0.0;
  res.grad_norm = grad_norm;
  if (res.converged) {
    res.message = "converged";
  } else if (res.message.empty()) {
    res.message = "iteration limit";
  }
  return res;
}

}  // namespace vrsplan
