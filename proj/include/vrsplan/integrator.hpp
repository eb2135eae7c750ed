#pragma once

// Fixed-step RK4 integration of x' = f(x, u) with a piecewise-linear input
// schedule. States and inputs are flat Eigen vectors; an optional post-step
// hook lets callers re-project states (e.g. quaternion renormalization).

#include <Eigen/Dense>
#include <functional>
#include <stdexcept>
#include <vector>

namespace vrsplan {

using Vec = Eigen::VectorXd;

using RhsFn = std::function<Vec(const Vec& x, const Vec& u)>;
using PostStepFn = std::function<void(Vec& x)>;

// One RK4 step over [t, t+h]; u0/u1 are the inputs at the step endpoints and
// are interpolated linearly inside the step.
inline Vec rk4_step(const RhsFn& rhs, const Vec& x, const Vec& u0, const Vec& u1, double h) {
  const Vec um = 0.5 * (u0 + u1);
  const Vec k1 = rhs(x, u0);
  const Vec k2 = rhs(x + 0.5 * h * k1, um);
  const Vec k3 = rhs(x + 0.5 * h * k2, um);
  const Vec k4 = rhs(x + h * k3, u1);
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Piecewise-linear interpolation over sample times `t` (strictly increasing).
inline Vec interp_linear(const std::vector<double>& t, const std::vector<Vec>& v, double tq) {
  if (t.empty() || t.size() != v.size()) {
    throw std::invalid_argument("interp_linear: empty or mismatched samples");
  }
  if (tq <= t.front()) return v.front();
  if (tq >= t.back()) return v.back();
  const auto it = std::upper_bound(t.begin(), t.end(), tq);
  const size_t i = size_t(it - t.begin()) - 1;
  const double s = (tq - t[i]) / (t[i + 1] - t[i]);
  return (1.0 - s) * v[i] + s * v[i + 1];
}

struct IntegrationResult {
  std::vector<double> t;
  std::vector<Vec> x;
};

// Integrates from x0 over the time grid `t_grid` (strictly increasing),
// splitting each grid interval into `substeps` RK4 steps. Inputs are sampled
// from the piecewise-linear schedule (t_in, u_in).
inline IntegrationResult integrate_rk4(const RhsFn& rhs, const Vec& x0,
                                       const std::vector<double>& t_grid,
                                       const std::vector<double>& t_in,
                                       const std::vector<Vec>& u_in, int substeps = 1,
                                       const PostStepFn& post = {}) {
  if (t_grid.size() < 2) throw std::invalid_argument("integrate_rk4: need at least two times");
  if (substeps < 1) throw std::invalid_argument("integrate_rk4: substeps must be >= 1");
  for (size_t i = 0; i + 1 < t_grid.size(); ++i) {
    if (!(t_grid[i + 1] > t_grid[i])) {
      throw std::invalid_argument("integrate_rk4: time grid must be strictly increasing");
    }
  }
  IntegrationResult out;
  out.t.reserve(t_grid.size());
  out.x.reserve(t_grid.size());
  Vec x = x0;
  out.t.push_back(t_grid.front());
  out.x.push_back(x);
  for (size_t i = 0; i + 1 < t_grid.size(); ++i) {
    const double h = (t_grid[i + 1] - t_grid[i]) / substeps;
    for (int s = 0; s < substeps; ++s) {
      const double ta = t_grid[i] + s * h;
      const Vec ua = interp_linear(t_in, u_in, ta);
      const Vec ub = interp_linear(t_in, u_in, ta + h);
      x = rk4_step(rhs, x, ua, ub, h);
      if (post) post(x);
    }
    out.t.push_back(t_grid[i + 1]);
    out.x.push_back(x);
  }
  return out;
}

}  // namespace vrsplan
