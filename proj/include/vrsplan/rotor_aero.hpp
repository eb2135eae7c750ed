#pragma once

// Momentum-theory induced-velocity model for a fixed-pitch rotor disk, plus
// descent-regime classification.
//
// Conventions (fixed project-wide):
//   - SI units throughout (N, kg, m, s, rad).
//   - DiskVelocity is the air velocity seen by the disk, resolved in the disk
//     plane: `horizontal` is the in-plane airspeed magnitude component
//     (sign irrelevant, only |horizontal| enters any formula), `climb` is the
//     axial component, positive when the rotor climbs through still air.
//   - All classification thresholds are normalized by the hover induced
//     velocity v_h.

#include <cmath>
#include <stdexcept>
#include <string>

namespace vrsplan {

struct RotorParams {
  double hover_thrust = 4.905;   // thrust carried by one rotor in hover [N]
  double air_density = 1.2;      // [kg/m^3]
  double disk_diameter = 0.2;    // [m]
  double onera_k = 6.0;          // horizontal-velocity weighting of the tip-vortex criterion
  double eps_vrs = 0.4;          // vortex-ring-state threshold on epsilon (normalized)
  double eps_tws = 0.2;          // turbulent-wake-state threshold on epsilon (normalized)
  double cone_angle = 20.0 * M_PI / 180.0;  // half-angle of the simplified descent cone [rad]

  void validate() const {
    auto require = [](bool ok, const char* what) {
      if (!ok) throw std::invalid_argument(std::string("RotorParams: ") + what);
    };
    require(std::isfinite(hover_thrust) && hover_thrust > 0.0, "hover_thrust must be > 0");
    require(std::isfinite(air_density) && air_density > 0.0, "air_density must be > 0");
    require(std::isfinite(disk_diameter) && disk_diameter > 0.0, "disk_diameter must be > 0");
    require(std::isfinite(onera_k) && onera_k > 0.0, "onera_k must be > 0");
    require(std::isfinite(eps_vrs) && eps_vrs > 0.0, "eps_vrs must be > 0");
    require(std::isfinite(eps_tws) && eps_tws > 0.0 && eps_tws < eps_vrs,
            "eps_tws must lie in (0, eps_vrs)");
    require(std::isfinite(cone_angle) && cone_angle > 0.0 && cone_angle < M_PI / 2.0,
            "cone_angle must lie in (0, pi/2)");
  }

  double disk_area() const {
    const double r = disk_diameter / 2.0;
    return M_PI * r * r;
  }
};

struct DiskVelocity {
  double horizontal = 0.0;  // in-plane airspeed [m/s]
  double climb = 0.0;       // axial airspeed, climb-positive [m/s]
};

enum class Regime {
  Normal,                // allowed
  Vrs,                   // vortex ring state (prohibited)
  Tws,                   // turbulent wake state (prohibited, subset of the VRS inequality)
  ProhibitedSimplified,  // outside the simplified descent cone (prohibited)
};

inline const char* to_string(Regime r) {
  switch (r) {
    case Regime::Normal: return "Normal";
    case Regime::Vrs: return "VRS";
    case Regime::Tws: return "TWS";
    case Regime::ProhibitedSimplified: return "ProhibitedSimplified";
  }
  return "?";
}

// Label plus a dimensionless signed distance to the governing boundary
// (>= 0 means allowed by that boundary).
struct RegimeLabel {
  Regime regime = Regime::Normal;
  double margin = 0.0;
};

inline double hover_induced_velocity(const RotorParams& p) {
  p.validate();
  return std::sqrt(p.hover_thrust / (2.0 * p.air_density * p.disk_area()));
}

class SolveError : public std::runtime_error {
 public:
  SolveError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

namespace detail {

// Normalized momentum relation: root x > 0 of  x * sqrt(u^2 + (x + w)^2) = 1,
// where u = |v_H|/v_h >= 0, w = v_z/v_h, x = v_i/v_h.
struct InducedRoot {
  double u = 0.0, w = 0.0;

  double f(double x) const { return x * std::sqrt(u * u + (x + w) * (x + w)) - 1.0; }

  // Polynomial form with the same positive roots; friendlier Newton iterate.
  double F(double x) const {
    const double s = x + w;
    return x * x * (u * u + s * s) - 1.0;
  }
  double dF(double x) const {
    const double s = x + w;
    return 2.0 * x * (u * u + s * s) + 2.0 * x * x * s;
  }

  double bisect(double lo, double hi) const {
    // Assumes F(lo) < 0 < F(hi) or the reverse.
    double flo = F(lo);
    for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + hi); ++it) {
      const double mid = 0.5 * (lo + hi);
      const double fm = F(mid);
      if ((fm < 0.0) == (flo < 0.0)) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
      }
    }
    return 0.5 * (lo + hi);
  }

  double polish(double x, double lo, double hi) const {
    for (int it = 0; it < 60; ++it) {
      const double g = F(x);
      if (std::abs(g) <= 1e-15) break;
      const double d = dF(x);
      if (d == 0.0) break;
      double xn = x - g / d;
      if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
      if ((F(xn) < 0.0) != (F(lo) < 0.0)) hi = xn; else lo = xn;
      if (std::abs(xn - x) <= 1e-16 * (1.0 + std::abs(x))) { x = xn; break; }
      x = xn;
    }
    return x;
  }

  // Largest root: walk down from an upper bound (F > 0 there) to the first
  // sign change. Any root satisfies x < |w| + 1.2.
  double largest_root() const {
    const double hi0 = std::abs(w) + 1.2;
    const int n = 256;
    double hi = hi0;
    double x = hi0;
    for (int i = 1; i <= n; ++i) {
      x = hi0 * (1.0 - double(i) / n);
      if (x <= 0.0) x = hi0 * 1e-12;
      if (F(x) < 0.0) break;
      hi = x;
    }
    const double root = bisect(x, hi);
    return polish(root, x, hi);
  }

  // Smallest root: fine upward scan from 0 (F(0+) < 0) to the first sign change.
  double smallest_root() const {
    const double hi0 = std::abs(w) + 1.2;
    const int n = 8192;
    double lo = hi0 * 1e-12;
    for (int i = 1; i <= n; ++i) {
      const double x = hi0 * double(i) / n;
      if (F(x) >= 0.0) {
        const double root = bisect(lo, x);
        return polish(root, lo, x);
      }
      lo = x;
    }
    // No sign change found (degenerate tangency); fall back to the largest root.
    return largest_root();
  }
};

}  // namespace detail

// Induced velocity v_i > 0 satisfying v_i * sqrt(v_H^2 + (v_i + v_z)^2) = v_h^2.
//
// Branch selection for descent (v_z < 0): the climb-side continuation branch
// (the largest positive root, which connects continuously to the unique climb
// solution) down to v_z = -2 v_h; at and beyond v_z <= -2 v_h the windmill
// branch (smallest positive root) applies. Residual of the returned root is
// below 1e-10 * v_h^2.
inline double solve_induced_velocity(const DiskVelocity& v, double v_h) {
  if (!(std::isfinite(v_h) && v_h > 0.0)) {
    throw std::invalid_argument("solve_induced_velocity: v_h must be > 0");
  }
  if (!std::isfinite(v.horizontal) || !std::isfinite(v.climb)) {
    throw std::invalid_argument("solve_induced_velocity: non-finite disk velocity");
  }
  const double u = std::abs(v.horizontal) / v_h;
  const double w = v.climb / v_h;

  double x;
  if (u == 0.0) {
    // Closed forms for purely axial flow.
    if (w > -2.0) {
      x = 0.5 * (-w + std::sqrt(w * w + 4.0));  // flow-through branch
    } else {
      x = 0.5 * (-w - std::sqrt(w * w - 4.0));  // windmill branch, smaller root
    }
  } else {
    detail::InducedRoot eq{u, w};
    if (w >= 0.0) {
      x = eq.largest_root();  // unique positive root in climb
    } else if (w <= -2.0) {
      x = eq.smallest_root();
    } else {
      x = eq.largest_root();
    }
  }

  const double vi = x * v_h;
  const double res = std::abs(x * std::sqrt(u * u + (x + w) * (x + w)) - 1.0);
  if (!(res <= 1e-10)) {
    throw SolveError("solve_induced_velocity: residual too large", res * v_h * v_h);
  }
  return vi;
}

// Tip-vortex transport criterion, normalized by v_h:
//   eps = sqrt((v_H / k)^2 + (v_i / 2 + v_z)^2) / v_h.
inline double tip_vortex_epsilon(const DiskVelocity& v, double v_i, const RotorParams& p) {
  const double v_h = hover_induced_velocity(p);
  const double a = v.horizontal / p.onera_k;
  const double b = v_i / 2.0 + v.climb;
  return std::sqrt(a * a + b * b) / v_h;
}

// Signed distance to the simplified descent cone, normalized by v_h:
//   margin = (v_z + |v_H| * tan(cone_angle)) / v_h.
// Negative margin means the descent is steeper than the cone allows.
inline double simplified_margin(const DiskVelocity& v, const RotorParams& p) {
  const double v_h = hover_induced_velocity(p);
  return (v.climb + std::abs(v.horizontal) * std::tan(p.cone_angle)) / v_h;
}

// Everything the classifiers derive from one disk velocity.
struct DiskAnalysis {
  double v_h = 0.0;
  double v_i = 0.0;
  double eps = 0.0;          // normalized tip-vortex criterion value
  double onera_margin = 0.0; // eps - eps_vrs
  double cone_margin = 0.0;  // simplified cone margin
  RegimeLabel onera;         // label ignoring the cone
  RegimeLabel combined;      // cone violation dominates
};

inline DiskAnalysis analyze_disk_velocity(const DiskVelocity& v, const RotorParams& p) {
  DiskAnalysis a;
  a.v_h = hover_induced_velocity(p);
  a.v_i = solve_induced_velocity(v, a.v_h);
  a.eps = tip_vortex_epsilon(v, a.v_i, p);
  a.onera_margin = a.eps - p.eps_vrs;
  a.cone_margin = simplified_margin(v, p);
  if (a.eps < p.eps_tws) {
    a.onera = {Regime::Tws, a.onera_margin};
  } else if (a.eps < p.eps_vrs) {
    a.onera = {Regime::Vrs, a.onera_margin};
  } else {
    a.onera = {Regime::Normal, a.onera_margin};
  }
  a.combined = (a.cone_margin < 0.0) ? RegimeLabel{Regime::ProhibitedSimplified, a.cone_margin}
                                     : a.onera;
  return a;
}

inline RegimeLabel classify_onera(const DiskVelocity& v, const RotorParams& p) {
  return analyze_disk_velocity(v, p).onera;
}

inline RegimeLabel classify_combined(const DiskVelocity& v, const RotorParams& p) {
  return analyze_disk_velocity(v, p).combined;
}

inline bool allowed(const RegimeLabel& label) { return label.regime == Regime::Normal; }

}  // namespace vrsplan
