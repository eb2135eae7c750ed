#pragma once

// Rigid-body models of a fixed-pitch X-quadrotor.
//
// Frames and conventions (fixed project-wide):
//   - Inertial frame is NED: Z is positive DOWN, so descending means V_Z > 0
//     and "5 m below the start" is Z = +5.
//   - Body z axis points down through the vehicle belly; total rotor thrust
//     acts along -z_body.
//   - The planar model lives in the inertial Y-Z plane with roll angle phi
//     about the body x axis. Its collective input is mass-specific
//     (acceleration, m/s^2); the 3D model takes the four motor thrusts in N.
//   - Planar state  [Y, V_Y, Z, V_Z, phi],            input [f_coll, omega_x].
//   - 3D state      [X,Y,Z, VX,VY,VZ, q0,q1,q2,q3, wx,wy,wz] (scalar-first
//     unit quaternion, body rates in the body frame), input [T1,T2,T3,T4].

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "vrsplan/rotor_aero.hpp"

namespace vrsplan {

using Vec = Eigen::VectorXd;
using Eigen::Matrix3d;
using Eigen::Vector3d;
using Eigen::Vector4d;

struct VehicleParams {
  double mass = 2.0;                              // [kg]
  Vector3d inertia_diag{0.021, 0.022, 0.036};     // body-frame principal inertia [kg m^2]
  double arm_length = 0.17;                       // moment arm of each rotor [m]
  double kappa = 0.016;                           // yaw moment per unit thrust [m]
  double gravity = 9.81;                          // [m/s^2]
  // Fixed-pitch rotors cannot pull; enabling this clamps the planar collective
  // command to nonnegative values instead of the symmetric reference interval.
  bool physical_thrust = false;

  void validate() const {
    auto require = [](bool ok, const char* what) {
      if (!ok) throw std::invalid_argument(std::string("VehicleParams: ") + what);
    };
    require(std::isfinite(mass) && mass > 0.0, "mass must be > 0");
    require(inertia_diag.allFinite() && (inertia_diag.array() > 0.0).all(),
            "inertia_diag must be > 0");
    require(std::isfinite(arm_length) && arm_length > 0.0, "arm_length must be > 0");
    require(std::isfinite(kappa) && kappa > 0.0, "kappa must be > 0");
    require(std::isfinite(gravity) && gravity > 0.0, "gravity must be > 0");
  }

  double hover_thrust_per_motor() const { return mass * gravity / 4.0; }
};

inline constexpr int kPlanarStateDim = 5;
inline constexpr int kPlanarInputDim = 2;
inline constexpr int kFullStateDim = 13;
inline constexpr int kFullInputDim = 4;

// ---------------------------------------------------------------------------
// Planar model

inline Vec planar_rhs(const Vec& x, const Vec& u, const VehicleParams& p) {
  const double f = u[0], phi = x[4];
  Vec dx(kPlanarStateDim);
  dx[0] = x[1];
  dx[1] = f * std::sin(phi);
  dx[2] = x[3];
  dx[3] = -f * std::cos(phi) + p.gravity;
  dx[4] = u[1];
  return dx;
}

inline void planar_jacobians(const Vec& x, const Vec& u, const VehicleParams&,
                             Eigen::MatrixXd& A, Eigen::MatrixXd& B) {
  const double f = u[0], phi = x[4];
  A.setZero(kPlanarStateDim, kPlanarStateDim);
  B.setZero(kPlanarStateDim, kPlanarInputDim);
  A(0, 1) = 1.0;
  A(1, 4) = f * std::cos(phi);
  A(2, 3) = 1.0;
  A(3, 4) = f * std::sin(phi);
  B(1, 0) = std::sin(phi);
  B(3, 0) = -std::cos(phi);
  B(4, 1) = 1.0;
}

// Air velocity seen by the rotor disks, resolved in the body frame
// (no-wind planar case): rotate the relative wind -V by the roll angle.
inline DiskVelocity planar_disk_velocity(const Vec& x) {
  const double vy = x[1], vz = x[3], phi = x[4];
  const double c = std::cos(phi), s = std::sin(phi);
  DiskVelocity v;
  v.horizontal = std::abs(c * vy + s * vz);
  v.climb = s * vy - c * vz;
  return v;
}

// ---------------------------------------------------------------------------
// Quaternion utilities (scalar-first, Hamilton convention, body-to-inertial)

inline Matrix3d quat_to_matrix(const Vector4d& q) {
  const double q0 = q[0], q1 = q[1], q2 = q[2], q3 = q[3];
  Matrix3d R;
  R << 1 - 2 * (q2 * q2 + q3 * q3), 2 * (q1 * q2 - q0 * q3), 2 * (q1 * q3 + q0 * q2),
      2 * (q1 * q2 + q0 * q3), 1 - 2 * (q1 * q1 + q3 * q3), 2 * (q2 * q3 - q0 * q1),
      2 * (q1 * q3 - q0 * q2), 2 * (q2 * q3 + q0 * q1), 1 - 2 * (q1 * q1 + q2 * q2);
  return R;
}

inline Vector4d quat_derivative(const Vector4d& q, const Vector3d& w) {
  const double p = w[0], qq = w[1], r = w[2];
  Vector4d dq;
  dq[0] = 0.5 * (-q[1] * p - q[2] * qq - q[3] * r);
  dq[1] = 0.5 * (q[0] * p + q[2] * r - q[3] * qq);
  dq[2] = 0.5 * (q[0] * qq + q[3] * p - q[1] * r);
  dq[3] = 0.5 * (q[0] * r + q[1] * qq - q[2] * p);
  return dq;
}

inline void quat_normalize(Vector4d& q) {
  const double n = q.norm();
  if (n > 0.0) q /= n;
}

// ---------------------------------------------------------------------------
// Full 3D model

// Body torques produced by the four motor thrusts (X configuration).
inline Vector3d mix_torques(const Eigen::Vector4d& T, const VehicleParams& p) {
  const double b = p.arm_length;
  Vector3d M;
  M[0] = b * (-T[0] + T[1] + T[2] - T[3]);
  M[1] = b * (T[0] + T[1] - T[2] - T[3]);
  M[2] = p.kappa * (-T[0] + T[1] - T[2] + T[3]);
  return M;
}

inline Vec full3d_rhs(const Vec& x, const Vec& u, const VehicleParams& p) {
  const Vector3d V = x.segment<3>(3);
  const Vector4d q = x.segment<4>(6);
  const Vector3d w = x.segment<3>(10);
  const Eigen::Vector4d T(u[0], u[1], u[2], u[3]);

  const Matrix3d R = quat_to_matrix(q);
  const double thrust = T.sum();
  const Vector3d accel = R * Vector3d(0.0, 0.0, -thrust) / p.mass + Vector3d(0.0, 0.0, p.gravity);

  const Vector3d I = p.inertia_diag;
  const Vector3d Iw(I[0] * w[0], I[1] * w[1], I[2] * w[2]);
  const Vector3d M = mix_torques(T, p);
  const Vector3d wdot = (M - w.cross(Iw)).cwiseQuotient(I);

  Vec dx(kFullStateDim);
  dx.segment<3>(0) = V;
  dx.segment<3>(3) = accel;
  dx.segment<4>(6) = quat_derivative(q, w);
  dx.segment<3>(10) = wdot;
  return dx;
}

// Renormalizes the quaternion block after an integration step.
inline void full3d_poststep(Vec& x) {
  Vector4d q = x.segment<4>(6);
  quat_normalize(q);
  x.segment<4>(6) = q;
}

// Disk-plane air velocity for the 3D model under inertial wind W.
inline DiskVelocity full3d_disk_velocity(const Vec& x, const Vector3d& wind = Vector3d::Zero()) {
  const Vector3d V = x.segment<3>(3);
  const Vector4d q = x.segment<4>(6);
  const Vector3d rel_body = quat_to_matrix(q).transpose() * (wind - V);
  DiskVelocity v;
  v.horizontal = std::hypot(rel_body[0], rel_body[1]);
  v.climb = rel_body[2];
  return v;
}

}  // namespace vrsplan
