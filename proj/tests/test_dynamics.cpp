#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "vrsplan/integrator.hpp"
#include "vrsplan/vehicle_dynamics.hpp"

using namespace vrsplan;

namespace {

Vec planar_state(double y, double vy, double z, double vz, double phi) {
  Vec x(kPlanarStateDim);
  x << y, vy, z, vz, phi;
  return x;
}

Vec full_state(const Vector3d& pos, const Vector3d& vel, const Vector4d& q, const Vector3d& w) {
  Vec x(kFullStateDim);
  x.segment<3>(0) = pos;
  x.segment<3>(3) = vel;
  x.segment<4>(6) = q;
  x.segment<3>(10) = w;
  return x;
}

}  // namespace

TEST_CASE("planar hover is an equilibrium") {
  VehicleParams p;
  Vec u(kPlanarInputDim);
  u << p.gravity, 0.0;
  const Vec dx = planar_rhs(planar_state(0, 0, 0, 0, 0), u, p);
  CHECK(dx.lpNorm<Eigen::Infinity>() <= 1e-14);
}

TEST_CASE("ballistic planar flight matches the closed form") {
  VehicleParams p;
  Vec x0 = planar_state(1.0, 2.0, -3.0, 0.5, 0.2);
  Vec u(kPlanarInputDim);
  u << 0.0, 0.0;  // free fall, no roll rate
  const double T = 1.7;
  std::vector<double> grid{0.0, T};
  std::vector<double> t_in{0.0, T};
  std::vector<Vec> u_in{u, u};
  const auto rhs = [&](const Vec& x, const Vec& uu) { return planar_rhs(x, uu, p); };
  const auto res = integrate_rk4(rhs, x0, grid, t_in, u_in, 64);
  const Vec& xT = res.x.back();
  CHECK(xT[0] == Catch::Approx(1.0 + 2.0 * T).margin(1e-9));
  CHECK(xT[1] == Catch::Approx(2.0).margin(1e-12));
  CHECK(xT[2] == Catch::Approx(-3.0 + 0.5 * T + 0.5 * p.gravity * T * T).margin(1e-9));
  CHECK(xT[3] == Catch::Approx(0.5 + p.gravity * T).margin(1e-10));
  CHECK(xT[4] == Catch::Approx(0.2).margin(1e-12));
}

TEST_CASE("planar jacobians match finite differences") {
  VehicleParams p;
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> un(-1.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    Vec x(kPlanarStateDim), u(kPlanarInputDim);
    for (int c = 0; c < kPlanarStateDim; ++c) x[c] = 2.0 * un(rng);
    u << 9.81 + 3.0 * un(rng), un(rng);
    Eigen::MatrixXd A, B;
    planar_jacobians(x, u, p, A, B);
    const double h = 1e-6;
    for (int c = 0; c < kPlanarStateDim; ++c) {
      Vec xp = x, xm = x;
      xp[c] += h;
      xm[c] -= h;
      const Vec col = (planar_rhs(xp, u, p) - planar_rhs(xm, u, p)) / (2.0 * h);
      CHECK((A.col(c) - col).lpNorm<Eigen::Infinity>() <= 1e-6);
    }
    for (int c = 0; c < kPlanarInputDim; ++c) {
      Vec up = u, um = u;
      up[c] += h;
      um[c] -= h;
      const Vec col = (planar_rhs(x, up, p) - planar_rhs(x, um, p)) / (2.0 * h);
      CHECK((B.col(c) - col).lpNorm<Eigen::Infinity>() <= 1e-6);
    }
  }
}

TEST_CASE("planar disk velocity decomposition") {
  // Level attitude, forward flight with sink: in-plane speed is the lateral
  // speed, climb is the negated NED sink rate.
  const Vec x = planar_state(0, 1.0, 0, 0.5, 0.0);
  const DiskVelocity v = planar_disk_velocity(x);
  CHECK(v.horizontal == Catch::Approx(1.0).margin(1e-15));
  CHECK(v.climb == Catch::Approx(-0.5).margin(1e-15));
  // Rolled 90 degrees: the roles swap.
  const Vec xr = planar_state(0, 1.0, 0, 0.5, M_PI / 2.0);
  const DiskVelocity vr = planar_disk_velocity(xr);
  CHECK(vr.horizontal == Catch::Approx(0.5).margin(1e-12));
  CHECK(vr.climb == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("quaternion kinematics: constant roll rate integrates to the analytic quaternion") {
  VehicleParams p;
  Vec u(kFullInputDim);
  u.setZero();  // no thrust; attitude dynamics only
  Vec x0 = full_state(Vector3d::Zero(), Vector3d::Zero(), Vector4d(1, 0, 0, 0),
                      Vector3d(1.0, 0.0, 0.0));
  const auto rhs = [&](const Vec& x, const Vec& uu) { return full3d_rhs(x, uu, p); };
  const double T = 2.0;
  std::vector<double> grid{0.0, T};
  std::vector<double> t_in{0.0, T};
  std::vector<Vec> u_in{u, u};
  const auto res = integrate_rk4(rhs, x0, grid, t_in, u_in, 400, full3d_poststep);
  const Vec& xT = res.x.back();
  // Rate about the body x-axis is gyroscopically neutral for diagonal inertia.
  CHECK(xT.segment<3>(10).isApprox(Vector3d(1.0, 0.0, 0.0), 1e-10));
  CHECK(xT[6] == Catch::Approx(std::cos(T / 2.0)).margin(1e-7));
  CHECK(xT[7] == Catch::Approx(std::sin(T / 2.0)).margin(1e-7));
  CHECK(std::abs(xT.segment<4>(6).norm() - 1.0) <= 1e-12);
}

TEST_CASE("hover thrust on all four motors is an equilibrium of the 3D model") {
  VehicleParams p;
  const double th = p.hover_thrust_per_motor();
  Vec u(kFullInputDim);
  u << th, th, th, th;
  const Vec x = full_state(Vector3d(1, 2, 3), Vector3d::Zero(), Vector4d(1, 0, 0, 0),
                           Vector3d::Zero());
  Vec dx = full3d_rhs(x, u, p);
  dx.segment<3>(0).setZero();  // position rows equal the (zero) velocity anyway
  CHECK(dx.lpNorm<Eigen::Infinity>() <= 1e-12);
}

TEST_CASE("planar model embeds in the 3D model under pure roll") {
  VehicleParams p;
  const double phi = 0.35;
  const double f_coll = 11.0;   // mass-normalized collective
  const double omega_x = 0.6;
  const double vy = 1.3, vz = -0.4;

  const Vector4d q(std::cos(phi / 2.0), std::sin(phi / 2.0), 0.0, 0.0);
  const Vec x3 = full_state(Vector3d(0, 2, 1), Vector3d(0, vy, vz), q, Vector3d(omega_x, 0, 0));
  Vec u3(kFullInputDim);
  const double per_motor = p.mass * f_coll / 4.0;
  u3 << per_motor, per_motor, per_motor, per_motor;  // equal thrusts: zero torque

  const Vec dx3 = full3d_rhs(x3, u3, p);
  const Vec x2 = planar_state(2.0, vy, 1.0, vz, phi);
  Vec u2(kPlanarInputDim);
  u2 << f_coll, omega_x;
  const Vec dx2 = planar_rhs(x2, u2, p);

  CHECK(dx3[4] == Catch::Approx(dx2[1]).margin(1e-12));  // VY dot
  CHECK(dx3[5] == Catch::Approx(dx2[3]).margin(1e-12));  // VZ dot
  CHECK(dx3.segment<3>(10).lpNorm<Eigen::Infinity>() <= 1e-12);  // no angular acceleration
  // Quaternion rate consistent with phi dot = omega_x.
  const Vector4d dq_expect(-0.5 * std::sin(phi / 2.0) * omega_x,
                           0.5 * std::cos(phi / 2.0) * omega_x, 0.0, 0.0);
  CHECK((dx3.segment<4>(6) - dq_expect).lpNorm<Eigen::Infinity>() <= 1e-12);

  // The rotor-disk airflow decomposition agrees as well.
  const DiskVelocity v2 = planar_disk_velocity(x2);
  const DiskVelocity v3 = full3d_disk_velocity(x3);
  CHECK(v3.horizontal == Catch::Approx(v2.horizontal).margin(1e-12));
  CHECK(v3.climb == Catch::Approx(v2.climb).margin(1e-12));
}

TEST_CASE("torque mixing matches the X-layout sign table") {
  VehicleParams p;
  Eigen::Vector4d T(1.0, 2.0, 3.0, 4.0);
  const Vector3d M = mix_torques(T, p);
  CHECK(M[0] == Catch::Approx(p.arm_length * (-1.0 + 2.0 + 3.0 - 4.0)).margin(1e-15));
  CHECK(M[1] == Catch::Approx(p.arm_length * (1.0 + 2.0 - 3.0 - 4.0)).margin(1e-15));
  CHECK(M[2] == Catch::Approx(p.kappa * (-1.0 + 2.0 - 3.0 + 4.0)).margin(1e-15));
}

TEST_CASE("RK4 converges at fourth order") {
  VehicleParams p;
  const auto rhs = [&](const Vec& x, const Vec& u) { return planar_rhs(x, u, p); };
  Vec x0 = planar_state(0, 0, 0, 0, 0);
  Vec ua(kPlanarInputDim), ub(kPlanarInputDim);
  ua << 12.0, 0.8;
  ub << 7.0, -0.8;  // time-varying input makes the flow genuinely nonlinear
  std::vector<double> grid{0.0, 2.0};
  std::vector<double> t_in{0.0, 2.0};
  std::vector<Vec> u_in{ua, ub};
  const Vec fine = integrate_rk4(rhs, x0, grid, t_in, u_in, 512).x.back();
  const Vec coarse = integrate_rk4(rhs, x0, grid, t_in, u_in, 16).x.back();
  const Vec half = integrate_rk4(rhs, x0, grid, t_in, u_in, 32).x.back();
  const double e_coarse = (coarse - fine).lpNorm<Eigen::Infinity>();
  const double e_half = (half - fine).lpNorm<Eigen::Infinity>();
  CHECK(e_half * 10.0 <= e_coarse);  // at least ~order 3.3 observed
}

TEST_CASE("input interpolation is linear between samples") {
  std::vector<double> t{0.0, 1.0, 3.0};
  std::vector<Vec> v;
  for (double s : {0.0, 2.0, -2.0}) {
    Vec x(1);
    x << s;
    v.push_back(x);
  }
  CHECK(interp_linear(t, v, -1.0)[0] == 0.0);
  CHECK(interp_linear(t, v, 0.5)[0] == Catch::Approx(1.0));
  CHECK(interp_linear(t, v, 2.0)[0] == Catch::Approx(0.0));
  CHECK(interp_linear(t, v, 9.0)[0] == -2.0);
}
