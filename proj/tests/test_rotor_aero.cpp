#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "vrsplan/rotor_aero.hpp"

using namespace vrsplan;

namespace {

// Independent root finder for x * sqrt(u^2 + (x+w)^2) = 1: dense bracket scan
// plus bisection, selecting the branch the same way the library promises to
// (largest positive root for w > -2, smallest for w <= -2).
double oracle_induced(double u, double w) {
  auto f = [&](double x) { return x * std::sqrt(u * u + (x + w) * (x + w)) - 1.0; };
  const double hi = std::abs(w) + 1.5;
  const int n = 6000;
  std::vector<double> roots;
  double x_prev = 1e-12;
  double f_prev = f(x_prev);
  for (int k = 1; k <= n; ++k) {
    const double x = hi * double(k) / n;
    const double fx = f(x);
    if ((f_prev < 0.0) != (fx < 0.0)) {
      double a = x_prev, b = x;
      for (int it = 0; it < 200; ++it) {
        const double m = 0.5 * (a + b);
        if ((f(a) < 0.0) != (f(m) < 0.0)) b = m;
        else a = m;
      }
      roots.push_back(0.5 * (a + b));
    }
    x_prev = x;
    f_prev = fx;
  }
  REQUIRE_FALSE(roots.empty());
  return w > -2.0 ? roots.back() : roots.front();
}

}  // namespace

TEST_CASE("hover identities") {
  RotorParams p;
  const double v_h = hover_induced_velocity(p);
  // v_h = sqrt(T / (2 rho A)) with the default 4.905 N rotor
  CHECK(v_h == Catch::Approx(8.065642).margin(1e-4));
  const double v_i = solve_induced_velocity({0.0, 0.0}, v_h);
  CHECK(std::abs(v_i - v_h) <= 1e-12 * v_h);
  const double eps = tip_vortex_epsilon({0.0, 0.0}, v_i, p);
  CHECK(std::abs(eps - 0.5) <= 1e-12);
}

TEST_CASE("induced velocity closed-form anchor points") {
  // Normalized rotor: v_h = 1 exactly.
  const double v_h = 1.0;
  // Pure climb at v_h: x (x + 1) = 1 has the golden-ratio root.
  CHECK(solve_induced_velocity({0.0, 1.0}, v_h) ==
        Catch::Approx(0.6180339887498949).epsilon(1e-9));
  // Pure sideways flight at v_h: x^2 (1 + x^2) = 1.
  CHECK(solve_induced_velocity({1.0, 0.0}, v_h) ==
        Catch::Approx(0.7861513777574233).epsilon(1e-9));
  // Slow descent, momentum-theory branch.
  CHECK(solve_induced_velocity({0.0, -0.5}, v_h) ==
        Catch::Approx(1.2807764064044151).epsilon(1e-9));
  // Deep descent: windmill-brake branch takes the small root.
  CHECK(solve_induced_velocity({0.0, -3.0}, v_h) ==
        Catch::Approx(0.3819660112501051).epsilon(1e-9));
}

TEST_CASE("induced velocity matches the bracket-scan oracle") {
  const double v_h = 1.0;
  for (double u : {0.05, 0.3, 0.7, 1.3, 2.2}) {
    for (double w : {0.8, 0.0, -0.4, -1.1, -1.9, -2.3, -2.9}) {
      const double mine = solve_induced_velocity({u, w}, v_h);
      const double ref = oracle_induced(u, w);
      INFO("u=" << u << " w=" << w);
      CHECK(std::abs(mine - ref) <= 1e-8);
    }
  }
}

TEST_CASE("induced velocity scales with v_h") {
  RotorParams p;
  const double v_h = hover_induced_velocity(p);
  for (double u : {0.0, 0.5, 1.5}) {
    for (double w : {0.5, -0.5, -2.5}) {
      const double scaled = solve_induced_velocity({u * v_h, w * v_h}, v_h);
      const double unit = solve_induced_velocity({u, w}, 1.0);
      INFO("u=" << u << " w=" << w);
      CHECK(scaled / v_h == Catch::Approx(unit).epsilon(1e-9));
    }
  }
}

TEST_CASE("branch hand-off at the windmill boundary") {
  // The momentum curve x*sqrt(u^2+(x+w)^2)=1 is non-monotonic in x only when
  // |w| >= 2*sqrt(2)*u, so at w=-2 the roots merge for u > 1/sqrt(2) and the
  // hand-off is continuous there.
  const double a = solve_induced_velocity({0.8, -1.999}, 1.0);
  const double b = solve_induced_velocity({0.8, -2.001}, 1.0);
  CHECK(std::abs(a - b) <= 5e-3);

  // Below that edgewise speed the branch selection jumps across the
  // multivalued band by construction: largest root above, smallest below.
  const double hi = solve_induced_velocity({0.5, -1.999}, 1.0);
  const double lo = solve_induced_velocity({0.5, -2.001}, 1.0);
  CHECK(hi > 1.8);
  CHECK(lo < 0.8);
}

TEST_CASE("tip-vortex classification anchor points") {
  RotorParams p;
  const double v_h = hover_induced_velocity(p);

  const RegimeLabel hover = classify_onera({0.0, 0.0}, p);
  CHECK(hover.regime == Regime::Normal);
  CHECK(hover.margin == Catch::Approx(0.1).margin(1e-12));

  // Slow vertical descent sits in the turbulent wake band.
  const DiskAnalysis slow = analyze_disk_velocity({0.0, -0.5 * v_h}, p);
  CHECK(slow.eps == Catch::Approx(0.14038820320220756).margin(2e-4));
  CHECK(slow.onera.regime == Regime::Tws);

  // Oblique descent: inside the vortex-ring band.
  const DiskAnalysis oblique = analyze_disk_velocity({1.0 * v_h, -0.2 * v_h}, p);
  CHECK(oblique.v_i / v_h == Catch::Approx(0.8417).margin(1e-3));
  CHECK(oblique.eps == Catch::Approx(0.2767).margin(1e-3));
  CHECK(oblique.onera.regime == Regime::Vrs);

  // Deep descent leaves the prohibited band entirely.
  const DiskAnalysis deep = analyze_disk_velocity({0.0, -3.0 * v_h}, p);
  CHECK(deep.eps == Catch::Approx(2.8090169943749475).margin(1e-6));
  CHECK(deep.onera.regime == Regime::Normal);
}

TEST_CASE("classification is even in the in-plane velocity") {
  RotorParams p;
  const double v_h = hover_induced_velocity(p);
  for (double u : {0.2, 1.0, 2.5}) {
    for (double w : {0.3, -0.6, -2.4}) {
      const DiskAnalysis pos = analyze_disk_velocity({u * v_h, w * v_h}, p);
      const DiskAnalysis neg = analyze_disk_velocity({-u * v_h, w * v_h}, p);
      CHECK(pos.eps == neg.eps);
      CHECK(pos.cone_margin == neg.cone_margin);
      CHECK(pos.combined.regime == neg.combined.regime);
    }
  }
}

TEST_CASE("simplified cone margin") {
  RotorParams p;
  const double v_h = hover_induced_velocity(p);
  // Hover sits exactly on the boundary.
  CHECK(simplified_margin({0.0, 0.0}, p) == Catch::Approx(0.0).margin(1e-15));
  // Margin is homogeneous of degree one in (v_H, v_z) after normalization.
  const double m1 = simplified_margin({0.5 * v_h, -0.1 * v_h}, p);
  const double m2 = simplified_margin({1.0 * v_h, -0.2 * v_h}, p);
  CHECK(m2 == Catch::Approx(2.0 * m1).epsilon(1e-12));
  // Fast lateral flight with moderate sink: prohibited by the cone rule,
  // margin = -1 + 2.4 tan(20 deg) in normalized units.
  const DiskAnalysis a = analyze_disk_velocity({2.4 * v_h, -1.0 * v_h}, p);
  CHECK(a.cone_margin == Catch::Approx(-0.12647143776111437).margin(1e-9));
  CHECK(a.combined.regime == Regime::ProhibitedSimplified);
  CHECK_FALSE(allowed(a.combined));
}

TEST_CASE("combined classification prefers the cone violation") {
  RotorParams p;
  const double v_h = hover_induced_velocity(p);
  // Slow descent violates the cone and the tip-vortex criterion; the
  // simplified rule is the one reported.
  const RegimeLabel lab = classify_combined({0.0, -0.5 * v_h}, p);
  CHECK(lab.regime == Regime::ProhibitedSimplified);
  // Fast climb is allowed by both.
  CHECK(classify_combined({0.0, 2.0 * v_h}, p).regime == Regime::Normal);
}

TEST_CASE("parameter validation") {
  RotorParams p;
  p.disk_diameter = -1.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  RotorParams q;
  q.air_density = 0.0;
  CHECK_THROWS_AS(q.validate(), std::invalid_argument);
}
