#pragma once

// Flight-envelope atlas: classification of every point of a normalized
// (v_H / v_h, v_z / v_h) window, plus time-series classification of a
// prescribed oscillatory descent profile.

#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

#include "vrsplan/rotor_aero.hpp"

namespace vrsplan {

struct AtlasWindow {
  double vh_min = 0.0;
  double vh_max = 3.0;
  int vh_count = 151;
  double vz_min = -3.0;  // climb-positive, so -3 is a steep descent
  double vz_max = 1.0;
  int vz_count = 201;

  void validate() const {
    if (vh_count < 2 || vz_count < 2) throw std::invalid_argument("AtlasWindow: counts must be >= 2");
    if (!(vh_max > vh_min) || !(vz_max > vz_min)) {
      throw std::invalid_argument("AtlasWindow: empty axis range");
    }
    if (vh_min < 0.0) throw std::invalid_argument("AtlasWindow: v_H is a magnitude, vh_min >= 0");
  }
};

struct AtlasCell {
  double eps = 0.0;       // tip-vortex criterion value
  Regime regime = Regime::Normal;
  double margin = 0.0;    // margin of the combined classification
};

struct AtlasGrid {
  AtlasWindow window;
  std::vector<double> vh_norm;  // axis samples, ascending
  std::vector<double> vz_norm;
  std::vector<AtlasCell> cells;  // vh-major: cell(iu, iw) = cells[iu * vz_count + iw]

  const AtlasCell& at(int iu, int iw) const {
    return cells[size_t(iu) * size_t(window.vz_count) + size_t(iw)];
  }
};

inline AtlasGrid build_atlas(const RotorParams& rotor, const AtlasWindow& window = {}) {
  window.validate();
  rotor.validate();
  AtlasGrid grid;
  grid.window = window;
  grid.vh_norm.resize(size_t(window.vh_count));
  grid.vz_norm.resize(size_t(window.vz_count));
  for (int i = 0; i < window.vh_count; ++i) {
    grid.vh_norm[size_t(i)] =
        window.vh_min + (window.vh_max - window.vh_min) * double(i) / (window.vh_count - 1);
  }
  for (int j = 0; j < window.vz_count; ++j) {
    grid.vz_norm[size_t(j)] =
        window.vz_min + (window.vz_max - window.vz_min) * double(j) / (window.vz_count - 1);
  }
  const double v_h = hover_induced_velocity(rotor);
  grid.cells.resize(size_t(window.vh_count) * size_t(window.vz_count));
  for (int i = 0; i < window.vh_count; ++i) {
    for (int j = 0; j < window.vz_count; ++j) {
      const DiskVelocity v{grid.vh_norm[size_t(i)] * v_h, grid.vz_norm[size_t(j)] * v_h};
      const DiskAnalysis a = analyze_disk_velocity(v, rotor);
      AtlasCell& cell = grid.cells[size_t(i) * size_t(window.vz_count) + size_t(j)];
      cell.eps = a.eps;
      cell.regime = a.combined.regime;
      cell.margin = a.combined.margin;
    }
  }
  return grid;
}

// ---------------------------------------------------------------------------
// Oscillatory descent profile, vertical only:
//   Z(t) = A sin(omega0 t^2) + Z0   (Z down-positive)
// so the climb rate fed to the classifier is -dZ/dt.

struct ProfileParams {
  double amplitude = 1.0;   // [m]
  double omega0 = 0.5;      // chirp rate [rad/s^2]
  double z0 = 0.0;          // [m]
  double duration = 20.0;   // [s]
  double rate_hz = 100.0;   // sampling rate

  void validate() const {
    if (duration < 0.0 || rate_hz <= 0.0) {
      throw std::invalid_argument("ProfileParams: duration must be >= 0 and rate > 0");
    }
  }
};

struct ProfileSample {
  double t = 0.0;
  double z = 0.0;
  double z_rate = 0.0;  // dZ/dt, down-positive
  double eps = 0.0;
  Regime regime = Regime::Normal;  // tip-vortex classification
  double cone_margin = 0.0;
};

struct ProfileAnalysis {
  std::vector<ProfileSample> samples;
  std::map<Regime, double> first_entry;  // first sample time classified in each regime
};

inline ProfileAnalysis analyze_profile(const RotorParams& rotor, const ProfileParams& prof) {
  prof.validate();
  rotor.validate();
  const double v_h = hover_induced_velocity(rotor);
  ProfileAnalysis out;
  const int n = int(std::floor(prof.duration * prof.rate_hz)) + 1;
  out.samples.reserve(size_t(n));
  for (int k = 0; k < n; ++k) {
    ProfileSample s;
    s.t = double(k) / prof.rate_hz;
    const double phase = prof.omega0 * s.t * s.t;
    s.z = prof.amplitude * std::sin(phase) + prof.z0;
    s.z_rate = 2.0 * prof.amplitude * prof.omega0 * s.t * std::cos(phase);
    const DiskVelocity v{0.0, -s.z_rate};
    const DiskAnalysis a = analyze_disk_velocity(v, rotor);
    s.eps = a.eps;
    s.regime = a.onera.regime;
    s.cone_margin = a.cone_margin;
    if (out.first_entry.find(s.regime) == out.first_entry.end()) out.first_entry[s.regime] = s.t;
    out.samples.push_back(s);
  }
  return out;
}

}  // namespace vrsplan
