#pragma once

// Smooth closed-form space-time fields for verifying algebraic identities.
// They need not solve any equation.

#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

#include "twofluid/types.hpp"

namespace twofluid::verify {

using SpaceTimeFunction = std::function<double(double t, double x)>;

struct ManufacturedField {
  std::array<SpaceTimeFunction, kPhases> rho;
  std::array<SpaceTimeFunction, kPhases> u;
  std::array<SpaceTimeFunction, kPhases> s;
  std::array<SpaceTimeFunction, kPhases> omega;
  /// Box the sample points are drawn from.
  double t_lo = 0.0, t_hi = 1.0;
  double x_lo = 0.0, x_hi = 1.0;

  PrimitiveState primitive(double t, double x) const {
    PrimitiveState p;
    for (int a = 0; a < kPhases; ++a) {
      p.rho[a] = rho[a](t, x);
      p.u[a] = u[a](t, x);
      p.s[a] = s[a](t, x);
    }
    return p;
  }
  PhasePair potentials(double t, double x) const { return {omega[0](t, x), omega[1](t, x)}; }
};

/// mean + sum_m amp_m sin(k_m x + freq_m t + phase_m).
struct TrigSeries {
  struct Mode {
    double amp = 0.0;
    double k = 0.0;
    double freq = 0.0;
    double phase = 0.0;
  };
  double mean = 0.0;
  std::vector<Mode> modes;

  double operator()(double t, double x) const {
    double v = mean;
    for (const Mode& m : modes) v += m.amp * std::sin(m.k * x + m.freq * t + m.phase);
    return v;
  }
  /// Lower bound of the series over all (t, x).
  double lower_bound() const {
    double v = mean;
    for (const Mode& m : modes) v -= std::abs(m.amp);
    return v;
  }
};

inline ManufacturedField constant_field(const PrimitiveState& p, const PhasePair& omega = {0.0, 0.0}) {
  ManufacturedField f;
  for (int a = 0; a < kPhases; ++a) {
    const double r = p.rho[a], u = p.u[a], s = p.s[a], o = omega[a];
    f.rho[a] = [r](double, double) { return r; };
    f.u[a] = [u](double, double) { return u; };
    f.s[a] = [s](double, double) { return s; };
    f.omega[a] = [o](double, double) { return o; };
  }
  return f;
}

/// Ranges for random trigonometric fields.
struct TrigFieldRanges {
  int modes = 2;
  double rho_mean_lo = 0.8, rho_mean_hi = 1.5;
  /// Total density amplitude as a fraction of the mean.
  double rho_amp_fraction = 0.3;
  double u_mean = 0.5, u_amp = 0.3;
  double s_mean = 0.3, s_amp = 0.2;
  double omega_amp = 0.5;
  double k_max = 6.0;
  double freq_max = 3.0;
  bool with_potentials = true;
};

inline TrigSeries random_series(std::mt19937_64& rng, double mean, double total_amp, const TrigFieldRanges& r) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  TrigSeries s;
  s.mean = mean;
  for (int m = 0; m < r.modes; ++m) {
    TrigSeries::Mode mode;
    mode.amp = total_amp / r.modes * (2.0 * unit(rng) - 1.0);
    mode.k = r.k_max * (0.2 + 0.8 * unit(rng)) * (unit(rng) < 0.5 ? -1.0 : 1.0);
    mode.freq = r.freq_max * (2.0 * unit(rng) - 1.0);
    mode.phase = 2.0 * std::numbers::pi * unit(rng);
    s.modes.push_back(mode);
  }
  return s;
}

inline SpaceTimeFunction as_function(TrigSeries s) {
  return [s = std::move(s)](double t, double x) { return s(t, x); };
}

/// Generic smooth fields with positive densities everywhere.
inline ManufacturedField random_trigonometric_field(std::mt19937_64& rng, const TrigFieldRanges& r = {}) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  ManufacturedField f;
  for (int a = 0; a < kPhases; ++a) {
    const double rho_mean = r.rho_mean_lo + (r.rho_mean_hi - r.rho_mean_lo) * unit(rng);
    f.rho[a] = as_function(random_series(rng, rho_mean, r.rho_amp_fraction * rho_mean, r));
    f.u[a] = as_function(random_series(rng, r.u_mean * (2.0 * unit(rng) - 1.0), r.u_amp, r));
    f.s[a] = as_function(random_series(rng, r.s_mean * (2.0 * unit(rng) - 1.0), r.s_amp, r));
    if (r.with_potentials) {
      f.omega[a] = as_function(random_series(rng, 0.0, r.omega_amp, r));
    } else {
      f.omega[a] = [](double, double) { return 0.0; };
    }
  }
  return f;
}

/// Per-component fields with B_a = 0 and d_a s_a / dt = 0 exactly, from the
/// stream function psi = rho_bar (x - u_bar t) + A sin(k x - c t):
///   rho = psi_x,  rho u = -psi_t,  s = s_bar + b sin(m psi).
struct StreamParams {
  double rho_bar = 1.0;
  double u_bar = 0.2;
  double A = 0.05;
  double k = 3.0;
  double c = 1.0;
  double s_bar = 0.0;
  double b = 0.1;
  double m = 2.0;
};

inline ManufacturedField mass_conserving_field(const std::array<StreamParams, kPhases>& params) {
  ManufacturedField f;
  for (int a = 0; a < kPhases; ++a) {
    const StreamParams p = params[a];
    f.rho[a] = [p](double t, double x) { return p.rho_bar + p.A * p.k * std::cos(p.k * x - p.c * t); };
    f.u[a] = [p](double t, double x) {
      const double rho = p.rho_bar + p.A * p.k * std::cos(p.k * x - p.c * t);
      return (p.rho_bar * p.u_bar + p.A * p.c * std::cos(p.k * x - p.c * t)) / rho;
    };
    f.s[a] = [p](double t, double x) {
      const double psi = p.rho_bar * (x - p.u_bar * t) + p.A * std::sin(p.k * x - p.c * t);
      return p.s_bar + p.b * std::sin(p.m * psi);
    };
    f.omega[a] = [](double, double) { return 0.0; };
  }
  return f;
}

}  // namespace twofluid::verify
