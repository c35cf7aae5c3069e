#pragma once

// Drift of the discrete totals along a trajectory: per-component mass, the
// impulse sum_a rho_a K_a, total energy, and the per-step entropy change.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "twofluid/error.hpp"
#include "twofluid/solver.hpp"
#include "twofluid/types.hpp"

namespace twofluid::verify {

struct DriftSample {
  double t = 0.0;
  PhasePair mass{0.0, 0.0};
  double momentum = 0.0;
  double energy = 0.0;
  /// Entropy change over the step that led to t, relative to the entropy scale.
  double entropy_increment = 0.0;
};

struct ConservationDrift {
  /// Differences from the initial totals, one per report.
  std::vector<DriftSample> series;

  PhasePair mass_abs{0.0, 0.0};
  PhasePair mass_rel{0.0, 0.0};
  double momentum_abs = 0.0;
  /// Relative to max(|P(0)|, sum_a rho_a |K_a| dx at t = 0).
  double momentum_rel = 0.0;
  double energy_abs = 0.0;
  double energy_rel = 0.0;
  /// Smallest and largest relative per-step entropy change.
  double entropy_min_increment = 0.0;
  double entropy_max_increment = 0.0;

  double max_mass_rel() const { return std::max(mass_rel[0], mass_rel[1]); }
  /// True when total entropy never drops by more than tol * scale in a step.
  bool entropy_nondecreasing(double tol = 1e-12) const { return entropy_min_increment >= -tol; }
};

inline double safe_scale(double s) { return s > 0.0 ? s : std::numeric_limits<double>::min(); }

inline ConservationDrift conservation_drift(const Trajectory& traj) {
  if (traj.reports.empty()) throw DomainError("conservation drift needs at least one report");
  const TimeStepReport& r0 = traj.reports.front();
  const double momentum_scale = safe_scale(std::max(std::abs(r0.momentum_K), r0.momentum_scale));
  const double energy_scale = safe_scale(std::abs(r0.energy));

  ConservationDrift d;
  d.series.reserve(traj.reports.size());
  for (std::size_t n = 0; n < traj.reports.size(); ++n) {
    const TimeStepReport& r = traj.reports[n];
    DriftSample s;
    s.t = r.t;
    for (int a = 0; a < kPhases; ++a) {
      s.mass[a] = r.mass[a] - r0.mass[a];
      d.mass_abs[a] = std::max(d.mass_abs[a], std::abs(s.mass[a]));
    }
    s.momentum = r.momentum_K - r0.momentum_K;
    s.energy = r.energy - r0.energy;
    d.momentum_abs = std::max(d.momentum_abs, std::abs(s.momentum));
    d.energy_abs = std::max(d.energy_abs, std::abs(s.energy));
    if (n > 0) {
      const TimeStepReport& prev = traj.reports[n - 1];
      const double scale = safe_scale(std::max(prev.entropy_scale, r.entropy_scale));
      s.entropy_increment = (r.entropy - prev.entropy) / scale;
      if (n == 1) {
        d.entropy_min_increment = d.entropy_max_increment = s.entropy_increment;
      } else {
        d.entropy_min_increment = std::min(d.entropy_min_increment, s.entropy_increment);
        d.entropy_max_increment = std::max(d.entropy_max_increment, s.entropy_increment);
      }
    }
    d.series.push_back(s);
  }
  for (int a = 0; a < kPhases; ++a) d.mass_rel[a] = d.mass_abs[a] / safe_scale(std::abs(r0.mass[a]));
  d.momentum_rel = d.momentum_abs / momentum_scale;
  d.energy_rel = d.energy_abs / energy_scale;
  return d;
}

}  // namespace twofluid::verify
