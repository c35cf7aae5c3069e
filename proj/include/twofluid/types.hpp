#pragma once

#include <array>
#include <cmath>
#include <string>

#include <fmt/format.h>

#include "twofluid/error.hpp"

namespace twofluid {

/// Number of mixture components.
inline constexpr int kPhases = 2;

using PhasePair = std::array<double, kPhases>;

/// Smallest admissible density in code units. Below it evaluations fail
/// rather than clip.
inline constexpr double kMinDensity = 1e-12;

/// Primitive variables at one point. Index 0 is component 1, index 1 is
/// component 2.
struct PrimitiveState {
  PhasePair rho{1.0, 1.0};
  PhasePair u{0.0, 0.0};
  PhasePair s{0.0, 0.0};

  /// Relative velocity u2 - u1.
  double w() const noexcept { return u[1] - u[0]; }
};

/// Unknowns advanced by the solver: densities, generalized velocities K and
/// specific entropies.
struct EvolvedState {
  PhasePair rho{1.0, 1.0};
  PhasePair K{0.0, 0.0};
  PhasePair s{0.0, 0.0};
};

inline void require_admissible_densities(const PhasePair& rho) {
  for (int a = 0; a < kPhases; ++a) {
    if (!(rho[a] >= kMinDensity) || !std::isfinite(rho[a])) {
      throw DomainError(fmt::format("rho{} = {} is not an admissible density", a + 1, rho[a]));
    }
  }
}

inline void require_positive_temperatures(const PhasePair& theta) {
  for (int a = 0; a < kPhases; ++a) {
    if (!(theta[a] > 0.0) || !std::isfinite(theta[a])) {
      throw DomainError(fmt::format("theta{} = {} is not a positive temperature", a + 1, theta[a]));
    }
  }
}

/// (-1)^alpha for alpha = 1, 2 given the zero-based index.
constexpr double alternating_sign(int phase) noexcept { return phase == 0 ? -1.0 : 1.0; }

}  // namespace twofluid
