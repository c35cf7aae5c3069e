#pragma once

#include <algorithm>
#include <cmath>
#include <random>

#include "twofluid/potential.hpp"
#include "twofluid/state.hpp"
#include "twofluid/types.hpp"

namespace twofluid::testing {

/// Two dissimilar polytropic components.
inline SeparableAddedMass mixed_law(double a = 0.5) {
  return SeparableAddedMass({PhaseParams{1.4, 1.0, 0.0, 1.0}, PhaseParams{1.6, 2.0, 0.1, 1.3}}, a);
}

struct StateRanges {
  double rho_lo = 0.3;
  double rho_hi = 3.0;
  double u = 1.0;
  double w = 0.5;
  double s = 0.5;
};

/// Well inside the hyperbolic region and close to the centre-of-mass frame.
/// Far from it the Legendre map at fixed j nears its fold, A becomes badly
/// conditioned and the difference route loses accuracy.
inline constexpr StateRanges kHyperbolicRanges{0.5, 3.0, 0.1, 0.3, 0.5};

inline PrimitiveState random_state(std::mt19937_64& rng, const StateRanges& r = {}) {
  std::uniform_real_distribution<double> rho(r.rho_lo, r.rho_hi), u(-r.u, r.u), w(-r.w, r.w), s(-r.s, r.s);
  PrimitiveState p;
  p.rho = {rho(rng), rho(rng)};
  const double ubar = u(rng), dw = w(rng);
  p.u = {ubar - 0.5 * dw, ubar + 0.5 * dw};
  p.s = {s(rng), s(rng)};
  return p;
}

inline double rel_diff(double a, double b, double floor = 1.0) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

/// Plain bisection on K2 - K1 = w - (1/rho1 + 1/rho2) dW/dw(w), run until
/// the bracket cannot shrink.
template <PotentialLaw L>
double bisect_relative_velocity(const L& law, const EvolvedState& e) {
  const double dK = e.K[1] - e.K[0];
  const double inv = 1.0 / e.rho[0] + 1.0 / e.rho[1];
  auto F = [&](double w) {
    return w - inv * potential_gradient(law, ThermoPoint{e.rho, e.s, w})[kW] - dK;
  };
  double half = std::abs(dK) + 1.0;
  while ((F(dK - half) < 0.0) == (F(dK + half) < 0.0)) half *= 2.0;
  double lo = dK - half, hi = dK + half;
  const bool rising = F(hi) > F(lo);
  while (true) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) return mid;
    const double f = F(mid);
    if (f == 0.0) return mid;
    if ((f < 0.0) == rising) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
}

}  // namespace twofluid::testing
