#pragma once

// Conversions between primitive and evolved variables, and the dynamic
// quantities K_a, R_a, theta_a, mu_a.

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "twofluid/error.hpp"
#include "twofluid/potential.hpp"
#include "twofluid/types.hpp"

namespace twofluid {

struct DynamicQuantities {
  PhasePair R{};
  PhasePair K{};
  PhasePair theta{};
  PhasePair mu{};
  /// mu2 - mu1.
  double mu_diff = 0.0;
};

struct MixtureAggregates {
  double rho = 0.0;
  double momentum = 0.0;
  double velocity = 0.0;
};

/// K_a = u_a - (-1)^a / rho_a * dW/dw given dW/dw.
inline PhasePair generalized_velocities(const PrimitiveState& p, double dW_dw) {
  PhasePair K;
  for (int a = 0; a < kPhases; ++a) K[a] = p.u[a] - alternating_sign(a) / p.rho[a] * dW_dw;
  return K;
}

template <PotentialLaw L>
EvolvedState primitive_to_evolved(const L& law, const PrimitiveState& p) {
  const ThermoPoint x = ThermoPoint::from(p);
  const Vec5 g = potential_gradient(law, x);
  return EvolvedState{p.rho, generalized_velocities(p, g[kW]), p.s};
}

struct RecoveryResult {
  double w = 0.0;
  /// |K-defect| at the returned w.
  double residual = 0.0;
  int newton_steps = 0;
  int bisection_steps = 0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
};

namespace detail {

/// K2 - K1 as a function of w at frozen densities and entropies.
template <PotentialLaw L>
struct KDefect {
  const L& law;
  PhasePair rho;
  PhasePair s;
  double dK;

  double inv_rho_sum() const { return 1.0 / rho[0] + 1.0 / rho[1]; }

  double operator()(double w) const {
    const Vec5 g = potential_gradient(law, ThermoPoint{rho, s, w});
    return w - inv_rho_sum() * g[kW] - dK;
  }
  double derivative(double w) const {
    const Mat5 H = potential_hessian(law, ThermoPoint{rho, s, w});
    return 1.0 - inv_rho_sum() * H(kW, kW);
  }
};

}  // namespace detail

/// Tolerance on the K-defect used by velocity recovery.
inline double recovery_tolerance(const PhasePair& K) {
  return 1e-12 * std::max({1.0, std::abs(K[0]), std::abs(K[1])});
}

/// Finds the bracket around w_K = K2 - K1 by geometric growth of the half
/// width, starting from |w_K| + 1, for at most 40 doublings.
template <PotentialLaw L>
std::pair<double, double> recovery_bracket(const detail::KDefect<L>& F) {
  const double wK = F.dK;
  double delta = std::abs(wK) + 1.0;
  double f_lo = 0.0, f_hi = 0.0, last = delta;
  for (int doubling = 0; doubling <= 40; ++doubling, delta *= 2.0) {
    last = delta;
    f_lo = F(wK - delta);
    f_hi = F(wK + delta);
    if (f_lo == 0.0 || f_hi == 0.0 || (f_lo < 0.0) != (f_hi < 0.0)) return {wK - delta, wK + delta};
  }
  throw ConvergenceError(fmt::format(
      "velocity recovery: no sign change of the K-defect in [{}, {}] (values {}, {}); "
      "the map w -> w - (1/rho1 + 1/rho2) dW/dw is not monotone here",
      wK - last, wK + last, f_lo, f_hi));
}

/// Solves K2 - K1 = w - (1/rho1 + 1/rho2) dW/dw(w) for w with a safeguarded
/// Newton iteration that falls back to bisection inside the bracket.
template <PotentialLaw L>
RecoveryResult recover_relative_velocity(const L& law, const EvolvedState& e) {
  require_admissible_densities(e.rho);
  const detail::KDefect<L> F{law, e.rho, e.s, e.K[1] - e.K[0]};
  const double tol = recovery_tolerance(e.K);

  auto [lo, hi] = recovery_bracket(F);
  const bool increasing = F(hi) > F(lo);

  RecoveryResult r;
  r.bracket_lo = lo;
  r.bracket_hi = hi;

  double w = std::clamp(F.dK, lo, hi);
  double f = F(w);
  for (int iter = 0; iter < 200; ++iter) {
    if (std::abs(f) <= tol) {
      r.w = w;
      r.residual = std::abs(f);
      return r;
    }
    // Shrink the bracket with the current iterate.
    if ((f < 0.0) == increasing) {
      lo = w;
    } else {
      hi = w;
    }
    const double df = F.derivative(w);
    double next = (df != 0.0 && std::isfinite(df)) ? w - f / df : lo - 1.0;
    if (!(next > lo && next < hi)) {
      next = 0.5 * (lo + hi);
      ++r.bisection_steps;
    } else {
      ++r.newton_steps;
    }
    if (next == w) break;
    w = next;
    f = F(w);
  }
  if (std::abs(f) <= 10.0 * tol) {
    r.w = w;
    r.residual = std::abs(f);
    return r;
  }
  throw ConvergenceError(fmt::format(
      "velocity recovery did not converge: w = {}, K-defect = {}, bracket [{}, {}]", w, f, lo, hi));
}

template <PotentialLaw L>
PrimitiveState evolved_to_primitive(const L& law, const EvolvedState& e) {
  const RecoveryResult r = recover_relative_velocity(law, e);
  const Vec5 g = potential_gradient(law, ThermoPoint{e.rho, e.s, r.w});
  PrimitiveState p;
  p.rho = e.rho;
  p.s = e.s;
  p.u[0] = e.K[0] - g[kW] / e.rho[0];
  p.u[1] = p.u[0] + r.w;
  return p;
}

/// R_a, K_a, theta_a and the chemical potentials mu_a = dW/drho_a - theta0 s_a.
template <PotentialLaw L>
DynamicQuantities dynamic_quantities(const L& law, const PrimitiveState& p, const PhasePair& omega,
                                     double theta0) {
  const ThermoEval t = eval_potential(law, p);
  DynamicQuantities d;
  d.K = generalized_velocities(p, t.dW_dw);
  for (int a = 0; a < kPhases; ++a) {
    d.R[a] = 0.5 * p.u[a] * p.u[a] - t.dW_drho[a] - omega[a];
    d.theta[a] = t.theta[a];
    d.mu[a] = t.dW_drho[a] - theta0 * p.s[a];
  }
  d.mu_diff = d.mu[1] - d.mu[0];
  return d;
}

inline MixtureAggregates mixture_aggregates(const PrimitiveState& p) {
  require_admissible_densities(p.rho);
  MixtureAggregates m;
  m.rho = p.rho[0] + p.rho[1];
  m.momentum = p.rho[0] * p.u[0] + p.rho[1] * p.u[1];
  m.velocity = m.momentum / m.rho;
  return m;
}

/// Shifts both velocities by c.
inline PrimitiveState boosted(PrimitiveState p, double c) {
  p.u[0] += c;
  p.u[1] += c;
  return p;
}

}  // namespace twofluid
