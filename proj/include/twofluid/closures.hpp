#pragma once

// Stokes-like interphase drag and internal heat exchange, written in the
// components' coldness 1/theta_a, and the entropy budget they induce.

#include <cmath>

#include <fmt/format.h>

#include "twofluid/error.hpp"
#include "twofluid/state.hpp"
#include "twofluid/types.hpp"

namespace twofluid {

struct ClosureParams {
  /// Drag coefficient k >= 0.
  double k = 0.0;
  /// Heat-exchange coefficient kappa >= 0.
  double kappa = 0.0;

  void validate() const {
    if (!(k >= 0.0) || !std::isfinite(k)) throw DomainError(fmt::format("drag coefficient k = {} must be >= 0", k));
    if (!(kappa >= 0.0) || !std::isfinite(kappa)) {
      throw DomainError(fmt::format("heat-exchange coefficient kappa = {} must be >= 0", kappa));
    }
  }
  bool conservative() const noexcept { return k == 0.0 && kappa == 0.0; }
};

/// Interphase forces f_a and heat supplies q_a. f2 = -f1 and q2 = -q1 hold
/// bit-exactly.
struct DissipationForces {
  PhasePair f{0.0, 0.0};
  PhasePair q{0.0, 0.0};
};

inline DissipationForces drag_and_heat(const ClosureParams& params, const PrimitiveState& p,
                                       const PhasePair& theta) {
  require_positive_temperatures(theta);
  const double u = mixture_aggregates(p).velocity;
  DissipationForces d;
  d.f[0] = params.k * ((p.u[1] - u) / theta[1] - (p.u[0] - u) / theta[0]);
  d.f[1] = -d.f[0];
  d.q[0] = params.kappa * (1.0 / theta[1] - 1.0 / theta[0]);
  d.q[1] = -d.q[0];
  return d;
}

/// Material rate of each specific entropy,
///   d_a s_a / dt = -(f_a (u_a - u) + q_a) / (rho_a theta_a).
inline PhasePair entropy_sources(const DissipationForces& forces, const PrimitiveState& p,
                                 const PhasePair& theta) {
  require_positive_temperatures(theta);
  const double u = mixture_aggregates(p).velocity;
  PhasePair src;
  for (int a = 0; a < kPhases; ++a) {
    src[a] = -(forces.f[a] * (p.u[a] - u) + forces.q[a]) / (p.rho[a] * theta[a]);
  }
  return src;
}

/// -sum_a [ f_a (u_a - u) / theta_a + q_a / theta_a ], the entropy production
/// per unit volume. Non-negative for the closures above.
inline double entropy_production(const DissipationForces& forces, const PrimitiveState& p,
                                 const PhasePair& theta) {
  require_positive_temperatures(theta);
  const double u = mixture_aggregates(p).velocity;
  double sum = 0.0;
  for (int a = 0; a < kPhases; ++a) {
    sum += forces.f[a] / theta[a] * (p.u[a] - u) + forces.q[a] / theta[a];
  }
  return -sum;
}

/// Linearized relaxation rate of the drag (on w) and of heat exchange (on
/// theta1 - theta2). Used to bound explicit time steps.
struct RelaxationRates {
  double drag = 0.0;
  double heat = 0.0;
  double max() const noexcept { return drag > heat ? drag : heat; }
};

inline RelaxationRates relaxation_rates(const ThermoEval& t, const ClosureParams& params, const PrimitiveState& p) {
  const double rho = p.rho[0] + p.rho[1];
  const double inv_sum = 1.0 / p.rho[0] + 1.0 / p.rho[1];
  RelaxationRates r;
  // f1 = k w (rho1 / (rho theta2) + rho2 / (rho theta1)) and
  // d(K2 - K1)/dt = -f1 (1/rho1 + 1/rho2), d(K2 - K1)/dw = 1 - inv_sum W_ww.
  const double dKdw = 1.0 - inv_sum * t.hessian(kW, kW);
  r.drag = params.k * (p.rho[0] / (rho * t.theta[1]) + p.rho[1] / (rho * t.theta[0])) * inv_sum /
           std::max(dKdw, 1e-300);
  // dtheta_a/ds_a = W_{s_a s_a} / rho_a and dq1/dtheta ~ kappa / theta^2.
  const double theta_min = std::min(t.theta[0], t.theta[1]);
  double stiffness = 0.0;
  for (int a = 0; a < kPhases; ++a) {
    const int i = s_index(a);
    stiffness += std::abs(t.hessian(i, i)) / (p.rho[a] * p.rho[a]);
  }
  r.heat = params.kappa * stiffness / (theta_min * theta_min * theta_min);
  return r;
}

template <PotentialLaw L>
RelaxationRates relaxation_rates(const L& law, const ClosureParams& params, const PrimitiveState& p) {
  return relaxation_rates(eval_potential(law, p), params, p);
}

}  // namespace twofluid
