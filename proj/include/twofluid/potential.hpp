#pragma once

// Constitutive potential W(rho1, rho2, s1, s2, w) per unit mixture volume and
// the thermodynamic quantities derived from it.

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <functional>
#include <limits>
#include <utility>

#include <Eigen/Core>
#include <fmt/format.h>

#include "twofluid/error.hpp"
#include "twofluid/types.hpp"

namespace twofluid {

/// Positions of the potential's arguments in gradients and Hessians.
enum Var : int { kRho1 = 0, kRho2 = 1, kS1 = 2, kS2 = 3, kW = 4 };
inline constexpr int kNumVars = 5;

using Vec5 = Eigen::Matrix<double, kNumVars, 1>;
using Mat5 = Eigen::Matrix<double, kNumVars, kNumVars>;

/// Argument of W. The relative velocity is a signed scalar (1D flows).
struct ThermoPoint {
  PhasePair rho{1.0, 1.0};
  PhasePair s{0.0, 0.0};
  double w = 0.0;

  Vec5 as_vector() const {
    Vec5 v;
    v << rho[0], rho[1], s[0], s[1], w;
    return v;
  }
  static ThermoPoint from_vector(const Vec5& v) {
    return ThermoPoint{{v[kRho1], v[kRho2]}, {v[kS1], v[kS2]}, v[kW]};
  }
  static ThermoPoint from(const PrimitiveState& p) { return ThermoPoint{p.rho, p.s, p.w()}; }
};

inline constexpr int rho_index(int phase) noexcept { return phase == 0 ? kRho1 : kRho2; }
inline constexpr int s_index(int phase) noexcept { return phase == 0 ? kS1 : kS2; }

/// A constitutive law only has to provide W. Analytic first and second
/// partials are picked up when present; otherwise central differences are used.
template <typename L>
concept PotentialLaw = std::copy_constructible<L> && requires(const L& law, const ThermoPoint& x) {
  { law.value(x) } -> std::convertible_to<double>;
};

template <typename L>
concept HasAnalyticGradient = PotentialLaw<L> && requires(const L& law, const ThermoPoint& x) {
  { law.gradient(x) } -> std::convertible_to<Vec5>;
};

template <typename L>
concept HasAnalyticHessian = PotentialLaw<L> && requires(const L& law, const ThermoPoint& x) {
  { law.hessian(x) } -> std::convertible_to<Mat5>;
};

namespace detail {

inline double fallback_step(double x, double root) {
  return std::pow(std::numeric_limits<double>::epsilon(), root) * std::max(1.0, std::abs(x));
}

inline void require_stencil(const Vec5& x, const Vec5& h) {
  for (int a = 0; a < kPhases; ++a) {
    const int i = rho_index(a);
    if (x[i] - h[i] < kMinDensity) {
      throw DomainError(fmt::format(
          "rho{} = {} is too close to zero for a finite-difference step of {}", a + 1, x[i], h[i]));
    }
  }
}

template <PotentialLaw L>
double value_at(const L& law, const Vec5& x) {
  return law.value(ThermoPoint::from_vector(x));
}

template <PotentialLaw L>
Vec5 central_gradient(const L& law, const Vec5& x, const Vec5& h) {
  require_stencil(x, h);
  Vec5 g;
  for (int i = 0; i < kNumVars; ++i) {
    Vec5 xp = x, xm = x;
    xp[i] += h[i];
    xm[i] -= h[i];
    g[i] = (value_at(law, xp) - value_at(law, xm)) / (2.0 * h[i]);
  }
  return g;
}

template <typename GradientFn>
Mat5 central_jacobian_of_gradient(GradientFn&& grad, const Vec5& x, const Vec5& h) {
  require_stencil(x, h);
  Mat5 H;
  for (int j = 0; j < kNumVars; ++j) {
    Vec5 xp = x, xm = x;
    xp[j] += h[j];
    xm[j] -= h[j];
    H.col(j) = (grad(xp) - grad(xm)) / (2.0 * h[j]);
  }
  return H;
}

template <PotentialLaw L>
Mat5 central_hessian_from_values(const L& law, const Vec5& x, const Vec5& h) {
  require_stencil(x, h);
  Mat5 H;
  const double f0 = value_at(law, x);
  for (int i = 0; i < kNumVars; ++i) {
    Vec5 xp = x, xm = x;
    xp[i] += h[i];
    xm[i] -= h[i];
    H(i, i) = (value_at(law, xp) - 2.0 * f0 + value_at(law, xm)) / (h[i] * h[i]);
    for (int j = i + 1; j < kNumVars; ++j) {
      Vec5 pp = x, pm = x, mp = x, mm = x;
      pp[i] += h[i]; pp[j] += h[j];
      pm[i] += h[i]; pm[j] -= h[j];
      mp[i] -= h[i]; mp[j] += h[j];
      mm[i] -= h[i]; mm[j] -= h[j];
      H(i, j) = (value_at(law, pp) - value_at(law, pm) - value_at(law, mp) + value_at(law, mm)) /
                (4.0 * h[i] * h[j]);
      H(j, i) = H(i, j);
    }
  }
  return H;
}

}  // namespace detail

inline void require_admissible(const ThermoPoint& x) { require_admissible_densities(x.rho); }

template <PotentialLaw L>
double potential_value(const L& law, const ThermoPoint& x) {
  require_admissible(x);
  return law.value(x);
}

/// First partials of W, analytic when the law provides them.
template <PotentialLaw L>
Vec5 potential_gradient(const L& law, const ThermoPoint& x) {
  require_admissible(x);
  if constexpr (HasAnalyticGradient<L>) {
    return law.gradient(x);
  } else {
    const Vec5 v = x.as_vector();
    const Vec5 h = v.unaryExpr([](double xi) { return detail::fallback_step(xi, 1.0 / 3.0); });
    return detail::central_gradient(law, v, h);
  }
}

/// Second partials of W. Without an analytic Hessian, differences of the
/// gradient (or second differences of W) are symmetrized.
template <PotentialLaw L>
Mat5 potential_hessian(const L& law, const ThermoPoint& x) {
  require_admissible(x);
  if constexpr (HasAnalyticHessian<L>) {
    return law.hessian(x);
  } else if constexpr (HasAnalyticGradient<L>) {
    const Vec5 v = x.as_vector();
    const Vec5 h = v.unaryExpr([](double xi) { return detail::fallback_step(xi, 1.0 / 3.0); });
    const Mat5 H = detail::central_jacobian_of_gradient(
        [&](const Vec5& y) { return Vec5(law.gradient(ThermoPoint::from_vector(y))); }, v, h);
    return 0.5 * (H + H.transpose());
  } else {
    const Vec5 v = x.as_vector();
    const Vec5 h = v.unaryExpr([](double xi) { return detail::fallback_step(xi, 0.25); });
    return detail::central_hessian_from_values(law, v, h);
  }
}

/// Point evaluation of W and everything derived from it.
struct ThermoEval {
  double W = 0.0;
  /// Internal energy U = W - (dW/dw) w.
  double U = 0.0;
  PhasePair theta{};
  /// i* = -dW/dw.
  double istar = 0.0;
  PhasePair dW_drho{};
  PhasePair dW_ds{};
  double dW_dw = 0.0;
  Vec5 gradient = Vec5::Zero();
  Mat5 hessian = Mat5::Zero();
};

template <PotentialLaw L>
ThermoEval eval_potential(const L& law, const ThermoPoint& x) {
  require_admissible(x);
  ThermoEval e;
  e.W = law.value(x);
  e.gradient = potential_gradient(law, x);
  e.hessian = potential_hessian(law, x);
  for (int a = 0; a < kPhases; ++a) {
    e.dW_drho[a] = e.gradient[rho_index(a)];
    e.dW_ds[a] = e.gradient[s_index(a)];
    e.theta[a] = e.dW_ds[a] / x.rho[a];
  }
  e.dW_dw = e.gradient[kW];
  e.istar = -e.dW_dw;
  e.U = e.W - e.dW_dw * x.w;
  return e;
}

template <PotentialLaw L>
ThermoEval eval_potential(const L& law, const PrimitiveState& p) {
  return eval_potential(law, ThermoPoint::from(p));
}

/// Lagrangian density sum_a (rho_a u_a^2 / 2 - rho_a Omega_a) - W.
template <PotentialLaw L>
double eval_lagrangian(const L& law, const PrimitiveState& p, const PhasePair& omega = {0.0, 0.0}) {
  const double W = potential_value(law, ThermoPoint::from(p));
  double kinetic = 0.0;
  for (int a = 0; a < kPhases; ++a) {
    kinetic += 0.5 * p.rho[a] * p.u[a] * p.u[a] - p.rho[a] * omega[a];
  }
  return kinetic - W;
}

/// Worst relative discrepancy between the law's partials and central
/// differences of step h: gradient against differences of W, Hessian against
/// differences of the gradient.
template <PotentialLaw L>
double fd_check_derivatives(const L& law, const PrimitiveState& p, double h) {
  if (!(h > 0.0)) throw DomainError("finite-difference step must be positive");
  const ThermoPoint x = ThermoPoint::from(p);
  require_admissible(x);
  const Vec5 v = x.as_vector();
  const Vec5 hv = Vec5::Constant(h);
  detail::require_stencil(v, hv);

  const Vec5 g = potential_gradient(law, x);
  const Mat5 H = potential_hessian(law, x);
  const Vec5 g_fd = detail::central_gradient(law, v, hv);
  const Mat5 H_fd = detail::central_jacobian_of_gradient(
      [&](const Vec5& y) { return potential_gradient(law, ThermoPoint::from_vector(y)); }, v, hv);

  auto relative = [](double analytic, double numeric, double floor) {
    const double diff = std::abs(analytic - numeric);
    if (diff == 0.0) return 0.0;
    return diff / std::max({std::abs(analytic), std::abs(numeric), floor});
  };
  const double g_floor = std::max(1e-6 * g.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
  const double H_floor = std::max(1e-6 * H.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());

  double worst = 0.0;
  for (int i = 0; i < kNumVars; ++i) {
    worst = std::max(worst, relative(g[i], g_fd[i], g_floor));
    for (int j = 0; j < kNumVars; ++j) {
      worst = std::max(worst, relative(H(i, j), H_fd(i, j), H_floor));
    }
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Built-in law: two polytropic components coupled by an added-mass term,
//   W = W1(rho1, s1) + W2(rho2, s2) - a(rho1, rho2) w^2 / 2,
//   W_a = rho_a e_a,  e_a = K_a0 / (gamma_a - 1) rho_a^(gamma_a - 1) exp((s_a - s_a0) / cv_a).

struct PhaseParams {
  double gamma = 1.4;
  double cv = 1.0;
  double s0 = 0.0;
  double K0 = 1.0;
};

/// Added-mass coefficient and its partials with respect to the densities.
struct AddedMassValue {
  double a = 0.0;
  double d_rho1 = 0.0;
  double d_rho2 = 0.0;
  double d_rho1rho1 = 0.0;
  double d_rho1rho2 = 0.0;
  double d_rho2rho2 = 0.0;
};

using AddedMassFunction = std::function<AddedMassValue(double rho1, double rho2)>;

class SeparableAddedMass {
 public:
  SeparableAddedMass(std::array<PhaseParams, kPhases> phases, double a) : phases_(phases), a_const_(a) {
    validate();
    if (!(a >= 0.0)) throw DomainError(fmt::format("added-mass coefficient a = {} must be >= 0", a));
  }

  SeparableAddedMass(std::array<PhaseParams, kPhases> phases, AddedMassFunction a_of_rho)
      : phases_(phases), a_fn_(std::move(a_of_rho)) {
    validate();
  }

  const PhaseParams& phase(int a) const { return phases_[a]; }
  bool has_constant_added_mass() const { return !a_fn_; }

  AddedMassValue added_mass(double rho1, double rho2) const {
    if (a_fn_) return a_fn_(rho1, rho2);
    AddedMassValue v;
    v.a = a_const_;
    return v;
  }

  double value(const ThermoPoint& x) const {
    double W = 0.0;
    for (int a = 0; a < kPhases; ++a) W += phase_energy(a, x.rho[a], x.s[a]);
    return W - 0.5 * added_mass(x.rho[0], x.rho[1]).a * x.w * x.w;
  }

  Vec5 gradient(const ThermoPoint& x) const {
    Vec5 g = Vec5::Zero();
    for (int a = 0; a < kPhases; ++a) {
      const PhaseParams& p = phases_[a];
      const double Wa = phase_energy(a, x.rho[a], x.s[a]);
      g[rho_index(a)] = p.gamma * Wa / x.rho[a];
      g[s_index(a)] = Wa / p.cv;
    }
    const AddedMassValue am = added_mass(x.rho[0], x.rho[1]);
    const double w2 = x.w * x.w;
    g[kRho1] -= 0.5 * am.d_rho1 * w2;
    g[kRho2] -= 0.5 * am.d_rho2 * w2;
    g[kW] = -am.a * x.w;
    return g;
  }

  Mat5 hessian(const ThermoPoint& x) const {
    Mat5 H = Mat5::Zero();
    for (int a = 0; a < kPhases; ++a) {
      const PhaseParams& p = phases_[a];
      const double Wa = phase_energy(a, x.rho[a], x.s[a]);
      const int r = rho_index(a), s = s_index(a);
      H(r, r) = p.gamma * (p.gamma - 1.0) * Wa / (x.rho[a] * x.rho[a]);
      H(r, s) = H(s, r) = p.gamma * Wa / (x.rho[a] * p.cv);
      H(s, s) = Wa / (p.cv * p.cv);
    }
    const AddedMassValue am = added_mass(x.rho[0], x.rho[1]);
    const double w2 = x.w * x.w;
    H(kRho1, kRho1) -= 0.5 * am.d_rho1rho1 * w2;
    H(kRho2, kRho2) -= 0.5 * am.d_rho2rho2 * w2;
    H(kRho1, kRho2) -= 0.5 * am.d_rho1rho2 * w2;
    H(kRho2, kRho1) = H(kRho1, kRho2);
    H(kRho1, kW) = H(kW, kRho1) = -am.d_rho1 * x.w;
    H(kRho2, kW) = H(kW, kRho2) = -am.d_rho2 * x.w;
    H(kW, kW) = -am.a;
    return H;
  }

  /// rho_a e_a(rho_a, s_a) for one component.
  double phase_energy(int a, double rho, double s) const {
    const PhaseParams& p = phases_[a];
    return p.K0 / (p.gamma - 1.0) * std::pow(rho, p.gamma) * std::exp((s - p.s0) / p.cv);
  }

  /// Specific entropy at which component a has temperature theta at density rho.
  double isothermal_entropy(int a, double rho, double theta) const {
    if (!(theta > 0.0)) throw DomainError(fmt::format("theta = {} is not a positive temperature", theta));
    if (!(rho >= kMinDensity)) throw DomainError(fmt::format("rho{} = {} is not an admissible density", a + 1, rho));
    const PhaseParams& p = phases_[a];
    // theta_a = e_a / cv_a
    return p.s0 + p.cv * std::log(p.cv * theta * (p.gamma - 1.0) / (p.K0 * std::pow(rho, p.gamma - 1.0)));
  }

 private:
  void validate() const {
    for (int a = 0; a < kPhases; ++a) {
      const PhaseParams& p = phases_[a];
      if (!(p.gamma > 1.0)) throw DomainError(fmt::format("gamma{} must exceed 1", a + 1));
      if (!(p.cv > 0.0)) throw DomainError(fmt::format("cv{} must be positive", a + 1));
      if (!(p.K0 > 0.0)) throw DomainError(fmt::format("K{} must be positive", a + 1));
      if (!std::isfinite(p.s0)) throw DomainError(fmt::format("s0{} must be finite", a + 1));
    }
  }

  std::array<PhaseParams, kPhases> phases_;
  double a_const_ = 0.0;
  AddedMassFunction a_fn_;
};

static_assert(HasAnalyticHessian<SeparableAddedMass>);

}  // namespace twofluid
