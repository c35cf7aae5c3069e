#pragma once

// Partial Legendre transform of the mechanical Lagrangian
//   L(rho, j) = sum_a j_a^2 / (2 rho_a) - W(rho1, rho2, w),  w = j2/rho2 - j1/rho1,
// with respect to the densities, the resulting Godunov-symmetric form
//   A du/dt + B du/dx = 0,  u = (sigma1, sigma2, j1, j2),  A = d2G/du2,
// characteristic speeds, and hyperbolicity diagnostics. Entropies are frozen
// parameters and external potentials vanish throughout this module.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "twofluid/error.hpp"
#include "twofluid/potential.hpp"
#include "twofluid/state.hpp"
#include "twofluid/types.hpp"

namespace twofluid {

using Vec4 = Eigen::Matrix<double, 4, 1>;
using Mat4 = Eigen::Matrix<double, 4, 4>;
using Mat2 = Eigen::Matrix<double, 2, 2>;
using Vec2 = Eigen::Matrix<double, 2, 1>;

/// Relative threshold for positive definiteness: min-eig(A) > 1e-10 |A|.
inline constexpr double kDefinitenessTolerance = 1e-10;
/// Largest accepted relative asymmetry of a finite-difference Hessian.
inline constexpr double kMaxAsymmetry = 1e-6;

struct LegendreVars {
  /// sigma_a = dL/drho_a at fixed j.
  PhasePair sigma{};
  /// j_a = rho_a u_a.
  PhasePair j{};
  /// G = L - sum_a sigma_a rho_a.
  double G = 0.0;
  /// K_a = dL/dj_a = dG/dj_a.
  PhasePair K{};

  Vec4 as_vector() const {
    Vec4 v;
    v << sigma[0], sigma[1], j[0], j[1];
    return v;
  }
};

namespace detail {

/// L, its gradient and Hessian in z = (rho1, rho2, j1, j2) at frozen entropies.
struct LagrangianJet {
  double L = 0.0;
  Vec4 gradient = Vec4::Zero();
  Mat4 hessian = Mat4::Zero();
};

template <PotentialLaw L>
LagrangianJet lagrangian_jet(const L& law, const PhasePair& rho, const PhasePair& j, const PhasePair& s,
                             bool with_hessian = true) {
  require_admissible_densities(rho);
  const PhasePair u{j[0] / rho[0], j[1] / rho[1]};
  const ThermoPoint x{rho, s, u[1] - u[0]};
  const double W = law.value(x);
  const Vec5 g = potential_gradient(law, x);

  // dw/dz and d2w/dz2
  Vec4 dw;
  dw << u[0] / rho[0], -u[1] / rho[1], -1.0 / rho[0], 1.0 / rho[1];

  LagrangianJet jet;
  jet.L = 0.5 * (j[0] * u[0] + j[1] * u[1]) - W;
  for (int a = 0; a < kPhases; ++a) {
    jet.gradient[a] = -0.5 * u[a] * u[a] - g[rho_index(a)] - g[kW] * dw[a];
    jet.gradient[2 + a] = u[a] - g[kW] * dw[2 + a];
  }
  if (!with_hessian) return jet;

  const Mat5 H = potential_hessian(law, x);
  Mat4 d2w = Mat4::Zero();
  d2w(0, 0) = -2.0 * u[0] / (rho[0] * rho[0]);
  d2w(1, 1) = 2.0 * u[1] / (rho[1] * rho[1]);
  d2w(0, 2) = d2w(2, 0) = 1.0 / (rho[0] * rho[0]);
  d2w(1, 3) = d2w(3, 1) = -1.0 / (rho[1] * rho[1]);

  // Jacobian of (rho1, rho2, w) with respect to z.
  Eigen::Matrix<double, 3, 4> J = Eigen::Matrix<double, 3, 4>::Zero();
  J(0, 0) = 1.0;
  J(1, 1) = 1.0;
  J.row(2) = dw.transpose();
  Eigen::Matrix3d Hy;
  const std::array<int, 3> idx{kRho1, kRho2, kW};
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) Hy(r, c) = H(idx[r], idx[c]);

  Mat4 kinetic = Mat4::Zero();
  for (int a = 0; a < kPhases; ++a) {
    kinetic(a, a) = u[a] * u[a] / rho[a];
    kinetic(a, 2 + a) = kinetic(2 + a, a) = -u[a] / rho[a];
    kinetic(2 + a, 2 + a) = 1.0 / rho[a];
  }
  jet.hessian = kinetic - (J.transpose() * Hy * J + g[kW] * d2w);
  return jet;
}

}  // namespace detail

/// sigma, j and G at a primitive state (mechanical restriction, Omega = 0).
template <PotentialLaw L>
LegendreVars legendre_transform(const L& law, const PrimitiveState& p) {
  const PhasePair j{p.rho[0] * p.u[0], p.rho[1] * p.u[1]};
  const detail::LagrangianJet jet = detail::lagrangian_jet(law, p.rho, j, p.s, false);
  LegendreVars v;
  v.j = j;
  v.sigma = {jet.gradient[0], jet.gradient[1]};
  v.K = {jet.gradient[2], jet.gradient[3]};
  v.G = jet.L - v.sigma[0] * p.rho[0] - v.sigma[1] * p.rho[1];
  return v;
}

/// Densities solving sigma(rho; j) = sigma at fixed j and entropies, by a
/// damped Newton iteration started from rho_guess.
template <PotentialLaw L>
PhasePair inverse_legendre(const L& law, const PhasePair& sigma, const PhasePair& j, const PhasePair& s,
                           PhasePair rho_guess) {
  require_admissible_densities(rho_guess);
  const double scale = std::max({1.0, std::abs(sigma[0]), std::abs(sigma[1])});
  Vec2 rho(rho_guess[0], rho_guess[1]);

  auto residual = [&](const Vec2& r) {
    const detail::LagrangianJet jet = detail::lagrangian_jet(law, {r[0], r[1]}, j, s, false);
    return Vec2(jet.gradient[0] - sigma[0], jet.gradient[1] - sigma[1]);
  };

  Vec2 F = residual(rho);
  for (int iter = 0; iter < 80; ++iter) {
    const detail::LagrangianJet jet = detail::lagrangian_jet(law, {rho[0], rho[1]}, j, s, true);
    const Mat2 J = jet.hessian.topLeftCorner<2, 2>();
    const Eigen::PartialPivLU<Mat2> lu(J);
    if (!(std::abs(J.determinant()) > 0.0)) break;
    const Vec2 delta = -lu.solve(F);

    double step = 1.0;
    Vec2 next = rho + delta;
    Vec2 F_next;
    bool accepted = false;
    for (int halving = 0; halving < 40; ++halving) {
      next = rho + step * delta;
      if (next[0] >= kMinDensity && next[1] >= kMinDensity) {
        F_next = residual(next);
        if (F_next.lpNorm<Eigen::Infinity>() <= F.lpNorm<Eigen::Infinity>() || halving == 39) {
          accepted = true;
          break;
        }
      }
      step *= 0.5;
    }
    if (!accepted) break;
    const bool small_step = (next - rho).cwiseAbs().maxCoeff() <= 4.0 * std::numeric_limits<double>::epsilon() *
                                                                      next.cwiseAbs().maxCoeff();
    rho = next;
    F = F_next;
    if (F.lpNorm<Eigen::Infinity>() <= 1e-15 * scale || small_step) return {rho[0], rho[1]};
  }
  if (F.lpNorm<Eigen::Infinity>() <= 1e-12 * scale) return {rho[0], rho[1]};
  throw ConvergenceError(fmt::format(
      "Legendre inversion failed: sigma = ({}, {}), j = ({}, {}), last rho = ({}, {}), residual {}", sigma[0],
      sigma[1], j[0], j[1], rho[0], rho[1], F.lpNorm<Eigen::Infinity>()));
}

/// G(u) and its gradient dG/du = (-rho1, -rho2, K1, K2) for u = (sigma, j).
struct LegendreGradient {
  double G = 0.0;
  Vec4 gradient = Vec4::Zero();
  PhasePair rho{};
};

template <PotentialLaw L>
LegendreGradient legendre_gradient(const L& law, const Vec4& u, const PhasePair& s, const PhasePair& rho_guess) {
  const PhasePair sigma{u[0], u[1]};
  const PhasePair j{u[2], u[3]};
  const PhasePair rho = inverse_legendre(law, sigma, j, s, rho_guess);
  const detail::LagrangianJet jet = detail::lagrangian_jet(law, rho, j, s, false);
  LegendreGradient out;
  out.rho = rho;
  out.G = jet.L - sigma[0] * rho[0] - sigma[1] * rho[1];
  out.gradient << -rho[0], -rho[1], jet.gradient[2], jet.gradient[3];
  return out;
}

struct SymmetricSystem {
  Mat4 A = Mat4::Identity();
  Mat4 B = Mat4::Zero();
  /// |M - M^T|_F / |M|_F before symmetrization.
  double asymmetry_A = 0.0;
  double asymmetry_B = 0.0;
  /// Eigenvalues of A, ascending.
  Vec4 eig_A = Vec4::Zero();
  double min_eig_A = 0.0;
  /// Finite-difference steps actually used for each column of A.
  Vec4 steps = Vec4::Zero();
  LegendreVars legendre{};

  double norm_A() const { return eig_A.cwiseAbs().maxCoeff(); }
  bool positive_definite() const { return min_eig_A > kDefinitenessTolerance * norm_A(); }
};

namespace detail {

inline double relative_asymmetry(const Mat4& M) {
  const double n = M.norm();
  return n > 0.0 ? (M - M.transpose()).norm() / n : 0.0;
}

/// Flux of the symmetric system in conservation form, d/dt(dG/du) + d/dx(F(u)) = 0,
/// F(u) = -d/du (sum_b sigma_b j_b).
inline Vec4 symmetric_flux(const Vec4& u) {
  Vec4 F;
  F << -u[2], -u[3], -u[0], -u[1];
  return F;
}

}  // namespace detail

/// A = d2G/du2 by central differences of dG/du through the Legendre
/// inversion, B = dF/du by central differences of the flux. Both are
/// symmetrized; the asymmetry found before that is reported.
template <PotentialLaw L>
SymmetricSystem assemble_symmetric_system(const L& law, const PrimitiveState& p) {
  SymmetricSystem sys;
  sys.legendre = legendre_transform(law, p);
  const Vec4 u0 = sys.legendre.as_vector();
  const double base = std::cbrt(std::numeric_limits<double>::epsilon());

  Mat4 A;
  Mat4 B;
  for (int k = 0; k < 4; ++k) {
    double h = base * std::max(1.0, std::abs(u0[k]));
    for (int attempt = 0;; ++attempt) {
      try {
        Vec4 up = u0, um = u0;
        up[k] += h;
        um[k] -= h;
        const Vec4 gp = legendre_gradient(law, up, p.s, p.rho).gradient;
        const Vec4 gm = legendre_gradient(law, um, p.s, p.rho).gradient;
        A.col(k) = (gp - gm) / (2.0 * h);
        B.col(k) = (detail::symmetric_flux(up) - detail::symmetric_flux(um)) / (2.0 * h);
        sys.steps[k] = h;
        break;
      } catch (const ConvergenceError&) {
        if (attempt == 4) throw;
        h /= 8.0;
      }
    }
  }
  sys.asymmetry_A = detail::relative_asymmetry(A);
  sys.asymmetry_B = detail::relative_asymmetry(B);
  if (!(sys.asymmetry_A <= kMaxAsymmetry) || !(sys.asymmetry_B <= kMaxAsymmetry)) {
    throw NumericalError(fmt::format("symmetric form: relative asymmetry A {:.3e}, B {:.3e} exceeds {:.0e}",
                                     sys.asymmetry_A, sys.asymmetry_B, kMaxAsymmetry));
  }
  sys.A = 0.5 * (A + A.transpose());
  sys.B = 0.5 * (B + B.transpose());

  const Eigen::SelfAdjointEigenSolver<Mat4> es(sys.A, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("eigenvalues of A did not converge");
  sys.eig_A = es.eigenvalues();
  sys.min_eig_A = sys.eig_A[0];
  return sys;
}

/// A from the Hessian of L(rho, j) by the partial Legendre formulas
///   A = [[-P, P L_rj], [L_jr P, L_jj - L_jr P L_rj]],  P = inv(L_rr).
/// Independent of the finite-difference route above.
template <PotentialLaw L>
Mat4 closed_form_symmetric_matrix(const L& law, const PrimitiveState& p) {
  const PhasePair j{p.rho[0] * p.u[0], p.rho[1] * p.u[1]};
  const detail::LagrangianJet jet = detail::lagrangian_jet(law, p.rho, j, p.s, true);
  const Mat2 Lrr = jet.hessian.topLeftCorner<2, 2>();
  const Mat2 Lrj = jet.hessian.topRightCorner<2, 2>();
  const Mat2 Ljj = jet.hessian.bottomRightCorner<2, 2>();
  if (!(std::abs(Lrr.determinant()) > 0.0)) throw NumericalError("L_rho_rho is singular");
  const Mat2 P = Lrr.inverse();
  Mat4 A;
  A.topLeftCorner<2, 2>() = -P;
  A.topRightCorner<2, 2>() = P * Lrj;
  A.bottomLeftCorner<2, 2>() = Lrj.transpose() * P;
  A.bottomRightCorner<2, 2>() = Ljj - Lrj.transpose() * P * Lrj;
  return 0.5 * (A + A.transpose());
}

/// How A is obtained for wave speeds: differences through the Legendre
/// inversion, or the closed-form Schur formula (cheaper, same matrix).
enum class SpeedMethod { kFiniteDifference, kClosedForm };

/// The symmetric system with A from the closed-form formula and B constant.
template <PotentialLaw L>
SymmetricSystem closed_form_system(const L& law, const PrimitiveState& p) {
  SymmetricSystem sys;
  sys.legendre = legendre_transform(law, p);
  sys.A = closed_form_symmetric_matrix(law, p);
  sys.B.topRightCorner<2, 2>() = -Mat2::Identity();
  sys.B.bottomLeftCorner<2, 2>() = -Mat2::Identity();
  const Eigen::SelfAdjointEigenSolver<Mat4> es(sys.A, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("eigenvalues of A did not converge");
  sys.eig_A = es.eigenvalues();
  sys.min_eig_A = sys.eig_A[0];
  return sys;
}

struct CharacteristicSpeeds {
  bool hyperbolic = false;
  /// Real roots of det(B - lambda A) = 0, ascending. Valid when hyperbolic.
  std::array<double, 4> speeds{};
  double min_eig_A = 0.0;

  double max_abs() const {
    double m = 0.0;
    for (double s : speeds) m = std::max(m, std::abs(s));
    return m;
  }
};

inline CharacteristicSpeeds characteristic_speeds(const SymmetricSystem& sys) {
  CharacteristicSpeeds out;
  out.min_eig_A = sys.min_eig_A;
  if (!sys.positive_definite()) return out;
  const Eigen::GeneralizedSelfAdjointEigenSolver<Mat4> ges(sys.B, sys.A, Eigen::EigenvaluesOnly);
  if (ges.info() != Eigen::Success) throw NumericalError("generalized eigenproblem det(B - lambda A) = 0 failed");
  const Vec4 ev = ges.eigenvalues();
  for (int i = 0; i < 4; ++i) {
    if (!std::isfinite(ev[i])) throw NumericalError("non-finite characteristic speed");
    out.speeds[i] = ev[i];
  }
  std::sort(out.speeds.begin(), out.speeds.end());
  out.hyperbolic = true;
  return out;
}

struct InequalityCheck {
  double value = 0.0;
  bool holds = false;
  /// |value| is zero up to round-off relative to the Hessian entries involved.
  bool boundary = false;
};

/// The three sign conditions on the second derivatives of W:
///   W_ww < 0,  W_rho1rho1 > 0,  W_rho1rho1 W_rho2rho2 - W_rho1rho2^2 > 0.
struct StabilityChecks {
  InequalityCheck relative_velocity;
  InequalityCheck density;
  InequalityCheck determinant;

  bool all_hold() const { return relative_velocity.holds && density.holds && determinant.holds; }
};

template <PotentialLaw L>
StabilityChecks check_stability_inequalities(const L& law, const PrimitiveState& p) {
  const Mat5 H = potential_hessian(law, ThermoPoint::from(p));
  const double scale = std::max({std::abs(H(kRho1, kRho1)), std::abs(H(kRho2, kRho2)),
                                 std::abs(H(kRho1, kRho2)), std::abs(H(kW, kW)),
                                 std::numeric_limits<double>::min()});
  const double round_off = 64.0 * std::numeric_limits<double>::epsilon();
  auto make = [&](double value, bool negative, double ref) {
    InequalityCheck c;
    c.value = value;
    c.holds = negative ? value < 0.0 : value > 0.0;
    c.boundary = std::abs(value) <= round_off * ref;
    if (c.boundary) c.holds = false;
    return c;
  };
  StabilityChecks out;
  out.relative_velocity = make(H(kW, kW), true, scale);
  out.density = make(H(kRho1, kRho1), false, scale);
  const double det = H(kRho1, kRho1) * H(kRho2, kRho2) - H(kRho1, kRho2) * H(kRho1, kRho2);
  out.determinant = make(det, false, scale * scale);
  return out;
}

/// Per-state hyperbolicity record. `hyperbolic` is true iff A is positive
/// definite in the state's own frame.
struct HyperbolicityReport {
  PrimitiveState state;
  double min_eig_A = std::numeric_limits<double>::quiet_NaN();
  StabilityChecks inequalities;
  std::optional<std::array<double, 4>> speeds;
  bool hyperbolic = false;
  /// Empty unless the finite-difference assembly failed.
  std::string failure;
  /// Verdict taken from the closed-form A after the difference route failed.
  bool closed_form = false;
};

template <PotentialLaw L>
HyperbolicityReport analyze_state(const L& law, const PrimitiveState& p) {
  HyperbolicityReport r;
  r.state = p;
  r.inequalities = check_stability_inequalities(law, p);
  try {
    const SymmetricSystem sys = assemble_symmetric_system(law, p);
    const CharacteristicSpeeds cs = characteristic_speeds(sys);
    r.min_eig_A = sys.min_eig_A;
    r.hyperbolic = cs.hyperbolic;
    if (cs.hyperbolic) r.speeds = cs.speeds;
  } catch (const Error& e) {
    // Next to the fold of the Legendre map the difference stencil loses its
    // preimage or its accuracy; the closed-form A still decides definiteness.
    r.failure = e.what();
    try {
      const SymmetricSystem sys = closed_form_system(law, p);
      const CharacteristicSpeeds cs = characteristic_speeds(sys);
      r.min_eig_A = sys.min_eig_A;
      r.hyperbolic = cs.hyperbolic;
      if (cs.hyperbolic) r.speeds = cs.speeds;
      r.closed_form = true;
    } catch (const Error& e2) {
      r.failure += std::string("; closed form: ") + e2.what();
      r.hyperbolic = false;
    }
  }
  return r;
}

/// State with densities rho, relative velocity w and zero mixture momentum.
inline PrimitiveState comoving_state(double rho1, double rho2, double w, const PhasePair& s) {
  const double rho = rho1 + rho2;
  PrimitiveState p;
  p.rho = {rho1, rho2};
  p.u = {-rho2 * w / rho, rho1 * w / rho};
  p.s = s;
  return p;
}

/// Speeds evaluated in the local centre-of-mass frame and shifted back by the
/// mixture velocity, so the verdict does not depend on the observer.
struct LocalWaves {
  bool hyperbolic = false;
  std::array<double, 4> speeds{};
  double min_eig_A = 0.0;
  double max_abs_speed = 0.0;
};

template <PotentialLaw L>
LocalWaves local_waves(const L& law, const PrimitiveState& p, SpeedMethod method = SpeedMethod::kFiniteDifference) {
  const double u = mixture_aggregates(p).velocity;
  const PrimitiveState q = boosted(p, -u);
  const SymmetricSystem sys =
      method == SpeedMethod::kClosedForm ? closed_form_system(law, q) : assemble_symmetric_system(law, q);
  const CharacteristicSpeeds cs = characteristic_speeds(sys);
  LocalWaves out;
  out.hyperbolic = cs.hyperbolic;
  out.min_eig_A = cs.min_eig_A;
  if (cs.hyperbolic) {
    for (int i = 0; i < 4; ++i) {
      out.speeds[i] = cs.speeds[i] + u;
      out.max_abs_speed = std::max(out.max_abs_speed, std::abs(out.speeds[i]));
    }
  }
  return out;
}

/// Tensor grid over (rho1, rho2, w) at frozen entropies; states are taken in
/// the centre-of-mass frame.
struct RegionGrid {
  std::vector<double> rho1;
  std::vector<double> rho2;
  std::vector<double> w;
  PhasePair s{0.0, 0.0};

  std::size_t size() const { return rho1.size() * rho2.size() * w.size(); }
};

inline std::vector<double> linspace(double lo, double hi, int count) {
  std::vector<double> v;
  if (count <= 0) return v;
  v.reserve(count);
  if (count == 1) {
    v.push_back(lo);
    return v;
  }
  for (int i = 0; i < count; ++i) v.push_back(lo + (hi - lo) * i / (count - 1));
  return v;
}

/// One report per grid point, rho1 outermost and w innermost.
template <PotentialLaw L>
std::vector<HyperbolicityReport> map_hyperbolic_region(const L& law, const RegionGrid& grid) {
  std::vector<HyperbolicityReport> out;
  out.reserve(grid.size());
  for (double r1 : grid.rho1) {
    for (double r2 : grid.rho2) {
      for (double w : grid.w) {
        if (!(r1 >= kMinDensity) || !(r2 >= kMinDensity)) {
          throw DomainError(fmt::format("grid point rho = ({}, {}) is not admissible", r1, r2));
        }
        out.push_back(analyze_state(law, comoving_state(r1, r2, w, grid.s)));
      }
    }
  }
  return out;
}

struct CriticalVelocity {
  bool found = false;
  /// Midpoint of the final bracket.
  double w_star = std::numeric_limits<double>::quiet_NaN();
  double w_hyperbolic = 0.0;
  double w_lost = 0.0;
  double min_eig_hyperbolic = std::numeric_limits<double>::quiet_NaN();
  double min_eig_lost = std::numeric_limits<double>::quiet_NaN();
};

struct CriticalScanOptions {
  double w_max = 10.0;
  int scan_points = 200;
  double rel_tol = 1e-6;
};

/// Scans w >= 0 at fixed densities for the first loss of positive
/// definiteness of A (centre-of-mass frame) and bisects the crossing.
template <PotentialLaw L>
CriticalVelocity critical_relative_velocity(const L& law, double rho1, double rho2, const PhasePair& s,
                                            const CriticalScanOptions& opt = {}) {
  auto probe = [&](double w) { return analyze_state(law, comoving_state(rho1, rho2, w, s)); };

  CriticalVelocity out;
  HyperbolicityReport below = probe(0.0);
  if (!below.hyperbolic) return out;
  double lo = 0.0, hi = 0.0;
  HyperbolicityReport above;
  bool bracketed = false;
  for (int i = 1; i <= opt.scan_points; ++i) {
    const double w = opt.w_max * i / opt.scan_points;
    HyperbolicityReport r = probe(w);
    if (!r.hyperbolic) {
      hi = w;
      above = r;
      bracketed = true;
      break;
    }
    lo = w;
    below = r;
  }
  if (!bracketed) return out;
  while (hi - lo > opt.rel_tol * hi) {
    const double mid = 0.5 * (lo + hi);
    HyperbolicityReport r = probe(mid);
    if (r.hyperbolic) {
      lo = mid;
      below = r;
    } else {
      hi = mid;
      above = r;
    }
  }
  out.found = true;
  out.w_hyperbolic = lo;
  out.w_lost = hi;
  out.w_star = 0.5 * (lo + hi);
  out.min_eig_hyperbolic = below.min_eig_A;
  out.min_eig_lost = above.min_eig_A;
  return out;
}

}  // namespace twofluid
