#pragma once

// The dynamic Gibbs identity
//   E - sum_a (M_a u_a + (K_a u_a - R_a) B_a) - S = 0
// and the six term-group identities a-f whose sum proves it, evaluated on
// manufactured fields with central differences of one shared step h.
// Material derivatives d_a q/dt are differences along the component's
// trajectory, [q(t + h, x + u_a h) - q(t - h, x - u_a h)] / 2h, so they are
// independent of the partial derivatives they must agree with.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "twofluid/closures.hpp"
#include "twofluid/error.hpp"
#include "twofluid/potential.hpp"
#include "twofluid/state.hpp"
#include "twofluid/types.hpp"
#include "twofluid/verify/manufactured.hpp"

namespace twofluid::verify {

struct GibbsResidual {
  double E = 0.0;
  PhasePair M{};
  PhasePair B{};
  double S = 0.0;
  /// E - sum_a (M_a u_a + (K_a u_a - R_a) B_a) - S.
  double combination = 0.0;
  /// Sum of the magnitudes of the combined terms.
  double scale = 0.0;
};

/// Residuals of the identities a-f, each identically zero for exact
/// derivatives.
struct AppendixIdentities {
  static constexpr int kCount = 6;
  static constexpr std::array<const char*, kCount> kNames{"a", "b", "c", "d", "e", "f"};

  std::array<double, kCount> residual{};
  std::array<double, kCount> scale{};
};

namespace detail {

/// Pointwise quantities at one (t, x).
struct PointValues {
  PrimitiveState p;
  PhasePair omega{};
  PhasePair K{};
  PhasePair R{};
  PhasePair theta{};
  PhasePair dW_drho{};
  double U = 0.0;
  double istar = 0.0;
};

template <PotentialLaw L>
PointValues point_values(const L& law, const ManufacturedField& field, double t, double x) {
  PointValues v;
  v.p = field.primitive(t, x);
  v.omega = field.potentials(t, x);
  try {
    const ThermoEval te = eval_potential(law, v.p);
    require_positive_temperatures(te.theta);
    v.K = generalized_velocities(v.p, te.dW_dw);
    for (int a = 0; a < kPhases; ++a) {
      v.R[a] = 0.5 * v.p.u[a] * v.p.u[a] - te.dW_drho[a] - v.omega[a];
    }
    v.theta = te.theta;
    v.dW_drho = te.dW_drho;
    v.U = te.U;
    v.istar = te.istar;
  } catch (const DomainError& e) {
    throw DomainError(fmt::format("stencil point (t = {}, x = {}) is not admissible: {}", t, x, e.what()));
  }
  return v;
}

/// The nine stencil points: centre, t +- h, x +- h, and (t +- h, x +- u_a h).
struct Stencil {
  double h = 0.0;
  PointValues c;
  PointValues tp, tm, xp, xm;
  std::array<PointValues, kPhases> mp, mm;

  template <typename F>
  double dt(F q) const { return (q(tp) - q(tm)) / (2.0 * h); }
  template <typename F>
  double dx(F q) const { return (q(xp) - q(xm)) / (2.0 * h); }
  /// Material derivative along component a.
  template <typename F>
  double mat(int a, F q) const { return (q(mp[a]) - q(mm[a])) / (2.0 * h); }
};

template <PotentialLaw L>
Stencil make_stencil(const L& law, const ManufacturedField& field, double t, double x, double h) {
  if (!(h > 0.0)) throw DomainError(fmt::format("difference step h = {} must be positive", h));
  Stencil st;
  st.h = h;
  st.c = point_values(law, field, t, x);
  st.tp = point_values(law, field, t + h, x);
  st.tm = point_values(law, field, t - h, x);
  st.xp = point_values(law, field, t, x + h);
  st.xm = point_values(law, field, t, x - h);
  for (int a = 0; a < kPhases; ++a) {
    const double u = st.c.p.u[a];
    st.mp[a] = point_values(law, field, t + h, x + u * h);
    st.mm[a] = point_values(law, field, t - h, x - u * h);
  }
  return st;
}

inline double sign_alpha(int a) { return alternating_sign(a); }

}  // namespace detail

template <PotentialLaw L>
GibbsResidual gibbs_residual(const L& law, const ClosureParams& closures, const ManufacturedField& field, double t,
                             double x, double h) {
  const detail::Stencil st = detail::make_stencil(law, field, t, x, h);
  const detail::PointValues& c = st.c;
  const DissipationForces forces = drag_and_heat(closures, c.p, c.theta);

  GibbsResidual g;
  double energy_rate = st.dt([](const detail::PointValues& v) { return v.U; });
  double scale_E = std::abs(energy_rate);
  for (int a = 0; a < kPhases; ++a) {
    const double kinetic = st.dt([a](const detail::PointValues& v) {
      return v.p.rho[a] * (0.5 * v.p.u[a] * v.p.u[a] + v.omega[a]);
    });
    const double flux = st.dx([a](const detail::PointValues& v) {
      return v.p.rho[a] * v.p.u[a] * (v.K[a] * v.p.u[a] - v.R[a]);
    });
    const double potential = c.p.rho[a] * st.dt([a](const detail::PointValues& v) { return v.omega[a]; });
    energy_rate += kinetic + flux - potential;
    scale_E += std::abs(kinetic) + std::abs(flux) + std::abs(potential);
  }
  g.E = energy_rate;

  double combo = g.E;
  double scale = scale_E;
  double S = 0.0;
  for (int a = 0; a < kPhases; ++a) {
    const double rho = c.p.rho[a], u = c.p.u[a];
    const double dK = st.mat(a, [a](const detail::PointValues& v) { return v.K[a]; });
    const double du_dx = st.dx([a](const detail::PointValues& v) { return v.p.u[a]; });
    const double dR_dx = st.dx([a](const detail::PointValues& v) { return v.R[a]; });
    const double ds_dx = st.dx([a](const detail::PointValues& v) { return v.p.s[a]; });
    g.M[a] = rho * dK + rho * c.K[a] * du_dx - rho * dR_dx - rho * c.theta[a] * ds_dx - forces.f[a];

    g.B[a] = st.dt([a](const detail::PointValues& v) { return v.p.rho[a]; }) +
             st.dx([a](const detail::PointValues& v) { return v.p.rho[a] * v.p.u[a]; });

    const double ds = st.mat(a, [a](const detail::PointValues& v) { return v.p.s[a]; });
    S += rho * c.theta[a] * ds + forces.f[a] * u;

    const double bernoulli = c.K[a] * u - c.R[a];
    combo -= g.M[a] * u + bernoulli * g.B[a];
    scale += std::abs(g.M[a] * u) + std::abs(bernoulli * g.B[a]);
  }
  g.S = S;
  g.combination = combo - S;
  g.scale = scale + std::abs(S);
  return g;
}

template <PotentialLaw L>
AppendixIdentities appendix_identities(const L& law, const ClosureParams& closures, const ManufacturedField& field,
                                       double t, double x, double h) {
  using detail::PointValues;
  const detail::Stencil st = detail::make_stencil(law, field, t, x, h);
  const PointValues& c = st.c;
  const DissipationForces forces = drag_and_heat(closures, c.p, c.theta);

  AppendixIdentities out;
  auto add = [&out](int id, std::initializer_list<double> terms) {
    for (double v : terms) {
      out.residual[id] += v;
      out.scale[id] += std::abs(v);
    }
  };

  // a: drag work, no derivatives
  {
    const double w1 = forces.f[0] * c.p.u[0], w2 = forces.f[1] * c.p.u[1];
    out.residual[0] = w1 + w2 - w1 - w2;
    out.scale[0] = std::abs(w1) + std::abs(w2);
  }

  // f: i* terms share one time derivative
  {
    const double di = st.dt([](const PointValues& v) { return v.istar; });
    add(5, {di * c.p.w()});
  }

  for (int a = 0; a < kPhases; ++a) {
    const double rho = c.p.rho[a], u = c.p.u[a], om = c.omega[a];
    const double B = st.dt([a](const PointValues& v) { return v.p.rho[a]; }) +
                     st.dx([a](const PointValues& v) { return v.p.rho[a] * v.p.u[a]; });

    // b: external potentials
    add(1, {st.dt([a](const PointValues& v) { return v.p.rho[a] * v.omega[a]; }),
            st.dx([a](const PointValues& v) { return v.p.rho[a] * v.omega[a] * v.p.u[a]; }),
            -rho * st.dx([a](const PointValues& v) { return v.omega[a]; }) * u, -B * om,
            -rho * st.dt([a](const PointValues& v) { return v.omega[a]; })});

    // c: kinetic terms
    const double half_u2 = 0.5 * u * u;
    const double bracket = rho * st.mat(a, [a](const PointValues& v) { return v.p.u[a]; }) +
                           rho * u * st.dx([a](const PointValues& v) { return v.p.u[a]; }) -
                           rho * st.dx([a](const PointValues& v) { return 0.5 * v.p.u[a] * v.p.u[a]; });
    add(2, {st.dt([a](const PointValues& v) { return 0.5 * v.p.rho[a] * v.p.u[a] * v.p.u[a]; }),
            st.dx([a](const PointValues& v) {
              const double uu = v.p.u[a];
              return v.p.rho[a] * uu * (uu * uu - 0.5 * uu * uu);
            }),
            -B * (u * u - half_u2), -bracket * u});

    // d: dW/drho terms
    const double Wr = c.dW_drho[a];
    add(3, {Wr * st.dt([a](const PointValues& v) { return v.p.rho[a]; }),
            st.dx([a](const PointValues& v) { return v.dW_drho[a] * v.p.rho[a] * v.p.u[a]; }),
            -rho * st.dx([a](const PointValues& v) { return v.dW_drho[a]; }) * u, -Wr * B});

    // e: entropy terms
    const double rt = rho * c.theta[a];
    add(4, {rt * st.dt([a](const PointValues& v) { return v.p.s[a]; }),
            rt * st.dx([a](const PointValues& v) { return v.p.s[a]; }) * u,
            -rt * st.mat(a, [a](const PointValues& v) { return v.p.s[a]; })});

    // f: v_a = (-1)^a i* / rho_a
    const double sg = detail::sign_alpha(a);
    auto v_of = [a, sg](const PointValues& v) { return sg * v.istar / v.p.rho[a]; };
    const double va = v_of(c);
    add(5, {st.dx([a, v_of](const PointValues& v) { return v_of(v) * v.p.u[a] * v.p.rho[a] * v.p.u[a]; }),
            -(rho * st.mat(a, v_of) + rho * va * st.dx([a](const PointValues& v) { return v.p.u[a]; })) * u,
            -va * u * B});
  }
  return out;
}

struct SamplePoint {
  double t = 0.0;
  double x = 0.0;
};

inline std::vector<SamplePoint> sample_points(std::mt19937_64& rng, const ManufacturedField& field, int count) {
  std::uniform_real_distribution<double> ut(field.t_lo, field.t_hi), ux(field.x_lo, field.x_hi);
  std::vector<SamplePoint> pts(count);
  for (SamplePoint& p : pts) {
    p.t = ut(rng);
    p.x = ux(rng);
  }
  return pts;
}

/// RMS residual of one quantity over the sample points, per step, and the
/// Richardson ratios between successive steps.
struct ConvergenceRow {
  std::string quantity;
  std::vector<double> rms;
  std::vector<double> ratios;

  double min_ratio() const {
    double m = std::numeric_limits<double>::infinity();
    for (double r : ratios) m = std::min(m, r);
    return m;
  }
  /// Order implied by the smallest ratio for a step ratio q.
  double min_order(double q = 2.0) const { return std::log(min_ratio()) / std::log(q); }
};

struct ConvergenceStudy {
  std::vector<double> steps;
  /// "gibbs" first, then the identities a-f.
  std::vector<ConvergenceRow> rows;

  const ConvergenceRow& row(const std::string& name) const {
    for (const ConvergenceRow& r : rows)
      if (r.quantity == name) return r;
    throw Error(fmt::format("no convergence row named {}", name));
  }
};

template <PotentialLaw L>
ConvergenceStudy convergence_study(const L& law, const ClosureParams& closures, const ManufacturedField& field,
                                   const std::vector<SamplePoint>& points, const std::vector<double>& steps) {
  if (points.empty()) throw DomainError("convergence study needs at least one sample point");
  constexpr int kRows = 1 + AppendixIdentities::kCount;
  ConvergenceStudy study;
  study.steps = steps;
  study.rows.resize(kRows);
  study.rows[0].quantity = "gibbs";
  for (int i = 0; i < AppendixIdentities::kCount; ++i) study.rows[1 + i].quantity = AppendixIdentities::kNames[i];

  for (double h : steps) {
    std::array<double, kRows> sum{};
    for (const SamplePoint& pt : points) {
      const double g = gibbs_residual(law, closures, field, pt.t, pt.x, h).combination;
      sum[0] += g * g;
      const AppendixIdentities id = appendix_identities(law, closures, field, pt.t, pt.x, h);
      for (int i = 0; i < AppendixIdentities::kCount; ++i) sum[1 + i] += id.residual[i] * id.residual[i];
    }
    for (int r = 0; r < kRows; ++r) study.rows[r].rms.push_back(std::sqrt(sum[r] / points.size()));
  }
  for (ConvergenceRow& row : study.rows) {
    for (std::size_t i = 0; i + 1 < row.rms.size(); ++i) {
      row.ratios.push_back(row.rms[i + 1] > 0.0 ? row.rms[i] / row.rms[i + 1]
                                                : std::numeric_limits<double>::quiet_NaN());
    }
  }
  return study;
}

}  // namespace twofluid::verify
