#pragma once

// First-order finite-volume integrator for the 1D dissipative two-fluid
// system. Per component, with R' = u^2/2 - dW/drho (Omega kept as a source):
//   d(rho)/dt   + d(rho u)/dx      = 0
//   dK/dt       + d(K u - R')/dx   = theta ds/dx + f / rho - dOmega/dx
//   d(rho s)/dt + d(rho s u)/dx    = -(f (u - u_mix) + q) / theta
// Rusanov fluxes with the local max |lambda| of the symmetric form, central
// differences for theta ds/dx, Heun (SSP-RK2) in time.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "twofluid/closures.hpp"
#include "twofluid/error.hpp"
#include "twofluid/hyperbolicity.hpp"
#include "twofluid/potential.hpp"
#include "twofluid/profile.hpp"
#include "twofluid/state.hpp"
#include "twofluid/types.hpp"

namespace twofluid {

enum class Boundary { kPeriodic, kTransmissive };

inline const char* to_string(Boundary b) { return b == Boundary::kPeriodic ? "periodic" : "transmissive"; }

struct Grid1D {
  double x_lo = 0.0;
  double x_hi = 1.0;
  int cells = 100;
  Boundary boundary = Boundary::kPeriodic;

  void validate() const {
    if (cells < 4) throw DomainError(fmt::format("grid needs at least 4 cells, got {}", cells));
    if (!(x_hi > x_lo) || !std::isfinite(x_lo) || !std::isfinite(x_hi)) {
      throw DomainError(fmt::format("grid interval [{}, {}] is empty", x_lo, x_hi));
    }
  }
  double dx() const { return (x_hi - x_lo) / cells; }
  double center(int i) const { return x_lo + (i + 0.5) * dx(); }
};

/// Specific external potentials Omega_a(x), time independent.
struct ExternalPotentials {
  std::array<Profile, kPhases> omega{};

  double value(int a, double x) const { return omega[a](x); }
  double gradient(int a, double x) const { return omega[a].derivative(x); }
};

template <PotentialLaw L>
struct SimulationConfig {
  L law;
  Grid1D grid{};
  ClosureParams closures{};
  ExternalPotentials external{};
  double cfl = 0.45;
  double t_end = 0.0;
  /// Snapshot cadence; <= 0 keeps only the initial and final states.
  double output_interval = 0.0;
  /// Extra snapshot times in (0, t_end), ascending.
  std::vector<double> output_times{};
  /// Reference temperature for chemical potentials.
  double theta0 = 1.0;
  SpeedMethod speeds = SpeedMethod::kClosedForm;
  std::size_t max_steps = 10'000'000;

  void validate() const {
    grid.validate();
    closures.validate();
    if (!(cfl > 0.0 && cfl <= 0.9)) throw DomainError(fmt::format("cfl = {} must lie in (0, 0.9]", cfl));
    if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw DomainError(fmt::format("t_end = {} must be >= 0", t_end));
    if (!std::isfinite(output_interval)) throw DomainError("output_interval must be finite");
    for (std::size_t i = 0; i < output_times.size(); ++i) {
      if (!(output_times[i] > 0.0) || (i > 0 && !(output_times[i] > output_times[i - 1]))) {
        throw DomainError("output_times must be positive and strictly increasing");
      }
    }
    if (!(theta0 > 0.0)) throw DomainError(fmt::format("theta0 = {} must be positive", theta0));
  }
};

/// Time derivatives of the solver unknowns (rho_a, K_a, rho_a s_a) in one cell.
struct CellRates {
  PhasePair rho{0.0, 0.0};
  PhasePair K{0.0, 0.0};
  PhasePair rho_s{0.0, 0.0};
};

/// Everything the scheme and the diagnostics need from one cell.
struct CellState {
  double x = 0.0;
  PrimitiveState p;
  PhasePair K{};
  PhasePair theta{};
  PhasePair dW_drho{};
  double U = 0.0;
  double mixture_velocity = 0.0;
  DissipationForces forces;
  double max_speed = 0.0;
  double min_eig_A = 0.0;
  double relaxation_rate = 0.0;
};

/// What limited a time step.
enum class StepLimit { kNone, kWaves, kRelaxation, kOutput };

inline const char* to_string(StepLimit l) {
  switch (l) {
    case StepLimit::kNone: return "none";
    case StepLimit::kWaves: return "waves";
    case StepLimit::kRelaxation: return "relaxation";
    case StepLimit::kOutput: return "output";
  }
  return "none";
}

/// Diagnostics at time t; dt is the step that led to t.
struct TimeStepReport {
  std::size_t step = 0;
  double t = 0.0;
  double dt = 0.0;
  StepLimit limit = StepLimit::kNone;
  double max_speed = 0.0;
  PhasePair mass{0.0, 0.0};
  /// sum_a rho_a K_a dx
  double momentum_K = 0.0;
  /// sum_a rho_a |K_a| dx, the scale for relative momentum drift
  double momentum_scale = 0.0;
  /// sum_a rho_a u_a dx
  double momentum_u = 0.0;
  /// sum (sum_a rho_a (u_a^2 / 2 + Omega_a) + U) dx
  double energy = 0.0;
  /// sum_a rho_a s_a dx
  double entropy = 0.0;
  /// sum rho_a s_a dx weighted by |.|, the entropy scale
  double entropy_scale = 0.0;
  double min_eig_A = 0.0;
};

struct Snapshot {
  double t = 0.0;
  std::vector<CellState> cells;
};

struct Trajectory {
  std::vector<Snapshot> snapshots;
  /// One report per time level, including t = 0.
  std::vector<TimeStepReport> reports;
};

struct RhsResult {
  std::vector<CellRates> rates;
  std::vector<CellState> cells;
  double max_speed = 0.0;
  double min_eig_A = std::numeric_limits<double>::infinity();
  double max_relaxation_rate = 0.0;
};

namespace detail {

struct Conserved {
  PhasePair rho{};
  PhasePair K{};
  PhasePair rho_s{};
};

inline Conserved to_conserved(const EvolvedState& e) {
  return Conserved{e.rho, e.K, {e.rho[0] * e.s[0], e.rho[1] * e.s[1]}};
}

inline EvolvedState to_evolved(const Conserved& c) {
  return EvolvedState{c.rho, c.K, {c.rho_s[0] / c.rho[0], c.rho_s[1] / c.rho[1]}};
}

template <PotentialLaw L>
CellState evaluate_cell(const SimulationConfig<L>& cfg, const Conserved& c, int i, double t) {
  CellState cs;
  cs.x = cfg.grid.center(i);
  try {
    for (int a = 0; a < kPhases; ++a) {
      if (!(c.rho[a] >= kMinDensity) || !std::isfinite(c.rho[a])) {
        throw DomainError(fmt::format("rho{} = {} is not admissible; reduce the CFL number", a + 1, c.rho[a]));
      }
    }
    cs.p = evolved_to_primitive(cfg.law, to_evolved(c));
    const ThermoEval te = eval_potential(cfg.law, cs.p);
    require_positive_temperatures(te.theta);
    cs.K = c.K;
    cs.theta = te.theta;
    cs.dW_drho = te.dW_drho;
    cs.U = te.U;
    cs.mixture_velocity = mixture_aggregates(cs.p).velocity;
    cs.forces = drag_and_heat(cfg.closures, cs.p, te.theta);
    cs.relaxation_rate = relaxation_rates(te, cfg.closures, cs.p).max();

    const LocalWaves waves = local_waves(cfg.law, cs.p, cfg.speeds);
    cs.min_eig_A = waves.min_eig_A;
    if (!waves.hyperbolic) {
      throw NumericalError(fmt::format("hyperbolicity lost: min-eig(A) = {:.6g} at w = {:.6g}", waves.min_eig_A,
                                       cs.p.w()));
    }
    cs.max_speed = waves.max_abs_speed;
  } catch (const StepError&) {
    throw;
  } catch (const Error& e) {
    throw StepError(fmt::format("cell {} (x = {:.6g}) at t = {:.9g}: {}", i, cs.x, t, e.what()), t, i);
  }
  return cs;
}

inline int neighbour(const Grid1D& g, int i) {
  if (i < 0) return g.boundary == Boundary::kPeriodic ? i + g.cells : 0;
  if (i >= g.cells) return g.boundary == Boundary::kPeriodic ? i - g.cells : g.cells - 1;
  return i;
}

struct FaceFlux {
  PhasePair rho{};
  PhasePair K{};
  PhasePair rho_s{};
};

inline FaceFlux physical_flux(const CellState& c) {
  FaceFlux f;
  for (int a = 0; a < kPhases; ++a) {
    const double u = c.p.u[a];
    f.rho[a] = c.p.rho[a] * u;
    f.K[a] = c.K[a] * u - (0.5 * u * u - c.dW_drho[a]);
    f.rho_s[a] = c.p.rho[a] * c.p.s[a] * u;
  }
  return f;
}

inline FaceFlux rusanov(const CellState& l, const CellState& r, const Conserved& ul, const Conserved& ur) {
  const FaceFlux fl = physical_flux(l), fr = physical_flux(r);
  const double lambda = std::max(l.max_speed, r.max_speed);
  FaceFlux f;
  for (int a = 0; a < kPhases; ++a) {
    f.rho[a] = 0.5 * (fl.rho[a] + fr.rho[a]) - 0.5 * lambda * (ur.rho[a] - ul.rho[a]);
    f.K[a] = 0.5 * (fl.K[a] + fr.K[a]) - 0.5 * lambda * (ur.K[a] - ul.K[a]);
    f.rho_s[a] = 0.5 * (fl.rho_s[a] + fr.rho_s[a]) - 0.5 * lambda * (ur.rho_s[a] - ul.rho_s[a]);
  }
  return f;
}

template <PotentialLaw L>
RhsResult rhs(const SimulationConfig<L>& cfg, const std::vector<Conserved>& u, double t) {
  const Grid1D& g = cfg.grid;
  const int n = g.cells;
  const double dx = g.dx();
  RhsResult out;
  out.cells.resize(n);
  for (int i = 0; i < n; ++i) {
    out.cells[i] = evaluate_cell(cfg, u[i], i, t);
    out.max_speed = std::max(out.max_speed, out.cells[i].max_speed);
    out.min_eig_A = std::min(out.min_eig_A, out.cells[i].min_eig_A);
    out.max_relaxation_rate = std::max(out.max_relaxation_rate, out.cells[i].relaxation_rate);
  }

  // faces[f] sits between cells f - 1 and f
  std::vector<FaceFlux> faces(n + 1);
  for (int f = 0; f <= n; ++f) {
    const int l = neighbour(g, f - 1), r = neighbour(g, f);
    faces[f] = rusanov(out.cells[l], out.cells[r], u[l], u[r]);
  }

  out.rates.resize(n);
  for (int i = 0; i < n; ++i) {
    const CellState& c = out.cells[i];
    const CellState& left = out.cells[neighbour(g, i - 1)];
    const CellState& right = out.cells[neighbour(g, i + 1)];
    CellRates& r = out.rates[i];
    for (int a = 0; a < kPhases; ++a) {
      r.rho[a] = -(faces[i + 1].rho[a] - faces[i].rho[a]) / dx;
      r.K[a] = -(faces[i + 1].K[a] - faces[i].K[a]) / dx;
      r.rho_s[a] = -(faces[i + 1].rho_s[a] - faces[i].rho_s[a]) / dx;

      r.K[a] += c.theta[a] * (right.p.s[a] - left.p.s[a]) / (2.0 * dx);
      r.K[a] += c.forces.f[a] / c.p.rho[a];
      if (!cfg.external.omega[a].is_zero()) r.K[a] -= cfg.external.gradient(a, c.x);
      r.rho_s[a] -= (c.forces.f[a] * (c.p.u[a] - c.mixture_velocity) + c.forces.q[a]) / c.theta[a];
    }
  }
  return out;
}

inline Conserved axpy(const Conserved& u, double dt, const CellRates& r) {
  Conserved v;
  for (int a = 0; a < kPhases; ++a) {
    v.rho[a] = u.rho[a] + dt * r.rho[a];
    v.K[a] = u.K[a] + dt * r.K[a];
    v.rho_s[a] = u.rho_s[a] + dt * r.rho_s[a];
  }
  return v;
}

inline Conserved average(const Conserved& x, const Conserved& y) {
  Conserved v;
  for (int a = 0; a < kPhases; ++a) {
    v.rho[a] = 0.5 * (x.rho[a] + y.rho[a]);
    v.K[a] = 0.5 * (x.K[a] + y.K[a]);
    v.rho_s[a] = 0.5 * (x.rho_s[a] + y.rho_s[a]);
  }
  return v;
}

inline void require_positive_densities(const std::vector<Conserved>& u, double t, int stage) {
  for (std::size_t i = 0; i < u.size(); ++i) {
    for (int a = 0; a < kPhases; ++a) {
      if (!(u[i].rho[a] >= kMinDensity) || !std::isfinite(u[i].rho[a])) {
        throw StepError(fmt::format("stage {} left rho{} = {} in cell {} at t = {:.9g}; reduce the CFL number",
                                    stage, a + 1, u[i].rho[a], i, t),
                        t, static_cast<std::ptrdiff_t>(i));
      }
    }
  }
}

/// One Heun step from u with right-hand side r0 = rhs(u) already known.
template <PotentialLaw L>
std::vector<Conserved> heun(const SimulationConfig<L>& cfg, const std::vector<Conserved>& u, const RhsResult& r0,
                            double t, double dt) {
  const std::size_t n = u.size();
  std::vector<Conserved> u1(n);
  for (std::size_t i = 0; i < n; ++i) u1[i] = axpy(u[i], dt, r0.rates[i]);
  require_positive_densities(u1, t + dt, 1);
  const RhsResult r1 = rhs(cfg, u1, t + dt);
  std::vector<Conserved> u2(n);
  for (std::size_t i = 0; i < n; ++i) u2[i] = average(u[i], axpy(u1[i], dt, r1.rates[i]));
  require_positive_densities(u2, t + dt, 2);
  return u2;
}

template <PotentialLaw L>
TimeStepReport totals(const SimulationConfig<L>& cfg, const RhsResult& r, double t) {
  const double dx = cfg.grid.dx();
  TimeStepReport rep;
  rep.t = t;
  rep.max_speed = r.max_speed;
  rep.min_eig_A = r.min_eig_A;
  for (const CellState& c : r.cells) {
    double e = c.U;
    for (int a = 0; a < kPhases; ++a) {
      const double rho = c.p.rho[a], u = c.p.u[a];
      rep.mass[a] += rho * dx;
      rep.momentum_K += rho * c.K[a] * dx;
      rep.momentum_scale += rho * std::abs(c.K[a]) * dx;
      rep.momentum_u += rho * u * dx;
      rep.entropy += rho * c.p.s[a] * dx;
      rep.entropy_scale += std::abs(rho * c.p.s[a]) * dx;
      e += rho * (0.5 * u * u + cfg.external.value(a, c.x));
    }
    rep.energy += e * dx;
  }
  return rep;
}

}  // namespace detail

/// Cell values sampled at the centres from a primitive profile.
template <PotentialLaw L>
std::vector<EvolvedState> initial_cells(const SimulationConfig<L>& cfg,
                                        const std::function<PrimitiveState(double)>& profile) {
  cfg.grid.validate();
  std::vector<EvolvedState> cells(cfg.grid.cells);
  for (int i = 0; i < cfg.grid.cells; ++i) {
    const double x = cfg.grid.center(i);
    try {
      cells[i] = primitive_to_evolved(cfg.law, profile(x));
    } catch (const Error& e) {
      throw DomainError(fmt::format("initial state in cell {} (x = {:.6g}): {}", i, x, e.what()));
    }
  }
  return cells;
}

/// Time derivatives of (rho_a, K_a, rho_a s_a) for every cell.
template <PotentialLaw L>
RhsResult assemble_rhs(const SimulationConfig<L>& cfg, const std::vector<EvolvedState>& cells, double t = 0.0) {
  if (static_cast<int>(cells.size()) != cfg.grid.cells) {
    throw DomainError(fmt::format("{} cells given for a grid of {}", cells.size(), cfg.grid.cells));
  }
  std::vector<detail::Conserved> u(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) u[i] = detail::to_conserved(cells[i]);
  return detail::rhs(cfg, u, t);
}

/// One SSP-RK2 step of size dt.
template <PotentialLaw L>
std::vector<EvolvedState> step(const SimulationConfig<L>& cfg, const std::vector<EvolvedState>& cells, double dt,
                               double t = 0.0) {
  std::vector<detail::Conserved> u(cells.size());
  for (std::size_t i = 0; i < cells.size(); ++i) u[i] = detail::to_conserved(cells[i]);
  const RhsResult r0 = assemble_rhs(cfg, cells, t);
  const std::vector<detail::Conserved> next = detail::heun(cfg, u, r0, t, dt);
  std::vector<EvolvedState> out(next.size());
  for (std::size_t i = 0; i < next.size(); ++i) out[i] = detail::to_evolved(next[i]);
  return out;
}

/// Largest stable step: CFL dx / max|lambda|, and CFL / r for the drag and
/// heat-exchange relaxation rate r.
inline std::pair<double, StepLimit> stable_time_step(double cfl, double dx, const RhsResult& r) {
  double dt = std::numeric_limits<double>::infinity();
  StepLimit limit = StepLimit::kNone;
  if (r.max_speed > 0.0) {
    dt = cfl * dx / r.max_speed;
    limit = StepLimit::kWaves;
  }
  if (r.max_relaxation_rate > 0.0 && cfl / r.max_relaxation_rate < dt) {
    dt = cfl / r.max_relaxation_rate;
    limit = StepLimit::kRelaxation;
  }
  return {dt, limit};
}

/// Runs from the given cells to t_end. Snapshots at t = 0, every
/// output_interval, and at t_end; a report at every time level.
template <PotentialLaw L>
Trajectory integrate(const SimulationConfig<L>& cfg, const std::vector<EvolvedState>& initial) {
  cfg.validate();
  if (static_cast<int>(initial.size()) != cfg.grid.cells) {
    throw DomainError(fmt::format("{} initial cells given for a grid of {}", initial.size(), cfg.grid.cells));
  }
  std::vector<detail::Conserved> u(initial.size());
  for (std::size_t i = 0; i < initial.size(); ++i) u[i] = detail::to_conserved(initial[i]);

  Trajectory traj;
  double t = 0.0;
  std::size_t n_out = 1;
  double dt_prev = 0.0;
  StepLimit limit_prev = StepLimit::kNone;
  const bool cadence = cfg.output_interval > 0.0;
  std::size_t next_listed = 0;
  auto listed_due = [&](double time) {
    return next_listed < cfg.output_times.size() && time >= cfg.output_times[next_listed] * (1.0 - 1e-12);
  };

  for (std::size_t n = 0;; ++n) {
    const RhsResult r = detail::rhs(cfg, u, t);
    TimeStepReport rep = detail::totals(cfg, r, t);
    rep.step = n;
    rep.dt = dt_prev;
    rep.limit = limit_prev;
    traj.reports.push_back(rep);

    const bool at_end = t >= cfg.t_end;
    const bool at_output = cadence && n > 0 && t >= n_out * cfg.output_interval * (1.0 - 1e-12);
    const bool at_listed = n > 0 && listed_due(t);
    if (n == 0 || at_end || at_output || at_listed) traj.snapshots.push_back(Snapshot{t, r.cells});
    if (at_output) {
      while (n_out * cfg.output_interval <= t * (1.0 + 1e-12)) ++n_out;
    }
    while (listed_due(t)) ++next_listed;
    if (at_end) break;
    if (n >= cfg.max_steps) throw StepError(fmt::format("step limit {} reached at t = {}", cfg.max_steps, t), t, -1);

    auto [dt, limit] = stable_time_step(cfg.cfl, cfg.grid.dx(), r);
    double target = cfg.t_end;
    if (cadence) target = std::min(target, n_out * cfg.output_interval);
    if (next_listed < cfg.output_times.size()) target = std::min(target, cfg.output_times[next_listed]);
    bool landed = false;
    if (t + dt >= target - 1e-12 * std::max(1.0, target)) {
      dt = target - t;
      limit = StepLimit::kOutput;
      landed = true;
    }
    u = detail::heun(cfg, u, r, t, dt);
    t = landed ? target : t + dt;
    dt_prev = dt;
    limit_prev = limit;
  }
  return traj;
}

}  // namespace twofluid
