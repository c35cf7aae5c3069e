#pragma once

// Single-fluid reduction. With identical components, a = 0, equal velocities
// and a uniform entropy, the two-fluid system is the isentropic Euler system
// in enthalpy form
//   d(rho)/dt + d(rho u)/dx = 0,   du/dt + d(u^2/2 + h)/dx = -dOmega/dx,
// with h(rho) = dW/drho_1 at rho_1 = rho_2 = rho / 2. The reference is a
// MUSCL (minmod) + Rusanov + SSP-RK2 scheme on a fine grid, averaged down.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <vector>

#include <fmt/format.h>

#include "twofluid/closures.hpp"
#include "twofluid/error.hpp"
#include "twofluid/potential.hpp"
#include "twofluid/profile.hpp"
#include "twofluid/solver.hpp"
#include "twofluid/types.hpp"

namespace twofluid::verify {

struct ReductionProblem {
  PhaseParams phase{};
  double x_lo = 0.0;
  double x_hi = 1.0;
  Boundary boundary = Boundary::kPeriodic;
  /// Mixture density, velocity and potential.
  Profile rho = Profile::constant(1.0);
  Profile u = Profile::constant(0.0);
  Profile omega = Profile::constant(0.0);
  /// Uniform specific entropy of both components.
  double s = 0.0;
  double t_end = 0.1;
  double cfl = 0.45;
  std::vector<int> cells{200, 400, 800};
  int reference_cells = 6400;

  void validate() const {
    if (!(x_hi > x_lo)) throw DomainError(fmt::format("x_hi = {} must exceed x_lo = {}", x_hi, x_lo));
    if (!(t_end >= 0.0)) throw DomainError(fmt::format("t_end = {} must be >= 0", t_end));
    if (!(cfl > 0.0 && cfl <= 0.9)) throw DomainError(fmt::format("cfl = {} must lie in (0, 0.9]", cfl));
    if (cells.empty()) throw DomainError("reduction needs at least one resolution");
    for (int n : cells) {
      if (n < 4) throw DomainError(fmt::format("resolution {} must be >= 4", n));
      if (reference_cells % n != 0) {
        throw DomainError(fmt::format("reference_cells = {} is not a multiple of {}", reference_cells, n));
      }
    }
  }
};

/// One component's law used twice with no added mass.
inline SeparableAddedMass identical_phase_law(const PhaseParams& p) { return SeparableAddedMass({p, p}, 0.0); }

/// MUSCL-Rusanov solver for the isentropic single-fluid system.
class EulerReference {
 public:
  EulerReference(const ReductionProblem& prob, int cells)
      : prob_(prob), law_(identical_phase_law(prob.phase)), n_(cells), dx_((prob.x_hi - prob.x_lo) / cells) {}

  struct State {
    std::vector<double> rho;
    std::vector<double> u;
  };

  double center(int i) const { return prob_.x_lo + (i + 0.5) * dx_; }

  State initial() const {
    State st{std::vector<double>(n_), std::vector<double>(n_)};
    for (int i = 0; i < n_; ++i) {
      st.rho[i] = prob_.rho(center(i));
      st.u[i] = prob_.u(center(i));
    }
    return st;
  }

  struct Thermo {
    double h = 0.0;
    double c = 0.0;
  };
  /// h = dW/drho_1 and c^2 = rho d h/drho at rho_1 = rho_2 = rho / 2, from
  /// the component energy rho_1 e_1.
  Thermo thermo(double rho) const {
    const double r1 = 0.5 * rho;
    const double g = prob_.phase.gamma;
    const double W1 = law_.phase_energy(0, r1, prob_.s);
    return Thermo{g * W1 / r1, std::sqrt(g * (g - 1.0) * W1 / r1)};
  }

  State run(double t_end) const {
    State st = initial();
    double t = 0.0;
    while (t < t_end) {
      double smax = 0.0;
      for (int i = 0; i < n_; ++i) smax = std::max(smax, std::abs(st.u[i]) + thermo(st.rho[i]).c);
      double dt = prob_.cfl * dx_ / smax;
      if (t + dt >= t_end) dt = t_end - t;
      const State k1 = rates(st);
      State s1 = st;
      for (int i = 0; i < n_; ++i) {
        s1.rho[i] += dt * k1.rho[i];
        s1.u[i] += dt * k1.u[i];
      }
      require_positive(s1, t);
      const State k2 = rates(s1);
      for (int i = 0; i < n_; ++i) {
        st.rho[i] = 0.5 * (st.rho[i] + s1.rho[i] + dt * k2.rho[i]);
        st.u[i] = 0.5 * (st.u[i] + s1.u[i] + dt * k2.u[i]);
      }
      require_positive(st, t);
      t = (t + dt >= t_end) ? t_end : t + dt;
    }
    return st;
  }

 private:
  int wrap(int i) const {
    if (prob_.boundary == Boundary::kPeriodic) return (i % n_ + n_) % n_;
    return std::clamp(i, 0, n_ - 1);
  }

  static double minmod(double a, double b) {
    if (a * b <= 0.0) return 0.0;
    return std::abs(a) < std::abs(b) ? a : b;
  }

  void require_positive(const State& st, double t) const {
    for (int i = 0; i < n_; ++i) {
      if (!(st.rho[i] > kMinDensity)) {
        throw StepError(fmt::format("reference solver: rho = {} in cell {}", st.rho[i], i), t, i);
      }
    }
  }

  State rates(const State& st) const {
    // Limited slopes, then interface fluxes; face f sits left of cell f.
    std::vector<double> drho(n_), du(n_);
    for (int i = 0; i < n_; ++i) {
      drho[i] = minmod(st.rho[i] - st.rho[wrap(i - 1)], st.rho[wrap(i + 1)] - st.rho[i]);
      du[i] = minmod(st.u[i] - st.u[wrap(i - 1)], st.u[wrap(i + 1)] - st.u[i]);
    }
    const int faces = n_ + 1;
    std::vector<double> f_rho(faces), f_u(faces);
    for (int f = 0; f < faces; ++f) {
      const int l = wrap(f - 1), r = wrap(f);
      double rl = st.rho[l] + 0.5 * drho[l], ul = st.u[l] + 0.5 * du[l];
      double rr = st.rho[r] - 0.5 * drho[r], ur = st.u[r] - 0.5 * du[r];
      if (prob_.boundary == Boundary::kTransmissive && (f == 0 || f == n_)) {
        // zero-gradient ghost cells
        const int c = f == 0 ? 0 : n_ - 1;
        rl = rr = st.rho[c];
        ul = ur = st.u[c];
      }
      const Thermo tl = thermo(rl), tr = thermo(rr);
      const double lam = std::max(std::abs(ul) + tl.c, std::abs(ur) + tr.c);
      f_rho[f] = 0.5 * (rl * ul + rr * ur) - 0.5 * lam * (rr - rl);
      f_u[f] = 0.5 * (0.5 * ul * ul + tl.h + 0.5 * ur * ur + tr.h) - 0.5 * lam * (ur - ul);
    }
    State k{std::vector<double>(n_), std::vector<double>(n_)};
    for (int i = 0; i < n_; ++i) {
      k.rho[i] = -(f_rho[i + 1] - f_rho[i]) / dx_;
      k.u[i] = -(f_u[i + 1] - f_u[i]) / dx_ - prob_.omega.derivative(center(i));
    }
    return k;
  }

  ReductionProblem prob_;
  SeparableAddedMass law_;
  int n_;
  double dx_;
};

/// Cell averages of a fine-grid field over blocks of `ratio` cells.
inline std::vector<double> average_down(const std::vector<double>& fine, int ratio) {
  std::vector<double> coarse(fine.size() / ratio, 0.0);
  for (std::size_t i = 0; i < fine.size(); ++i) coarse[i / ratio] += fine[i] / ratio;
  return coarse;
}

struct ReductionRow {
  int cells = 0;
  double l1_rho = 0.0;
  double l1_u = 0.0;
  /// Wall-clock seconds of the two-fluid run.
  double seconds = 0.0;
};

struct ReductionResult {
  std::vector<ReductionRow> rows;
  /// log2 of successive error ratios, assuming each resolution doubles the last.
  std::vector<double> order_rho;
  std::vector<double> order_u;
  double reference_seconds = 0.0;
  double total_seconds = 0.0;

  double min_order_rho() const {
    double m = std::numeric_limits<double>::infinity();
    for (double o : order_rho) m = std::min(m, o);
    return m;
  }
};

/// Two-fluid configuration of the reduction problem at one resolution.
inline SimulationConfig<SeparableAddedMass> reduction_config(const ReductionProblem& prob, int cells) {
  SimulationConfig<SeparableAddedMass> cfg{identical_phase_law(prob.phase)};
  cfg.grid = Grid1D{prob.x_lo, prob.x_hi, cells, prob.boundary};
  cfg.external.omega = {prob.omega, prob.omega};
  cfg.cfl = prob.cfl;
  cfg.t_end = prob.t_end;
  return cfg;
}

inline ReductionResult single_fluid_reduction(const ReductionProblem& prob) {
  using clock = std::chrono::steady_clock;
  prob.validate();
  const auto t_start = clock::now();
  ReductionResult out;

  const EulerReference ref(prob, prob.reference_cells);
  const EulerReference::State fine = ref.run(prob.t_end);
  out.reference_seconds = std::chrono::duration<double>(clock::now() - t_start).count();

  for (int n : prob.cells) {
    const auto t0 = clock::now();
    const SimulationConfig<SeparableAddedMass> cfg = reduction_config(prob, n);
    const auto initial = initial_cells(cfg, [&prob](double x) {
      PrimitiveState p;
      p.rho = {0.5 * prob.rho(x), 0.5 * prob.rho(x)};
      p.u = {prob.u(x), prob.u(x)};
      p.s = {prob.s, prob.s};
      return p;
    });
    const Trajectory traj = integrate(cfg, initial);
    const std::vector<CellState>& cells = traj.snapshots.back().cells;

    const int ratio = prob.reference_cells / n;
    const std::vector<double> rho_ref = average_down(fine.rho, ratio);
    const std::vector<double> u_ref = average_down(fine.u, ratio);
    ReductionRow row;
    row.cells = n;
    const double dx = cfg.grid.dx();
    for (int i = 0; i < n; ++i) {
      const CellState& c = cells[i];
      row.l1_rho += std::abs(c.p.rho[0] + c.p.rho[1] - rho_ref[i]) * dx;
      row.l1_u += std::abs(c.mixture_velocity - u_ref[i]) * dx;
    }
    row.seconds = std::chrono::duration<double>(clock::now() - t0).count();
    out.rows.push_back(row);
  }
  for (std::size_t i = 0; i + 1 < out.rows.size(); ++i) {
    const double q = std::log(static_cast<double>(out.rows[i + 1].cells) / out.rows[i].cells);
    out.order_rho.push_back(std::log(out.rows[i].l1_rho / out.rows[i + 1].l1_rho) / q);
    out.order_u.push_back(std::log(out.rows[i].l1_u / out.rows[i + 1].l1_u) / q);
  }
  out.total_seconds = std::chrono::duration<double>(clock::now() - t_start).count();
  return out;
}

}  // namespace twofluid::verify
