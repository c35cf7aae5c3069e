#pragma once

// Slow isothermal limit: with theta_a = theta0 and negligible inertia the
// momentum equations give
//   d(mu2 - mu1)/dx = rho f / (rho1 rho2),  f = f2 = -f1,
// with mu_a = dW/drho_a - theta0 s_a.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <fmt/format.h>

#include "twofluid/error.hpp"
#include "twofluid/solver.hpp"
#include "twofluid/types.hpp"

namespace twofluid::verify {

struct FickResidual {
  /// ||dmu/dx - rho f / (rho1 rho2)||_2 / ||dmu/dx||_2 over the cells.
  double relative = 0.0;
  double grad_mu_norm = 0.0;
  double defect_norm = 0.0;
  double max_theta_deviation = 0.0;
  double max_abs_w = 0.0;
  /// Per cell.
  std::vector<double> grad_mu;
  std::vector<double> drag_term;
};

/// Evaluated on solver cells (a snapshot). Throws DomainError when some
/// max |theta_a - theta0| / theta0 exceeds theta_bound.
inline FickResidual fick_residual(const Grid1D& grid, const std::vector<CellState>& cells, double theta0,
                                  double theta_bound) {
  grid.validate();
  if (static_cast<int>(cells.size()) != grid.cells) {
    throw DomainError(fmt::format("{} cells given for a grid of {}", cells.size(), grid.cells));
  }
  if (!(theta0 > 0.0)) throw DomainError(fmt::format("theta0 = {} must be positive", theta0));

  FickResidual out;
  for (const CellState& c : cells) {
    for (int a = 0; a < kPhases; ++a) {
      out.max_theta_deviation = std::max(out.max_theta_deviation, std::abs(c.theta[a] - theta0) / theta0);
    }
    out.max_abs_w = std::max(out.max_abs_w, std::abs(c.p.w()));
  }
  if (out.max_theta_deviation > theta_bound) {
    throw DomainError(fmt::format("state is not near-isothermal: max |theta - theta0| / theta0 = {:.3g} > {:.3g}",
                                  out.max_theta_deviation, theta_bound));
  }

  const int n = grid.cells;
  const double dx = grid.dx();
  auto mu = [theta0](const CellState& c) {
    return (c.dW_drho[1] - theta0 * c.p.s[1]) - (c.dW_drho[0] - theta0 * c.p.s[0]);
  };
  const bool periodic = grid.boundary == Boundary::kPeriodic;
  double num = 0.0, den = 0.0;
  out.grad_mu.resize(n);
  out.drag_term.resize(n);
  for (int i = 0; i < n; ++i) {
    double g = 0.0;
    if (periodic) {
      g = (mu(cells[(i + 1) % n]) - mu(cells[(i + n - 1) % n])) / (2.0 * dx);
    } else if (i == 0) {
      g = (mu(cells[1]) - mu(cells[0])) / dx;
    } else if (i == n - 1) {
      g = (mu(cells[n - 1]) - mu(cells[n - 2])) / dx;
    } else {
      g = (mu(cells[i + 1]) - mu(cells[i - 1])) / (2.0 * dx);
    }
    const CellState& c = cells[i];
    const double rho = c.p.rho[0] + c.p.rho[1];
    const double drag = rho * c.forces.f[1] / (c.p.rho[0] * c.p.rho[1]);
    out.grad_mu[i] = g;
    out.drag_term[i] = drag;
    num += (g - drag) * (g - drag);
    den += g * g;
  }
  out.grad_mu_norm = std::sqrt(den * dx);
  out.defect_norm = std::sqrt(num * dx);
  out.relative = den > 0.0 ? std::sqrt(num / den) : (num > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
  return out;
}

struct FickSample {
  double t = 0.0;
  FickResidual residual;
};

struct FickRelaxation {
  Trajectory trajectory;
  std::vector<FickSample> samples;

  /// Residuals strictly decreasing over the samples.
  bool decreasing() const {
    for (std::size_t i = 1; i < samples.size(); ++i) {
      if (!(samples[i].residual.relative < samples[i - 1].residual.relative)) return false;
    }
    return true;
  }
};

/// Integrates to the last sample time and evaluates the residual on each
/// snapshot at a sample time.
template <PotentialLaw L>
FickRelaxation fick_relaxation(SimulationConfig<L> cfg, const std::vector<EvolvedState>& initial,
                               const std::vector<double>& sample_times, double theta_bound) {
  if (sample_times.empty()) throw DomainError("fick relaxation needs at least one sample time");
  cfg.t_end = sample_times.back();
  cfg.output_interval = 0.0;
  cfg.output_times.assign(sample_times.begin(), sample_times.end() - 1);

  FickRelaxation out;
  out.trajectory = integrate(cfg, initial);
  for (double ts : sample_times) {
    const Snapshot* snap = nullptr;
    for (const Snapshot& s : out.trajectory.snapshots) {
      if (std::abs(s.t - ts) <= 1e-12 * std::max(1.0, ts)) snap = &s;
    }
    if (!snap) throw Error(fmt::format("no snapshot at sample time {}", ts));
    out.samples.push_back(FickSample{ts, fick_residual(cfg.grid, snap->cells, cfg.theta0, theta_bound)});
  }
  return out;
}

}  // namespace twofluid::verify
