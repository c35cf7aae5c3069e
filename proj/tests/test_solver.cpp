#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "support.hpp"
#include "twofluid/solver.hpp"
#include "twofluid/verify/conservation.hpp"

namespace twofluid {
namespace {

using testing::mixed_law;

SimulationConfig<SeparableAddedMass> base_config(int cells, double a = 0.5) {
  SimulationConfig<SeparableAddedMass> cfg{mixed_law(a)};
  cfg.grid = Grid1D{0.0, 1.0, cells, Boundary::kPeriodic};
  return cfg;
}

PrimitiveState uniform(double w) {
  PrimitiveState p;
  p.rho = {1.2, 0.8};
  p.u = {0.1, 0.1 + w};
  p.s = {0.05, 0.15};
  return p;
}

std::vector<EvolvedState> smooth_cells(const SimulationConfig<SeparableAddedMass>& cfg, double amp) {
  return initial_cells(cfg, [amp](double x) {
    const double k = 2.0 * std::numbers::pi;
    PrimitiveState p;
    p.rho = {1.0 + amp * std::sin(k * x), 1.2 - amp * std::cos(k * x)};
    p.u = {0.1 + amp * std::sin(k * x), -0.1 + amp * std::cos(k * x)};
    p.s = {amp * std::cos(k * x), 0.1 + amp * std::sin(2 * k * x)};
    return p;
  });
}

TEST(Solver, UniformStateHasZeroRates) {
  const auto cfg = base_config(16);
  const auto cells = initial_cells(cfg, [](double) { return uniform(0.3); });
  const RhsResult r = assemble_rhs(cfg, cells);
  for (const CellRates& c : r.rates) {
    for (int a = 0; a < 2; ++a) {
      EXPECT_EQ(c.rho[a], 0.0);
      EXPECT_EQ(c.K[a], 0.0);
      EXPECT_EQ(c.rho_s[a], 0.0);
    }
  }
}

TEST(Solver, UniformStateIsFixedPoint) {
  auto cfg = base_config(20);
  cfg.t_end = 0.3;
  const auto cells = initial_cells(cfg, [](double) { return uniform(0.3); });
  const Trajectory traj = integrate(cfg, cells);
  const auto& last = traj.snapshots.back();
  EXPECT_EQ(last.t, 0.3);
  for (int i = 0; i < cfg.grid.cells; ++i) {
    EXPECT_EQ(last.cells[i].p.rho, cells[i].rho);
    EXPECT_EQ(last.cells[i].K, cells[i].K);
    EXPECT_NEAR(last.cells[i].p.s[0], cells[i].s[0], 1e-15);
    EXPECT_NEAR(last.cells[i].p.s[1], cells[i].s[1], 1e-15);
  }
}

TEST(Solver, ZeroStepIsIdentity) {
  const auto cfg = base_config(10);
  const auto cells = smooth_cells(cfg, 0.05);
  const auto next = step(cfg, cells, 0.0);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    EXPECT_EQ(next[i].rho, cells[i].rho);
    EXPECT_EQ(next[i].K, cells[i].K);
  }
}

TEST(Solver, EndTimeZeroKeepsInitialState) {
  const auto cfg = base_config(12);
  const auto cells = smooth_cells(cfg, 0.05);
  const Trajectory traj = integrate(cfg, cells);
  ASSERT_EQ(traj.snapshots.size(), 1u);
  ASSERT_EQ(traj.reports.size(), 1u);
  EXPECT_EQ(traj.snapshots[0].t, 0.0);
  for (std::size_t i = 0; i < cells.size(); ++i) EXPECT_EQ(traj.snapshots[0].cells[i].p.rho, cells[i].rho);
}

TEST(Solver, OutputCadence) {
  auto cfg = base_config(32);
  cfg.t_end = 0.1;
  cfg.output_interval = 0.025;
  const Trajectory traj = integrate(cfg, smooth_cells(cfg, 0.05));
  ASSERT_EQ(traj.snapshots.size(), 5u);
  for (int k = 0; k < 5; ++k) EXPECT_NEAR(traj.snapshots[k].t, 0.025 * k, 1e-12);
}

TEST(Solver, MassConservedToRoundOff) {
  auto cfg = base_config(64);
  cfg.closures = {0.5, 0.2};
  cfg.t_end = 0.2;
  const auto drift = verify::conservation_drift(integrate(cfg, smooth_cells(cfg, 0.05)));
  EXPECT_LE(drift.max_mass_rel(), 1e-13);
}

TEST(Solver, DissipativeEntropyNondecreasing) {
  auto cfg = base_config(64);
  cfg.closures = {0.5, 0.2};
  cfg.t_end = 0.2;
  const auto drift = verify::conservation_drift(integrate(cfg, smooth_cells(cfg, 0.05)));
  EXPECT_TRUE(drift.entropy_nondecreasing());
  EXPECT_GT(drift.entropy_max_increment, 0.0);
}

TEST(Solver, ConservativeEntropyOnlyAdvected) {
  auto cfg = base_config(64);
  cfg.t_end = 0.2;
  const auto drift = verify::conservation_drift(integrate(cfg, smooth_cells(cfg, 0.05)));
  EXPECT_LE(std::max(-drift.entropy_min_increment, drift.entropy_max_increment), 1e-14);
}

TEST(Solver, MomentumDriftShrinksUnderRefinement) {
  double previous = 0.0;
  for (int n : {50, 100, 200}) {
    auto cfg = base_config(n);
    cfg.t_end = 0.25;
    const auto drift = verify::conservation_drift(integrate(cfg, smooth_cells(cfg, 0.1)));
    if (previous > 0.0) {
      EXPECT_LT(drift.momentum_rel, 0.7 * previous) << n;
    }
    previous = drift.momentum_rel;
  }
}

// Spatially uniform relaxation reduces to the ODEs dK_a/dt = f_a / rho_a,
// ds_a/dt = source_a, integrated here with small RK4 steps.
struct DragOde {
  SeparableAddedMass law;
  ClosureParams closures;
  PhasePair rho;

  std::array<double, 4> rates(const std::array<double, 4>& y) const {
    const PrimitiveState p = evolved_to_primitive(law, EvolvedState{rho, {y[0], y[1]}, {y[2], y[3]}});
    const ThermoEval t = eval_potential(law, p);
    const DissipationForces f = drag_and_heat(closures, p, t.theta);
    const PhasePair src = entropy_sources(f, p, t.theta);
    return {f.f[0] / rho[0], f.f[1] / rho[1], src[0], src[1]};
  }

  double w_at(const EvolvedState& start, double t_end, int steps) const {
    std::array<double, 4> y{start.K[0], start.K[1], start.s[0], start.s[1]};
    const double h = t_end / steps;
    auto add = [](std::array<double, 4> a, const std::array<double, 4>& b, double c) {
      for (int i = 0; i < 4; ++i) a[i] += c * b[i];
      return a;
    };
    for (int n = 0; n < steps; ++n) {
      const auto k1 = rates(y), k2 = rates(add(y, k1, h / 2)), k3 = rates(add(y, k2, h / 2)), k4 = rates(add(y, k3, h));
      for (int i = 0; i < 4; ++i) y[i] += h / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    }
    return evolved_to_primitive(law, EvolvedState{rho, {y[0], y[1]}, {y[2], y[3]}}).w();
  }
};

TEST(Solver, UniformDragRelaxationFollowsOde) {
  auto cfg = base_config(8);
  cfg.closures = {2.0, 0.5};
  cfg.t_end = 1.0;
  cfg.output_interval = 0.1;
  const auto cells = initial_cells(cfg, [](double) { return uniform(0.8); });
  const Trajectory traj = integrate(cfg, cells);
  const DragOde ode{cfg.law, cfg.closures, cells[0].rho};

  double previous = std::abs(traj.snapshots.front().cells[0].p.w());
  for (std::size_t k = 1; k < traj.snapshots.size(); ++k) {
    const Snapshot& s = traj.snapshots[k];
    const double w = s.cells[0].p.w();
    for (const CellState& c : s.cells) EXPECT_EQ(c.p.w(), w);
    EXPECT_LT(std::abs(w), previous);
    EXPECT_GT(w, 0.0);
    previous = std::abs(w);
    const double oracle = ode.w_at(cells[0], s.t, 2000);
    EXPECT_NEAR(w, oracle, 2e-3 * std::abs(oracle)) << "t = " << s.t;
  }
}

TEST(Solver, NonHyperbolicCellRaisesStepError) {
  auto cfg = base_config(10, 1.0);
  cfg.t_end = 0.1;
  const auto cells = initial_cells(cfg, [](double x) {
    PrimitiveState p;
    p.u = {x < 0.5 ? 0.0 : -2.5, x < 0.5 ? 0.0 : 2.5};
    return p;
  });
  try {
    integrate(cfg, cells);
    FAIL() << "expected a step error";
  } catch (const StepError& e) {
    EXPECT_GE(e.cell(), 5);
    EXPECT_EQ(e.time(), 0.0);
  }
}

TEST(Solver, InvalidSettingsRejected) {
  auto cfg = base_config(10);
  cfg.cfl = 2.0;
  EXPECT_THROW(cfg.validate(), DomainError);
  cfg = base_config(10);
  cfg.closures.k = -1.0;
  EXPECT_THROW(cfg.validate(), DomainError);
}

}  // namespace
}  // namespace twofluid
