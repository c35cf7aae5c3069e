#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "support.hpp"
#include "twofluid/verify.hpp"

namespace twofluid::verify {
namespace {

using testing::mixed_law;

const std::vector<double> kSteps{1e-2, 5e-3, 2.5e-3};

TEST(Verify, ConstantFieldsHaveNoResiduals) {
  PrimitiveState p;
  p.rho = {1.1, 0.9};
  p.u = {0.2, 0.5};
  p.s = {0.1, 0.0};
  const ManufacturedField f = constant_field(p, {0.3, -0.2});
  const GibbsResidual g = gibbs_residual(mixed_law(0.7), {}, f, 0.4, 0.6, 1e-2);
  EXPECT_EQ(g.E, 0.0);
  EXPECT_EQ(g.M[0], 0.0);
  EXPECT_EQ(g.M[1], 0.0);
  EXPECT_EQ(g.B[0], 0.0);
  EXPECT_EQ(g.B[1], 0.0);
  EXPECT_EQ(g.S, 0.0);
  EXPECT_EQ(g.combination, 0.0);
}

TEST(Verify, DragWorkIdentityIsExact) {
  std::mt19937_64 rng(101);
  const SeparableAddedMass law = mixed_law(0.7);
  for (int set = 0; set < 20; ++set) {
    const ManufacturedField f = random_trigonometric_field(rng);
    for (const SamplePoint& pt : sample_points(rng, f, 50)) {
      const AppendixIdentities id = appendix_identities(law, {0.8, 0.3}, f, pt.t, pt.x, 1e-3);
      EXPECT_LE(std::abs(id.residual[0]), 1e-14 * id.scale[0]);
    }
  }
}

TEST(Verify, PotentialIdentityVanishesWithoutPotentials) {
  std::mt19937_64 rng(103);
  TrigFieldRanges r;
  r.with_potentials = false;
  const ManufacturedField f = random_trigonometric_field(rng, r);
  for (const SamplePoint& pt : sample_points(rng, f, 20)) {
    EXPECT_EQ(appendix_identities(mixed_law(0.7), {0.8, 0.3}, f, pt.t, pt.x, 1e-2).residual[1], 0.0);
  }
}

TEST(Verify, CouplingIdentityVanishesWithoutAddedMass) {
  std::mt19937_64 rng(107);
  const ManufacturedField f = random_trigonometric_field(rng);
  for (const SamplePoint& pt : sample_points(rng, f, 20)) {
    EXPECT_EQ(appendix_identities(mixed_law(0.0), {0.8, 0.3}, f, pt.t, pt.x, 1e-2).residual[5], 0.0);
  }
}

TEST(Verify, GibbsCombinationConvergesAtSecondOrder) {
  std::mt19937_64 rng(109);
  const ManufacturedField f = random_trigonometric_field(rng);
  const ConvergenceStudy study =
      convergence_study(mixed_law(0.7), {0.8, 0.3}, f, sample_points(rng, f, 16), kSteps);
  ASSERT_EQ(study.rows.size(), 7u);
  EXPECT_EQ(study.rows[0].quantity, "gibbs");
  EXPECT_GE(study.row("gibbs").min_ratio(), 3.6);
  for (const char* id : {"b", "c", "d", "e", "f"}) EXPECT_GE(study.row(id).min_order(), 1.85) << id;
}

TEST(Verify, StreamFunctionFieldsSatisfyMassBalance) {
  std::array<StreamParams, 2> params;
  params[1].rho_bar = 0.8;
  params[1].u_bar = -0.3;
  params[1].k = 2.0;
  const ManufacturedField f = mass_conserving_field(params);
  std::mt19937_64 rng(113);
  const auto pts = sample_points(rng, f, 16);
  std::vector<double> combination;
  for (double h : kSteps) {
    double b = 0.0, g = 0.0;
    for (const SamplePoint& pt : pts) {
      const GibbsResidual r = gibbs_residual(mixed_law(0.5), {}, f, pt.t, pt.x, h);
      b = std::max({b, std::abs(r.B[0]), std::abs(r.B[1])});
      g += r.combination * r.combination;
    }
    EXPECT_LT(b, 10.0 * h * h);
    combination.push_back(std::sqrt(g / pts.size()));
  }
  EXPECT_GT(combination[0] / combination[1], 3.6);
  EXPECT_GT(combination[1] / combination[2], 3.6);
}

TEST(Verify, ConstantTrajectoryHasNoDrift) {
  SimulationConfig<SeparableAddedMass> cfg{mixed_law()};
  cfg.grid.cells = 10;
  cfg.t_end = 0.2;
  const auto cells = initial_cells(cfg, [](double) {
    PrimitiveState p;
    p.u = {0.2, 0.2};
    return p;
  });
  const ConservationDrift d = conservation_drift(integrate(cfg, cells));
  EXPECT_EQ(d.max_mass_rel(), 0.0);
  EXPECT_EQ(d.momentum_rel, 0.0);
  EXPECT_EQ(d.energy_rel, 0.0);
  EXPECT_GT(d.series.size(), 1u);
}

TEST(Verify, FickEquilibriumIsZero) {
  SimulationConfig<SeparableAddedMass> cfg{mixed_law()};
  cfg.grid.cells = 10;
  cfg.closures = {100.0, 1.0};
  const SeparableAddedMass& law = cfg.law;
  const auto cells = initial_cells(cfg, [&law](double) {
    PrimitiveState p;
    p.s = {law.isothermal_entropy(0, 1.0, 1.0), law.isothermal_entropy(1, 1.0, 1.0)};
    return p;
  });
  const Trajectory traj = integrate(cfg, cells);
  const FickResidual r = fick_residual(cfg.grid, traj.snapshots[0].cells, 1.0, 1e-9);
  EXPECT_EQ(r.relative, 0.0);
  EXPECT_EQ(r.grad_mu_norm, 0.0);
  EXPECT_EQ(r.defect_norm, 0.0);
  EXPECT_THROW(fick_residual(cfg.grid, traj.snapshots[0].cells, 2.0, 0.01), DomainError);
}

TEST(Verify, FickResidualShrinksWithStrongerDrag) {
  std::vector<double> residual;
  for (double k : {300.0, 3000.0}) {
    SimulationConfig<SeparableAddedMass> cfg{mixed_law(0.0)};
    cfg.grid.cells = 100;
    cfg.closures = {k, 1.0};
    const SeparableAddedMass& law = cfg.law;
    const auto cells = initial_cells(cfg, [&law](double x) {
      PrimitiveState p;
      const double rho = 1.0 + 0.2 * std::sin(2.0 * std::numbers::pi * x);
      p.rho = {rho, 2.0 - rho};
      p.s = {law.isothermal_entropy(0, p.rho[0], 1.0), law.isothermal_entropy(1, p.rho[1], 1.0)};
      return p;
    });
    const FickRelaxation res = fick_relaxation(cfg, cells, {0.004}, 0.05);
    residual.push_back(res.samples[0].residual.relative);
  }
  EXPECT_LT(residual[1], residual[0]);
}

TEST(Verify, UniformReductionHasNoError) {
  ReductionProblem prob;
  prob.rho = Profile::constant(1.3);
  prob.u = Profile::constant(0.2);
  prob.t_end = 0.05;
  prob.cells = {8, 16};
  prob.reference_cells = 64;
  const ReductionResult r = single_fluid_reduction(prob);
  ASSERT_EQ(r.rows.size(), 2u);
  for (const ReductionRow& row : r.rows) {
    EXPECT_LE(row.l1_rho, 1e-14);
    EXPECT_LE(row.l1_u, 1e-14);
  }
}

TEST(Verify, ReductionRejectsIncompatibleResolutions) {
  ReductionProblem prob;
  prob.cells = {30};
  prob.reference_cells = 100;
  EXPECT_THROW(prob.validate(), DomainError);
}

}  // namespace
}  // namespace twofluid::verify
