#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "support.hpp"
#include "twofluid/potential.hpp"

namespace twofluid {
namespace {

using testing::mixed_law;
using testing::random_state;

// Only the added-mass term. Component energies cannot vanish with K0 > 0,
// so the pure coupling term is its own law.
struct CouplingOnly {
  double a = 1.0;
  double value(const ThermoPoint& x) const { return -0.5 * a * x.w * x.w; }
  Vec5 gradient(const ThermoPoint& x) const {
    Vec5 g = Vec5::Zero();
    g[kW] = -a * x.w;
    return g;
  }
  Mat5 hessian(const ThermoPoint&) const {
    Mat5 H = Mat5::Zero();
    H(kW, kW) = -a;
    return H;
  }
};

// W linear in the densities; no analytic derivatives, so everything below
// goes through the difference fallback.
struct LinearInDensity {
  double value(const ThermoPoint& x) const { return 2.0 * x.rho[0] + 3.0 * x.rho[1] + 0.5 * x.s[0] - x.s[1]; }
};

TEST(Potential, NoAddedMassMeansUEqualsW) {
  const SeparableAddedMass law = mixed_law(0.0);
  PrimitiveState p;
  p.rho = {1.2, 0.7};
  p.u = {-0.4, 1.3};
  p.s = {0.1, -0.2};
  const ThermoEval e = eval_potential(law, p);
  EXPECT_EQ(e.dW_dw, 0.0);
  EXPECT_EQ(e.U, e.W);
  EXPECT_EQ(e.istar, 0.0);
}

TEST(Potential, PureCouplingTerm) {
  PrimitiveState p;
  p.u = {0.0, 2.0};
  const ThermoEval e = eval_potential(CouplingOnly{1.0}, p);
  EXPECT_EQ(e.W, -2.0);
  EXPECT_EQ(e.U, 2.0);
  EXPECT_EQ(e.istar, 2.0);
}

TEST(Potential, HandEvaluatedComponentEnergy) {
  const SeparableAddedMass law({PhaseParams{2.0, 1.0, 0.0, 1.0}, PhaseParams{}}, 0.0);
  PrimitiveState p;
  p.rho = {3.0, 1.0};
  p.s = {0.0, 0.0};
  const ThermoEval e = eval_potential(law, p);
  EXPECT_DOUBLE_EQ(law.phase_energy(0, 3.0, 0.0), 9.0);
  EXPECT_DOUBLE_EQ(e.theta[0], 3.0);
  // theta_1 against a difference quotient of W in s1
  const double h = 1e-6;
  ThermoPoint xp = ThermoPoint::from(p), xm = xp;
  xp.s[0] += h;
  xm.s[0] -= h;
  EXPECT_NEAR((law.value(xp) - law.value(xm)) / (2 * h) / 3.0, 3.0, 1e-8);
}

TEST(Potential, LagrangianExamples) {
  const SeparableAddedMass law = mixed_law(0.5);
  PrimitiveState rest;
  rest.rho = {1.3, 0.6};
  rest.s = {0.2, 0.1};
  EXPECT_DOUBLE_EQ(eval_lagrangian(law, rest), -eval_potential(law, rest).W);

  PrimitiveState p;
  p.rho = {1.0, 1.0};
  p.u = {1.0, 3.0};
  EXPECT_NEAR(eval_lagrangian(CouplingOnly{1.0}, p), 7.0, 1e-12);
}

TEST(Potential, NonPositiveDensityNamesComponent) {
  PrimitiveState p;
  p.rho = {1.0, -0.5};
  try {
    eval_potential(mixed_law(), p);
    FAIL() << "expected a domain error";
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("rho2"), std::string::npos);
  }
  p.rho = {0.0, 1.0};
  EXPECT_THROW(eval_potential(mixed_law(), p), DomainError);
}

TEST(Potential, AnalyticDerivativesMatchDifferences) {
  std::mt19937_64 rng(11);
  const SeparableAddedMass law = mixed_law(0.8);
  for (int i = 0; i < 200; ++i) {
    const PrimitiveState p = random_state(rng);
    EXPECT_LT(fd_check_derivatives(law, p, 1e-5), 1e-6);
  }
}

TEST(Potential, DifferenceCheckConvergesAtSecondOrder) {
  const SeparableAddedMass law = mixed_law(0.8);
  PrimitiveState p;
  p.rho = {1.1, 0.9};
  p.u = {0.1, 0.4};
  p.s = {0.3, -0.1};
  const double e1 = fd_check_derivatives(law, p, 1e-2);
  const double e2 = fd_check_derivatives(law, p, 5e-3);
  EXPECT_GT(e1 / e2, 3.5);
  EXPECT_LT(e1 / e2, 4.5);
}

TEST(Potential, StencilTooCloseToVacuum) {
  PrimitiveState p;
  p.rho = {1e-6, 1.0};
  EXPECT_THROW(fd_check_derivatives(mixed_law(), p, 1e-5), DomainError);
}

TEST(Potential, DegenerateLinearLawHasZeroSecondPartials) {
  PrimitiveState p;
  p.rho = {1.5, 0.5};
  p.u = {0.0, 0.3};
  const Mat5 H = potential_hessian(LinearInDensity{}, ThermoPoint::from(p));
  EXPECT_LT(H.cwiseAbs().maxCoeff(), 1e-6);
  const Vec5 g = potential_gradient(LinearInDensity{}, ThermoPoint::from(p));
  EXPECT_NEAR(g[kRho1], 2.0, 1e-9);
  EXPECT_NEAR(g[kRho2], 3.0, 1e-9);
  EXPECT_NEAR(g[kW], 0.0, 1e-12);
}

TEST(Potential, HessianSymmetric) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) {
    const Mat5 H = potential_hessian(mixed_law(1.0), ThermoPoint::from(random_state(rng)));
    EXPECT_EQ((H - H.transpose()).cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(Potential, InternalEnergyIdentityAtRandomStates) {
  std::mt19937_64 rng(5);
  const SeparableAddedMass law = mixed_law(0.7);
  for (int i = 0; i < 1000000; ++i) {
    const PrimitiveState p = random_state(rng);
    const ThermoEval e = eval_potential(law, p);
    const double lhs = e.U - e.W, rhs = -e.dW_dw * p.w();
    ASSERT_LE(std::abs(lhs - rhs), 1e-12 * std::max({std::abs(e.U), std::abs(e.W), 1e-300})) << i;
  }
}

TEST(Potential, GalileanInvariance) {
  std::mt19937_64 rng(8);
  const SeparableAddedMass law = mixed_law(0.7);
  for (int i = 0; i < 1000; ++i) {
    const PrimitiveState p = random_state(rng);
    const PrimitiveState q = boosted(p, 0.37 * (i % 7) - 1.0);
    const ThermoEval a = eval_potential(law, p), b = eval_potential(law, q);
    EXPECT_NEAR(a.W, b.W, 1e-14 * std::abs(a.W));
    EXPECT_NEAR(a.U, b.U, 1e-14 * std::abs(a.U));
    EXPECT_NEAR(a.istar, b.istar, 1e-14 * (1.0 + std::abs(a.istar)));
    EXPECT_NEAR(a.theta[0], b.theta[0], 1e-14 * a.theta[0]);
    EXPECT_NEAR(a.theta[1], b.theta[1], 1e-14 * a.theta[1]);
  }
}

TEST(Potential, TemperaturesPositive) {
  std::mt19937_64 rng(9);
  for (int i = 0; i < 1000; ++i) {
    const ThermoEval e = eval_potential(mixed_law(), random_state(rng));
    EXPECT_GT(e.theta[0], 0.0);
    EXPECT_GT(e.theta[1], 0.0);
  }
}

TEST(Potential, DensityDependentAddedMass) {
  // a(rho1, rho2) = 0.5 rho1 rho2 / (rho1 + rho2)
  AddedMassFunction a_fn = [](double r1, double r2) {
    const double r = r1 + r2;
    AddedMassValue v;
    v.a = 0.5 * r1 * r2 / r;
    v.d_rho1 = 0.5 * r2 * r2 / (r * r);
    v.d_rho2 = 0.5 * r1 * r1 / (r * r);
    v.d_rho1rho1 = -r2 * r2 / (r * r * r);
    v.d_rho2rho2 = -r1 * r1 / (r * r * r);
    v.d_rho1rho2 = r1 * r2 / (r * r * r);
    return v;
  };
  const SeparableAddedMass law({PhaseParams{}, PhaseParams{1.6, 2.0, 0.0, 1.0}}, a_fn);
  std::mt19937_64 rng(21);
  // a'' is small next to the other entries, so the truncation floor is higher
  for (int i = 0; i < 100; ++i) EXPECT_LT(fd_check_derivatives(law, random_state(rng), 1e-5), 1e-5);
}

TEST(Potential, InvalidParametersRejected) {
  EXPECT_THROW(SeparableAddedMass({PhaseParams{0.5}, PhaseParams{}}, 0.0), DomainError);
  EXPECT_THROW(SeparableAddedMass({PhaseParams{}, PhaseParams{1.4, -1.0}}, 0.0), DomainError);
  EXPECT_THROW(SeparableAddedMass({PhaseParams{}, PhaseParams{}}, -0.1), DomainError);
}

TEST(Potential, IsothermalEntropyGivesRequestedTemperature) {
  const SeparableAddedMass law = mixed_law();
  for (double rho : {0.3, 1.0, 2.7}) {
    for (int a = 0; a < 2; ++a) {
      PrimitiveState p;
      p.rho = {rho, rho};
      p.s[a] = law.isothermal_entropy(a, rho, 1.7);
      EXPECT_NEAR(eval_potential(law, p).theta[a], 1.7, 1e-13);
    }
  }
}

}  // namespace
}  // namespace twofluid
