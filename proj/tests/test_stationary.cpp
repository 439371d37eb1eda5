#include <gtest/gtest.h>

#include <cmath>

#include "qhd/hydro_solver.hpp"
#include "qhd/stationary.hpp"

using namespace qhd;

namespace {

constexpr double kOmega = 0.141421356237309504880;  // sqrt(0.02)

Params oscillator() {
  Params p;
  p.potential = HarmonicPotential{0.02};
  return p;
}

}  // namespace

TEST(OscillatorEigenstate, GroundStateEnergyAndWidth) {
  const Grid1D g(-20.0, 20.0, 801);
  const StationaryState s = oscillator_eigenstate(0, g, oscillator());
  EXPECT_NEAR(s.E_s, 0.0707106781186547524, 1e-10);
  EXPECT_EQ(s.nodes, 0u);
  EXPECT_TRUE(s.warnings.empty());
  EXPECT_NEAR(integrate(s.rho_s, g), 1.0, 1e-9);
  // variance of rho_s is 1/(2 omega)
  Field x2(g.n());
  for (std::size_t i = 0; i < g.n(); ++i) x2[i] = g.x(i) * g.x(i) * s.rho_s[i];
  EXPECT_NEAR(integrate(x2, g), 3.53553390593273762, 1e-6);
}

TEST(OscillatorEigenstate, GroundStateResidual) {
  const Grid1D g(-20.0, 20.0, 801);
  const Params p = oscillator();
  EXPECT_LT(stationary_residual(oscillator_eigenstate(0, g, p), g, p), 1e-3);
}

TEST(OscillatorEigenstate, FirstExcitedHasNodeAtOrigin) {
  const Grid1D g(-20.0, 20.0, 801);
  const StationaryState s = oscillator_eigenstate(1, g, oscillator());
  EXPECT_EQ(s.rho_s[400], 0.0);
  EXPECT_EQ(s.nodes, 1u);
  EXPECT_FALSE(s.warnings.empty());
  EXPECT_NEAR(s.E_s, 1.5 * kOmega, 1e-12);
}

TEST(OscillatorEigenstate, HigherLevelsStayNormalized) {
  const Grid1D g(-30.0, 30.0, 1201);
  for (std::size_t n : {2u, 5u, 10u}) {
    const StationaryState s = oscillator_eigenstate(n, g, oscillator());
    EXPECT_NEAR(integrate(s.rho_s, g), 1.0, 1e-9);
    EXPECT_NEAR(s.E_s, kOmega * (n + 0.5), 1e-12);
  }
}

TEST(OscillatorEigenstate, NarrowGridRejected) {
  const Grid1D g(-5.0, 5.0, 201);
  EXPECT_THROW(oscillator_eigenstate(0, g, oscillator()), BoundaryDecayError);
}

TEST(OscillatorEigenstate, RequiresHarmonicPotential) {
  const Grid1D g(-20.0, 20.0, 801);
  EXPECT_THROW(oscillator_eigenstate(0, g, Params{}), ContractViolation);
}

TEST(SolveStationary, ReproducesAnalyticGroundState) {
  const Grid1D g(-20.0, 20.0, 801);
  const Params p = oscillator();
  const StationaryState num = solve_stationary(p.potential, 0.05, g, p);
  const StationaryState ana = oscillator_eigenstate(0, g, p);
  EXPECT_LT(std::abs(num.E_s - ana.E_s) / ana.E_s, 1e-6);
  EXPECT_LT(max_abs_diff(num.rho_s, ana.rho_s), 1e-5);
  EXPECT_EQ(num.nodes, 0u);
  for (double r : num.rho_s) EXPECT_GE(r, 0.0);
}

TEST(SolveStationary, FindsExcitedLevels) {
  const Grid1D g(-20.0, 20.0, 801);
  const Params p = oscillator();
  const StationaryState s = solve_stationary(p.potential, 2.4 * kOmega, g, p);
  EXPECT_EQ(s.nodes, 2u);
  EXPECT_LT(std::abs(s.E_s - 2.5 * kOmega) / (2.5 * kOmega), 1e-6);
  EXPECT_FALSE(s.warnings.empty());
}

TEST(SolveStationary, ConstantShiftOnlyMovesEnergy) {
  const Grid1D g(-20.0, 20.0, 801);
  const Params p = oscillator();
  Field u = evaluate_potential(p.potential, g);
  const StationaryState a = solve_stationary(TabulatedPotential{u}, 0.05, g, p);
  for (double& x : u) x += 0.37;
  const StationaryState b = solve_stationary(TabulatedPotential{u}, 0.42, g, p);
  EXPECT_NEAR(b.E_s - a.E_s, 0.37, 1e-9);
  EXPECT_LT(max_abs_diff(a.rho_s, b.rho_s), 1e-9);
}

TEST(SolveStationary, FreeParticleHasNoDecayingState) {
  const Grid1D g(-20.0, 20.0, 201);
  EXPECT_THROW(solve_stationary(FreePotential{}, 0.01, g, Params{}), NotFoundError);
}

TEST(SolveStationary, EmptyWindowIsNotFound) {
  const Grid1D g(-20.0, 20.0, 801);
  const Params p = oscillator();
  StationarySearch search;
  search.window = 1e-3;
  EXPECT_THROW(solve_stationary(p.potential, 0.1, g, p, search), NotFoundError);
}

TEST(SolveStationary, ResidualBelowTolerance) {
  const Grid1D g(-20.0, 20.0, 801);
  const Params p = oscillator();
  const StationaryState s = solve_stationary(p.potential, 0.05, g, p);
  EXPECT_LT(stationary_residual(s, g, p), 1e-3);
  EXPECT_NEAR(integrate(s.rho_s, g), 1.0, 1e-9);
}

class FixedPoint : public ::testing::TestWithParam<double> {};

TEST_P(FixedPoint, OneLargeStepBarelyMovesTheGroundState) {
  const Grid1D g(-20.0, 20.0, 801);
  Params p = oscillator();
  p.k = GetParam();
  const StationaryState s = oscillator_eigenstate(0, g, p);
  HydroState h{0.0, s.rho_s, Field(g.n(), 0.0)};
  SolverConfig cfg;
  cfg.dt = 0.01;
  cfg.allow_large_dt = true;
  const HydroState out = step(h, g, p, cfg);
  EXPECT_LT(max_abs_diff(out.rho, s.rho_s), 1e-6);
}

INSTANTIATE_TEST_SUITE_P(DampingRates, FixedPoint, ::testing::Values(0.0, 0.1, 1.0));
