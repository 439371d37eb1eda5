#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "qhd/core.hpp"

using namespace qhd;

TEST(Grid, NodesAndSpacing) {
  const Grid1D g(-1.0, 1.0, 21);
  EXPECT_DOUBLE_EQ(g.dx(), 0.1);
  EXPECT_EQ(g.x(0), -1.0);
  EXPECT_EQ(g.x(7), -1.0 + 7 * g.dx());
  EXPECT_NEAR(g.x(20), 1.0, 1e-15);
  EXPECT_EQ(g.nodes().size(), 21u);
}

TEST(Grid, RejectsBadExtentOrTooFewNodes) {
  EXPECT_THROW(Grid1D(1.0, 1.0, 10), ContractViolation);
  EXPECT_THROW(Grid1D(2.0, 1.0, 10), ContractViolation);
  EXPECT_THROW(Grid1D(0.0, 1.0, 7), ContractViolation);
  EXPECT_NO_THROW(Grid1D(0.0, 1.0, 8));
}

TEST(Params, Validation) {
  Params p;
  EXPECT_NO_THROW(p.validate());
  p.k = -0.1;
  EXPECT_THROW(p.validate(), ContractViolation);
  p = Params{};
  p.hbar = 0.0;
  EXPECT_THROW(p.validate(), ContractViolation);
  p = Params{};
  p.m = -1.0;
  EXPECT_THROW(p.validate(), ContractViolation);
  p = Params{};
  p.potential = HarmonicPotential{0.0};
  EXPECT_THROW(p.validate(), ContractViolation);
}

TEST(Potential, Evaluation) {
  const Grid1D g(-2.0, 2.0, 9);
  const Field h = evaluate_potential(HarmonicPotential{0.5}, g);
  EXPECT_DOUBLE_EQ(h[0], 0.5 * 0.5 * 4.0);
  EXPECT_DOUBLE_EQ(h[4], 0.0);
  const Field u = evaluate_potential(UniformPotential{3.0}, g);
  EXPECT_DOUBLE_EQ(u[8], -6.0);
  const Field f = evaluate_potential(FreePotential{}, g);
  EXPECT_EQ(max_abs(f), 0.0);
  EXPECT_THROW(evaluate_potential(TabulatedPotential{Field(5, 1.0)}, g), ContractViolation);
  EXPECT_EQ(evaluate_potential(TabulatedPotential{Field(9, 2.0)}, g)[3], 2.0);
}

TEST(Derivative, ConstantIsZero) {
  const Grid1D g(-3.0, 5.0, 33);
  const Field d = derivative(Field(33, 4.2), g);
  EXPECT_LT(max_abs(d), 1e-12);
}

TEST(Derivative, LinearIsExact) {
  const Grid1D g(-1.0, 1.0, 21);
  const Field d = derivative(g.nodes(), g);
  for (double x : d) EXPECT_NEAR(x, 1.0, 1e-12);
}

TEST(Derivative, SineMatchesCosine) {
  const Grid1D g(-std::numbers::pi, std::numbers::pi, 201);
  const Field d = derivative(g.sample([](double x) { return std::sin(x); }), g);
  EXPECT_LT(max_abs_diff(d, g.sample([](double x) { return std::cos(x); })), 1e-3);
}

TEST(Derivative, SecondOrderIncludingBoundaries) {
  // error ratio under halving dx should approach 4 at every node, ends included
  auto err = [](std::size_t n) {
    const Grid1D g(0.0, 2.0, n);
    const Field d = derivative(g.sample([](double x) { return std::exp(x); }), g);
    return max_abs_diff(d, g.sample([](double x) { return std::exp(x); }));
  };
  const double ratio = err(101) / err(201);
  EXPECT_GT(ratio, 3.8);
  EXPECT_LT(ratio, 4.2);
}

TEST(Derivative, SecondDerivativeOfQuadraticAndCubic) {
  const Grid1D g(-1.0, 2.0, 31);
  const Field d2 = second_derivative(g.sample([](double x) { return 3.0 * x * x - x; }), g);
  for (double v : d2) EXPECT_NEAR(v, 6.0, 1e-9);
  // one-sided four-point stencils are exact for cubics as well
  const Field c2 = second_derivative(g.sample([](double x) { return x * x * x; }), g);
  for (std::size_t i = 0; i < g.n(); ++i) EXPECT_NEAR(c2[i], 6.0 * g.x(i), 1e-9);
}

TEST(Derivative, LengthMismatchThrows) {
  const Grid1D g(0.0, 1.0, 11);
  EXPECT_THROW(derivative(Field(10, 0.0), g), ContractViolation);
  EXPECT_THROW(second_derivative(Field(12, 0.0), g), ContractViolation);
  EXPECT_THROW(integrate(Field(3, 0.0), g), ContractViolation);
}

TEST(Integrate, ConstantsAndLinear) {
  const Grid1D g(0.0, 1.0, 11);
  EXPECT_NEAR(integrate(Field(11, 1.0), g), 1.0, 1e-15);
  EXPECT_NEAR(integrate(g.nodes(), g), 0.5, 1e-12);
}

TEST(Integrate, UnitGaussian) {
  const Grid1D g(-10.0, 10.0, 401);
  const Field f = g.sample([](double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); });
  EXPECT_NEAR(integrate(f, g), 1.0, 1e-6);
}

TEST(Integrate, DerivativeConsistency) {
  // integral of f' equals f(b) - f(a) up to O(dx^2)
  for (std::size_t n : {51u, 101u, 201u}) {
    const Grid1D g(-1.0, 2.0, n);
    const Field f = g.sample([](double x) { return std::sin(3.0 * x) + x * x; });
    const double exact = f.back() - f.front();
    EXPECT_NEAR(integrate(derivative(f, g), g), exact, 10.0 * g.dx() * g.dx());
  }
}

TEST(Integrate, CumulativeEndsAtTotal) {
  const Grid1D g(0.0, 3.0, 61);
  const Field f = g.sample([](double x) { return std::cos(x); });
  const Field c = cumulative_integrate(f, g);
  EXPECT_EQ(c.front(), 0.0);
  EXPECT_NEAR(c.back(), integrate(f, g), 1e-14);
}

TEST(State, NormalizeAndCheck) {
  const Grid1D g(-5.0, 5.0, 101);
  HydroState h;
  h.rho = g.sample([](double x) { return 3.0 * std::exp(-x * x); });
  h.v.assign(g.n(), 0.0);
  EXPECT_FALSE(is_normalized(h, g));
  normalize(h.rho, g);
  EXPECT_TRUE(is_normalized(h, g));
  h.rho[4] = -1e-3;
  EXPECT_THROW(check_state(h, g, "test"), ContractViolation);
  Field zero(g.n(), 0.0);
  EXPECT_THROW(normalize(zero, g), DegenerateState);
}
