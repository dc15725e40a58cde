#include "hartree/diagnostics.hpp"
#include "hartree/functionals.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

using namespace hartree;

TEST(Functionals, GaussianIntegralsInClosedForm)
{
  auto g = make_grid(5, 512, 30.0);
  const auto u = PhysicalField::from_function(g, oracle::gaussian);
  // mass pi^{5/2}, kinetic (d/2) pi^{5/2}
  EXPECT_NEAR(mass(u), std::pow(oracle::pi, 2.5), 1e-10);
  EXPECT_NEAR(kinetic(u), 2.5 * std::pow(oracle::pi, 2.5), 1e-9);
}

TEST(Functionals, BubbleIntegrals)
{
  const double R = 200.0;
  auto g = make_grid(5, 2048, R);
  const auto m = riesz_multiplier(g);
  const oracle::Bubble5 w{1.0};
  // the r^{-3} tail must be rolled off before r_max, a jump there spoils K
  const auto u = PhysicalField::from_function(
      g, [&](double r) { return w(r) * (1.0 - detail::smoothstep9((r - 0.5 * R) / (0.4 * R))[0]); });
  const auto b = energy_breakdown(u, m);
  EXPECT_NEAR(b.kinetic / oracle::Bubble5::kinetic, 1.0, 1e-5);
  EXPECT_NEAR(b.potential / oracle::Bubble5::potential, 1.0, 1e-5);
}

TEST(Functionals, EnergyFromParts)
{
  const auto b = EnergyBreakdown::from_parts(1.0, 8.0, 4.0);
  EXPECT_DOUBLE_EQ(b.energy, 3.0);
}

TEST(Functionals, WeinsteinQuotientScaleInvariant)
{
  auto g = make_grid(5, 1024, 80.0);
  const auto m = riesz_multiplier(g);
  const auto u = PhysicalField::from_function(g, oracle::gaussian);
  const double q = weinstein_quotient(u, m);
  EXPECT_NEAR(weinstein_quotient(3.0 * u, m) / q, 1.0, 1e-12);
  const auto v = PhysicalField::from_function(g, [](double r) { return oracle::gaussian(0.8 * r); });
  EXPECT_NEAR(weinstein_quotient(v, m) / q, 1.0, 1e-6);
  EXPECT_THROW(weinstein_quotient(0.0, 1.0), InvalidArgument);
}

TEST(Functionals, LargestDelta0)
{
  EXPECT_FALSE(largest_delta0(1.0, 1.0));
  EXPECT_FALSE(largest_delta0(2.0, 1.0));
  EXPECT_DOUBLE_EQ(*largest_delta0(0.75, 1.0), 0.25);
  EXPECT_DOUBLE_EQ(*largest_delta0(-3.0, 1.0), 1.0);
}

TEST(Functionals, CoercivityOnScaledGroundState)
{
  // a W with P(W) = K(W): K = a^2 K_W, P = a^4 K_W, E/E_W = 2a^2 - a^4
  const Thresholds t{oracle::Bubble5::kinetic, oracle::Bubble5::energy};
  for (double a : {0.3, 0.5, 0.8, 0.95}) {
    const auto b = EnergyBreakdown::from_parts(1.0, a * a * t.kinetic_W, std::pow(a, 4) * t.kinetic_W);
    const double d0 = *largest_delta0(b.energy, t.energy_W);
    EXPECT_NEAR(d0, std::pow(1.0 - a * a, 2), 1e-12);
    // the kinetic cap is attained exactly for a W, so allow rounding
    const auto r = coercivity_check(EnergyBreakdown::from_parts(1.0, b.kinetic * (1 - 1e-12), b.potential), t, d0);
    EXPECT_TRUE(r.satisfied) << a;
    EXPECT_GE(r.coercivity_lhs, r.coercivity_rhs);
  }
  EXPECT_THROW(coercivity_check(EnergyBreakdown{}, t, 0.0), InvalidArgument);
}

TEST(Functionals, CoercivityNotApplicableAboveThreshold)
{
  const Thresholds t{10.0, 2.5};
  const auto b = EnergyBreakdown::from_parts(1.0, 11.0, 12.0);
  EXPECT_FALSE(coercivity_check(b, t, 0.1).applicable);
}

TEST(Functionals, ProofPolynomials)
{
  const double c4 = oracle::Bubble5::sobolev_c4;
  // g vanishes and f peaks at x = 1/C4 = K_W
  const auto p = proof_polynomials(1.0 / c4, c4);
  EXPECT_NEAR(p.g, 0.0, 1e-12);
  EXPECT_NEAR(p.f, oracle::Bubble5::energy, 1e-12);
  EXPECT_THROW(proof_polynomials(-1.0, c4), InvalidArgument);
}

TEST(Functionals, Comparability)
{
  std::vector<EnergyBreakdown> s;
  for (double a : {0.5, 0.4, 0.3})
    s.push_back(EnergyBreakdown::from_parts(1.0, a * a * 14.0625, std::pow(a, 4) * 14.0625));
  const auto r = comparability_check(s, 0.5);
  EXPECT_TRUE(r.passed);
  std::vector<EnergyBreakdown> bad{EnergyBreakdown::from_parts(1.0, 10.0, 30.0)};
  EXPECT_FALSE(comparability_check(bad, 0.5).passed);
  EXPECT_THROW(comparability_check(std::span<const EnergyBreakdown>{}, 0.5), InvalidArgument);
}
