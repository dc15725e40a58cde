#include "hartree/hartree_operator.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

using namespace hartree;

TEST(HartreeOperator, RieszConstantInFiveDimensions)
{
  // pi^{5/2} 2 Gamma(1/2) = 2 pi^3
  EXPECT_NEAR(riesz_constant(5), 2.0 * std::pow(oracle::pi, 3), 1e-12);
}

TEST(HartreeOperator, QuadratureOracleMatchesClosedForm)
{
  const std::vector<double> radii{0.0, 0.4, 1.1, 2.5, 4.0};
  const auto o = oracle_potential([](double r) { return std::exp(-r * r); }, 9.0, 5, radii, 1e-10);
  ASSERT_TRUE(o.converged);
  for (std::size_t i = 0; i < radii.size(); ++i)
    EXPECT_NEAR(o.values[i] / oracle::riesz_of_gaussian_density(radii[i], 5), 1.0, 1e-9) << radii[i];
}

TEST(HartreeOperator, SpectralPotentialMatchesClosedForm)
{
  auto g = make_grid(5, 1024, 120.0);
  const auto m = riesz_multiplier(g);
  const auto u = PhysicalField::from_function(g, oracle::gaussian);
  const Eigen::VectorXd V = potential_values(u, m);
  for (int k = 0; k < g->size() && g->r_nodes()[k] < 3.0; k += 3)
    EXPECT_NEAR(V[k] / oracle::riesz_of_gaussian_density(g->r_nodes()[k], 5), 1.0, 1e-6) << g->r_nodes()[k];
}

TEST(HartreeOperator, PotentialIsRealAndPositive)
{
  auto g = make_grid(5, 256, 40.0);
  const auto m = riesz_multiplier(g);
  const auto u = PhysicalField::from_function(g, [](double r) { return oracle::cplx(std::exp(-r * r), 0.3 * r * std::exp(-r * r)); });
  const auto V = hartree_potential(u, m);
  for (int k = 0; k < 40; ++k) {
    EXPECT_EQ(V[k].imag(), 0.0);
    EXPECT_GT(V[k].real(), 0.0);
  }
}

TEST(HartreeOperator, PairingIsSymmetricAndMatchesOracle)
{
  auto g = make_grid(5, 1024, 120.0);
  const auto m = riesz_multiplier(g);
  const auto u = PhysicalField::from_function(g, oracle::gaussian);
  const auto w = PhysicalField::from_function(g, [](double r) { return std::exp(-r * r / 3.0); });
  // int V[u]|w|^2 = int V[w]|u|^2
  EXPECT_NEAR(hartree_pairing(u, w, m) / hartree_pairing(w, u, m), 1.0, 1e-7);
  const auto ref = oracle_pairing([](double r) { return std::exp(-r * r); }, 9.0, 5);
  EXPECT_NEAR(hartree_pairing(u, u, m) / ref.value, 1.0, 1e-6);
}

TEST(HartreeOperator, HomogeneityAndScaling)
{
  auto g = make_grid(5, 512, 60.0);
  const auto m = riesz_multiplier(g);
  const auto u = PhysicalField::from_function(g, oracle::gaussian);
  const double p1 = hartree_pairing(u, u, m);
  EXPECT_NEAR(hartree_pairing(2.0 * u, 2.0 * u, m) / p1, 16.0, 1e-10);
  // P is invariant under u -> lambda^{3/2} u(lambda .)
  const auto v = PhysicalField::from_function(g, [](double r) { return std::pow(1.3, 1.5) * oracle::gaussian(1.3 * r); });
  EXPECT_NEAR(hartree_pairing(v, v, m) / p1, 1.0, 1e-6);
}

TEST(HartreeOperator, CalibrationDetectsWrongConstant)
{
  auto g = make_grid(5, 512, 80.0);
  auto good = riesz_multiplier(g);
  const auto c = calibrate(good);
  EXPECT_TRUE(good.calibrated);
  EXPECT_NEAR(c.constant / riesz_constant(5), 1.0, 1e-6);

  auto bad = riesz_multiplier(g, 1.01 * riesz_constant(5));
  const auto cb = calibrate(bad);
  EXPECT_FALSE(bad.calibrated);
  EXPECT_NEAR(cb.relative_error, 0.01 / 1.01, 1e-4);
}
