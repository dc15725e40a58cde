#include "hartree/radial_grid.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

using namespace hartree;

namespace {

double max_abs(const Eigen::VectorXcd& v)
{
  return v.cwiseAbs().maxCoeff();
}

}  // namespace

TEST(RadialGrid, NodesAreScaledBesselZeros)
{
  auto g = make_grid(5, 64, 10.0);
  ASSERT_EQ(g->size(), 64);
  // zeros of J_{3/2} satisfy tan x = x
  for (int k = 0; k < 64; ++k) {
    const double z = g->bessel_zero_table()[k];
    EXPECT_NEAR(std::tan(z), z, 1e-9 * z * z) << k;
  }
  for (int k = 1; k < 64; ++k)
    EXPECT_GT(g->r_nodes()[k], g->r_nodes()[k - 1]);
  EXPECT_LT(g->r_nodes().back(), g->r_max());
  EXPECT_NEAR(g->rho_max() * g->r_max(), g->last_zero(), 1e-12);
}

TEST(RadialGrid, RejectsBadParameters)
{
  EXPECT_THROW(make_grid(4, 64, 10.0), InvalidArgument);
  EXPECT_THROW(make_grid(5, 8, 10.0), InvalidArgument);
  EXPECT_THROW(make_grid(5, 64, -1.0), InvalidArgument);
  EXPECT_THROW(make_grid(5, 64, std::numeric_limits<double>::infinity()), InvalidArgument);
}

TEST(RadialGrid, KernelIsInvolution)
{
  // only approximately: the defect falls off roughly like N^-3
  for (int d : {5, 7}) {
    auto g = make_grid(d, 512, 12.0);
    const Eigen::MatrixXd& T = g->kernel();
    const Eigen::MatrixXd I = T * T;
    EXPECT_LT((I - Eigen::MatrixXd::Identity(512, 512)).cwiseAbs().maxCoeff(), 2e-10) << d;
  }
}

TEST(RadialGrid, GaussianIsSelfDual)
{
  for (int d : {5, 6, 9}) {
    auto g = make_grid(d, 256, 16.0);
    const auto u = PhysicalField::from_function(g, oracle::gaussian);
    const auto uh = transform_forward(u);
    double err = 0.0;
    for (int k = 0; k < g->size(); ++k)
      err = std::max(err, std::abs(uh[k] - oracle::gaussian_hat(g->rho_nodes()[k])));
    EXPECT_LT(err, 1e-10) << "d=" << d;
  }
}

TEST(RadialGrid, MatchesQuadratureHankelTransform)
{
  auto g = make_grid(5, 256, 16.0);
  auto f = [](double r) { return std::exp(-r * r / 3.0) * (1.0 + std::cos(r)); };
  const auto uh = transform_forward(PhysicalField::from_function(g, f));
  for (int k : {0, 5, 17, 40}) {
    const double rho = g->rho_nodes()[k];
    EXPECT_NEAR(uh[k].real(), oracle::hankel(f, rho, 5, 16.0), 1e-10) << k;
  }
}

TEST(RadialGrid, RoundTripAndPlancherel)
{
  auto g = make_grid(5, 512, 20.0);
  const auto u = PhysicalField::from_function(g, [](double r) {
    return oracle::cplx(oracle::r2_gaussian(r), 0.5 * std::exp(-r * r / 4.0));
  });
  const auto back = transform_inverse(transform_forward(u));
  EXPECT_LT(max_abs(back.values() - u.values()), 1e-12);
  EXPECT_NEAR(l2_norm_squared(transform_forward(u)) / l2_norm_squared(u), 1.0, 1e-12);
}

TEST(RadialGrid, SpectralNormMatchesClosedForm)
{
  // ||exp(-r^2/2)||^2 in R^5 is pi^{5/2}
  auto g = make_grid(5, 256, 16.0);
  const auto u = PhysicalField::from_function(g, oracle::gaussian);
  EXPECT_NEAR(l2_norm_squared(u), std::pow(oracle::pi, 2.5), 1e-10);
  EXPECT_NEAR(l2_norm_squared(transform_forward(u)), std::pow(oracle::pi, 2.5), 1e-10);
}

TEST(RadialGrid, EvaluateBetweenNodes)
{
  auto g = make_grid(5, 256, 16.0);
  const auto uh = transform_forward(PhysicalField::from_function(g, oracle::gaussian));
  const std::vector<double> r{0.0, 0.123, 1.5, 3.3, 7.77};
  const auto v = evaluate_at(uh, r);
  const auto dv = evaluate_derivative_at(uh, r);
  for (std::size_t i = 0; i < r.size(); ++i) {
    EXPECT_NEAR(v[i].real(), oracle::gaussian(r[i]), 1e-11);
    EXPECT_NEAR(dv[i].real(), -r[i] * oracle::gaussian(r[i]), 1e-10);
  }
}

TEST(RadialGrid, RadialDerivativeAtNodes)
{
  auto g = make_grid(5, 256, 16.0);
  const auto u = PhysicalField::from_function(g, oracle::gaussian);
  const auto du = radial_derivative(u);
  for (int k = 0; k < g->size(); k += 13)
    EXPECT_NEAR(du[k].real(), -g->r_nodes()[k] * oracle::gaussian(g->r_nodes()[k]), 1e-10);
}

TEST(RadialGrid, MixingGridsIsAnError)
{
  auto a = make_grid(5, 64, 10.0);
  auto b = make_grid(5, 64, 11.0);
  const auto u = PhysicalField::from_function(a, oracle::gaussian);
  const auto v = PhysicalField::from_function(b, oracle::gaussian);
  EXPECT_THROW(u + v, GridMismatch);
  EXPECT_NO_THROW(u + PhysicalField::from_function(make_grid(5, 64, 10.0), oracle::gaussian));
}

TEST(RadialGrid, CriticalRescalePreservesKineticNorm)
{
  auto g = make_grid(5, 512, 30.0);
  const auto u = PhysicalField::from_function(g, oracle::gaussian);
  const auto v = critical_rescale(u, 1.7);
  // u_lambda(r) = lambda^{3/2} u(lambda r) in d = 5
  for (int k = 0; k < g->size(); k += 37)
    EXPECT_NEAR(v[k].real(), std::pow(1.7, 1.5) * oracle::gaussian(1.7 * g->r_nodes()[k]), 1e-10);
}

TEST(RadialGrid, ChecksumIdentifiesParameters)
{
  EXPECT_EQ(make_grid(5, 64, 10.0)->checksum(), make_grid(5, 64, 10.0)->checksum());
  EXPECT_NE(make_grid(5, 64, 10.0)->checksum(), make_grid(5, 65, 10.0)->checksum());
  EXPECT_NE(make_grid(5, 64, 10.0)->checksum(), make_grid(6, 64, 10.0)->checksum());
}
