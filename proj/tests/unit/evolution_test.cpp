#include "hartree/evolution.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

using namespace hartree;

TEST(Evolution, LinearStepMatchesFreeGaussian)
{
  auto g = make_grid(5, 512, 40.0);
  const auto u0 = PhysicalField::from_function(g, oracle::gaussian);
  const double t = 0.7;
  const auto u = linear_step(u0, t);
  double err = 0.0;
  for (int k = 0; k < g->size(); ++k)
    err = std::max(err, std::abs(u[k] - oracle::free_gaussian(t, g->r_nodes()[k], 5)));
  EXPECT_LT(err, 1e-10);
}

TEST(Evolution, LinearStepGroupProperty)
{
  auto g = make_grid(5, 256, 30.0);
  const auto u0 = PhysicalField::from_function(g, [](double r) { return std::exp(-r * r) * (1.0 + r); });
  const auto a = linear_step(linear_step(u0, 0.3), 0.2);
  const auto b = linear_step(u0, 0.5);
  EXPECT_LT((a.values() - b.values()).cwiseAbs().maxCoeff(), 1e-12);
  const auto back = linear_step(b, -0.5);
  EXPECT_LT((back.values() - u0.values()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Evolution, NonlinearStepIsPhaseRotation)
{
  auto g = make_grid(5, 128, 20.0);
  const auto m = riesz_multiplier(g);
  const auto u = PhysicalField::from_function(g, oracle::gaussian);
  const auto v = nonlinear_step(u, m, 0.1);
  const Eigen::VectorXd V = potential_values(u, m);
  for (int k = 0; k < g->size(); k += 7) {
    EXPECT_NEAR(std::abs(v[k]), std::abs(u[k]), 1e-15);
    EXPECT_NEAR(std::arg(v[k]), 0.1 * V[k], 1e-12);
  }
}

TEST(Evolution, ConservesMassAndEnergy)
{
  auto g = make_grid(5, 512, 60.0);
  const auto m = riesz_multiplier(g);
  const auto u0 = PhysicalField::from_function(g, [](double r) { return 0.5 * std::exp(-0.5 * r * r); });
  EvolutionConfig cfg;
  cfg.dt0 = 1e-3;
  cfg.t_end = 0.5;
  const auto rec = evolve(u0, m, cfg);
  ASSERT_EQ(rec.terminated_by, Termination::t_end);
  EXPECT_DOUBLE_EQ(rec.final_time, 0.5);
  const auto& B = rec.breakdowns;
  EXPECT_NEAR(B.back().mass / B.front().mass, 1.0, 1e-10);
  EXPECT_NEAR(B.back().energy, B.front().energy, 1e-6 * B.front().kinetic);
  EXPECT_EQ(rec.times.size(), B.size());
  EXPECT_EQ(rec.virials.size(), B.size());
  EXPECT_GE(rec.checkpoints.size(), 2u);
  EXPECT_LE(rec.checkpoints.size(), static_cast<std::size_t>(cfg.max_checkpoints));
}

TEST(Evolution, StrangIsSecondOrder)
{
  auto g = make_grid(5, 256, 30.0);
  const auto m = riesz_multiplier(g);
  const auto u0 = PhysicalField::from_function(g, [](double r) { return 0.5 * std::exp(-0.5 * r * r); });
  auto run = [&](int n) {
    auto u = u0;
    for (int i = 0; i < n; ++i)
      u = strang_step(u, m, 0.2 / n);
    return u;
  };
  const auto ref = run(1600);
  std::vector<double> err;
  for (int n : {25, 50, 100})
    err.push_back(std::sqrt(l2_norm_squared(run(n) - ref)));
  for (int i = 0; i + 1 < 3; ++i) {
    const double order = std::log2(err[i] / err[i + 1]);
    EXPECT_NEAR(order, 2.0, 0.15) << i;
  }
}

TEST(Evolution, SpongeRemovesOutgoingMass)
{
  auto g = make_grid(5, 256, 20.0);
  const auto m = riesz_multiplier(g);
  const auto u0 = PhysicalField::from_function(g, [](double r) {
    return std::exp(-0.5 * r * r) * std::polar(1.0, -1.5 * r * r);
  });
  EvolutionConfig cfg;
  cfg.dt0 = 2e-3;
  cfg.t_end = 4.0;
  cfg.absorber = Sponge{0.3, 5.0};
  const auto rec = evolve(u0, m, cfg);
  EXPECT_TRUE(rec.absorber_active);
  EXPECT_EQ(rec.terminated_by, Termination::t_end);
  EXPECT_LT(rec.breakdowns.back().mass, 0.5 * rec.breakdowns.front().mass);
}

TEST(Evolution, BoundaryLeakWithoutAbsorber)
{
  auto g = make_grid(5, 256, 20.0);
  const auto m = riesz_multiplier(g);
  const auto u0 = PhysicalField::from_function(g, [](double r) {
    return std::exp(-0.5 * r * r) * std::polar(1.0, -1.5 * r * r);
  });
  EvolutionConfig cfg;
  cfg.dt0 = 2e-3;
  cfg.t_end = 20.0;
  const auto rec = evolve(u0, m, cfg);
  EXPECT_EQ(rec.terminated_by, Termination::boundary_leak);
  EXPECT_LT(rec.final_time, 20.0);
}

TEST(Evolution, HookStopsRun)
{
  auto g = make_grid(5, 128, 20.0);
  const auto m = riesz_multiplier(g);
  const auto u0 = PhysicalField::from_function(g, oracle::gaussian);
  EvolutionConfig cfg;
  cfg.t_end = 1.0;
  EvolutionHooks hooks;
  hooks.on_sample = [](const SampleView& s) { return s.t >= 0.05; };
  int checkpoints = 0;
  hooks.on_checkpoint = [&](const Checkpoint&) { ++checkpoints; };
  const auto rec = evolve(u0, m, cfg, hooks);
  EXPECT_EQ(rec.terminated_by, Termination::blowup_event);
  EXPECT_NEAR(rec.final_time, 0.05, 0.011);
  EXPECT_GE(checkpoints, 1);
}

TEST(Evolution, NonFiniteDataAborts)
{
  auto g = make_grid(5, 64, 20.0);
  const auto m = riesz_multiplier(g);
  auto u0 = PhysicalField::from_function(g, oracle::gaussian);
  u0[3] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(evolve(u0, m, EvolutionConfig{}), NumericalAbort);
}

TEST(Evolution, ConfigValidation)
{
  EvolutionConfig c;
  EXPECT_NO_THROW(c.validate());
  c.dt_min = 1.0;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = {};
  c.theta_cfl = 1.5;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c = {};
  c.absorber = Sponge{1.5, 1.0};
  EXPECT_THROW(c.validate(), InvalidArgument);
  EXPECT_EQ(std::string(to_string(Termination::dt_underflow)), "dt_underflow");
}
