#include "hartree/classifier.hpp"

#include <gtest/gtest.h>

using namespace hartree;

namespace {

const Thresholds kT{225.0 / 16.0, 225.0 / 64.0};

// synthetic trajectory with prescribed K(t), P(t), lambda(t)
TrajectoryRecord synthetic(int n, double t_end, Termination term, const std::function<double(double)>& K,
                           const std::function<double(double)>& P, const std::function<double(double)>& lam)
{
  TrajectoryRecord r;
  for (int i = 0; i < n; ++i) {
    const double t = t_end * i / (n - 1);
    r.times.push_back(t);
    r.breakdowns.push_back(EnergyBreakdown::from_parts(1.0, K(t), P(t)));
    VirialSample v;
    v.t = t;
    v.lambda_conc = lam(t);
    v.xnorm_increment = 1.0;
    r.virials.push_back(v);
    r.dt_history.push_back(t_end / n);
    r.boundary_mass.push_back(0.0);
  }
  r.terminated_by = term;
  r.final_time = t_end;
  r.recent_step_span = 1e-3;
  return r;
}

}  // namespace

TEST(Classifier, GateAlgebraForScaledGroundState)
{
  for (double a : {0.5, 0.8, 0.95, 1.05, 1.2}) {
    const double K = a * a * kT.kinetic_W;
    const double P = std::pow(a, 4) * kT.kinetic_W;
    const auto p = predict(0.5 * K - 0.25 * P, K, kT);
    EXPECT_NEAR(1.0 - p.margin_E, 2 * a * a - std::pow(a, 4), 1e-14);
    EXPECT_NEAR(1.0 - p.margin_K, a * a, 1e-14);
    EXPECT_TRUE(p.applicable);
    EXPECT_EQ(p.verdict, a < 1 ? Verdict::global_scattering : Verdict::finite_time_blowup);
  }
}

TEST(Classifier, OutsideTheoremAtOrAboveThreshold)
{
  EXPECT_EQ(predict(kT.energy_W, 0.5 * kT.kinetic_W, kT).verdict, Verdict::outside_theorem);
  EXPECT_FALSE(predict(2 * kT.energy_W, 0.5 * kT.kinetic_W, kT).applicable);
  // W itself: E = E_W
  EXPECT_EQ(predict(kT.energy_W, kT.kinetic_W, kT).verdict, Verdict::outside_theorem);
}

TEST(Classifier, ObservesGlobalProxy)
{
  const auto r = synthetic(
      40, 20.0, Termination::t_end, [](double t) { return 9.0 / (1 + t); }, [](double t) { return 1e-3 / (1 + t * t * t); },
      [](double t) { return 1.0 + t; });
  const auto o = observe(r, ClassifierThresholds{});
  EXPECT_EQ(o.observed, Observed::global_proxy);
  EXPECT_FALSE(o.blowup_time);
  EXPECT_LT(o.evidence.at("window_max_P_over_K"), 0.01);
}

TEST(Classifier, ObservesBlowup)
{
  const double T = 0.1;
  const auto r = synthetic(
      30, 0.099, Termination::blowup_event, [&](double t) { return 9.0 * T / (T - t); },
      [&](double t) { return 12.0 * T / (T - t); }, [&](double t) { return (T - t) / T; });
  const auto o = observe(r, ClassifierThresholds{});
  EXPECT_EQ(o.observed, Observed::blowup_detected);
  ASSERT_TRUE(o.blowup_time);
  EXPECT_DOUBLE_EQ(*o.blowup_time, 0.099);
  EXPECT_DOUBLE_EQ(o.blowup_time_uncertainty, 1e-3);
}

TEST(Classifier, EventWithoutGrowthIsUndecided)
{
  const auto r = synthetic(
      30, 1.0, Termination::dt_underflow, [](double) { return 9.0; }, [](double) { return 5.0; },
      [](double) { return 1.0; });
  EXPECT_EQ(observe(r, ClassifierThresholds{}).observed, Observed::undecided);
}

TEST(Classifier, PersistentPotentialIsUndecided)
{
  const auto r = synthetic(
      40, 20.0, Termination::t_end, [](double) { return 9.0; }, [](double) { return 4.0; },
      [](double) { return 1.0; });
  EXPECT_EQ(observe(r, ClassifierThresholds{}).observed, Observed::undecided);
}

TEST(Classifier, LeakIsUndecided)
{
  const auto r = synthetic(
      40, 5.0, Termination::boundary_leak, [](double t) { return 9.0 / (1 + t); }, [](double) { return 0.0; },
      [](double) { return 1.0; });
  EXPECT_EQ(observe(r, ClassifierThresholds{}).observed, Observed::undecided);
}

TEST(Classifier, GrowingKineticIsNotProxy)
{
  const auto r = synthetic(
      40, 20.0, Termination::t_end, [](double t) { return 9.0 * (1 + t); }, [](double) { return 0.0; },
      [](double) { return 1.0; });
  EXPECT_EQ(observe(r, ClassifierThresholds{}).observed, Observed::undecided);
}

TEST(Classifier, Reconcile)
{
  Prediction p;
  p.verdict = Verdict::global_scattering;
  Observation o;
  o.observed = Observed::global_proxy;
  EXPECT_TRUE(reconcile(p, o).agree);
  o.observed = Observed::blowup_detected;
  EXPECT_FALSE(reconcile(p, o).agree);
  p.verdict = Verdict::outside_theorem;
  EXPECT_FALSE(reconcile(p, o).agree);
  o.observed = Observed::undecided;
  p.verdict = Verdict::finite_time_blowup;
  EXPECT_FALSE(reconcile(p, o).agree);
}

TEST(Classifier, BlowupHook)
{
  const auto hook = blowup_hook(ClassifierThresholds{}, 0.05);
  PhysicalField dummy;
  auto view = [&](double K, double lam) {
    static EnergyBreakdown b;
    static VirialSample v;
    b = EnergyBreakdown::from_parts(1.0, K, 0.0);
    v.lambda_conc = lam;
    return hook(SampleView{0.0, 1e-3, dummy, b, v, 0.0});
  };
  EXPECT_FALSE(view(1.0, 1.0));
  EXPECT_FALSE(view(20.0, 1.0));
  EXPECT_FALSE(view(5.0, 0.1));
  EXPECT_TRUE(view(20.0, 0.3));
}

TEST(Classifier, ThresholdValidation)
{
  ClassifierThresholds th;
  th.kinetic_growth = 1.0;
  EXPECT_THROW(th.validate(), InvalidArgument);
  th = {};
  th.trailing_fraction = 0.0;
  EXPECT_THROW(th.validate(), InvalidArgument);
  EXPECT_STREQ(to_string(Observed::global_proxy), "global_proxy");
  EXPECT_STREQ(to_string(Verdict::finite_time_blowup), "finite_time_blowup");
}
