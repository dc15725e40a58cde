#pragma once

#include "hartree/evolution.hpp"
#include "hartree/functionals.hpp"
#include "hartree/ground_state.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>

namespace hartree {

enum class Verdict { global_scattering, finite_time_blowup, outside_theorem };
enum class Observed { global_proxy, blowup_detected, undecided };

inline const char* to_string(Verdict v)
{
  switch (v) {
    case Verdict::global_scattering: return "global_scattering";
    case Verdict::finite_time_blowup: return "finite_time_blowup";
    case Verdict::outside_theorem: return "outside_theorem";
  }
  return "unknown";
}

inline const char* to_string(Observed o)
{
  switch (o) {
    case Observed::global_proxy: return "global_proxy";
    case Observed::blowup_detected: return "blowup_detected";
    case Observed::undecided: return "undecided";
  }
  return "unknown";
}

struct Prediction {
  bool applicable = false;
  Verdict verdict = Verdict::outside_theorem;
  double margin_E = 0.0;  // 1 - E/E_W
  double margin_K = 0.0;  // 1 - K/K_W
  double energy = 0.0;
  double kinetic = 0.0;
};

struct ClassifierThresholds {
  double kinetic_growth = 10.0;
  double trailing_fraction = 0.25;
  double potential_ratio_cap = 0.01;
  double scale_floor_spacings = 8.0;
  double kinetic_bound_factor = 1.1;

  void validate() const
  {
    if (!(kinetic_growth > 1.0))
      throw InvalidArgument("classifier: kinetic_growth must exceed 1");
    if (!(trailing_fraction > 0.0 && trailing_fraction <= 1.0))
      throw InvalidArgument("classifier: trailing_fraction must lie in (0, 1]");
    if (!(potential_ratio_cap > 0.0))
      throw InvalidArgument("classifier: potential_ratio_cap must be positive");
    if (!(scale_floor_spacings > 0.0))
      throw InvalidArgument("classifier: scale_floor_spacings must be positive");
    if (!(kinetic_bound_factor >= 1.0))
      throw InvalidArgument("classifier: kinetic_bound_factor must be >= 1");
  }
};

struct Observation {
  Observed observed = Observed::undecided;
  std::optional<double> blowup_time;
  double blowup_time_uncertainty = 0.0;
  std::map<std::string, double> evidence;
};

struct RunOutcome {
  Prediction predicted;
  Observed observed = Observed::undecided;
  std::optional<double> blowup_time_estimate;
  double blowup_time_uncertainty = 0.0;
  std::map<std::string, double> evidence;
  bool agree = false;
};

inline Prediction predict(double energy, double kinetic, const Thresholds& t)
{
  Prediction p;
  p.energy = energy;
  p.kinetic = kinetic;
  p.margin_E = 1.0 - energy / t.energy_W;
  p.margin_K = 1.0 - kinetic / t.kinetic_W;
  p.applicable = energy < t.energy_W;
  if (!p.applicable || std::abs(p.margin_K) < 1e-9)
    p.verdict = Verdict::outside_theorem;
  else
    p.verdict = p.margin_K > 0.0 ? Verdict::global_scattering : Verdict::finite_time_blowup;
  return p;
}

inline Prediction predict(const PhysicalField& u0, const GroundStateData& gs, const RieszMultiplier& m)
{
  const auto b = energy_breakdown(u0, m);
  return predict(b.energy, b.kinetic, gs.thresholds());
}

// Sample hook raising a blow-up event once K has grown by the configured
// factor and the concentration scale is within a few grid spacings.
inline std::function<bool(const SampleView&)> blowup_hook(const ClassifierThresholds& th, double spacing)
{
  auto k0 = std::make_shared<double>(std::numeric_limits<double>::quiet_NaN());
  return [th, spacing, k0](const SampleView& s) {
    if (std::isnan(*k0))
      *k0 = s.breakdown.kinetic;
    return *k0 > 0.0 && s.breakdown.kinetic >= th.kinetic_growth * *k0 &&
           s.virial.lambda_conc <= th.scale_floor_spacings * spacing;
  };
}

inline Observation observe(const TrajectoryRecord& traj, const ClassifierThresholds& th)
{
  th.validate();
  Observation o;
  const std::size_t n = traj.size();
  if (n == 0)
    return o;
  const auto& B = traj.breakdowns;
  const double K0 = B.front().kinetic;
  const double lam0 = traj.virials.front().lambda_conc;
  double maxK = 0.0, minLam = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    maxK = std::max(maxK, B[i].kinetic);
    if (traj.virials[i].lambda_conc > 0.0)
      minLam = std::min(minLam, traj.virials[i].lambda_conc);
  }
  const double t0 = traj.times.front(), t1 = traj.times.back();
  const double half = 0.5 * (t0 + t1);
  const double window_start = t1 - th.trailing_fraction * (t1 - t0);
  double maxK_first_half = 0.0, window_pk = 0.0, window_x = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (traj.times[i] <= half)
      maxK_first_half = std::max(maxK_first_half, B[i].kinetic);
    if (traj.times[i] >= window_start) {
      const double pk = B[i].kinetic > 0.0 ? B[i].potential / B[i].kinetic : 0.0;
      window_pk = std::max(window_pk, pk);
    }
  }
  for (std::size_t i = 1; i < n; ++i)
    if (traj.times[i - 1] >= window_start)
      window_x += 0.5 * (traj.times[i] - traj.times[i - 1]) *
                  (traj.virials[i].xnorm_increment + traj.virials[i - 1].xnorm_increment);
  const double window_len = t1 - std::max(window_start, t0);

  const double Kf = B.back().kinetic;
  o.evidence["final_K_over_K0"] = K0 > 0.0 ? Kf / K0 : 0.0;
  o.evidence["max_K_over_K0"] = K0 > 0.0 ? maxK / K0 : 0.0;
  o.evidence["min_lambda_conc"] = std::isfinite(minLam) ? minLam : 0.0;
  o.evidence["final_P_over_K"] = Kf > 0.0 ? B.back().potential / Kf : 0.0;
  o.evidence["window_max_P_over_K"] = window_pk;
  o.evidence["xnorm_growth_rate"] = window_len > 0.0 ? window_x / window_len : 0.0;
  o.evidence["final_time"] = traj.final_time;

  const bool ended_in_singularity =
      traj.terminated_by == Termination::blowup_event || traj.terminated_by == Termination::dt_underflow;
  const bool corroborated = K0 > 0.0 && Kf >= th.kinetic_growth * K0 && traj.virials.back().lambda_conc < lam0;
  if (ended_in_singularity && corroborated) {
    o.observed = Observed::blowup_detected;
    o.blowup_time = traj.final_time;
    o.blowup_time_uncertainty = traj.recent_step_span;
    return o;
  }
  const bool bounded = maxK <= th.kinetic_bound_factor * maxK_first_half;
  if (traj.terminated_by == Termination::t_end && n >= 8 && bounded && window_pk <= th.potential_ratio_cap)
    o.observed = Observed::global_proxy;
  return o;
}

inline RunOutcome reconcile(const Prediction& p, const Observation& o)
{
  RunOutcome r;
  r.predicted = p;
  r.observed = o.observed;
  r.blowup_time_estimate = o.blowup_time;
  r.blowup_time_uncertainty = o.blowup_time_uncertainty;
  r.evidence = o.evidence;
  r.agree = (p.verdict == Verdict::global_scattering && o.observed == Observed::global_proxy) ||
            (p.verdict == Verdict::finite_time_blowup && o.observed == Observed::blowup_detected);
  return r;
}

}  // namespace hartree
