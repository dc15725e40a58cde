#pragma once

#include "hartree/evolution.hpp"
#include "hartree/functionals.hpp"
#include "hartree/ground_state.hpp"
#include "hartree/hartree_operator.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

namespace hartree::experiments {

struct SelftestItem {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double threshold = 0.0;
  double seconds = 0.0;
  std::string note;
};

struct SelftestReport {
  std::vector<SelftestItem> items;
  double seconds = 0.0;
  bool passed() const
  {
    for (const auto& i : items)
      if (!i.passed)
        return false;
    return !items.empty();
  }
};

struct SelftestOptions {
  double multiplier_scale = 1.0;  // != 1 corrupts the Riesz constant
};

namespace detail {

inline SelftestItem check_transform()
{
  SelftestItem it{"transform_unitarity", false, 0.0, 1e-10, 0.0, {}};
  auto g = make_grid(5, 512, 20.0);
  const auto u = PhysicalField::from_function(g, [](double r) { return std::exp(-r * r) * (1.0 + 0.3 * r * r); });
  const auto uh = transform_forward(u);
  const auto back = transform_inverse(uh);
  const double roundtrip = (back.values() - u.values()).norm() / u.values().norm();
  const double plancherel = std::abs(l2_norm_squared(uh) / l2_norm_squared(u) - 1.0);
  it.value = std::max(roundtrip, plancherel);
  it.passed = it.value <= it.threshold;
  return it;
}

inline SelftestItem check_oracle(double multiplier_scale)
{
  SelftestItem it{"oracle_spot_check", false, 0.0, 1e-6, 0.0, {}};
  // truncation error grows like (r/R)^4; sample radii stay below R/40
  auto g = make_grid(5, 256, 80.0);
  auto m = riesz_multiplier(g, riesz_constant(5) * multiplier_scale);
  auto profile = [](double r) { return std::exp(-0.5 * r * r); };
  const auto u = PhysicalField::from_function(g, profile);
  const Eigen::VectorXd V = potential_values(u, m);
  std::vector<double> radii;
  std::vector<int> idx;
  for (int k = 0; k < g->size() && g->r_nodes()[k] <= 2.0; ++k) {
    radii.push_back(g->r_nodes()[k]);
    idx.push_back(k);
  }
  const auto o = oracle_potential([&](double r) { return profile(r) * profile(r); }, 12.0, 5, radii, 1e-10);
  for (std::size_t i = 0; i < radii.size(); ++i)
    it.value = std::max(it.value, std::abs(V[idx[i]] / o.values[i] - 1.0));
  it.passed = o.converged && it.value <= it.threshold;
  return it;
}

inline SelftestItem check_ground_state()
{
  SelftestItem it{"ground_state_identities", false, 0.0, 1e-4, 0.0, {}};
  auto g = make_grid(5, 512, 20.0);
  const auto m = riesz_multiplier(g);
  SolverOptions opt;
  opt.tol = 1e-4;
  try {
    const auto gs = solve_fixed_point(m, opt);
    it.value = std::max({std::abs(gs.kinetic_W * gs.sobolev_c4 - 1.0),
                         std::abs(gs.energy_W - 0.25 * gs.kinetic_W) / gs.kinetic_W,
                         std::abs(gs.potential_W - gs.kinetic_W) / gs.kinetic_W, gs.residual});
    it.passed = it.value <= it.threshold;
  } catch (const std::exception& e) {
    it.value = std::numeric_limits<double>::infinity();
    it.note = e.what();
  }
  return it;
}

inline SelftestItem check_conservation()
{
  SelftestItem it{"short_conservation_run", false, 0.0, 1e-8, 0.0, {}};
  auto g = make_grid(5, 256, 30.0);
  const auto m = riesz_multiplier(g);
  const auto u0 = PhysicalField::from_function(g, [](double r) { return 0.5 * std::exp(-0.5 * r * r); });
  EvolutionConfig cfg;
  cfg.dt0 = 1e-3;
  cfg.t_end = 0.1;
  const auto rec = evolve(u0, m, cfg);
  const auto& B = rec.breakdowns;
  const double dm = std::abs(B.back().mass / B.front().mass - 1.0);
  const double de = std::abs(B.back().energy - B.front().energy) / std::max(std::abs(B.front().energy), B.front().kinetic);
  it.value = std::max(dm, 1e-2 * de);
  it.passed = rec.terminated_by == Termination::t_end && dm <= 1e-8 && de <= 1e-6;
  char note[96];
  std::snprintf(note, sizeof note, "mass drift %.2e, energy drift %.2e", dm, de);
  it.note = note;
  return it;
}

}  // namespace detail

inline SelftestReport run_selftest(const SelftestOptions& opt = {})
{
  using clock = std::chrono::steady_clock;
  SelftestReport rep;
  const auto t0 = clock::now();
  auto timed = [&](auto&& f) {
    const auto s = clock::now();
    auto it = f();
    it.seconds = std::chrono::duration<double>(clock::now() - s).count();
    rep.items.push_back(it);
  };
  timed([] { return detail::check_transform(); });
  timed([&] { return detail::check_oracle(opt.multiplier_scale); });
  timed([] { return detail::check_ground_state(); });
  timed([] { return detail::check_conservation(); });
  rep.seconds = std::chrono::duration<double>(clock::now() - t0).count();
  return rep;
}

}  // namespace hartree::experiments
