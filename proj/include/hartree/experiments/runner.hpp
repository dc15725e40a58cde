#pragma once

#include "hartree/classifier.hpp"
#include "hartree/evolution.hpp"
#include "hartree/experiments/config.hpp"
#include "hartree/experiments/io.hpp"
#include "hartree/experiments/svg.hpp"
#include "hartree/ground_state.hpp"

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

namespace hartree::experiments {

namespace fs = std::filesystem;

enum ExitCode { kOk = 0, kConfigError = 2, kNonConvergence = 3, kAborted = 4, kSelftestFailed = 5 };

struct GroundStateSetup {
  RieszMultiplier multiplier;
  GroundStateData data;
};

using GroundStateKey = std::tuple<int, int, double, double>;

inline GroundStateKey ground_state_key(const RunConfig& c)
{
  return {c.dimension, c.gs_n_modes, c.gs_r_max, c.gs_tolerance};
}

// The analytic constant is only used once the oracle has confirmed it.
inline RieszMultiplier calibrated_multiplier(const GridPtr& grid)
{
  auto m = riesz_multiplier(grid);
  calibrate(m);
  if (!m.calibrated)
    throw NumericalAbort("Riesz multiplier failed calibration on N=" + std::to_string(grid->size()) +
                         ", R=" + detail::format_double(grid->r_max()) + " (relative error " +
                         detail::format_double(m.calibration_error) + ")");
  return m;
}

inline std::shared_ptr<const GroundStateSetup> compute_ground_state(const GroundStateKey& key)
{
  const auto [d, n, R, tol] = key;
  auto grid = make_grid(d, n, R);
  auto setup = std::make_shared<GroundStateSetup>();
  setup->multiplier = calibrated_multiplier(grid);
  SolverOptions opt;
  opt.tol = tol;
  setup->data = solve_fixed_point(setup->multiplier, opt);
  return setup;
}

// Solved ground states keyed by their grid; thread-safe.
class GroundStateCache {
 public:
  std::shared_ptr<const GroundStateSetup> get(const RunConfig& c)
  {
    const auto key = ground_state_key(c);
    std::lock_guard lock(mutex_);
    auto it = cache_.find(key);
    if (it != cache_.end())
      return it->second;
    auto s = compute_ground_state(key);
    cache_[key] = s;
    return s;
  }

 private:
  std::mutex mutex_;
  std::map<GroundStateKey, std::shared_ptr<const GroundStateSetup>> cache_;
};

inline PhysicalField make_initial(const RunConfig& c, const GroundStateData& gs, const GridPtr& grid)
{
  const double w = c.width, a = c.amplitude, chirp = c.chirp;
  switch (c.family) {
    case InitFamily::scaled_ground_state:
      return sample_ground_state(gs, grid, a, c.radius);
    case InitFamily::gaussian:
      return PhysicalField::from_function(grid, [=](double r) { return a * std::exp(-0.5 * r * r / (w * w)); });
    case InitFamily::chirped_gaussian: {
      Eigen::VectorXcd v(grid->size());
      for (int k = 0; k < grid->size(); ++k) {
        const double r = grid->r_nodes()[k];
        v[k] = a * std::exp(-0.5 * r * r / (w * w)) * std::polar(1.0, chirp * r * r);
      }
      return PhysicalField(grid, std::move(v));
    }
    case InitFamily::from_csv:
      return a * read_profile(c.path, grid);
  }
  throw InvalidArgument("unknown initial-data family");
}

inline json config_json(const RunConfig& c)
{
  json j = json::object();
  for (const auto& e : detail::schema()) {
    if (std::string(e.key) == "run.output_dir")
      continue;
    j[e.key] = detail::read(c, e);
  }
  return j;
}

struct RunResult {
  fs::path dir;
  std::string hash;
  RunOutcome outcome;
  std::string terminated_by;
  double E_over_EW = 0.0;
  double K_over_KW = 0.0;
  bool reused = false;
  int exit_code = kOk;
  std::string error;
};

inline fs::path run_directory(const RunConfig& c)
{
  return fs::path(c.output_dir) / ("run_" + hash_hex(config_hash(c)));
}

// Reads a finished run back from disk.
inline RunResult load_run(const fs::path& dir)
{
  RunResult r;
  r.dir = dir;
  const auto o = read_json(dir / "outcome.json");
  const auto m = read_json(dir / "manifest.json");
  r.hash = o.at("config_hash").get<std::string>();
  r.outcome.predicted = prediction_from_json(o.at("predicted"));
  const auto obs = o.at("observed").get<std::string>();
  r.outcome.observed = obs == "global_proxy"      ? Observed::global_proxy
                       : obs == "blowup_detected" ? Observed::blowup_detected
                                                  : Observed::undecided;
  r.outcome.agree = o.at("agree").get<bool>();
  if (!o.at("blowup_time_estimate").is_null())
    r.outcome.blowup_time_estimate = o.at("blowup_time_estimate").get<double>();
  for (const auto& [k, v] : o.at("evidence").items())
    r.outcome.evidence[k] = v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
  r.terminated_by = m.at("termination").at("terminated_by").get<std::string>();
  r.E_over_EW = m.at("initial").at("E_over_EW").get<double>();
  r.K_over_KW = m.at("initial").at("K_over_KW").get<double>();
  r.exit_code = r.terminated_by == "numerical_abort" ? kAborted : kOk;
  r.reused = true;
  return r;
}

inline RunResult run_single(const RunConfig& c, const GroundStateData& gs, bool force)
{
  RunResult res;
  res.hash = hash_hex(config_hash(c));
  res.dir = run_directory(c);
  if (!force && fs::exists(res.dir / "outcome.json") && fs::exists(res.dir / "manifest.json"))
    return load_run(res.dir);

  auto grid = make_grid(c.dimension, c.n_modes, c.r_max);
  const auto m = calibrated_multiplier(grid);
  const auto u0 = make_initial(c, gs, grid);
  const auto b0 = energy_breakdown(project(u0), m);
  const auto prediction = predict(b0.energy, b0.kinetic, gs.thresholds());
  res.E_over_EW = b0.energy / gs.energy_W;
  res.K_over_KW = b0.kinetic / gs.kinetic_W;

  EvolutionHooks hooks;
  hooks.on_sample = blowup_hook(c.classifier, grid->spacing());
  const auto cfg = c.evolution();
  const auto rec = evolve(u0, m, cfg, hooks);
  const auto obs = observe(rec, c.classifier);
  res.outcome = reconcile(prediction, obs);
  res.terminated_by = to_string(rec.terminated_by);
  if (rec.terminated_by == Termination::numerical_abort)
    res.exit_code = kAborted;

  fs::remove_all(res.dir);
  fs::create_directories(res.dir / "checkpoints");
  write_text(res.dir / "config.ini", canonical_text(c));
  write_text(res.dir / "trajectory.csv", trajectory_csv(rec));
  json cps = json::array();
  for (std::size_t i = 0; i < rec.checkpoints.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "checkpoint_%03zu.csv", i);
    write_text(res.dir / "checkpoints" / name, field_csv(rec.checkpoints[i].u));
    cps.push_back(json{{"file", std::string("checkpoints/") + name}, {"t", rec.checkpoints[i].t}});
  }

  const auto& B = rec.breakdowns;
  const double mass_drift = std::abs(B.back().mass - B.front().mass) / B.front().mass;
  const double energy_drift = std::abs(B.back().energy - B.front().energy) /
                              std::max(std::abs(B.front().energy), B.front().kinetic);
  json manifest{
      {"version", kFormatVersion},
      {"config_hash", res.hash},
      {"config", config_json(c)},
      {"grid", grid_json(*grid)},
      {"multiplier", multiplier_json(m)},
      {"ground_state", ground_state_json(gs)},
      {"evolution",
       json{{"absorber", c.sponge ? json{{"kind", "sponge"}, {"width", c.sponge_width}, {"strength", c.sponge_strength}}
                                  : json{{"kind", "none"}}},
            {"conservation_invariants_broken_by_absorber", c.sponge}}},
      {"initial",
       json{{"mass", b0.mass},
            {"kinetic", b0.kinetic},
            {"potential", b0.potential},
            {"energy", b0.energy},
            {"E_over_EW", res.E_over_EW},
            {"K_over_KW", res.K_over_KW},
            {"finite_variance", true}}},
      {"termination",
       json{{"terminated_by", res.terminated_by},
            {"final_time", rec.final_time},
            {"steps", rec.steps},
            {"recent_step_span", rec.recent_step_span},
            {"abort_reason", rec.abort_reason}}},
      {"conservation",
       json{{"mass_drift", number(mass_drift)},
            {"energy_drift", number(energy_drift)},
            {"within_tolerance", !c.sponge && rec.terminated_by == Termination::t_end
                                     ? json(energy_drift <= c.conservation_tol)
                                     : json(nullptr)}}},
      {"xnorm", number(rec.xnorm())},
      {"checkpoints", cps},
      {"files", json{{"trajectory", "trajectory.csv"}, {"outcome", "outcome.json"}, {"config", "config.ini"}}}};
  write_json(res.dir / "manifest.json", manifest);
  write_json(res.dir / "outcome.json", outcome_json(res.outcome, res.hash));
  return res;
}

// Re-runs observe/reconcile on a stored trajectory.
inline RunOutcome reclassify(const fs::path& dir, const ClassifierThresholds& th)
{
  const auto m = read_json(dir / "manifest.json");
  const auto o = read_json(dir / "outcome.json");
  const auto& term = m.at("termination");
  const auto rec = read_trajectory(dir / "trajectory.csv",
                                   termination_from_string(term.at("terminated_by").get<std::string>()),
                                   term.at("recent_step_span").get<double>());
  return reconcile(prediction_from_json(o.at("predicted")), observe(rec, th));
}

struct SweepRow {
  std::string value1, value2;
  RunResult result;
};

struct SweepResult {
  fs::path dir;
  std::vector<SweepRow> rows;
  int failures = 0;
};

inline std::string sweep_csv(const SweepSpec& spec, const std::vector<SweepRow>& rows)
{
  std::string out = "param1,param2,E_over_EW,K_over_KW,predicted,observed,agree,blowup_time,run,error\n";
  for (const auto& r : rows) {
    const auto& o = r.result.outcome;
    const bool failed = !r.result.error.empty();
    auto quote = [](std::string s) {
      for (auto& ch : s)
        if (ch == '"')
          ch = '\'';
      return "\"" + s + "\"";
    };
    out += r.value1 + "," + (spec.axis2 ? r.value2 : std::string()) + ",";
    out += failed ? std::string(",,,,,") : fmt(r.result.E_over_EW) + "," + fmt(r.result.K_over_KW) + "," +
                                               to_string(o.predicted.verdict) + "," + to_string(o.observed) + "," +
                                               (o.agree ? "true" : "false") + ",";
    if (!failed && o.blowup_time_estimate)
      out += fmt(*o.blowup_time_estimate);
    out += ",run_" + r.result.hash + "," + (failed ? quote(r.result.error) : std::string()) + "\n";
  }
  return out;
}

inline std::string sweep_svg(const std::vector<SweepRow>& rows)
{
  ScatterPlot p;
  p.title = "Sweep outcomes in the (K/K_W, E/E_W) plane";
  p.x_label = "K(u0) / K(W)";
  p.y_label = "E(u0) / E(W)";
  p.vertical_lines = {1.0};
  p.horizontal_lines = {1.0};
  const char* green = "#1b9e77";
  const char* red = "#d95f02";
  const char* gray = "#7f7f7f";
  p.legend = {{green, "global_proxy"}, {red, "blowup_detected"}, {gray, "undecided"}};
  for (const auto& r : rows) {
    if (!r.result.error.empty())
      continue;
    const auto& o = r.result.outcome;
    ScatterPoint s;
    s.x = r.result.K_over_KW;
    s.y = r.result.E_over_EW;
    s.color = o.observed == Observed::global_proxy ? green : o.observed == Observed::blowup_detected ? red : gray;
    s.hollow = !o.agree;
    s.label = r.value1 + (r.value2.empty() ? "" : ", " + r.value2) + ": " + to_string(o.observed);
    p.points.push_back(s);
  }
  return render_svg(p);
}

inline SweepResult run_sweep(const SweepSpec& spec, bool force, int parallelism,
                             const std::function<void(const SweepRow&)>& progress = {})
{
  std::vector<SweepRow> rows;
  const std::vector<std::string> second = spec.axis2 ? spec.axis2->values : std::vector<std::string>{""};
  for (const auto& v1 : spec.axis1.values)
    for (const auto& v2 : second)
      rows.push_back({v1, v2, {}});
  std::vector<RunConfig> configs;
  for (const auto& r : rows) {
    RunConfig c = spec.base;
    set_parameter(c, spec.axis1.param, r.value1);
    if (spec.axis2)
      set_parameter(c, spec.axis2->param, r.value2);
    configs.push_back(c);
  }

  GroundStateCache cache;
  std::mutex report;
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < rows.size(); i = next++) {
      auto& row = rows[i];
      row.result.hash = hash_hex(config_hash(configs[i]));
      try {
        validate(configs[i]);
        const auto gs = cache.get(configs[i]);
        row.result = run_single(configs[i], gs->data, force);
      } catch (const std::exception& e) {
        row.result.error = e.what();
        row.result.exit_code = kAborted;
      }
      if (progress) {
        std::lock_guard lock(report);
        progress(row);
      }
    }
  };
  const int n = std::max(1, std::min<int>(parallelism, static_cast<int>(rows.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t)
    pool.emplace_back(worker);
  worker();
  for (auto& t : pool)
    t.join();

  SweepResult out;
  std::string key = canonical_text(spec.base) + spec.axis1.param;
  for (const auto& v : spec.axis1.values)
    key += "|" + v;
  if (spec.axis2) {
    key += "#" + spec.axis2->param;
    for (const auto& v : spec.axis2->values)
      key += "|" + v;
  }
  out.dir = fs::path(spec.base.output_dir) / ("sweep_" + hash_hex(hartree::detail::fnv1a(key.data(), key.size())));
  fs::create_directories(out.dir);
  write_text(out.dir / "sweep.csv", sweep_csv(spec, rows));
  write_text(out.dir / "phase.svg", sweep_svg(rows));
  json index{{"version", kFormatVersion},
             {"axis1", json{{"param", spec.axis1.param}, {"values", spec.axis1.values}}},
             {"axis2", spec.axis2 ? json{{"param", spec.axis2->param}, {"values", spec.axis2->values}} : json(nullptr)},
             {"points", rows.size()},
             {"runs", json::array()}};
  for (const auto& r : rows) {
    index["runs"].push_back(json{{"param1", r.value1},
                                 {"param2", spec.axis2 ? json(r.value2) : json(nullptr)},
                                 {"run", "run_" + r.result.hash},
                                 {"error", r.result.error.empty() ? json(nullptr) : json(r.result.error)}});
    if (!r.result.error.empty())
      ++out.failures;
  }
  write_json(out.dir / "index.json", index);
  out.rows = std::move(rows);
  return out;
}

// Writes the ground-state manifest and profile for `groundstate`.
inline fs::path write_ground_state(const RunConfig& c, const GroundStateData& gs, const RieszMultiplier& m,
                                   bool converged, const std::string& message)
{
  const std::string key = std::to_string(c.dimension) + "/" + std::to_string(c.gs_n_modes) + "/" +
                          detail::format_double(c.gs_r_max) + "/" + detail::format_double(c.gs_tolerance);
  const auto dir = fs::path(c.output_dir) / ("groundstate_" + hash_hex(hartree::detail::fnv1a(key.data(), key.size())));
  fs::create_directories(dir);
  write_text(dir / "profile.csv", field_csv(gs.profile));
  auto j = ground_state_json(gs);
  json out{{"version", kFormatVersion},
         {"converged", converged},
         {"message", message},
         {"tolerance", c.gs_tolerance},
         {"ground_state", j},
         {"multiplier", multiplier_json(m)},
         {"checks",
          json{{"pohozaev_P_minus_K_rel", (gs.potential_W - gs.kinetic_W) / gs.kinetic_W},
               {"K_times_C4_minus_1", gs.kinetic_W * gs.sobolev_c4 - 1.0},
               {"E_minus_K_over_4", gs.energy_W - 0.25 * gs.kinetic_W}}},
         {"files", json{{"profile", "profile.csv"}}}};
  write_json(dir / "manifest.json", out);
  return dir;
}

}  // namespace hartree::experiments
