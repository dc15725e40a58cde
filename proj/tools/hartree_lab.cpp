#include "hartree/experiments/runner.hpp"
#include "hartree/experiments/selftest.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>

using namespace hartree;
using namespace hartree::experiments;

namespace {

struct Options {
  std::string config;
  std::string out;
  std::string run_dir;
  bool force = false;
  bool quiet = false;
  int parallel = 0;
  double corrupt = 1.0;
};

RunConfig load(const Options& o)
{
  RunConfig c;
  if (!o.config.empty())
    c = load_run_config(o.config);
  else
    apply_environment(c);
  if (!o.out.empty())
    c.output_dir = o.out;
  return c;
}

void say(const Options& o, const std::string& s)
{
  if (!o.quiet)
    std::cout << s << "\n";
}

std::string num(double v)
{
  char b[64];
  std::snprintf(b, sizeof b, "%.10g", v);
  return b;
}

int cmd_groundstate(const Options& o)
{
  const auto c = load(o);
  auto grid = make_grid(c.dimension, c.gs_n_modes, c.gs_r_max);
  auto m = riesz_multiplier(grid);
  calibrate(m);
  if (!m.calibrated)
    std::cerr << "warning: Riesz multiplier failed calibration (relative error " << num(m.calibration_error)
              << "); recorded in the manifest\n";
  SolverOptions opt;
  opt.tol = c.gs_tolerance;
  try {
    const auto gs = solve_fixed_point(m, opt);
    const auto dir = write_ground_state(c, gs, m, true, "");
    say(o, "K_W        " + num(gs.kinetic_W));
    say(o, "E_W        " + num(gs.energy_W));
    say(o, "C_d^4      " + num(gs.sobolev_c4));
    say(o, "residual   " + num(gs.residual));
    say(o, "iterations " + std::to_string(gs.iterations));
    say(o, "written to " + dir.string());
    return kOk;
  } catch (const ConvergenceError& e) {
    const auto dir = write_ground_state(c, e.partial, m, false, e.what());
    std::cerr << e.what() << "\n";
    std::cerr << "last residual " << num(e.last_residual) << "; partial report in " << dir.string() << "\n";
    return kNonConvergence;
  }
}

std::shared_ptr<const GroundStateSetup> ground_state_for(const RunConfig& c, const Options& o)
{
  say(o, "solving ground state on N=" + std::to_string(c.gs_n_modes) + ", R=" + num(c.gs_r_max));
  return compute_ground_state(ground_state_key(c));
}

void print_run(const Options& o, const RunResult& r)
{
  say(o, std::string(r.reused ? "reused " : "wrote ") + r.dir.string());
  say(o, "E/E_W " + num(r.E_over_EW) + "  K/K_W " + num(r.K_over_KW));
  say(o, std::string("predicted ") + to_string(r.outcome.predicted.verdict) + ", observed " +
             to_string(r.outcome.observed) + ", agree " + (r.outcome.agree ? "true" : "false") + ", terminated by " +
             r.terminated_by);
  if (r.outcome.blowup_time_estimate)
    say(o, "blow-up time " + num(*r.outcome.blowup_time_estimate) + " +- " + num(r.outcome.blowup_time_uncertainty));
}

int cmd_evolve(const Options& o)
{
  const auto c = load(o);
  if (!o.force && fs::exists(run_directory(c) / "outcome.json")) {
    const auto r = load_run(run_directory(c));
    print_run(o, r);
    return r.exit_code;
  }
  const auto gs = ground_state_for(c, o);
  const auto r = run_single(c, gs->data, o.force);
  print_run(o, r);
  if (r.exit_code == kAborted)
    std::cerr << "run aborted: " << r.terminated_by << "\n";
  return r.exit_code;
}

int cmd_classify(const Options& o)
{
  const fs::path dir = o.run_dir;
  if (!fs::exists(dir / "manifest.json"))
    throw ConfigError(dir.string(), 0, "run", "not a run directory");
  RunConfig c = o.config.empty() ? run_config_from(parse_ini(read_text(dir / "config.ini"), (dir / "config.ini").string()))
                                 : load_run_config(o.config);
  const auto r = reclassify(dir, c.classifier);
  const auto hash = read_json(dir / "outcome.json").at("config_hash").get<std::string>();
  write_json(dir / "outcome_reclassified.json", outcome_json(r, hash));
  say(o, std::string("predicted ") + to_string(r.predicted.verdict) + ", observed " + to_string(r.observed) +
             ", agree " + (r.agree ? "true" : "false"));
  for (const auto& [k, v] : r.evidence)
    say(o, "  " + k + " = " + num(v));
  return kOk;
}

int cmd_sweep(const Options& o)
{
  if (o.config.empty())
    throw ConfigError("command line", 0, "--config", "sweep requires a config file");
  auto spec = sweep_spec_from(load_ini(o.config));
  if (!o.out.empty())
    spec.base.output_dir = o.out;
  const int par = o.parallel > 0 ? o.parallel : spec.parallelism;
  const auto res = run_sweep(spec, o.force, par, [&](const SweepRow& row) {
    if (row.result.error.empty())
      say(o, row.value1 + (row.value2.empty() ? "" : " " + row.value2) + ": " +
                 to_string(row.result.outcome.observed) + (row.result.outcome.agree ? " (agree)" : " (disagree)"));
    else
      say(o, row.value1 + (row.value2.empty() ? "" : " " + row.value2) + ": failed: " + row.result.error);
  });
  say(o, "sweep written to " + res.dir.string());
  return res.failures == 0 ? kOk : kAborted;
}

int cmd_selftest(const Options& o)
{
  SelftestOptions opt;
  opt.multiplier_scale = o.corrupt;
  const auto rep = run_selftest(opt);
  for (const auto& it : rep.items) {
    char line[256];
    std::snprintf(line, sizeof line, "%-26s %s  value %.3e  threshold %.1e  %.1f s", it.name.c_str(),
                  it.passed ? "PASS" : "FAIL", it.value, it.threshold, it.seconds);
    std::cout << line << (it.note.empty() ? "" : "  (" + it.note + ")") << "\n";
  }
  std::cout << "selftest " << (rep.passed() ? "passed" : "FAILED") << " in " << num(rep.seconds) << " s\n";
  return rep.passed() ? kOk : kSelftestFailed;
}

}  // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Radial focusing Hartree lab"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--config", o.config, "INI configuration file")->check(CLI::ExistingFile);
  app.add_option("--out", o.out, "Output directory (overrides run.output_dir)");
  app.add_flag("--force", o.force, "Recompute existing runs");
  app.add_option("--parallel", o.parallel, "Concurrent sweep runs")->check(CLI::Range(1, 256));
  app.add_flag("--quiet", o.quiet, "Suppress progress output");

  auto* gs = app.add_subcommand("groundstate", "Solve for the ground state and write its manifest");
  auto* ev = app.add_subcommand("evolve", "Evolve and classify one initial datum");
  auto* cl = app.add_subcommand("classify", "Re-classify an existing run directory");
  cl->add_option("run_dir", o.run_dir, "Run directory")->required();
  auto* sw = app.add_subcommand("sweep", "Run a parameter sweep");
  auto* st = app.add_subcommand("selftest", "Run the fast self-test");
  st->add_option("--corrupt-multiplier", o.corrupt)->group("");
  for (auto* s : {gs, ev, cl, sw, st})
    s->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  try {
    if (*gs)
      return cmd_groundstate(o);
    if (*ev)
      return cmd_evolve(o);
    if (*cl)
      return cmd_classify(o);
    if (*sw)
      return cmd_sweep(o);
    return cmd_selftest(o);
  } catch (const ConfigError& e) {
    std::cerr << e.what() << "\n";
    return kConfigError;
  } catch (const InvalidArgument& e) {
    std::cerr << "invalid configuration: " << e.what() << "\n";
    return kConfigError;
  } catch (const ConvergenceError& e) {
    std::cerr << e.what() << "\n";
    return kNonConvergence;
  } catch (const NumericalAbort& e) {
    std::cerr << "numerical abort: " << e.what() << "\n";
    return kNonConvergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
