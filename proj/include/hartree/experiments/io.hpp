#pragma once

#include "hartree/classifier.hpp"
#include "hartree/evolution.hpp"
#include "hartree/experiments/config.hpp"
#include "hartree/ground_state.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace hartree::experiments {

using json = nlohmann::ordered_json;

inline constexpr int kFormatVersion = 1;

inline std::string fmt(double v)
{
  return detail::format_double(v);
}

inline void write_text(const std::filesystem::path& p, const std::string& text)
{
  if (p.has_parent_path())
    std::filesystem::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary);
  if (!f)
    throw Error("cannot write " + p.string());
  f << text;
}

inline std::string read_text(const std::filesystem::path& p)
{
  std::ifstream f(p, std::ios::binary);
  if (!f)
    throw Error("cannot read " + p.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

inline void write_json(const std::filesystem::path& p, const json& j)
{
  write_text(p, j.dump(2) + "\n");
}

inline json read_json(const std::filesystem::path& p)
{
  return json::parse(read_text(p));
}

// json has no infinities or NaN; they are written as null
inline json number(double v)
{
  return std::isfinite(v) ? json(v) : json(nullptr);
}

inline const std::vector<std::string>& trajectory_columns()
{
  static const std::vector<std::string> c = {
      "t",        "dt",          "mass",       "kinetic",     "potential",     "energy",
      "variance", "y_R",         "yprime_R",   "virial_rate", "lambda_conc",   "xnorm_partial",
      "boundary_mass", "z_R",    "zprime_R",   "xnorm_increment"};
  return c;
}

inline std::string trajectory_csv(const TrajectoryRecord& rec)
{
  std::string out;
  for (std::size_t i = 0; i < trajectory_columns().size(); ++i)
    out += (i ? "," : "") + trajectory_columns()[i];
  out += "\n";
  double acc = 0.0;
  for (std::size_t i = 0; i < rec.size(); ++i) {
    const auto& b = rec.breakdowns[i];
    const auto& v = rec.virials[i];
    if (i > 0)
      acc += 0.5 * (rec.times[i] - rec.times[i - 1]) * (v.xnorm_increment + rec.virials[i - 1].xnorm_increment);
    const double row[] = {rec.times[i], rec.dt_history[i], b.mass,      b.kinetic,         b.potential,
                          b.energy,     v.variance,        v.y_R,       v.yprime_R,        v.virial_rate,
                          v.lambda_conc, std::pow(acc, 1.0 / 6.0), rec.boundary_mass[i], v.z_R, v.zprime_R,
                          v.xnorm_increment};
    for (std::size_t k = 0; k < std::size(row); ++k)
      out += (k ? "," : "") + fmt(row[k]);
    out += "\n";
  }
  return out;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  int column(const std::string& name) const
  {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name)
        return static_cast<int>(i);
    throw Error("csv: missing column '" + name + "'");
  }
};

inline CsvTable read_numeric_csv(const std::filesystem::path& p)
{
  std::istringstream in(read_text(p));
  CsvTable t;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (line.empty())
      continue;
    auto cells = detail::split_list(line);
    if (t.header.empty()) {
      t.header = cells;
      continue;
    }
    if (cells.size() != t.header.size())
      throw Error(p.string() + ":" + std::to_string(n) + ": expected " + std::to_string(t.header.size()) +
                  " fields, got " + std::to_string(cells.size()));
    std::vector<double> row;
    for (const auto& c : cells) {
      try {
        row.push_back(detail::parse_real(c));
      } catch (const std::invalid_argument& e) {
        throw Error(p.string() + ":" + std::to_string(n) + ": " + e.what());
      }
    }
    t.rows.push_back(std::move(row));
  }
  if (t.header.empty())
    throw Error(p.string() + ": empty csv");
  return t;
}

inline Termination termination_from_string(const std::string& s)
{
  for (auto t : {Termination::t_end, Termination::blowup_event, Termination::dt_underflow,
                 Termination::boundary_leak, Termination::numerical_abort})
    if (s == to_string(t))
      return t;
  throw Error("unknown termination '" + s + "'");
}

// Rebuilds the sampled part of a trajectory (no fields) from its CSV.
inline TrajectoryRecord read_trajectory(const std::filesystem::path& csv, Termination terminated_by,
                                        double recent_step_span)
{
  const auto t = read_numeric_csv(csv);
  TrajectoryRecord rec;
  const int ct = t.column("t"), cdt = t.column("dt"), cm = t.column("mass"), ck = t.column("kinetic"),
            cp = t.column("potential"), cv = t.column("variance"), cy = t.column("y_R"),
            cyp = t.column("yprime_R"), cvr = t.column("virial_rate"), cl = t.column("lambda_conc"),
            cb = t.column("boundary_mass"), cz = t.column("z_R"), czp = t.column("zprime_R"),
            cx = t.column("xnorm_increment");
  for (const auto& r : t.rows) {
    rec.times.push_back(r[ct]);
    rec.dt_history.push_back(r[cdt]);
    rec.breakdowns.push_back(EnergyBreakdown::from_parts(r[cm], r[ck], r[cp]));
    VirialSample v;
    v.t = r[ct];
    v.variance = r[cv];
    v.y_R = r[cy];
    v.yprime_R = r[cyp];
    v.virial_rate = r[cvr];
    v.lambda_conc = r[cl];
    v.z_R = r[cz];
    v.zprime_R = r[czp];
    v.xnorm_increment = r[cx];
    rec.virials.push_back(v);
    rec.boundary_mass.push_back(r[cb]);
  }
  rec.terminated_by = terminated_by;
  rec.final_time = rec.times.empty() ? 0.0 : rec.times.back();
  rec.recent_step_span = recent_step_span;
  return rec;
}

inline std::string field_csv(const PhysicalField& u)
{
  std::string out = "r,re_u,im_u\n";
  const auto& r = u.grid()->r_nodes();
  for (int k = 0; k < u.size(); ++k)
    out += fmt(r[k]) + "," + fmt(u[k].real()) + "," + fmt(u[k].imag()) + "\n";
  return out;
}

// Reads (r, re_u[, im_u]) samples and evaluates them on `grid` by local
// interpolation; the profile is taken to vanish beyond its last radius.
inline PhysicalField read_profile(const std::filesystem::path& p, const GridPtr& grid)
{
  const auto t = read_numeric_csv(p);
  const int cr = t.column("r"), cre = t.column("re_u");
  int cim = -1;
  for (std::size_t i = 0; i < t.header.size(); ++i)
    if (t.header[i] == "im_u")
      cim = static_cast<int>(i);
  std::vector<double> r, re, im;
  for (const auto& row : t.rows) {
    if (!r.empty() && !(row[cr] > r.back()))
      throw Error(p.string() + ": radii must be strictly increasing");
    r.push_back(row[cr]);
    re.push_back(row[cre]);
    im.push_back(cim >= 0 ? row[cim] : 0.0);
  }
  if (r.size() < 2 || !(r.front() > 0.0))
    throw Error(p.string() + ": need at least two samples at positive radii");
  const double support = r.back() * (1.0 + 1e-12);
  const LocalInterpolant fr(r, re, support), fi(r, im, support);
  Eigen::VectorXcd v(grid->size());
  for (int k = 0; k < grid->size(); ++k) {
    const double x = grid->r_nodes()[k];
    v[k] = x <= r.back() ? cplx(fr(x), fi(x)) : cplx(0.0);
  }
  return PhysicalField(grid, std::move(v));
}

inline json grid_json(const RadialGrid& g)
{
  return json{{"dimension", g.dimension()},
              {"order", 0.5 * g.dimension() - 1.0},
              {"n_modes", g.size()},
              {"r_max", g.r_max()},
              {"spacing", g.spacing()},
              {"checksum", hash_hex(g.checksum())}};
}

inline json multiplier_json(const RieszMultiplier& m)
{
  return json{{"dimension", m.grid->dimension()},
              {"c_d", m.constant},
              {"c_d_calibrated", m.calibrated},
              {"calibration_error", number(m.calibration_error)}};
}

inline json ground_state_json(const GroundStateData& gs)
{
  const auto& g = *gs.profile.grid();
  return json{{"dimension", g.dimension()},
              {"n_modes", g.size()},
              {"r_max", g.r_max()},
              {"method", to_string(gs.method)},
              {"grid", grid_json(g)},
              {"K_W", gs.kinetic_W},
              {"P_W", gs.potential_W},
              {"E_W", gs.energy_W},
              {"C_d4", gs.sobolev_c4},
              {"residual", gs.residual},
              {"half_kinetic_radius", gs.half_kinetic_radius},
              {"iterations", gs.iterations}};
}

inline json prediction_json(const Prediction& p)
{
  return json{{"applicable", p.applicable},
              {"verdict", to_string(p.verdict)},
              {"margin_E", p.margin_E},
              {"margin_K", p.margin_K},
              {"energy", p.energy},
              {"kinetic", p.kinetic}};
}

inline json outcome_json(const RunOutcome& o, const std::string& config_hash)
{
  json ev = json::object();
  for (const auto& [k, v] : o.evidence)
    ev[k] = number(v);
  return json{{"version", kFormatVersion},
              {"predicted", prediction_json(o.predicted)},
              {"observed", to_string(o.observed)},
              {"agree", o.agree},
              {"margins", json{{"E", o.predicted.margin_E}, {"K", o.predicted.margin_K}}},
              {"evidence", ev},
              {"blowup_time_estimate", o.blowup_time_estimate ? json(*o.blowup_time_estimate) : json(nullptr)},
              {"blowup_time_uncertainty", o.blowup_time_estimate ? json(o.blowup_time_uncertainty) : json(nullptr)},
              {"config_hash", config_hash}};
}

inline Prediction prediction_from_json(const json& j)
{
  Prediction p;
  p.applicable = j.at("applicable").get<bool>();
  const auto v = j.at("verdict").get<std::string>();
  p.verdict = v == "global_scattering"    ? Verdict::global_scattering
              : v == "finite_time_blowup" ? Verdict::finite_time_blowup
                                          : Verdict::outside_theorem;
  p.margin_E = j.at("margin_E").get<double>();
  p.margin_K = j.at("margin_K").get<double>();
  p.energy = j.at("energy").get<double>();
  p.kinetic = j.at("kinetic").get<double>();
  return p;
}

}  // namespace hartree::experiments
