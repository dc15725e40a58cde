#pragma once

#include "hartree/classifier.hpp"
#include "hartree/errors.hpp"
#include "hartree/evolution.hpp"

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

namespace hartree::experiments {

class ConfigError : public Error {
 public:
  ConfigError(const std::string& source, int line, const std::string& key, const std::string& message)
      : Error(format(source, line, key, message)), line(line), key(key)
  {
  }
  int line;
  std::string key;

 private:
  static std::string format(const std::string& source, int line, const std::string& key, const std::string& msg)
  {
    std::string s = source;
    if (line > 0)
      s += ":" + std::to_string(line);
    if (!key.empty())
      s += ": " + key;
    return s + ": " + msg;
  }
};

struct IniEntry {
  std::string key;  // section.key
  std::string value;
  int line = 0;
};

struct IniDocument {
  std::string source;
  std::vector<IniEntry> entries;

  const IniEntry* find(const std::string& key) const
  {
    for (const auto& e : entries)
      if (e.key == key)
        return &e;
    return nullptr;
  }
};

namespace detail {

inline std::string trim(const std::string& s)
{
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos)
    return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::string format_double(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::vector<std::string> split_list(const std::string& s)
{
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    out.push_back(trim(item));
  return out;
}

}  // namespace detail

inline IniDocument parse_ini(const std::string& text, const std::string& source)
{
  IniDocument doc;
  doc.source = source;
  std::istringstream in(text);
  std::string raw, section;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string s = raw;
    if (const auto c = s.find_first_of("#;"); c != std::string::npos)
      s.erase(c);
    s = detail::trim(s);
    if (s.empty())
      continue;
    if (s.front() == '[') {
      if (s.back() != ']' || s.size() < 3)
        throw ConfigError(source, line, "", "malformed section header '" + s + "'");
      section = detail::trim(s.substr(1, s.size() - 2));
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw ConfigError(source, line, "", "expected 'key = value', got '" + s + "'");
    const std::string key = detail::trim(s.substr(0, eq));
    if (key.empty())
      throw ConfigError(source, line, "", "empty key");
    if (section.empty())
      throw ConfigError(source, line, key, "key outside of any section");
    const std::string full = section + "." + key;
    if (const auto* prev = doc.find(full))
      throw ConfigError(source, line, full, "duplicate key (first set on line " + std::to_string(prev->line) + ")");
    doc.entries.push_back({full, detail::trim(s.substr(eq + 1)), line});
  }
  return doc;
}

inline IniDocument load_ini(const std::filesystem::path& path)
{
  std::ifstream f(path);
  if (!f)
    throw ConfigError(path.string(), 0, "", "cannot open file");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_ini(ss.str(), path.string());
}

enum class InitFamily { scaled_ground_state, gaussian, chirped_gaussian, from_csv };

inline const char* to_string(InitFamily f)
{
  switch (f) {
    case InitFamily::scaled_ground_state: return "scaled_ground_state";
    case InitFamily::gaussian: return "gaussian";
    case InitFamily::chirped_gaussian: return "chirped_gaussian";
    case InitFamily::from_csv: return "from_csv";
  }
  return "unknown";
}

struct RunConfig {
  int dimension = 5;
  int n_modes = 1024;
  double r_max = 50.0;

  int gs_n_modes = 2048;
  double gs_r_max = 40.0;
  double gs_tolerance = 1e-6;

  double dt0 = 5e-3;
  double dt_min = 1e-10;
  double t_end = 20.0;
  double theta_cfl = 0.1;
  int snapshot_stride = 10;
  bool sponge = false;
  double sponge_width = 0.2;
  double sponge_strength = 5.0;
  double conservation_tol = 1e-6;

  InitFamily family = InitFamily::scaled_ground_state;
  double amplitude = 0.8;
  double width = 1.0;
  double chirp = 0.0;
  double radius = 1.0;  // half-kinetic radius of transplanted W
  std::string path;

  ClassifierThresholds classifier;

  std::string output_dir = "runs";
  std::uint64_t seed = 1;

  EvolutionConfig evolution() const
  {
    EvolutionConfig e;
    e.dt0 = dt0;
    e.dt_min = dt_min;
    e.t_end = t_end;
    e.theta_cfl = theta_cfl;
    e.snapshot_stride = snapshot_stride;
    if (sponge)
      e.absorber = Sponge{sponge_width, sponge_strength};
    e.conservation_tol = conservation_tol;
    return e;
  }
};

namespace detail {

inline double parse_real(const std::string& v)
{
  double x = 0.0;
  const char* b = v.data();
  const char* e = v.data() + v.size();
  auto [p, ec] = std::from_chars(b, e, x);
  if (ec != std::errc() || p != e || !std::isfinite(x))
    throw std::invalid_argument("expected a real number, got '" + v + "'");
  return x;
}

inline long long parse_integer(const std::string& v)
{
  long long x = 0;
  const char* b = v.data();
  const char* e = v.data() + v.size();
  auto [p, ec] = std::from_chars(b, e, x);
  if (ec != std::errc() || p != e)
    throw std::invalid_argument("expected an integer, got '" + v + "'");
  return x;
}

struct RealKey {
  double RunConfig::*member;
  double lo, hi;
  bool open_lo, open_hi;
};
struct IntKey {
  int RunConfig::*member;
  long long lo, hi;
};
struct ThresholdKey {
  double ClassifierThresholds::*member;
  double lo, hi;
  bool open_lo;
};
struct SpecialKey {
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

struct SchemaEntry {
  const char* key;
  std::variant<RealKey, IntKey, ThresholdKey, SpecialKey> kind;
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// All keys in canonical order. Ranges are checked when a value is set.
inline const std::vector<SchemaEntry>& schema()
{
  static const std::vector<SchemaEntry> s = {
      {"grid.dimension", IntKey{&RunConfig::dimension, 5, 12}},
      {"grid.n_modes", IntKey{&RunConfig::n_modes, 16, 16384}},
      {"grid.r_max", RealKey{&RunConfig::r_max, 0, kInf, true, true}},
      {"ground_state.n_modes", IntKey{&RunConfig::gs_n_modes, 16, 16384}},
      {"ground_state.r_max", RealKey{&RunConfig::gs_r_max, 0, kInf, true, true}},
      {"ground_state.tolerance", RealKey{&RunConfig::gs_tolerance, 0, 1, true, true}},
      {"evolution.dt0", RealKey{&RunConfig::dt0, 0, kInf, true, true}},
      {"evolution.dt_min", RealKey{&RunConfig::dt_min, 0, kInf, true, true}},
      {"evolution.t_end", RealKey{&RunConfig::t_end, 0, kInf, true, true}},
      {"evolution.theta_cfl", RealKey{&RunConfig::theta_cfl, 0, 1, true, true}},
      {"evolution.snapshot_stride", IntKey{&RunConfig::snapshot_stride, 1, 1000000}},
      {"evolution.absorber",
       SpecialKey{[](RunConfig& c, const std::string& v) {
                    if (v != "none" && v != "sponge")
                      throw std::invalid_argument("expected 'none' or 'sponge', got '" + v + "'");
                    c.sponge = v == "sponge";
                  },
                  [](const RunConfig& c) { return std::string(c.sponge ? "sponge" : "none"); }}},
      {"evolution.sponge_width", RealKey{&RunConfig::sponge_width, 0, 1, true, true}},
      {"evolution.sponge_strength", RealKey{&RunConfig::sponge_strength, 0, kInf, false, true}},
      {"evolution.conservation_tol", RealKey{&RunConfig::conservation_tol, 0, kInf, true, true}},
      {"init.family",
       SpecialKey{[](RunConfig& c, const std::string& v) {
                    for (auto f : {InitFamily::scaled_ground_state, InitFamily::gaussian,
                                   InitFamily::chirped_gaussian, InitFamily::from_csv})
                      if (v == to_string(f)) {
                        c.family = f;
                        return;
                      }
                    throw std::invalid_argument(
                        "unknown family '" + v +
                        "' (scaled_ground_state, gaussian, chirped_gaussian, from_csv)");
                  },
                  [](const RunConfig& c) { return std::string(to_string(c.family)); }}},
      {"init.amplitude", RealKey{&RunConfig::amplitude, 0, kInf, false, true}},
      {"init.width", RealKey{&RunConfig::width, 0, kInf, true, true}},
      {"init.chirp", RealKey{&RunConfig::chirp, -kInf, kInf, true, true}},
      {"init.radius", RealKey{&RunConfig::radius, 0, kInf, true, true}},
      {"init.path", SpecialKey{[](RunConfig& c, const std::string& v) { c.path = v; },
                               [](const RunConfig& c) { return c.path; }}},
      {"classifier.kinetic_growth", ThresholdKey{&ClassifierThresholds::kinetic_growth, 1, kInf, true}},
      {"classifier.trailing_fraction", ThresholdKey{&ClassifierThresholds::trailing_fraction, 0, 1, true}},
      {"classifier.potential_ratio_cap", ThresholdKey{&ClassifierThresholds::potential_ratio_cap, 0, kInf, true}},
      {"classifier.scale_floor_spacings", ThresholdKey{&ClassifierThresholds::scale_floor_spacings, 0, kInf, true}},
      {"classifier.kinetic_bound_factor", ThresholdKey{&ClassifierThresholds::kinetic_bound_factor, 1, kInf, false}},
      {"run.output_dir", SpecialKey{[](RunConfig& c, const std::string& v) { c.output_dir = v; },
                                    [](const RunConfig& c) { return c.output_dir; }}},
      {"run.seed", SpecialKey{[](RunConfig& c, const std::string& v) {
                                const long long x = parse_integer(v);
                                if (x < 0)
                                  throw std::invalid_argument("seed must be non-negative");
                                c.seed = static_cast<std::uint64_t>(x);
                              },
                              [](const RunConfig& c) { return std::to_string(c.seed); }}},
  };
  return s;
}

inline std::string range_text(double lo, double hi, bool open_lo, bool open_hi)
{
  std::string s;
  if (std::isfinite(lo))
    s += std::string(open_lo ? "> " : ">= ") + format_double(lo);
  if (std::isfinite(hi))
    s += std::string(s.empty() ? "" : " and ") + (open_hi ? "< " : "<= ") + format_double(hi);
  return s;
}

inline void apply(RunConfig& c, const SchemaEntry& e, const std::string& v)
{
  std::visit(
      [&](const auto& k) {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, RealKey>) {
          const double x = parse_real(v);
          const bool ok = (k.open_lo ? x > k.lo : x >= k.lo) && (k.open_hi ? x < k.hi : x <= k.hi);
          if (!ok)
            throw std::invalid_argument("value " + v + " out of range (" +
                                        range_text(k.lo, k.hi, k.open_lo, k.open_hi) + ")");
          c.*(k.member) = x;
        } else if constexpr (std::is_same_v<K, IntKey>) {
          const long long x = parse_integer(v);
          if (x < k.lo || x > k.hi)
            throw std::invalid_argument("value " + v + " out of range (" + std::to_string(k.lo) + ".." +
                                        std::to_string(k.hi) + ")");
          c.*(k.member) = static_cast<int>(x);
        } else if constexpr (std::is_same_v<K, ThresholdKey>) {
          const double x = parse_real(v);
          const bool ok = (k.open_lo ? x > k.lo : x >= k.lo) && x <= k.hi;
          if (!ok)
            throw std::invalid_argument("value " + v + " out of range (" +
                                        range_text(k.lo, k.hi, k.open_lo, false) + ")");
          c.classifier.*(k.member) = x;
        } else {
          k.set(c, v);
        }
      },
      e.kind);
}

inline std::string read(const RunConfig& c, const SchemaEntry& e)
{
  return std::visit(
      [&](const auto& k) -> std::string {
        using K = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<K, RealKey>)
          return format_double(c.*(k.member));
        else if constexpr (std::is_same_v<K, IntKey>)
          return std::to_string(c.*(k.member));
        else if constexpr (std::is_same_v<K, ThresholdKey>)
          return format_double(c.classifier.*(k.member));
        else
          return k.get(c);
      },
      e.kind);
}

inline const SchemaEntry* lookup(const std::string& key)
{
  for (const auto& e : schema())
    if (key == e.key)
      return &e;
  return nullptr;
}

}  // namespace detail

// Sets one parameter by its dotted name; used by sweeps.
inline void set_parameter(RunConfig& c, const std::string& key, const std::string& value)
{
  const auto* e = detail::lookup(key);
  if (!e)
    throw std::invalid_argument("unknown parameter '" + key + "'");
  detail::apply(c, *e, value);
}

inline std::string get_parameter(const RunConfig& c, const std::string& key)
{
  const auto* e = detail::lookup(key);
  if (!e)
    throw std::invalid_argument("unknown parameter '" + key + "'");
  return detail::read(c, *e);
}

// Cross-field checks that cannot be attributed to a single key.
inline void validate(const RunConfig& c, const IniDocument* doc = nullptr)
{
  auto fail = [&](const std::string& key, const std::string& msg) {
    const IniEntry* e = doc ? doc->find(key) : nullptr;
    throw ConfigError(doc ? doc->source : "config", e ? e->line : 0, key, msg);
  };
  if (c.dt_min > c.dt0)
    fail("evolution.dt_min", "dt_min must not exceed dt0");
  if (c.family == InitFamily::from_csv) {
    if (c.path.empty())
      fail("init.path", "from_csv requires init.path");
    if (!std::filesystem::exists(c.path))
      fail("init.path", "file '" + c.path + "' does not exist");
  }
}

inline RunConfig run_config_from(const IniDocument& doc, bool allow_sweep = false)
{
  RunConfig c;
  for (const auto& e : doc.entries) {
    if (allow_sweep && e.key.rfind("sweep.", 0) == 0)
      continue;
    const auto* s = detail::lookup(e.key);
    if (!s)
      throw ConfigError(doc.source, e.line, e.key, "unknown key");
    try {
      detail::apply(c, *s, e.value);
    } catch (const std::invalid_argument& ex) {
      throw ConfigError(doc.source, e.line, e.key, ex.what());
    }
  }
  validate(c, &doc);
  return c;
}

// HARTREE_LAB_OUT overrides run.output_dir.
inline void apply_environment(RunConfig& c)
{
  if (const char* env = std::getenv("HARTREE_LAB_OUT"); env && *env)
    c.output_dir = env;
}

inline RunConfig load_run_config(const std::filesystem::path& path)
{
  auto c = run_config_from(load_ini(path));
  apply_environment(c);
  return c;
}

// Canonical text of every parameter except the output location. Equal
// configurations produce equal text, which is what run directories hash.
inline std::string canonical_text(const RunConfig& c)
{
  std::string out, section;
  for (const auto& e : detail::schema()) {
    const std::string key = e.key;
    if (key == "run.output_dir")
      continue;
    const auto dot = key.find('.');
    const std::string sec = key.substr(0, dot);
    if (sec != section) {
      out += (out.empty() ? "" : "\n") + std::string("[") + sec + "]\n";
      section = sec;
    }
    out += key.substr(dot + 1) + " = " + detail::read(c, e) + "\n";
  }
  return out;
}

inline std::uint64_t config_hash(const RunConfig& c)
{
  const auto text = canonical_text(c);
  return hartree::detail::fnv1a(text.data(), text.size());
}

inline std::string hash_hex(std::uint64_t h)
{
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

struct SweepAxis {
  std::string param;
  std::vector<std::string> values;
};

struct SweepSpec {
  RunConfig base;
  SweepAxis axis1;
  std::optional<SweepAxis> axis2;
  int parallelism = 1;
};

inline SweepSpec sweep_spec_from(const IniDocument& doc)
{
  SweepSpec s;
  s.base = run_config_from(doc, true);
  apply_environment(s.base);
  auto axis = [&](const std::string& n, bool required) -> std::optional<SweepAxis> {
    const auto* p = doc.find("sweep." + n);
    const auto* v = doc.find("sweep." + n + "_values");
    if (!p && !v) {
      if (required)
        throw ConfigError(doc.source, 0, "sweep." + n, "missing sweep axis");
      return std::nullopt;
    }
    if (!p)
      throw ConfigError(doc.source, v->line, "sweep." + n, "values given without a parameter name");
    if (!v)
      throw ConfigError(doc.source, p->line, "sweep." + n + "_values", "missing value list");
    SweepAxis a{p->value, {}};
    if (!detail::lookup(a.param))
      throw ConfigError(doc.source, p->line, "sweep." + n, "parameter '" + a.param + "' is not a config key");
    if (detail::trim(v->value).empty())
      throw ConfigError(doc.source, v->line, "sweep." + n + "_values", "empty axis");
    a.values = detail::split_list(v->value);
    for (const auto& x : a.values) {
      if (x.empty())
        throw ConfigError(doc.source, v->line, "sweep." + n + "_values", "empty list element");
      RunConfig probe = s.base;
      try {
        set_parameter(probe, a.param, x);
      } catch (const std::invalid_argument& ex) {
        throw ConfigError(doc.source, v->line, "sweep." + n + "_values", ex.what());
      }
    }
    return a;
  };
  for (const auto& e : doc.entries)
    if (e.key.rfind("sweep.", 0) == 0) {
      const auto k = e.key.substr(6);
      if (k != "axis1" && k != "axis1_values" && k != "axis2" && k != "axis2_values" && k != "parallelism")
        throw ConfigError(doc.source, e.line, e.key, "unknown key");
    }
  s.axis1 = *axis("axis1", true);
  s.axis2 = axis("axis2", false);
  if (const auto* p = doc.find("sweep.parallelism")) {
    try {
      const auto x = detail::parse_integer(p->value);
      if (x < 1 || x > 256)
        throw std::invalid_argument("value " + p->value + " out of range (1..256)");
      s.parallelism = static_cast<int>(x);
    } catch (const std::invalid_argument& ex) {
      throw ConfigError(doc.source, p->line, p->key, ex.what());
    }
  }
  return s;
}

}  // namespace hartree::experiments
