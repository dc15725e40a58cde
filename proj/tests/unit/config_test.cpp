#include "hartree/experiments/config.hpp"

#include <gtest/gtest.h>

#include <cstdlib>

using namespace hartree;
using namespace hartree::experiments;

namespace {

ConfigError parse_error(const std::string& text, bool sweep = false)
{
  try {
    const auto doc = parse_ini(text, "t.ini");
    if (sweep)
      sweep_spec_from(doc);
    else
      run_config_from(doc);
  } catch (const ConfigError& e) {
    return e;
  }
  ADD_FAILURE() << "no error for:\n" << text;
  return ConfigError("", 0, "", "");
}

}  // namespace

TEST(Config, ParsesSectionsAndComments)
{
  const auto doc = parse_ini("# header\n[grid]\nn_modes = 512 ; trailing\n\n[init]\nfamily = gaussian\n", "x");
  ASSERT_EQ(doc.entries.size(), 2u);
  EXPECT_EQ(doc.entries[0].key, "grid.n_modes");
  EXPECT_EQ(doc.entries[0].value, "512");
  EXPECT_EQ(doc.entries[0].line, 3);
  const auto c = run_config_from(doc);
  EXPECT_EQ(c.n_modes, 512);
  EXPECT_EQ(c.family, InitFamily::gaussian);
}

TEST(Config, ErrorsNameLineAndKey)
{
  auto e = parse_error("[grid]\n\nn_modes = 8\n");
  EXPECT_EQ(e.line, 3);
  EXPECT_EQ(e.key, "grid.n_modes");

  e = parse_error("[evolution]\ndt0 = fast\n");
  EXPECT_EQ(e.line, 2);
  EXPECT_EQ(e.key, "evolution.dt0");

  e = parse_error("[grid]\nr_max = 10\nr_max = 20\n");
  EXPECT_EQ(e.line, 3);

  e = parse_error("[grid]\nbogus = 1\n");
  EXPECT_EQ(e.key, "grid.bogus");

  e = parse_error("n_modes = 64\n");
  EXPECT_EQ(e.line, 1);

  e = parse_error("[grid\n");
  EXPECT_EQ(e.line, 1);

  e = parse_error("[init]\nfamily = lorentzian\n");
  EXPECT_EQ(e.key, "init.family");

  e = parse_error("[evolution]\ndt0 = 1e-4\ndt_min = 1e-3\n");
  EXPECT_EQ(e.key, "evolution.dt_min");
  EXPECT_EQ(e.line, 3);

  e = parse_error("[init]\nfamily = from_csv\npath = /nonexistent/profile.csv\n");
  EXPECT_EQ(e.key, "init.path");
  EXPECT_NE(std::string(e.what()).find("t.ini:3"), std::string::npos);
}

TEST(Config, CanonicalTextAndHash)
{
  RunConfig a, b;
  b.output_dir = "elsewhere";
  EXPECT_EQ(canonical_text(a), canonical_text(b));
  EXPECT_EQ(config_hash(a), config_hash(b));
  set_parameter(b, "init.amplitude", "0.81");
  EXPECT_NE(config_hash(a), config_hash(b));
  EXPECT_EQ(std::stod(get_parameter(b, "init.amplitude")), 0.81);
  // the canonical text parses back to the same configuration
  const auto c = run_config_from(parse_ini(canonical_text(b), "canon"));
  EXPECT_EQ(canonical_text(c), canonical_text(b));
  EXPECT_EQ(hash_hex(config_hash(a)).size(), 16u);
}

TEST(Config, EnvironmentOverridesOutput)
{
  RunConfig c;
  ::setenv("HARTREE_LAB_OUT", "/tmp/from_env", 1);
  apply_environment(c);
  ::unsetenv("HARTREE_LAB_OUT");
  EXPECT_EQ(c.output_dir, "/tmp/from_env");
}

TEST(Config, EvolutionConfigFromRun)
{
  RunConfig c;
  c.sponge = false;
  EXPECT_FALSE(c.evolution().absorber);
  c.sponge = true;
  c.sponge_width = 0.3;
  const auto e = c.evolution();
  ASSERT_TRUE(e.absorber);
  EXPECT_EQ(e.absorber->width, 0.3);
  EXPECT_EQ(e.dt0, c.dt0);
}

TEST(Config, SweepSpec)
{
  const auto s = sweep_spec_from(parse_ini(
      "[init]\nfamily = gaussian\n[sweep]\naxis1 = init.amplitude\naxis1_values = 1, 2, 3\n"
      "axis2 = init.width\naxis2_values = 0.5,1\nparallelism = 2\n",
      "s"));
  EXPECT_EQ(s.axis1.values.size(), 3u);
  ASSERT_TRUE(s.axis2);
  EXPECT_EQ(s.axis2->values[1], "1");
  EXPECT_EQ(s.parallelism, 2);
}

TEST(Config, SweepErrors)
{
  auto e = parse_error("[sweep]\naxis1 = init.amplitude\naxis1_values =\n", true);
  EXPECT_EQ(e.key, "sweep.axis1_values");
  EXPECT_EQ(e.line, 3);
  e = parse_error("[sweep]\naxis1 = init.colour\naxis1_values = 1\n", true);
  EXPECT_EQ(e.key, "sweep.axis1");
  e = parse_error("[sweep]\naxis1 = grid.n_modes\naxis1_values = 64, 2\n", true);
  EXPECT_EQ(e.key, "sweep.axis1_values");
  e = parse_error("[sweep]\naxis1 = init.amplitude\naxis1_values = 1\nparallelism = 0\n", true);
  EXPECT_EQ(e.key, "sweep.parallelism");
  e = parse_error("[sweep]\naxis1 = init.amplitude\naxis1_values = 1\nspeed = 3\n", true);
  EXPECT_EQ(e.key, "sweep.speed");
  e = parse_error("[grid]\nn_modes = 64\n", true);
  EXPECT_EQ(e.key, "sweep.axis1");
}
