#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

namespace fs = std::filesystem;

namespace {

int run(const std::string& args)
{
  const std::string cmd = std::string(HARTREE_LAB_BINARY) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path write_config(const std::string& name, const std::string& text)
{
  const auto dir = fs::temp_directory_path() / "hartree_cli_test";
  fs::create_directories(dir);
  const auto p = dir / name;
  std::ofstream(p) << text;
  return p;
}

}  // namespace

TEST(Cli, SelftestPasses)
{
  EXPECT_EQ(run("selftest --quiet"), 0);
}

TEST(Cli, CorruptedMultiplierFailsSelftest)
{
  EXPECT_EQ(run("selftest --quiet --corrupt-multiplier 1.01"), 5);
}

TEST(Cli, ConfigErrorsExitWithTwo)
{
  EXPECT_EQ(run("evolve --config " + write_config("bad.ini", "[grid]\nn_modes = eight\n").string()), 2);
  EXPECT_EQ(run("evolve --config /nonexistent/config.ini"), 2);
  EXPECT_EQ(run("no_such_command"), 2);
}

TEST(Cli, NonConvergenceExitsWithThree)
{
  const auto out = fs::temp_directory_path() / "hartree_cli_test" / "out";
  const auto cfg = write_config("coarse.ini", "[ground_state]\nn_modes = 16\nr_max = 40\ntolerance = 1e-6\n");
  EXPECT_EQ(run("groundstate --config " + cfg.string() + " --out " + out.string()), 3);
}
