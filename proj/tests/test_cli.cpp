#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(NOISEREG_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("noisereg_cli_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST(Cli, ValidateAdmissible) {
  EXPECT_EQ(run("validate --set model.m=2 --set model.eta=1 --out " + scratch("v1").string()), 0);
}

TEST(Cli, ValidateRejectsEta) {
  const auto dir = scratch("v2");
  EXPECT_EQ(run("validate --set model.m=3 --set model.eta=0.5 --out " + dir.string()), 2);
  EXPECT_NE(slurp(dir / "summary.json").find("model.eta"), std::string::npos);
}

TEST(Cli, UnknownKeyAndCommand) {
  EXPECT_EQ(run("validate --set model.bogus=1 --out " + scratch("v3").string()), 2);
  EXPECT_EQ(run("no-such-command"), 2);
}

TEST(Cli, OdeBlowupWritesPaths) {
  const auto dir = scratch("ode");
  EXPECT_EQ(run("ode-blowup --out " + dir.string()), 0);
  const auto csv = slurp(dir / "paths.csv");
  EXPECT_EQ(csv.rfind("t,x1,x2,path_id\n", 0), 0u);
  EXPECT_EQ(csv.find('\r'), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "metadata.json"));
}

TEST(Cli, SummaryBytesIndependentOfThreads) {
  const auto a = scratch("sim_a"), b = scratch("sim_b");
  const std::string args = "simulate --set ensemble.n_paths=16 --set scheme.t_end=0.2 --seed 5 ";
  ASSERT_EQ(run(args + "--threads 1 --out " + a.string()), 0);
  ASSERT_EQ(run(args + "--threads 3 --out " + b.string()), 0);
  EXPECT_EQ(slurp(a / "summary.json"), slurp(b / "summary.json"));
  EXPECT_EQ(slurp(a / "paths.csv"), slurp(b / "paths.csv"));
  EXPECT_EQ(slurp(a / "events.csv"), slurp(b / "events.csv"));
}

TEST(Cli, ConfigFileMerged) {
  const auto dir = scratch("cfg");
  fs::create_directories(dir);
  std::ofstream(dir / "c.json") << R"({"model": {"eta": 0.2, "m": 2.0}})";
  EXPECT_EQ(run("validate --config " + (dir / "c.json").string() + " --out " + (dir / "o").string()), 2);
}
