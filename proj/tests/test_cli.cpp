#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>
#include <unistd.h>

#include "twofluid/cli/config.hpp"
#include "twofluid/cli/io.hpp"
#include "twofluid/cli/scenario.hpp"

namespace twofluid::cli {
namespace {

const std::string kMinimal = "[potential]\ngamma1 = 1.4\ngamma2 = 1.6\n[grid]\ncells = 50\n";

std::string message_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t line_count(const fs::path& p) {
  const std::string s = slurp(p);
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

class Scratch : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / fmt::format("twofluid-{}-{}-{}", info->name(), ::getpid(), counter_++);
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write_config(const std::string& name, const std::string& text) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p;
  }

  int run_sub(const std::string& sub, const fs::path& config, const fs::path& out, std::uint64_t seed = 0) {
    RunOptions opt;
    opt.subcommand = sub;
    opt.config = config;
    opt.out = out;
    opt.seed = seed;
    return run(opt);
  }

  fs::path dir_;
  static inline int counter_ = 0;
};

TEST(Config, MinimalConfigTakesDefaults) {
  const ScenarioConfig c = parse_config(kMinimal);
  EXPECT_EQ(c.potential.phases[0].gamma, 1.4);
  EXPECT_EQ(c.potential.phases[1].gamma, 1.6);
  EXPECT_EQ(c.potential.a, 0.0);
  EXPECT_EQ(c.closures.k, 0.0);
  EXPECT_EQ(c.closures.kappa, 0.0);
  EXPECT_EQ(c.run.cfl, 0.45);
  EXPECT_EQ(c.run.t_end, 0.0);
  EXPECT_EQ(c.grid.cells, 50);
  EXPECT_EQ(c.grid.boundary, Boundary::kPeriodic);
  EXPECT_TRUE(c.omega[0].profile.is_zero());
  EXPECT_TRUE(c.omega[1].profile.is_zero());
}

TEST(Config, GammaMustExceedOne) {
  EXPECT_NE(message_of("[potential]\ngamma1 = 0.5\n").find("gamma1 must exceed 1"), std::string::npos);
}

TEST(Config, CflOutOfRange) {
  const std::string m = message_of(kMinimal + "[run]\ncfl = 2.0\n");
  EXPECT_NE(m.find("cfl"), std::string::npos);
  EXPECT_NE(m.find("2"), std::string::npos);
}

TEST(Config, UnknownKeyAndSection) {
  EXPECT_NE(message_of(kMinimal + "[run]\ncfll = 0.3\n").find("unknown key 'cfll' in [run]"), std::string::npos);
  EXPECT_NE(message_of(kMinimal + "[runs]\n").find("runs"), std::string::npos);
  EXPECT_FALSE(message_of("cells = 4\n" + kMinimal).empty());
}

TEST(Config, SyntaxErrorNamesLine) {
  EXPECT_NE(message_of("[potential]\ngamma1 = 1.4\n[grid\n").find("line 3"), std::string::npos);
}

TEST(Config, MalformedNumberNamesKey) {
  EXPECT_NE(message_of("[grid]\ncells = lots\n").find("cells"), std::string::npos);
}

TEST(Config, CommentsAndProfiles) {
  const ScenarioConfig c = parse_config(
      "[potential] # law\na = 0.5 # coupling\n[initial]\nrho1 = step(0.5, 1.0, 0.5)\n"
      "u2 = sine(0, 0.1, 2)\ns1 = isothermal(1.2)\n[external]\nomega1 = linear(0.3)\n");
  EXPECT_EQ(c.potential.a, 0.5);
  EXPECT_EQ(c.initial.rho[0].profile(0.25), 1.0);
  EXPECT_EQ(c.initial.rho[0].profile(0.75), 0.5);
  EXPECT_NEAR(c.initial.u[1].profile(0.125), 0.1, 1e-15);
  ASSERT_TRUE(c.initial.s[0].isothermal_theta.has_value());
  EXPECT_EQ(*c.initial.s[0].isothermal_theta, 1.2);
  EXPECT_EQ(c.omega[0].profile.derivative(0.7), 0.3);
  EXPECT_THROW(parse_config("[initial]\nrho1 = wiggle(1)\n"), ConfigError);
  EXPECT_THROW(parse_config("[external]\nomega1 = isothermal(1)\n"), ConfigError);
}

TEST(Io, DoublesRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23}) EXPECT_EQ(std::stod(format_double(v)), v);
  EXPECT_EQ(format_double(std::numeric_limits<double>::quiet_NaN()), "NaN");
  EXPECT_EQ(format_double(-std::numeric_limits<double>::infinity()), "-inf");
}

TEST(Io, CsvRowWidthChecked) {
  CsvTable t({"a", "b"});
  t.row() << 1.0 << 2;
  EXPECT_EQ(t.str(), "a,b\n1,2\n");
  t.row() << 1.0;
  EXPECT_THROW(t.str(), Error);
}

TEST_F(Scratch, SimulateEndTimeZero) {
  const fs::path out = dir_ / "out";
  ASSERT_EQ(run_sub("simulate", write_config("m.ini", kMinimal), out), 0);
  EXPECT_TRUE(fs::exists(out / "snapshot_00000.csv"));
  EXPECT_FALSE(fs::exists(out / "snapshot_00001.csv"));
  EXPECT_EQ(line_count(out / "snapshot_00000.csv"), 51u);
  const auto manifest = nlohmann::json::parse(slurp(out / "run.json"));
  EXPECT_EQ(manifest["exit_code"], 0);
  EXPECT_EQ(manifest["subcommand"], "simulate");
  EXPECT_TRUE(manifest.contains("versions"));
  EXPECT_TRUE(manifest.contains("wall_seconds"));
  for (const auto& e : fs::directory_iterator(out)) {
    EXPECT_EQ(e.path().filename().string().find(".tmp"), std::string::npos);
  }
}

TEST_F(Scratch, HyperbolicityMapRowCount) {
  const std::string text =
      "[potential]\na = 1\n[map]\nrho1 = 0.5, 2.0, 10\nrho2 = 0.5, 2.0, 10\nw = 0.0, 3.0, 10\n";
  const fs::path out = dir_ / "out";
  ASSERT_EQ(run_sub("hyperbolicity-map", write_config("map.ini", text), out), 0);
  EXPECT_EQ(line_count(out / "hyperbolicity.csv"), 1001u);
}

TEST_F(Scratch, ValidationErrorExitsOne) {
  const fs::path out = dir_ / "out";
  EXPECT_EQ(run_sub("simulate", write_config("bad.ini", "[potential]\ngamma1 = 0.5\n"), out), 1);
  EXPECT_FALSE(fs::exists(out / "diagnostics.json"));
  EXPECT_EQ(run_sub("simulate", dir_ / "missing.ini", out), 1);
}

TEST_F(Scratch, NonHyperbolicRunExitsTwo) {
  const std::string text =
      "[potential]\na = 1\n[grid]\ncells = 20\n[initial]\nu1 = -2.5\nu2 = 2.5\n[run]\nt_end = 0.1\n";
  const fs::path out = dir_ / "out";
  EXPECT_EQ(run_sub("simulate", write_config("loss.ini", text), out), 2);
  const auto diag = nlohmann::json::parse(slurp(out / "diagnostics.json"));
  EXPECT_EQ(diag["cell"], 0);
  EXPECT_EQ(diag["time"], 0.0);
  EXPECT_TRUE(diag.contains("x"));
  EXPECT_EQ(nlohmann::json::parse(slurp(out / "run.json"))["exit_code"], 2);
}

TEST_F(Scratch, ReduceCheckNeedsIdenticalPhases) {
  const fs::path out = dir_ / "out";
  EXPECT_EQ(run_sub("reduce-check", write_config("m.ini", kMinimal), out), 1);
}

TEST_F(Scratch, RepeatedRunsAreByteIdentical) {
  const std::string text =
      "[potential]\na = 0.5\n[closures]\nk = 0.5\nkappa = 0.2\n[grid]\ncells = 40\n"
      "[initial]\nrho1 = sine(1, 0.05, 1)\nnoise = 0.02\n[run]\nt_end = 0.05\noutput_interval = 0.025\n";
  const fs::path cfg = write_config("noisy.ini", text);
  ASSERT_EQ(run_sub("simulate", cfg, dir_ / "a", 7), 0);
  ASSERT_EQ(run_sub("simulate", cfg, dir_ / "b", 7), 0);
  ASSERT_EQ(run_sub("simulate", cfg, dir_ / "c", 8), 0);
  int compared = 0;
  for (const auto& e : fs::directory_iterator(dir_ / "a")) {
    if (e.path().extension() != ".csv") continue;
    const std::string name = e.path().filename().string();
    EXPECT_EQ(slurp(e.path()), slurp(dir_ / "b" / name)) << name;
    ++compared;
  }
  EXPECT_GE(compared, 4);
  EXPECT_NE(slurp(dir_ / "a" / "snapshot_00000.csv"), slurp(dir_ / "c" / "snapshot_00000.csv"));
}

#ifdef TWOFLUID_CLI_PATH
TEST(Binary, VersionAndMissingArguments) {
  EXPECT_EQ(std::system(TWOFLUID_CLI_PATH " --version > /dev/null"), 0);
  EXPECT_NE(std::system(TWOFLUID_CLI_PATH " simulate > /dev/null 2>&1"), 0);
  EXPECT_NE(std::system(TWOFLUID_CLI_PATH " frobnicate --config x --out y > /dev/null 2>&1"), 0);
}
#endif

}  // namespace
}  // namespace twofluid::cli
