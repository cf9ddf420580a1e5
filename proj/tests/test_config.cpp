#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "asap/config.hpp"

using namespace asap;
namespace fs = std::filesystem;

namespace {

const char* kMinimalIni = R"(# smoke configuration
[env]
name = dc_motor

[agent]
algo = sac
hidden = 16,16

[trainer]
m = 1000
seed = 7

[eval]
n_points = 50
tolerance = 30
)";

ConfigStore store_from(const std::string& text) {
  std::stringstream ss(text);
  return ConfigStore::from_ini(ss);
}

} // namespace

TEST(ConfigStore, IniParsingAndComments) {
  ConfigStore s = store_from("[a]\nx = 1 ; trailing\n# full line\ny = hello world\n");
  EXPECT_EQ(s.get_string("a", "x", ""), "1");
  EXPECT_EQ(s.get_string("a", "y", ""), "hello world");
  EXPECT_EQ(s.get_string("a", "missing", "fallback"), "fallback");
}

TEST(ConfigStore, Errors) {
  EXPECT_THROW(store_from("x = 1\n"), ConfigError);          // key before section
  EXPECT_THROW(store_from("[a\nx = 1\n"), ConfigError);      // unterminated header
  EXPECT_THROW(store_from("[a]\nnovalue\n"), ConfigError);   // missing '='
  ConfigStore s = store_from("[a]\nx = abc\n");
  EXPECT_THROW(s.get_double("a", "x", 0.0), ConfigError);
  ConfigStore s2 = store_from("[a]\nx = 1.5\n");
  EXPECT_THROW(s2.get_int("a", "x", 0), ConfigError);
  ConfigStore s3 = store_from("[a]\nx = maybe\n");
  EXPECT_THROW(s3.get_bool("a", "x", false), ConfigError);
}

TEST(ConfigStore, UnknownKeysRejected) {
  ConfigStore s = store_from("[a]\nknown = 1\nmystery = 2\n");
  s.get_int("a", "known", 0);
  EXPECT_THROW(s.reject_unknown_keys(), ConfigError);
}

TEST(ConfigStore, JsonEquivalence) {
  const std::string json_text =
      R"({"env": {"name": "dc_motor"}, "trainer": {"m": 1000, "seed": 7},
          "agent": {"hidden": [16, 16], "alpha_auto": true}})";
  std::stringstream ss(json_text);
  ConfigStore s = ConfigStore::from_json(ss);
  EXPECT_EQ(s.get_string("env", "name", ""), "dc_motor");
  EXPECT_EQ(s.get_int("trainer", "m", 0), 1000);
  const auto hidden = s.get_sizes("agent", "hidden", {});
  ASSERT_EQ(hidden.size(), 2u);
  EXPECT_EQ(hidden[0], 16u);
  EXPECT_TRUE(s.get_bool("agent", "alpha_auto", false));
}

TEST(ConfigStore, OverridesAndHash) {
  ConfigStore a = store_from(kMinimalIni);
  ConfigStore b = store_from(kMinimalIni);
  EXPECT_EQ(a.hash(), b.hash());
  b.apply_override("trainer.seed=8");
  EXPECT_NE(a.hash(), b.hash());
  EXPECT_THROW(a.apply_override("nodot=1"), ConfigError);
}

TEST(RunConfig, DefaultsResolvePerBenchmark) {
  RunConfig rc = RunConfig::from_store(store_from(kMinimalIni));
  EXPECT_EQ(rc.env.name, "dc_motor");
  EXPECT_EQ(rc.agent.batch, 256u); // appendix value for sac
  EXPECT_DOUBLE_EQ(rc.agent.lr, 3e-4);
  EXPECT_DOUBLE_EQ(rc.agent.gamma, 0.99);
  EXPECT_DOUBLE_EQ(rc.agent.tau, 5e-3);
  EXPECT_EQ(rc.trainer.k_max, 30);
  EXPECT_EQ(rc.trainer.total_samples, 1000u);
  EXPECT_EQ(rc.seed, 7u);
  // r_sat computed from the benchmark rho bounds
  EXPECT_DOUBLE_EQ(rc.reward.r_sat, choose_r_sat(-6.0, 0.5, 30, 1.0));
  ASSERT_TRUE(rc.phi_t != nullptr);
  EXPECT_EQ(rc.phi_t->kind, stl::Formula::Kind::Finally);
  EXPECT_EQ(rc.task, EvalTask::Reach);
}

TEST(RunConfig, UnknownKeyFailsWithKeyPath) {
  std::string text = kMinimalIni;
  text += "\n[reward]\nmisspelled = 1\n";
  try {
    RunConfig::from_store(store_from(text));
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("reward.misspelled"), std::string::npos);
  }
}

TEST(RunConfig, ReachAvoidRequiresUnsafe) {
  std::string text = kMinimalIni;
  text += "\n[env]\nunsafe = false\n";
  // dc_motor without its unsafe ball cannot host a reach_avoid task
  std::string bad = text;
  bad += "[eval]\ntask = reach_avoid\n";
  EXPECT_THROW(RunConfig::from_store(store_from(bad)), ConfigError);
}

TEST(RunConfig, ReachAvoidBuildsObstacleFormula) {
  std::string text = kMinimalIni;
  text += "\n[eval]\ntask = reach_avoid\n";
  RunConfig rc = RunConfig::from_store(store_from(text));
  ASSERT_TRUE(rc.phi_o != nullptr);
  ASSERT_TRUE(rc.trainer.phi_o != nullptr);
  // the obstacle formula holds outside the ball, fails at its center
  stl::Trace center({{M_PI / 4.0, 0.0, 0.0}});
  EXPECT_FALSE(stl::boolean_sat(center, 0, *rc.phi_o));
  stl::Trace far({{3.0, 0.0, 0.0}});
  EXPECT_TRUE(stl::boolean_sat(far, 0, *rc.phi_o));
}

TEST(RunConfig, InvariantsRevalidatedAtLoad) {
  std::string text = kMinimalIni;
  text += "\n[agent]\ngamma = 1.5\n";
  EXPECT_THROW(RunConfig::from_store(store_from(text)), Error);
  std::string text2 = kMinimalIni;
  text2 += "\n[reward]\nrho_min = 2\nrho_max = 1\n";
  EXPECT_THROW(RunConfig::from_store(store_from(text2)), Error);
  std::string text3 = kMinimalIni;
  text3 += "\n[trainer]\nk_min = 10\nk_max = 5\n";
  EXPECT_THROW(RunConfig::from_store(store_from(text3)), Error);
}

TEST(RunConfig, FileLoadingSniffsJson) {
  const fs::path dir = fs::temp_directory_path() / "asap_cfg_test";
  fs::create_directories(dir);
  const fs::path ini = dir / "run.ini";
  {
    std::ofstream os(ini);
    os << kMinimalIni;
  }
  const fs::path json = dir / "run.json";
  {
    std::ofstream os(json);
    os << R"({"env": {"name": "bicycle"}, "trainer": {"m": 10}})";
  }
  EXPECT_EQ(RunConfig::from_file(ini.string()).env.name, "dc_motor");
  EXPECT_EQ(RunConfig::from_file(json.string()).env.name, "bicycle");
  EXPECT_EQ(RunConfig::from_file(json.string(), {"env.name=attitude"}).env.name,
            "attitude");
  EXPECT_EQ(RunConfig::from_file(ini.string(), {}, 99).seed, 99u);
  fs::remove_all(dir);
}
