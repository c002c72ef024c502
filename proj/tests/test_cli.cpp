// Copyright 2026 The nlpre Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "nlpre/config.hpp"
#include "nlpre/metrics.hpp"
#include "nlpre/report_io.hpp"
#include "nlpre/runner.hpp"
#include "nlpre/toml_lite.hpp"

namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("nlpre_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(NLPRE_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Toml, ParsesSubset) {
  const auto t = nlpre::toml::parse(R"(# comment
scenario = "robot"   # trailing
horizon = 1.5e1
flag = true
names = ['a', "b\"c"]
multi = [
  1, 2,
  3,
]
[overrides]
K1 = 1_000
)");
  EXPECT_EQ(t.at("scenario").str, "robot");
  EXPECT_EQ(t.at("horizon").number, 15.0);
  EXPECT_TRUE(t.at("flag").boolean);
  EXPECT_EQ(t.at("names").array[1].str, "b\"c");
  EXPECT_EQ(t.at("multi").array.size(), 3u);
  EXPECT_EQ(t.at("overrides.K1").number, 1000.0);
}

TEST(Toml, Errors) {
  EXPECT_THROW(nlpre::toml::parse("a = "), nlpre::toml::ParseError);
  EXPECT_THROW(nlpre::toml::parse("a = 1\na = 2"), nlpre::toml::ParseError);
  EXPECT_THROW(nlpre::toml::parse("a = \"open"), nlpre::toml::ParseError);
  EXPECT_THROW(nlpre::toml::parse("a = 1 2"), nlpre::toml::ParseError);
  EXPECT_THROW(nlpre::toml::parse("[t\nb = 1"), nlpre::toml::ParseError);
  try {
    nlpre::toml::parse("x = 1\ny = [1,\n 2 3]");
    FAIL();
  } catch (const nlpre::toml::ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(Config, DefaultsAndOverrides) {
  const auto cfg = nlpre::parse_config(R"(
scenario = "robot"
estimators = ["drem"]
horizon = 5
stride = 5
[overrides]
gamma = 20
K1 = [2, 4]
pmono_weights = [10, 10, 0, 0]
)");
  EXPECT_EQ(cfg.scenario, "robot");
  EXPECT_EQ(nlpre::resolved_estimators(cfg), (std::vector<std::string>{"drem"}));
  EXPECT_EQ(nlpre::resolved_step(cfg), 1e-3);
  const auto sc = nlpre::build_robot(cfg);
  EXPECT_EQ(sc.gamma.gamma0, 20.0);
  EXPECT_EQ(sc.K1(1, 1), 4.0);
  EXPECT_EQ(sc.horizon, 5.0);
  EXPECT_EQ(sc.pmono_weights[2], 0.0);

  const auto a = nlpre::parse_config("");
  EXPECT_EQ(a.scenario, "academic");
  EXPECT_EQ(nlpre::resolved_estimators(a).size(), 3u);
  EXPECT_EQ(nlpre::resolved_horizon(a), 30.0);
  EXPECT_EQ(a.stride, 10u);
}

void expect_config_error(const std::string& text, const std::string& needle) {
  try {
    nlpre::parse_config(text);
    FAIL() << "accepted: " << text;
  } catch (const nlpre::ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
  }
}

TEST(Config, RejectsBadInput) {
  expect_config_error("horizn = 3", "horizn");
  expect_config_error("[overrides]\nfoo = 1", "overrides.foo");
  expect_config_error("scenario = \"robot\"\n[overrides]\nGamma = 3", "overrides.Gamma");
  expect_config_error("scenario = \"robot\"\nestimators = [\"overparam\"]", "overparam");
  expect_config_error("estimators = []", "estimators");
  expect_config_error("estimators = [\"drem\", \"drem\"]", "duplicate");
  expect_config_error("step = 0", "step");
  expect_config_error("horizon = 0.0005", "horizon");
  expect_config_error("stride = 0", "stride");
  expect_config_error("stride = 1.5", "stride");
  expect_config_error("scenario = \"nosuch\"", "nosuch");
  expect_config_error("horizon = \"long\"", "horizon");
  expect_config_error("[overrides]\ntheta_true = [1]", "overrides.theta_true");
  expect_config_error("a = = 1", "line 1");
}

TEST(Config, SeedFromEnvironment) {
  ::setenv("DREM_SEED", "7", 1);
  EXPECT_EQ(nlpre::parse_config("").seed, 7u);
  EXPECT_EQ(nlpre::parse_config("seed = 9").seed, 9u);
  ::setenv("DREM_SEED", "x", 1);
  EXPECT_THROW(nlpre::parse_config(""), nlpre::ConfigError);
  ::unsetenv("DREM_SEED");
  EXPECT_EQ(nlpre::parse_config("").seed, 42u);
}

TEST(Csv, RoundTripIsExact) {
  nlpre::RunTable t;
  t.columns = {"t", "a", "b"};
  t.rows = {{0.0, 0.1, -1e-300}, {0.5, 1.0 / 3.0, nlpre::kMissing}, {1.0, 6.02214076e23, 2.5}};
  const std::string csv = nlpre::to_csv(t);
  EXPECT_EQ(csv.substr(0, 6), "t,a,b\n");
  EXPECT_NE(csv.find("0.5,0.33333333333333331,\n"), std::string::npos);
  const auto back = nlpre::from_csv(csv);
  EXPECT_EQ(back.columns, t.columns);
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = 0; c < 3; ++c) {
      if (std::isnan(t.rows[r][c]))
        EXPECT_TRUE(std::isnan(back.rows[r][c]));
      else
        EXPECT_EQ(back.rows[r][c], t.rows[r][c]);
    }
  EXPECT_THROW(nlpre::from_csv("t,a\n1\n"), nlpre::DimensionError);
}

TEST(Metrics, ConvergenceTime) {
  nlpre::RunTable t;
  t.columns = {"t", "e"};
  t.rows = {{0, 1.0}, {1, 0.5}, {2, 0.009}, {3, 0.02}, {4, 0.008}, {5, 0.001}};
  EXPECT_EQ(nlpre::convergence_time(t, {1}, 0.05).value(), 2.0);
  EXPECT_EQ(nlpre::convergence_time(t, {1}, 0.01).value(), 4.0);
  EXPECT_FALSE(nlpre::convergence_time(t, {1}, 1e-4).has_value());
}

TEST(Runner, MetricsRecomputeFromCsv) {
  nlpre::RunConfig cfg;
  cfg.horizon = 4.0;
  const auto rec = nlpre::run(cfg);
  const auto back = nlpre::from_csv(nlpre::to_csv(rec.table));
  const auto again = nlpre::compute_metrics(back, cfg.scenario, nlpre::resolved_estimators(cfg));
  EXPECT_EQ(again["laws"], rec.metrics["laws"]);
  EXPECT_EQ(again["signals"], rec.metrics["signals"]);
  EXPECT_EQ(rec.table.rows.size(), 401u);
}

TEST(Runner, RobotMetricsRecomputeFromCsv) {
  nlpre::RunConfig cfg;
  cfg.scenario = "robot";
  cfg.horizon = 3.0;
  const auto rec = nlpre::run(cfg);
  const auto back = nlpre::from_csv(nlpre::to_csv(rec.table));
  EXPECT_EQ(nlpre::compute_metrics(back, "robot", {"drem", "pmono"})["laws"], rec.metrics["laws"]);
  EXPECT_TRUE(rec.metrics["laws"]["drem"].contains("qdot_err_peak"));
  EXPECT_EQ(rec.table.columns[1], "theta_hat_drem_1");
}

TEST(Runner, WritesAllFilesDeterministically) {
  const fs::path dir = scratch("write");
  nlpre::RunConfig cfg;
  cfg.horizon = 2.0;
  nlpre::write_outputs(nlpre::run(cfg), dir / "a");
  nlpre::write_outputs(nlpre::run(cfg), dir / "b");
  for (const char* f : {"timeseries.csv", "metrics.json", "figure.svg"}) {
    ASSERT_TRUE(fs::exists(dir / "a" / f)) << f;
    EXPECT_EQ(slurp(dir / "a" / f), slurp(dir / "b" / f)) << f;
  }
  EXPECT_EQ(slurp(dir / "a" / "timeseries.csv").rfind("t,theta_hat_drem_1,", 0), 0u);
  EXPECT_NE(slurp(dir / "a" / "figure.svg").find("<polyline"), std::string::npos);
  const auto m = nlohmann::json::parse(slurp(dir / "a" / "metrics.json"));
  EXPECT_EQ(m["config"]["horizon"], 2.0);
  EXPECT_TRUE(m["outcomes"]["drem"]["ok"].get<bool>());
}

TEST(Runner, UnwritableDirectoryIsIoError) {
  const fs::path dir = scratch("io");
  std::ofstream(dir / "file") << "x";
  nlpre::RunConfig cfg;
  cfg.horizon = 0.01;
  EXPECT_THROW(nlpre::write_outputs(nlpre::run(cfg), dir / "file" / "sub"), nlpre::IoError);
}

TEST(Cli, ListScenarios) {
  const fs::path dir = scratch("list");
  EXPECT_EQ(run_cli("list-scenarios", dir / "log"), 0);
  const std::string out = slurp(dir / "log");
  EXPECT_NE(out.find("academic"), std::string::npos);
  EXPECT_NE(out.find("robot"), std::string::npos);
}

TEST(Cli, VerifyExitCodes) {
  const fs::path dir = scratch("verify");
  EXPECT_EQ(run_cli("verify academic --json " + (dir / "a.json").string(), dir / "a"), 0);
  EXPECT_NE(slurp(dir / "a").find("PASS"), std::string::npos);
  const auto j = nlohmann::json::parse(slurp(dir / "a.json"));
  EXPECT_LE(j["bundle"]["max_residual_SG"].get<double>(), 1e-9);
  EXPECT_TRUE(j["excitation"]["is_FE"].get<bool>());
  EXPECT_EQ(run_cli("verify robot", dir / "r"), 0);
  EXPECT_EQ(run_cli("verify nosuch", dir / "n"), 2);
}

TEST(Cli, RunWithConfigAndOverrides) {
  const fs::path dir = scratch("run");
  std::ofstream(dir / "c.toml") << "scenario = \"academic\"\nestimators = [\"drem\", \"overparam\"]\n";
  const std::string out = (dir / "out").string();
  EXPECT_EQ(run_cli("run --config " + (dir / "c.toml").string() + " --horizon 1 --gamma 1e12 --out " + out,
                    dir / "log"),
            0);
  const auto m = nlohmann::json::parse(slurp(dir / "out" / "metrics.json"));
  EXPECT_EQ(m["config"]["overrides"]["gamma"], 1e12);
  EXPECT_EQ(m["config"]["horizon"], 1.0);
  EXPECT_TRUE(m["laws"].contains("overparam"));
  EXPECT_FALSE(m["laws"].contains("pmono"));
}

TEST(Cli, MalformedConfigIsExitTwo) {
  const fs::path dir = scratch("bad");
  std::ofstream(dir / "c.toml") << "horizon = 3\nbogus_key = 1\n";
  EXPECT_EQ(run_cli("run --config " + (dir / "c.toml").string() + " --out " + (dir / "o").string(), dir / "log"), 2);
  EXPECT_NE(slurp(dir / "log").find("bogus_key"), std::string::npos);
  EXPECT_EQ(run_cli("run --horizon abc", dir / "log2"), 2);
  EXPECT_EQ(run_cli("frobnicate", dir / "log3"), 2);
}

TEST(Cli, IoFailureIsExitThree) {
  const fs::path dir = scratch("io_cli");
  std::ofstream(dir / "file") << "x";
  EXPECT_EQ(run_cli("run --horizon 0.01 --out " + (dir / "file" / "sub").string(), dir / "log"), 3);
  EXPECT_EQ(run_cli("run --config " + (dir / "missing.toml").string(), dir / "log2"), 3);
}

}  // namespace
