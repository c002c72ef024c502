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

// nlpre: run estimation experiments, verify scenario mappings.
//
//   nlpre run --config exp.toml [--scenario S] [--horizon T] [--step h]
//             [--gamma g] [--out DIR]
//   nlpre run --all [--out DIR]
//   nlpre verify <scenario> [--samples N] [--seed S] [--json FILE]
//   nlpre list-scenarios

#include <algorithm>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nlpre/config.hpp"
#include "nlpre/runner.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFail = 1;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

struct RunFlags {
  std::string config_path;
  std::optional<std::string> scenario;
  std::optional<double> horizon;
  std::optional<double> step;
  std::optional<double> gamma;
  std::optional<std::string> out;
  bool all = false;
};

void print_summary(const nlpre::RunRecord& rec, const std::filesystem::path& dir) {
  std::printf("%s -> %s\n", rec.config.scenario.c_str(), dir.string().c_str());
  for (const auto& [law, m] : rec.metrics["laws"].items()) {
    auto show = [](const nlohmann::json& v) {
      if (v.is_null()) return std::string("-");
      if (!v.is_number_float()) return v.dump();
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.4g", v.get<double>());
      return std::string(buf);
    };
    std::printf("  %-10s |err|0 %-10s |err|T %-10s t_1%% %-8s violations %s\n", law.c_str(),
                show(m["theta_err_inf_initial"]).c_str(), show(m["theta_err_inf_final"]).c_str(),
                show(m["convergence_time_1pct"]).c_str(), show(m["monotonicity"]["violations"]).c_str());
  }
  for (const auto& [law, o] : rec.metrics["outcomes"].items())
    if (!o["ok"].get<bool>())
      std::printf("  %-10s failed at t = %s: %s\n", law.c_str(), o["failed_at"].dump().c_str(),
                  o["failure"].get<std::string>().c_str());
}

int run_one(const nlpre::RunConfig& cfg) {
  const nlpre::RunRecord rec = nlpre::run(cfg);
  nlpre::write_outputs(rec, cfg.output_dir);
  print_summary(rec, cfg.output_dir);
  return kExitOk;
}

int cmd_run(const RunFlags& f) {
  if (f.all) {
    const std::string base = f.out.value_or("out");
    std::vector<std::future<int>> jobs;
    for (const auto& name : nlpre::scenario_names()) {
      nlpre::RunConfig cfg;
      cfg.seed = nlpre::default_seed();
      cfg.scenario = name;
      cfg.output_dir = (std::filesystem::path(base) / name).string();
      nlpre::validate(cfg);
      jobs.push_back(std::async(std::launch::async, [cfg] {
        const nlpre::RunRecord rec = nlpre::run(cfg);
        nlpre::write_outputs(rec, cfg.output_dir);
        return 0;
      }));
    }
    for (auto& j : jobs) j.get();
    for (const auto& name : nlpre::scenario_names())
      std::printf("%s -> %s\n", name.c_str(), (std::filesystem::path(base) / name).string().c_str());
    return kExitOk;
  }

  nlpre::RunConfig cfg;
  if (!f.config_path.empty()) {
    cfg = nlpre::load_config(f.config_path);
  } else {
    cfg.seed = nlpre::default_seed();
  }
  if (f.scenario) {
    if (*f.scenario != cfg.scenario) cfg.estimators.clear();
    cfg.scenario = *f.scenario;
  }
  if (f.horizon) cfg.horizon = *f.horizon;
  if (f.step) cfg.step = *f.step;
  if (f.gamma) cfg.overrides["gamma"] = nlpre::toml::Value::of(*f.gamma);
  if (f.out) cfg.output_dir = *f.out;
  nlpre::validate(cfg);
  return run_one(cfg);
}

int cmd_verify(const std::string& scenario, std::size_t samples, std::uint64_t seed, const std::string& json_path) {
  const auto& names = nlpre::scenario_names();
  if (std::find(names.begin(), names.end(), scenario) == names.end()) {
    std::fprintf(stderr, "error: unknown scenario '%s'\n", scenario.c_str());
    return kExitConfig;
  }
  const nlpre::ScenarioVerification v = nlpre::verify_scenario(scenario, samples, seed);
  const auto& b = v.bundle;
  std::printf("scenario %s: %zu samples (%zu rejected), seed %llu\n", scenario.c_str(), b.samples_checked,
              b.samples_rejected, static_cast<unsigned long long>(seed));
  std::printf("  %-22s %-14s %s\n", "check", "value", "status");
  auto line = [](const char* name, double value, bool ok) {
    std::printf("  %-22s %-14.3e %s\n", name, value, ok ? "ok" : "FAIL");
  };
  line("S = G theta", b.max_residual_SG, b.max_residual_SG <= b.tolerance);
  line("Pi G = T_G", b.max_residual_PiG, b.max_residual_PiG <= b.tolerance);
  line("Pi S = T_S", b.max_residual_PiS, b.max_residual_PiS <= b.tolerance);
  line("det Pi >= Delta^ell", b.min_detPi_margin, b.min_detPi_margin >= -b.tolerance);
  line("rank G = q (sigma)", b.min_rankG_sigma, b.min_rankG_sigma > b.tolerance);
  line("excitation alpha", v.excitation.alpha, v.excitation.is_FE);
  for (const auto& f : b.failed_checks) std::printf("  failed: %s\n", f.c_str());
  std::printf("%s\n", v.pass ? "PASS" : "FAIL");
  if (!json_path.empty()) {
    std::ofstream out(json_path);
    if (!out) throw nlpre::IoError("cannot open '" + json_path + "' for writing");
    out << nlpre::to_json(v).dump(2) << "\n";
    if (!out) throw nlpre::IoError("write failed for '" + json_path + "'");
  }
  return v.pass ? kExitOk : kExitFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parameter estimation for nonlinearly parameterized regressions"};
  app.require_subcommand(1);

  RunFlags rf;
  auto* run = app.add_subcommand("run", "Run a configured experiment and write CSV, JSON and SVG outputs");
  run->add_option("--config", rf.config_path, "TOML run configuration");
  run->add_option("--scenario", rf.scenario, "Scenario name (overrides the config)");
  run->add_option("--horizon", rf.horizon, "Horizon in seconds");
  run->add_option("--step", rf.step, "Integration step in seconds");
  run->add_option("--gamma", rf.gamma, "Gain of the proposed law");
  run->add_option("--out", rf.out, "Output directory");
  run->add_flag("--all", rf.all, "Run every scenario with defaults, concurrently, into <out>/<scenario>");

  std::string verify_name;
  std::size_t samples = 1000;
  std::optional<std::uint64_t> seed_flag;
  std::string json_path;
  auto* verify = app.add_subcommand("verify", "Check the linearizing mappings and regressor excitation");
  verify->add_option("scenario", verify_name, "Scenario name")->required();
  verify->add_option("--samples", samples, "Number of random samples")->check(CLI::PositiveNumber);
  verify->add_option("--seed", seed_flag, "Sampling seed (default: DREM_SEED or 42)");
  verify->add_option("--json", json_path, "Also write the report as JSON");

  auto* list = app.add_subcommand("list-scenarios", "List registered scenarios");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*list) {
      for (const auto& s : nlpre::list_scenarios()) std::printf("%-10s %s\n", s.name.c_str(), s.description.c_str());
      return kExitOk;
    }
    if (*verify) return cmd_verify(verify_name, samples, seed_flag ? *seed_flag : nlpre::default_seed(), json_path);
    return cmd_run(rf);
  } catch (const nlpre::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const nlpre::IoError& e) {
    std::fprintf(stderr, "i/o error: %s\n", e.what());
    return kExitIo;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitFail;
  }
}
