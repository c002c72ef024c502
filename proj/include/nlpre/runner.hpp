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

#ifndef NLPRE_RUNNER_HPP_
#define NLPRE_RUNNER_HPP_

#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nlpre/config.hpp"
#include "nlpre/mapping.hpp"
#include "nlpre/metrics.hpp"
#include "nlpre/pipeline.hpp"
#include "nlpre/report_io.hpp"
#include "nlpre/run_table.hpp"
#include "nlpre/scenarios/academic.hpp"
#include "nlpre/scenarios/robot.hpp"

namespace nlpre {

struct RunRecord {
  RunConfig config;
  RunTable table;
  nlohmann::json metrics;
};

inline nlohmann::json metrics_document(const RunConfig& cfg, const RunTable& table) {
  nlohmann::json m = compute_metrics(table, cfg.scenario, resolved_estimators(cfg));
  m["outcomes"] = outcomes_json(table);
  m["config"] = config_snapshot(cfg);
  return m;
}

/// Runs every requested law. Academic laws share one integration; each robot
/// law closes its own loop, since θ̂ feeds the controller.
inline RunRecord run(const RunConfig& cfg) {
  validate(cfg);
  const auto laws = resolved_estimators(cfg);
  RunRecord rec;
  rec.config = cfg;
  if (cfg.scenario == "academic") {
    const academic::AcademicScenario sc = build_academic(cfg);
    std::vector<academic::Law> ls;
    for (const auto& l : laws)
      ls.push_back(l == "drem" ? academic::Law::kDrem : l == "pmono" ? academic::Law::kPmono : academic::Law::kOverparam);
    rec.table = academic::run(sc, ls, cfg.stride);
  } else {
    const robot::RobotScenario sc = build_robot(cfg);
    for (const auto& l : laws)
      merge_columns(rec.table, robot::run_closed_loop(sc, l == "drem" ? robot::Law::kDrem : robot::Law::kPmono,
                                                      cfg.stride));
  }
  rec.metrics = metrics_document(cfg, rec.table);
  return rec;
}

namespace detail {

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << content;
  out.flush();
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace detail

/// timeseries.csv, metrics.json and figure.svg under `dir`.
inline void write_outputs(const RunRecord& rec, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());
  detail::write_file(dir / "timeseries.csv", to_csv(rec.table));
  detail::write_file(dir / "metrics.json", rec.metrics.dump(2) + "\n");
  detail::write_file(dir / "figure.svg",
                     render_figure(rec.table, rec.config.scenario, resolved_estimators(rec.config)));
}

struct ScenarioInfo {
  std::string name;
  std::string description;
};

inline std::vector<ScenarioInfo> list_scenarios() {
  return {{"academic", "scalar regression y = e^-t (th1 th2 + th1^2) + sin(t) (th1 + th2) + cos(th1); laws drem, pmono, overparam"},
          {"robot", "2-DOF manipulator under Slotine-Li control with filtered regression; laws drem, pmono"}};
}

struct ScenarioVerification {
  std::string scenario;
  VerificationReport bundle;
  ExcitationReport excitation;
  bool pass = false;
};

/// Bundle identities on seeded samples plus excitation of the scenario
/// regressor on [0, 10].
inline ScenarioVerification verify_scenario(const std::string& name, std::size_t samples, std::uint64_t seed) {
  ScenarioVerification out;
  out.scenario = name;
  VerifyOptions opt;
  opt.sample_count = samples;
  opt.seed = seed;
  if (name == "academic") {
    opt.theta_box = {{-3.0, 3.0}, {-3.0, 3.0}};
    out.bundle = verify_bundle(academic::problem(), academic::bundle(), opt);
    TimeSeries<Mat> series;
    const double h = 1e-3;
    for (std::size_t k = 0; k <= 10000; ++k) {
      const double t = static_cast<double>(k) * h;
      series.push(t, transpose(academic::regressor(t)));
    }
    out.excitation = excitation_level(series, 0.0, 10.0);
  } else if (name == "robot") {
    opt.theta_box = {{0.2, 2.0}, {0.2, 2.0}, {0.2, 2.0}, {0.2, 2.0}};
    out.bundle = verify_bundle(robot::problem(), robot::bundle(), opt);
    robot::RobotScenario sc;
    sc.horizon = 10.0;
    const RunTable t = robot::run_closed_loop(sc, robot::Law::kDrem, 1);
    out.excitation = excitation_metrics(t, "drem_", 2, 5);
  } else {
    throw ArgumentError("unknown scenario '" + name + "'");
  }
  out.pass = out.bundle.pass && out.excitation.is_FE;
  return out;
}

inline nlohmann::json to_json(const ScenarioVerification& v) {
  nlohmann::json b;
  to_json(b, v.bundle);
  return {{"scenario", v.scenario}, {"bundle", b}, {"excitation", to_json(v.excitation)}, {"pass", v.pass}};
}

}  // namespace nlpre

#endif  // NLPRE_RUNNER_HPP_
