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

#ifndef NLPRE_CONFIG_HPP_
#define NLPRE_CONFIG_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nlpre/scenarios/academic.hpp"
#include "nlpre/scenarios/robot.hpp"
#include "nlpre/toml_lite.hpp"

namespace nlpre {

/// Bad run configuration. The message names the offending key.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::uint64_t kDefaultSeed = 42;

// DREM_SEED, when set to an unsigned integer, replaces the built-in seed.
inline std::uint64_t default_seed() {
  const char* env = std::getenv("DREM_SEED");
  if (env == nullptr || *env == '\0') return kDefaultSeed;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(env, &end, 10);
  if (*end != '\0') throw ConfigError("DREM_SEED: not an unsigned integer: '" + std::string(env) + "'");
  return v;
}

struct RunConfig {
  std::string scenario = "academic";
  std::vector<std::string> estimators;  // empty: every law the scenario supports
  std::optional<double> horizon;        // unset: scenario default
  std::optional<double> step;
  std::size_t stride = 10;
  std::string output_dir = "out";
  std::uint64_t seed = kDefaultSeed;
  toml::Table overrides;  // keys without the "overrides." prefix
};

inline const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names{"academic", "robot"};
  return names;
}

inline std::vector<std::string> supported_estimators(const std::string& scenario) {
  if (scenario == "academic") return {"drem", "pmono", "overparam"};
  return {"drem", "pmono"};
}

namespace detail {

inline double as_number(const toml::Value& v, const std::string& key) {
  if (!v.is_number()) throw ConfigError("key '" + key + "' must be a number");
  return v.number;
}

inline std::string as_string(const toml::Value& v, const std::string& key) {
  if (!v.is_string()) throw ConfigError("key '" + key + "' must be a string");
  return v.str;
}

inline Vec as_vector(const toml::Value& v, const std::string& key, std::size_t n) {
  if (!v.is_array() || v.array.size() != n)
    throw ConfigError("key '" + key + "' must be an array of " + std::to_string(n) + " numbers");
  Vec out;
  for (const auto& e : v.array) out.push_back(as_number(e, key));
  return out;
}

inline std::uint64_t as_count(const toml::Value& v, const std::string& key) {
  const double d = as_number(v, key);
  if (!(d >= 0.0) || d != std::floor(d) || d > 9.0e15)
    throw ConfigError("key '" + key + "' must be a non-negative integer");
  return static_cast<std::uint64_t>(d);
}

inline GainMode as_gain_mode(const toml::Value& v, const std::string& key) {
  const std::string s = as_string(v, key);
  if (s == "constant") return GainMode::kConstant;
  if (s == "normalized") return GainMode::kNormalized;
  throw ConfigError("key '" + key + "' must be \"constant\" or \"normalized\"");
}

// Scalar k means k * I2; an array of two numbers is the diagonal.
inline Mat as_gain_matrix(const toml::Value& v, const std::string& key) {
  if (v.is_number()) return v.number * Mat::identity(2);
  return Mat::diagonal(as_vector(v, key, 2));
}

inline void require_positive(double v, const std::string& key) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("key '" + key + "' must be positive");
}

inline std::string ov(const std::string& key) { return "overrides." + key; }

}  // namespace detail

/// Scenario parameters after applying the config overrides.
inline academic::AcademicScenario build_academic(const RunConfig& cfg) {
  using namespace detail;
  academic::AcademicScenario sc;
  for (const auto& [key, v] : cfg.overrides) {
    const std::string k = ov(key);
    if (key == "gamma") {
      sc.gamma.gamma0 = as_number(v, k);
      require_positive(sc.gamma.gamma0, k);
    } else if (key == "gamma_mode") {
      sc.gamma.mode = as_gain_mode(v, k);
    } else if (key == "gamma_eta") {
      sc.gamma_eta.gamma0 = as_number(v, k);
      require_positive(sc.gamma_eta.gamma0, k);
    } else if (key == "gamma_eta_mode") {
      sc.gamma_eta.mode = as_gain_mode(v, k);
    } else if (key == "Gamma") {
      sc.Gamma = as_number(v, k);
      require_positive(sc.Gamma, k);
    } else if (key == "kappa") {
      sc.kappa = as_number(v, k);
      require_positive(sc.kappa, k);
    } else if (key == "sigma") {
      sc.sigma = as_number(v, k);
      if (!(sc.sigma >= 0.0)) throw ConfigError("key '" + k + "' must be non-negative");
    } else if (key == "theta_true") {
      sc.theta_true = as_vector(v, k, 2);
    } else if (key == "theta_hat0") {
      sc.theta_hat0 = as_vector(v, k, 2);
    } else if (key == "eta_hat0") {
      sc.eta_hat0 = as_vector(v, k, 2);
    } else if (key == "Theta_hat0") {
      sc.Theta_hat0 = as_vector(v, k, 3);
    } else {
      throw ConfigError("unknown key '" + k + "' for scenario academic");
    }
  }
  if (cfg.horizon) sc.horizon = *cfg.horizon;
  if (cfg.step) sc.step = *cfg.step;
  return sc;
}

inline robot::RobotScenario build_robot(const RunConfig& cfg) {
  using namespace detail;
  robot::RobotScenario sc;
  robot::SinusoidReference ref;
  for (const auto& [key, v] : cfg.overrides) {
    const std::string k = ov(key);
    if (key == "gamma") {
      sc.gamma.gamma0 = as_number(v, k);
      require_positive(sc.gamma.gamma0, k);
    } else if (key == "gamma_mode") {
      sc.gamma.mode = as_gain_mode(v, k);
    } else if (key == "gamma_eta") {
      sc.gamma_eta.gamma0 = as_number(v, k);
      require_positive(sc.gamma_eta.gamma0, k);
    } else if (key == "gamma_eta_mode") {
      sc.gamma_eta.mode = as_gain_mode(v, k);
    } else if (key == "kappa") {
      sc.kappa = as_number(v, k);
      require_positive(sc.kappa, k);
    } else if (key == "sigma") {
      sc.sigma = as_number(v, k);
      if (!(sc.sigma >= 0.0)) throw ConfigError("key '" + k + "' must be non-negative");
    } else if (key == "filter_k") {
      sc.filter_k = as_number(v, k);
      require_positive(sc.filter_k, k);
    } else if (key == "g") {
      sc.g = as_number(v, k);
    } else if (key == "K1") {
      sc.K1 = as_gain_matrix(v, k);
    } else if (key == "K2") {
      sc.K2 = as_gain_matrix(v, k);
    } else if (key == "theta_true") {
      sc.theta_true = as_vector(v, k, 4);
    } else if (key == "eta_hat0") {
      sc.eta_hat0 = as_vector(v, k, 4);
    } else if (key == "pmono_weights") {
      sc.pmono_weights = as_vector(v, k, 4);
    } else if (key == "q0") {
      sc.q0 = as_vector(v, k, 2);
    } else if (key == "qdot0") {
      sc.qdot0 = as_vector(v, k, 2);
    } else if (key == "reference_amplitude") {
      const Vec a = as_vector(v, k, 2);
      ref.a1 = a[0];
      ref.a2 = a[1];
    } else if (key == "reference_frequency") {
      const Vec w = as_vector(v, k, 2);
      ref.w1 = w[0];
      ref.w2 = w[1];
    } else {
      throw ConfigError("unknown key '" + k + "' for scenario robot");
    }
  }
  sc.reference = ref;
  if (cfg.horizon) sc.horizon = *cfg.horizon;
  if (cfg.step) sc.step = *cfg.step;
  return sc;
}

inline double resolved_horizon(const RunConfig& cfg) {
  if (cfg.horizon) return *cfg.horizon;
  return cfg.scenario == "robot" ? robot::RobotScenario{}.horizon : academic::AcademicScenario{}.horizon;
}

inline double resolved_step(const RunConfig& cfg) {
  if (cfg.step) return *cfg.step;
  return cfg.scenario == "robot" ? robot::RobotScenario{}.step : academic::AcademicScenario{}.step;
}

inline std::vector<std::string> resolved_estimators(const RunConfig& cfg) {
  return cfg.estimators.empty() ? supported_estimators(cfg.scenario) : cfg.estimators;
}

/// Throws ConfigError on the first violated invariant.
inline void validate(const RunConfig& cfg) {
  const auto& names = scenario_names();
  if (std::find(names.begin(), names.end(), cfg.scenario) == names.end())
    throw ConfigError("key 'scenario': unknown scenario '" + cfg.scenario + "'");
  const double h = resolved_step(cfg);
  const double horizon = resolved_horizon(cfg);
  if (!(h > 0.0) || !std::isfinite(h)) throw ConfigError("key 'step' must be positive");
  if (!(horizon > h) || !std::isfinite(horizon)) throw ConfigError("key 'horizon' must exceed step");
  if (cfg.stride < 1) throw ConfigError("key 'stride' must be at least 1");
  const auto supported = supported_estimators(cfg.scenario);
  std::set<std::string> seen;
  for (const auto& e : resolved_estimators(cfg)) {
    if (std::find(supported.begin(), supported.end(), e) == supported.end())
      throw ConfigError("key 'estimators': '" + e + "' is not available for scenario " + cfg.scenario);
    if (!seen.insert(e).second) throw ConfigError("key 'estimators': duplicate '" + e + "'");
  }
  if (cfg.scenario == "academic")
    (void)build_academic(cfg);
  else
    (void)build_robot(cfg);
}

/// Parses TOML text into a config. Unknown overrides are rejected here too.
inline RunConfig parse_config(const std::string& text) {
  toml::Table table;
  try {
    table = toml::parse(text);
  } catch (const toml::ParseError& e) {
    throw ConfigError(e.what());
  }
  using namespace detail;
  RunConfig cfg;
  cfg.seed = default_seed();
  for (const auto& [key, v] : table) {
    if (key.rfind("overrides.", 0) == 0) {
      cfg.overrides.emplace(key.substr(10), v);
    } else if (key == "scenario") {
      cfg.scenario = as_string(v, key);
    } else if (key == "estimators") {
      if (!v.is_array()) throw ConfigError("key 'estimators' must be an array of strings");
      for (const auto& e : v.array) cfg.estimators.push_back(as_string(e, key));
      if (cfg.estimators.empty()) throw ConfigError("key 'estimators' must not be empty");
    } else if (key == "horizon") {
      cfg.horizon = as_number(v, key);
    } else if (key == "step") {
      cfg.step = as_number(v, key);
    } else if (key == "stride") {
      cfg.stride = static_cast<std::size_t>(as_count(v, key));
    } else if (key == "output_dir") {
      cfg.output_dir = as_string(v, key);
    } else if (key == "seed") {
      cfg.seed = as_count(v, key);
    } else {
      throw ConfigError("unknown key '" + key + "'");
    }
  }
  validate(cfg);
  return cfg;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

inline nlohmann::json to_json(const toml::Value& v) {
  switch (v.kind) {
    case toml::Value::Kind::kNumber:
      return v.number;
    case toml::Value::Kind::kBool:
      return v.boolean;
    case toml::Value::Kind::kString:
      return v.str;
    case toml::Value::Kind::kArray: {
      nlohmann::json arr = nlohmann::json::array();
      for (const auto& e : v.array) arr.push_back(to_json(e));
      return arr;
    }
  }
  return nullptr;
}

inline nlohmann::json config_snapshot(const RunConfig& cfg) {
  nlohmann::json ov = nlohmann::json::object();
  for (const auto& [k, v] : cfg.overrides) ov[k] = to_json(v);
  return {{"scenario", cfg.scenario},
          {"estimators", resolved_estimators(cfg)},
          {"horizon", resolved_horizon(cfg)},
          {"step", resolved_step(cfg)},
          {"stride", cfg.stride},
          {"output_dir", cfg.output_dir},
          {"seed", cfg.seed},
          {"overrides", ov}};
}

}  // namespace nlpre

#endif  // NLPRE_CONFIG_HPP_
