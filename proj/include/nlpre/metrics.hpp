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

// Run metrics as pure functions of RunTable rows, so a table read back from
// CSV reproduces them exactly.

#ifndef NLPRE_METRICS_HPP_
#define NLPRE_METRICS_HPP_

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nlpre/estimators.hpp"
#include "nlpre/numkit.hpp"
#include "nlpre/pipeline.hpp"
#include "nlpre/run_table.hpp"

namespace nlpre {

inline constexpr double kMonotonicitySlack = 1e-9;
inline constexpr double kDeltaSlack = 1e-12;

namespace detail {

inline bool finite_row(const std::vector<double>& row, const std::vector<std::size_t>& cols) {
  for (std::size_t c : cols)
    if (!std::isfinite(row[c])) return false;
  return true;
}

inline double inf_norm_of(const std::vector<double>& row, const std::vector<std::size_t>& cols) {
  double m = 0.0;
  for (std::size_t c : cols) m = std::max(m, std::abs(row[c]));
  return m;
}

inline nlohmann::json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

// Number of leading rows with every listed column finite.
inline std::size_t finite_prefix(const RunTable& t, const std::vector<std::size_t>& cols) {
  std::size_t n = 0;
  while (n < t.rows.size() && finite_row(t.rows[n], cols)) ++n;
  return n;
}

}  // namespace detail

/// Earliest recorded time after which ‖err‖∞ stays at or below
/// `fraction * ‖err(0)‖∞` for the rest of the finite trace.
inline std::optional<double> convergence_time(const RunTable& t, const std::vector<std::size_t>& cols,
                                              double fraction) {
  const std::size_t n = detail::finite_prefix(t, cols);
  if (n == 0) return std::nullopt;
  const double bound = fraction * detail::inf_norm_of(t.rows[0], cols);
  std::optional<double> since;
  for (std::size_t r = 0; r < n; ++r) {
    if (detail::inf_norm_of(t.rows[r], cols) <= bound) {
      if (!since) since = t.rows[r][0];
    } else {
      since.reset();
    }
  }
  return since;
}

inline DeltaMonitor delta_metrics(const RunTable& t, std::size_t delta_col) {
  DeltaMonitor mon;
  mon.slack = kDeltaSlack;
  for (const auto& row : t.rows) {
    if (!std::isfinite(row[delta_col])) break;
    mon = monitor_delta(mon, MixedSignals{{}, row[delta_col], row[0]});
  }
  return mon;
}

inline nlohmann::json to_json(const DeltaMonitor& m) {
  return {{"t_e", detail::optional_json(m.t_e_detected)},
          {"delta_at_te", m.t_e_detected ? nlohmann::json(m.delta_at_te) : nlohmann::json(nullptr)},
          {"delta_lb_observed", m.t_e_detected ? nlohmann::json(m.delta_lb_observed) : nlohmann::json(nullptr)},
          {"slack", m.slack},
          {"decrease_violations", m.decrease_violations},
          {"worst_decrease", m.worst_decrease},
          {"below_lb_after_te", m.below_lb_after_te}};
}

/// Excitation over the whole finite trace from columns omega_<tag>r_c, read
/// as the rows x cols regressor Ω; the Gram matrix is that of Ωᵀ.
inline ExcitationReport excitation_metrics(const RunTable& t, const std::string& tag, std::size_t rows,
                                           std::size_t cols) {
  std::vector<std::size_t> idx;
  for (std::size_t r = 1; r <= rows; ++r)
    for (std::size_t c = 1; c <= cols; ++c)
      idx.push_back(t.index("omega_" + tag + std::to_string(r) + "_" + std::to_string(c)));
  const std::size_t n = detail::finite_prefix(t, idx);
  if (n < 2) throw ArgumentError("excitation_metrics: fewer than two finite samples");
  TimeSeries<Mat> series;
  for (std::size_t k = 0; k < n; ++k) {
    Mat w(cols, rows);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < cols; ++c) w(c, r) = t.rows[k][idx[r * cols + c]];
    series.push(t.rows[k][0], std::move(w));
  }
  return excitation_level(series, series.front().t, series.back().t);
}

inline nlohmann::json to_json(const ExcitationReport& e) {
  return {{"t1", e.t1}, {"t2", e.t2}, {"alpha", e.alpha}, {"is_FE", e.is_FE}};
}

inline nlohmann::json monotonicity_metrics(const RunTable& t, const std::vector<std::size_t>& cols) {
  TimeSeries<Vec> series;
  for (const auto& row : t.rows) {
    Vec e;
    for (std::size_t c : cols) e.push_back(row[c]);
    series.push(row[0], std::move(e));
  }
  const MonotonicityReport rep = monotonicity_audit(series, kMonotonicitySlack);
  return {{"slack", kMonotonicitySlack},
          {"violations", rep.violations},
          {"per_component", rep.per_component},
          {"worst_excess", rep.worst_excess}};
}

namespace detail {

inline std::optional<double> last_finite(const RunTable& t, std::size_t col) {
  for (auto it = t.rows.rbegin(); it != t.rows.rend(); ++it)
    if (std::isfinite((*it)[col])) return (*it)[col];
  return std::nullopt;
}

inline nlohmann::json law_metrics(const RunTable& t, const std::string& law, bool robot) {
  const auto err = t.indexed("theta_err_" + law + "_");
  const auto hat = t.indexed("theta_hat_" + law + "_");
  if (err.empty()) throw ArgumentError("metrics: no error columns for law '" + law + "'");
  const std::size_t n = finite_prefix(t, err);
  nlohmann::json j;
  j["finite_samples"] = n;
  j["final_time"] = n ? nlohmann::json(t.rows[n - 1][0]) : nlohmann::json(nullptr);
  j["theta_err_inf_initial"] = n ? nlohmann::json(inf_norm_of(t.rows[0], err)) : nlohmann::json(nullptr);
  j["theta_err_inf_final"] = n ? nlohmann::json(inf_norm_of(t.rows[n - 1], err)) : nlohmann::json(nullptr);
  nlohmann::json fin = nlohmann::json::array();
  if (n)
    for (std::size_t c : hat) fin.push_back(t.rows[n - 1][c]);
  j["theta_hat_final"] = fin;
  j["convergence_time_5pct"] = optional_json(convergence_time(t, err, 0.05));
  j["convergence_time_1pct"] = optional_json(convergence_time(t, err, 0.01));
  j["monotonicity"] = monotonicity_metrics(t, err);

  if (auto m = t.find("M_" + law)) {
    j["M_final"] = optional_json(last_finite(t, *m));
    j["int_M2_final"] = optional_json(last_finite(t, t.index("int_M2_" + law)));
  }

  if (robot) {
    const auto qe = t.indexed("q_err_" + law + "_");
    const auto qde = t.indexed("qdot_err_" + law + "_");
    const std::size_t nq = finite_prefix(t, qde);
    double peak_q = 0.0, peak_qd = 0.0;
    for (std::size_t r = 0; r < nq; ++r) {
      peak_q = std::max(peak_q, inf_norm_of(t.rows[r], qe));
      peak_qd = std::max(peak_qd, inf_norm_of(t.rows[r], qde));
    }
    j["q_err_inf_final"] = nq ? nlohmann::json(inf_norm_of(t.rows[nq - 1], qe)) : nlohmann::json(nullptr);
    j["qdot_err_inf_final"] = nq ? nlohmann::json(inf_norm_of(t.rows[nq - 1], qde)) : nlohmann::json(nullptr);
    j["q_err_peak"] = peak_q;
    j["qdot_err_peak"] = peak_qd;
    j["delta"] = to_json(delta_metrics(t, t.index("Delta_" + law)));
    j["excitation"] = to_json(excitation_metrics(t, law + "_", 2, 5));
  }
  return j;
}

}  // namespace detail

/// Everything in metrics.json except the law outcomes, which are not
/// recorded in rows.
inline nlohmann::json compute_metrics(const RunTable& t, const std::string& scenario,
                                      const std::vector<std::string>& laws) {
  const bool robot = scenario == "robot";
  nlohmann::json j;
  j["scenario"] = scenario;
  j["samples"] = t.rows.size();
  if (!robot) {
    j["signals"] = {{"delta", to_json(delta_metrics(t, t.index("Delta")))},
                    {"excitation", to_json(excitation_metrics(t, "", 1, 3))}};
  }
  nlohmann::json per_law = nlohmann::json::object();
  for (const auto& law : laws) per_law[law] = detail::law_metrics(t, law, robot);
  j["laws"] = per_law;
  return j;
}

inline nlohmann::json outcomes_json(const RunTable& t) {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& o : t.outcomes)
    out[o.law] = {{"ok", o.ok}, {"failed_at", detail::optional_json(o.failed_at)}, {"failure", o.failure}};
  return out;
}

}  // namespace nlpre

#endif  // NLPRE_METRICS_HPP_
