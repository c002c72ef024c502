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

#ifndef NLPRE_REPORT_IO_HPP_
#define NLPRE_REPORT_IO_HPP_

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "nlpre/errors.hpp"
#include "nlpre/run_table.hpp"

namespace nlpre {

// %.17g round-trips every double; missing cells are left empty.
inline std::string format_cell(double v) {
  if (!std::isfinite(v)) return std::isnan(v) ? "" : (v > 0 ? "inf" : "-inf");
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string to_csv(const RunTable& t) {
  std::string out;
  for (std::size_t i = 0; i < t.columns.size(); ++i) {
    if (i) out += ',';
    out += t.columns[i];
  }
  out += '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += format_cell(row[i]);
    }
    out += '\n';
  }
  return out;
}

/// Inverse of to_csv (outcomes are not part of the CSV).
inline RunTable from_csv(const std::string& text) {
  RunTable t;
  std::istringstream in(text);
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = s.find(',', start);
      cells.push_back(s.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    return cells;
  };
  if (!std::getline(in, line)) throw ArgumentError("from_csv: missing header");
  t.columns = split(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != t.columns.size()) throw DimensionError("from_csv: ragged row");
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) {
      if (c.empty()) {
        row.push_back(kMissing);
      } else if (c == "inf" || c == "-inf") {
        row.push_back(c[0] == '-' ? -std::numeric_limits<double>::infinity()
                                  : std::numeric_limits<double>::infinity());
      } else {
        char* end = nullptr;
        row.push_back(std::strtod(c.c_str(), &end));
        if (*end != '\0') throw ArgumentError("from_csv: bad number '" + c + "'");
      }
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

namespace svg {

struct Series {
  std::string label;
  std::string color;
  std::vector<double> t;
  std::vector<double> v;  // NaN breaks the line
  bool dashed = false;
};

struct Panel {
  std::string title;
  std::vector<Series> series;
  bool log_y = false;
};

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.5g", v);
  return buf;
}

inline std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '<')
      out += "&lt;";
    else if (c == '>')
      out += "&gt;";
    else if (c == '&')
      out += "&amp;";
    else
      out += c;
  }
  return out;
}

inline constexpr double kWidth = 760.0;
inline constexpr double kPanelHeight = 210.0;
inline constexpr double kLeft = 70.0;
inline constexpr double kRight = 150.0;
inline constexpr double kTop = 28.0;
inline constexpr double kBottom = 30.0;
inline constexpr double kLogFloor = 1e-16;

inline void render_panel(std::ostringstream& os, const Panel& p, double y0) {
  double tmin = std::numeric_limits<double>::infinity(), tmax = -tmin;
  double vmin = tmin, vmax = -tmin;
  auto tr = [&](double v) { return p.log_y ? std::log10(std::max(std::abs(v), kLogFloor)) : v; };
  for (const auto& s : p.series)
    for (std::size_t i = 0; i < s.t.size(); ++i) {
      if (!std::isfinite(s.v[i])) continue;
      tmin = std::min(tmin, s.t[i]);
      tmax = std::max(tmax, s.t[i]);
      vmin = std::min(vmin, tr(s.v[i]));
      vmax = std::max(vmax, tr(s.v[i]));
    }
  if (!std::isfinite(tmin)) {
    tmin = 0.0;
    tmax = 1.0;
    vmin = 0.0;
    vmax = 1.0;
  }
  if (tmax <= tmin) tmax = tmin + 1.0;
  if (vmax - vmin < 1e-12) {
    vmin -= 0.5;
    vmax += 0.5;
  }
  const double pad = 0.05 * (vmax - vmin);
  vmin -= pad;
  vmax += pad;

  const double x_lo = kLeft, x_hi = kWidth - kRight;
  const double y_lo = y0 + kPanelHeight - kBottom, y_hi = y0 + kTop;
  auto px = [&](double t) { return x_lo + (t - tmin) / (tmax - tmin) * (x_hi - x_lo); };
  auto py = [&](double v) { return y_lo - (v - vmin) / (vmax - vmin) * (y_lo - y_hi); };

  os << "<text x=\"" << num(x_lo) << "\" y=\"" << num(y0 + 18) << "\" font-size=\"13\">" << escape(p.title)
     << "</text>\n";
  os << "<rect x=\"" << num(x_lo) << "\" y=\"" << num(y_hi) << "\" width=\"" << num(x_hi - x_lo)
     << "\" height=\"" << num(y_lo - y_hi) << "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double v = vmin + (vmax - vmin) * k / 4.0;
    const std::string label = p.log_y ? "1e" + num(std::round(v * 10.0) / 10.0) : num(v);
    os << "<text x=\"" << num(x_lo - 6) << "\" y=\"" << num(py(v) + 4)
       << "\" font-size=\"10\" text-anchor=\"end\">" << label << "</text>\n";
    const double t = tmin + (tmax - tmin) * k / 4.0;
    os << "<text x=\"" << num(px(t)) << "\" y=\"" << num(y_lo + 14) << "\" font-size=\"10\" text-anchor=\"middle\">"
       << num(t) << "</text>\n";
  }

  double legend_y = y_hi + 10;
  for (const auto& s : p.series) {
    const std::size_t n = s.t.size();
    const std::size_t every = std::max<std::size_t>(1, n / 1500);
    std::string pts;
    auto flush = [&]() {
      if (!pts.empty())
        os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.4\""
           << (s.dashed ? " stroke-dasharray=\"5,3\"" : "") << " points=\"" << pts << "\"/>\n";
      pts.clear();
    };
    for (std::size_t i = 0; i < n; ++i) {
      if (i % every != 0 && i + 1 != n) continue;
      if (!std::isfinite(s.v[i])) {
        flush();
        continue;
      }
      pts += num(px(s.t[i])) + "," + num(py(tr(s.v[i]))) + " ";
    }
    flush();
    os << "<line x1=\"" << num(x_hi + 10) << "\" y1=\"" << num(legend_y) << "\" x2=\"" << num(x_hi + 30)
       << "\" y2=\"" << num(legend_y) << "\" stroke=\"" << s.color << "\" stroke-width=\"2\""
       << (s.dashed ? " stroke-dasharray=\"5,3\"" : "") << "/>\n";
    os << "<text x=\"" << num(x_hi + 34) << "\" y=\"" << num(legend_y + 4) << "\" font-size=\"10\">"
       << escape(s.label) << "</text>\n";
    legend_y += 14;
  }
}

inline std::string render(const std::vector<Panel>& panels) {
  std::ostringstream os;
  const double h = kPanelHeight * static_cast<double>(panels.size());
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(kWidth) << "\" height=\"" << num(h)
     << "\" viewBox=\"0 0 " << num(kWidth) << " " << num(h) << "\" font-family=\"sans-serif\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (std::size_t i = 0; i < panels.size(); ++i)
    render_panel(os, panels[i], kPanelHeight * static_cast<double>(i));
  os << "</svg>\n";
  return os.str();
}

inline std::string law_color(const std::string& law) {
  if (law == "drem") return "#1f77b4";
  if (law == "pmono") return "#d62728";
  if (law == "overparam") return "#2ca02c";
  return "#7f7f7f";
}

}  // namespace svg

/// Estimate traces against the true values, ‖θ̃‖∞ on a log axis and, for
/// the robot, the tracking errors.
inline std::string render_figure(const RunTable& t, const std::string& scenario,
                                 const std::vector<std::string>& laws) {
  const std::vector<double> time = t.column("t");
  std::vector<svg::Panel> panels;
  if (laws.empty()) return svg::render(panels);

  const std::size_t q = t.indexed("theta_hat_" + laws.front() + "_").size();
  for (std::size_t i = 1; i <= q; ++i) {
    svg::Panel p;
    p.title = "theta_hat_" + std::to_string(i) + " vs t";
    std::optional<double> truth;
    for (const auto& law : laws) {
      const auto hat = t.column("theta_hat_" + law + "_" + std::to_string(i));
      const auto err = t.column("theta_err_" + law + "_" + std::to_string(i));
      if (!truth && !hat.empty() && std::isfinite(hat[0]) && std::isfinite(err[0])) truth = hat[0] - err[0];
      p.series.push_back({law, svg::law_color(law), time, hat, false});
    }
    if (truth) p.series.push_back({"true", "#000000", time, std::vector<double>(time.size(), *truth), true});
    panels.push_back(std::move(p));
  }

  svg::Panel norm;
  norm.title = "|theta_err|_inf vs t (log)";
  norm.log_y = true;
  for (const auto& law : laws) {
    const auto cols = t.indexed("theta_err_" + law + "_");
    std::vector<double> v;
    for (const auto& row : t.rows) {
      double m = 0.0;
      for (std::size_t c : cols) m = std::isfinite(row[c]) && std::isfinite(m) ? std::max(m, std::abs(row[c])) : kMissing;
      v.push_back(m);
    }
    norm.series.push_back({law, svg::law_color(law), time, v, false});
  }
  panels.push_back(std::move(norm));

  if (scenario == "robot") {
    for (const std::string sig : {"q_err", "qdot_err"}) {
      for (std::size_t i = 1; i <= 2; ++i) {
        svg::Panel p;
        p.title = sig + "_" + std::to_string(i) + " vs t";
        for (const auto& law : laws)
          p.series.push_back({law, svg::law_color(law), time, t.column(sig + "_" + law + "_" + std::to_string(i)), false});
        panels.push_back(std::move(p));
      }
    }
  }
  return svg::render(panels);
}

}  // namespace nlpre

#endif  // NLPRE_REPORT_IO_HPP_
