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

#ifndef NLPRE_RUN_TABLE_HPP_
#define NLPRE_RUN_TABLE_HPP_

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "nlpre/errors.hpp"

namespace nlpre {

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

// How one estimation law ended. A failed law keeps the rows recorded before
// `failed_at`; later cells are missing (NaN).
struct LawOutcome {
  std::string law;
  bool ok = true;
  std::optional<double> failed_at;
  std::string failure;
};

/// Column-major-by-name table of sampled signals. Column 0 is always "t".
/// Naming: <signal>_<law>_<index> (1-based), e.g. theta_hat_drem_1.
struct RunTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::vector<LawOutcome> outcomes;

  std::optional<std::size_t> find(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (columns[i] == name) return i;
    return std::nullopt;
  }

  std::size_t index(const std::string& name) const {
    if (auto i = find(name)) return *i;
    throw ArgumentError("RunTable: no column '" + name + "'");
  }

  std::vector<double> column(const std::string& name) const {
    const std::size_t c = index(name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r[c]);
    return out;
  }

  // Columns named prefix1, prefix2, ... in order, as long as they exist.
  std::vector<std::size_t> indexed(const std::string& prefix) const {
    std::vector<std::size_t> out;
    for (std::size_t k = 1;; ++k) {
      auto i = find(prefix + std::to_string(k));
      if (!i) break;
      out.push_back(*i);
    }
    return out;
  }

  const LawOutcome* outcome(const std::string& law) const {
    for (const auto& o : outcomes)
      if (o.law == law) return &o;
    return nullptr;
  }
};

/// Extends an aborted run to the full sample grid t_k = k * step * stride
/// with rows whose cells (other than t) are missing.
inline void pad_missing_rows(RunTable& table, double horizon, double step, std::size_t stride) {
  const auto steps = static_cast<std::size_t>(std::llround(horizon / step));
  const std::size_t expected = steps / stride + 1;
  while (table.rows.size() < expected) {
    std::vector<double> row(table.columns.size(), kMissing);
    row[0] = static_cast<double>(table.rows.size() * stride) * step;
    table.rows.push_back(std::move(row));
  }
}

/// Appends the columns of `other` (except its "t") to `base`. Both tables must
/// be sampled on the same time grid.
inline void merge_columns(RunTable& base, const RunTable& other) {
  if (base.columns.empty()) {
    base = other;
    return;
  }
  if (base.rows.size() != other.rows.size())
    throw DimensionError("merge_columns: row counts differ");
  for (std::size_t r = 0; r < base.rows.size(); ++r) {
    if (base.rows[r][0] != other.rows[r][0]) throw ArgumentError("merge_columns: time grids differ");
    base.rows[r].insert(base.rows[r].end(), other.rows[r].begin() + 1, other.rows[r].end());
  }
  base.columns.insert(base.columns.end(), other.columns.begin() + 1, other.columns.end());
  base.outcomes.insert(base.outcomes.end(), other.outcomes.begin(), other.outcomes.end());
}

}  // namespace nlpre

#endif  // NLPRE_RUN_TABLE_HPP_
