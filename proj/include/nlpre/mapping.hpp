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

// Nonlinearly parameterized regressions y = Omega(t) Theta(theta) and the
// linearizing mapping bundle that turns the mixed regression
// Y_psi = Delta psi(theta) into a linear one in theta.
//
// A bundle supplies G, S with S(psi) = G(psi) theta, and "remainder" maps
// T_G, T_S with
//
//   Pi(Delta) G(psi) = T_G(XiBar_G(Delta) Delta psi),
//   Pi(Delta) S(psi) = T_S(XiBar_S(Delta) Delta psi),
//   det Pi(Delta) >= Delta^ell_theta.
//
// The inverse psi -> theta is never coded; verify_bundle audits the bundle
// through the identities above.

#ifndef NLPRE_MAPPING_HPP_
#define NLPRE_MAPPING_HPP_

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "nlpre/errors.hpp"
#include "nlpre/numkit.hpp"

namespace nlpre {

using VecMap = std::function<Vec(std::span<const double>)>;
using MatMap = std::function<Mat(std::span<const double>)>;

/// Selector matrix picking `picks` (0-based) out of a length-p vector.
inline Mat make_selector(std::size_t p, const std::vector<std::size_t>& picks) {
  Mat l(picks.size(), p);
  for (std::size_t i = 0; i < picks.size(); ++i) {
    if (picks[i] >= p) throw DimensionError("make_selector: index out of range");
    l(i, picks[i]) = 1.0;
  }
  return l;
}

struct NlpreProblem {
  std::string name;
  std::size_t n = 0;  // output dimension
  std::size_t p = 0;  // overparameterized dimension
  std::size_t q = 0;  // physical dimension
  VecMap theta_map;   // theta in R^q -> Theta in R^p
  // t -> Omega(t) in R^{n x p}. Empty when the regressor only exists inside
  // a closed loop.
  std::function<Mat(double)> regressor;
  Mat selector;  // q x p, one 1 per row at distinct columns

  void validate() const {
    if (!(p > q && q >= 1)) throw ArgumentError(name + ": need p > q >= 1");
    if (selector.rows() != q || selector.cols() != p)
      throw DimensionError(name + ": selector must be q x p");
    std::vector<bool> used(p, false);
    for (std::size_t i = 0; i < q; ++i) {
      int ones = 0;
      for (std::size_t j = 0; j < p; ++j) {
        const double v = selector(i, j);
        if (v == 1.0) {
          ++ones;
          if (used[j]) throw ArgumentError(name + ": selector columns must be distinct");
          used[j] = true;
        } else if (v != 0.0) {
          throw ArgumentError(name + ": selector entries must be 0 or 1");
        }
      }
      if (ones != 1) throw ArgumentError(name + ": selector needs exactly one 1 per row");
    }
  }
};

inline Vec eval_theta_map(const NlpreProblem& problem, std::span<const double> theta) {
  if (theta.size() != problem.q) throw DimensionError(problem.name + ": theta has wrong length");
  Vec big = problem.theta_map(theta);
  if (big.size() != problem.p)
    throw StructuralError("theta_map", problem.name + ": theta_map returned wrong length");
  return big;
}

inline Vec eval_psi(const NlpreProblem& problem, std::span<const double> theta) {
  return problem.selector * eval_theta_map(problem, theta);
}

/// Central finite-difference Jacobian of psi at theta.
inline Mat psi_jacobian(const NlpreProblem& problem, std::span<const double> theta,
                        double fd_step) {
  if (!(fd_step > 0.0)) throw ArgumentError("psi_jacobian: fd_step must be positive");
  const std::size_t q = problem.q;
  Mat jac(q, q);
  Vec probe(theta.begin(), theta.end());
  for (std::size_t j = 0; j < q; ++j) {
    const double x = probe[j];
    probe[j] = x + fd_step;
    const Vec up = eval_psi(problem, probe);
    probe[j] = x - fd_step;
    const Vec down = eval_psi(problem, probe);
    probe[j] = x;
    for (std::size_t i = 0; i < q; ++i) jac(i, j) = (up[i] - down[i]) / (2.0 * fd_step);
  }
  return jac;
}

/// True when theta lies in the domain where psi is locally invertible.
inline bool check_domain(const NlpreProblem& problem, std::span<const double> theta,
                         double fd_step = 1e-6, double tolerance = 1e-8) {
  return std::abs(det(psi_jacobian(problem, theta, fd_step))) > tolerance;
}

/// Entry (i, j) of Xi is c_ij * Delta^ell_ij.
struct ExponentEntry {
  int c = 0;    // 0 or 1
  int ell = 1;  // >= 1
};

class ExponentTable {
 public:
  ExponentTable() = default;
  ExponentTable(std::size_t rows, std::size_t cols, std::vector<ExponentEntry> entries)
      : rows_(rows), cols_(cols), entries_(std::move(entries)) {
    if (entries_.size() != rows * cols) throw DimensionError("ExponentTable: entry count");
    for (const auto& e : entries_) {
      if (e.c != 0 && e.c != 1) throw ArgumentError("ExponentTable: c must be 0 or 1");
      if (e.ell < 1) throw ArgumentError("ExponentTable: ell must be >= 1");
    }
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  const ExponentEntry& at(std::size_t i, std::size_t j) const { return entries_[i * cols_ + j]; }

  /// XiBar(Delta): entries c_ij * Delta^(ell_ij - 1).
  Mat reduced(double delta) const {
    Mat m(rows_, cols_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) {
        const auto& e = at(i, j);
        if (e.c != 0) m(i, j) = std::pow(delta, e.ell - 1);
      }
    return m;
  }

  /// Xi(Delta) = XiBar(Delta) * Delta.
  Mat full(double delta) const { return delta * reduced(delta); }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<ExponentEntry> entries_;
};

struct MappingBundle {
  std::string name;
  std::size_t q = 0;
  MatMap G;  // psi -> R^{q x q}
  VecMap S;  // psi -> R^q
  ExponentTable xi_G;  // Delta_G x q
  ExponentTable xi_S;  // Delta_S x q
  MatMap T_G;          // R^{Delta_G} -> R^{q x q}
  VecMap T_S;          // R^{Delta_S} -> R^q
  int ell_theta = 1;
  std::function<Mat(double)> Pi;  // verification only
  std::string notes;

  Mat xi_bar_G(double delta) const { return xi_G.reduced(delta); }
  Mat xi_bar_S(double delta) const { return xi_S.reduced(delta); }
};

struct VerificationReport {
  std::size_t samples_checked = 0;
  std::size_t samples_rejected = 0;
  double max_residual_SG = 0.0;
  double max_residual_PiG = 0.0;
  double max_residual_PiS = 0.0;
  double min_detPi_margin = 0.0;
  double min_rankG_sigma = 0.0;
  double tolerance = 1e-9;
  std::vector<std::string> failed_checks;
  bool pass = false;
};

inline void to_json(nlohmann::json& j, const VerificationReport& r) {
  j = nlohmann::json{{"samples_checked", r.samples_checked},
                     {"samples_rejected", r.samples_rejected},
                     {"max_residual_SG", r.max_residual_SG},
                     {"max_residual_PiG", r.max_residual_PiG},
                     {"max_residual_PiS", r.max_residual_PiS},
                     {"min_detPi_margin", r.min_detPi_margin},
                     {"min_rankG_sigma", r.min_rankG_sigma},
                     {"tolerance", r.tolerance},
                     {"failed_checks", r.failed_checks},
                     {"pass", r.pass}};
}

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

struct VerifyOptions {
  std::size_t sample_count = 1000;
  std::uint64_t seed = 42;
  std::vector<Interval> theta_box;  // one interval per theta component
  Interval delta_range{0.1, 10.0};
  double tolerance = 1e-9;
  std::size_t max_rejections = 100000;
};

namespace detail {

inline double relative_gap(std::span<const double> lhs, std::span<const double> rhs) {
  double diff = 0.0;
  double scale = 0.0;
  for (std::size_t i = 0; i < lhs.size(); ++i) {
    diff = std::max(diff, std::abs(lhs[i] - rhs[i]));
    scale = std::max({scale, std::abs(lhs[i]), std::abs(rhs[i])});
  }
  return scale > 0.0 ? diff / scale : 0.0;
}

template <class T>
void expect_shape(const T& value, std::size_t rows, std::size_t cols, const char* mapping,
                  const std::string& bundle) {
  if constexpr (std::is_same_v<T, Mat>) {
    if (value.rows() != rows || value.cols() != cols) {
      throw StructuralError(mapping, bundle + ": " + mapping + " returned " +
                                         std::to_string(value.rows()) + "x" +
                                         std::to_string(value.cols()) + ", expected " +
                                         std::to_string(rows) + "x" + std::to_string(cols));
    }
  } else {
    if (value.size() != rows) {
      throw StructuralError(mapping, bundle + ": " + mapping + " returned length " +
                                         std::to_string(value.size()) + ", expected " +
                                         std::to_string(rows));
    }
  }
}

}  // namespace detail

/// Samples theta uniformly in the box (rejecting points outside the
/// invertibility domain) and Delta uniformly in delta_range, then checks the
/// five linearizing conditions at each sample. Residuals are relative to the
/// larger magnitude of the two sides; the det(Pi) margin is relative to
/// max(1, Delta^ell_theta).
inline VerificationReport verify_bundle(const NlpreProblem& problem, const MappingBundle& bundle,
                                        const VerifyOptions& options) {
  if (options.sample_count < 1) throw ArgumentError("verify_bundle: sample_count must be >= 1");
  if (options.theta_box.size() != problem.q)
    throw DimensionError("verify_bundle: theta_box must have q intervals");
  if (bundle.q != problem.q) throw StructuralError("q", bundle.name + ": bundle q != problem q");
  const std::size_t q = problem.q;
  if (bundle.xi_G.cols() != q) throw StructuralError("XiBar_G", bundle.name + ": XiBar_G must have q columns");
  if (bundle.xi_S.cols() != q) throw StructuralError("XiBar_S", bundle.name + ": XiBar_S must have q columns");

  std::mt19937_64 rng(options.seed);
  std::vector<std::uniform_real_distribution<double>> theta_dist;
  for (const auto& iv : options.theta_box) theta_dist.emplace_back(iv.lo, iv.hi);
  std::uniform_real_distribution<double> delta_dist(options.delta_range.lo, options.delta_range.hi);

  VerificationReport report;
  report.tolerance = options.tolerance;
  report.min_detPi_margin = std::numeric_limits<double>::infinity();
  report.min_rankG_sigma = std::numeric_limits<double>::infinity();

  Vec theta(q);
  while (report.samples_checked < options.sample_count) {
    for (std::size_t i = 0; i < q; ++i) theta[i] = theta_dist[i](rng);
    const double delta = delta_dist(rng);
    if (!check_domain(problem, theta)) {
      if (++report.samples_rejected > options.max_rejections)
        throw ArgumentError("verify_bundle: theta box lies outside the domain");
      continue;
    }
    const Vec psi = eval_psi(problem, theta);

    const Mat g = bundle.G(psi);
    detail::expect_shape(g, q, q, "G", bundle.name);
    const Vec s = bundle.S(psi);
    detail::expect_shape(s, q, 1, "S", bundle.name);
    const Mat pi = bundle.Pi(delta);
    detail::expect_shape(pi, q, q, "Pi", bundle.name);

    Vec y_psi = psi;
    for (double& v : y_psi) v *= delta;
    const Vec arg_g = bundle.xi_bar_G(delta) * y_psi;
    const Vec arg_s = bundle.xi_bar_S(delta) * y_psi;
    const Mat tg = bundle.T_G(arg_g);
    detail::expect_shape(tg, q, q, "T_G", bundle.name);
    const Vec ts = bundle.T_S(arg_s);
    detail::expect_shape(ts, q, 1, "T_S", bundle.name);

    const Vec g_theta = g * theta;
    report.max_residual_SG = std::max(report.max_residual_SG, detail::relative_gap(s, g_theta));
    const Mat pi_g = pi * g;
    report.max_residual_PiG =
        std::max(report.max_residual_PiG, detail::relative_gap(pi_g.data(), tg.data()));
    const Vec pi_s = pi * s;
    report.max_residual_PiS = std::max(report.max_residual_PiS, detail::relative_gap(pi_s, ts));

    const double bound = std::pow(delta, bundle.ell_theta);
    const double margin = (det(pi) - bound) / std::max(1.0, bound);
    report.min_detPi_margin = std::min(report.min_detPi_margin, margin);
    report.min_rankG_sigma = std::min(report.min_rankG_sigma, min_singular_value(g));
    ++report.samples_checked;
  }

  const double tol = options.tolerance;
  if (bundle.ell_theta < 1) report.failed_checks.push_back("ell_theta");
  if (report.max_residual_SG > tol) report.failed_checks.push_back("S = G theta");
  if (report.max_residual_PiG > tol) report.failed_checks.push_back("Pi G = T_G");
  if (report.max_residual_PiS > tol) report.failed_checks.push_back("Pi S = T_S");
  if (report.min_detPi_margin < -tol) report.failed_checks.push_back("det Pi >= Delta^ell");
  if (!(report.min_rankG_sigma > tol)) report.failed_checks.push_back("rank G = q");
  report.pass = report.failed_checks.empty();
  return report;
}

}  // namespace nlpre

#endif  // NLPRE_MAPPING_HPP_
