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

// Dynamic regressor extension and the two mixing steps.
//
//   d/dt y_bar     = exp(-sigma (t - t0)) Omega^T y,      y_bar(t0) = 0
//   d/dt Omega_bar = exp(-sigma (t - t0)) Omega^T Omega,  Omega_bar(t0) = 0
//
//   Y_psi = L adj(Omega_bar) y_bar,  Delta = det(Omega_bar)     (Y_psi = Delta psi)
//   Y_theta = adj(T_G) T_S,          M = det(T_G)               (Y_theta = M theta)
//
// with T_G, T_S evaluated at XiBar_G(Delta) Y_psi and XiBar_S(Delta) Y_psi.

#ifndef NLPRE_PIPELINE_HPP_
#define NLPRE_PIPELINE_HPP_

#include <cmath>
#include <limits>
#include <optional>
#include <span>

#include "nlpre/errors.hpp"
#include "nlpre/mapping.hpp"
#include "nlpre/numkit.hpp"

namespace nlpre {

struct ExtensionState {
  Vec y_bar;       // p
  Mat omega_bar;   // p x p, symmetric PSD
  double t = 0.0;
  double sigma = 1.0;
  double t0 = 0.0;

  static ExtensionState zero(std::size_t p, double sigma, double t0 = 0.0) {
    return ExtensionState{Vec(p, 0.0), Mat(p, p), t0, sigma, t0};
  }

  std::size_t p() const { return y_bar.size(); }

  // Packed layout inside a composite ODE state: y_bar then omega_bar row-major.
  static constexpr std::size_t packed_size(std::size_t p) { return p + p * p; }

  static ExtensionState unpack(std::span<const double> packed, std::size_t p, double t,
                               double sigma, double t0) {
    if (packed.size() < packed_size(p)) throw DimensionError("ExtensionState::unpack: short span");
    ExtensionState s;
    s.y_bar.assign(packed.begin(), packed.begin() + static_cast<std::ptrdiff_t>(p));
    s.omega_bar = Mat(p, p);
    std::copy(packed.begin() + static_cast<std::ptrdiff_t>(p),
              packed.begin() + static_cast<std::ptrdiff_t>(packed_size(p)),
              s.omega_bar.data().begin());
    s.t = t;
    s.sigma = sigma;
    s.t0 = t0;
    return s;
  }
};

struct ExtensionDerivative {
  Vec y_bar_dot;
  Mat omega_bar_dot;

  void pack(std::span<double> out) const {
    const std::size_t p = y_bar_dot.size();
    std::copy(y_bar_dot.begin(), y_bar_dot.end(), out.begin());
    const auto od = omega_bar_dot.data();
    std::copy(od.begin(), od.end(), out.begin() + static_cast<std::ptrdiff_t>(p));
  }
};

struct MixedSignals {
  Vec Y_psi;
  double Delta = 0.0;
  double t = 0.0;
};

struct LinearRegression {
  Vec Y_theta;
  double M = 0.0;
  double t = 0.0;
};

inline ExtensionDerivative extension_rhs(const ExtensionState& state, const Mat& omega,
                                         std::span<const double> y) {
  const std::size_t p = state.p();
  if (omega.cols() != p) throw DimensionError("extension_rhs: regressor has wrong column count");
  if (omega.rows() != y.size()) throw DimensionError("extension_rhs: y length != regressor rows");
  const double w = std::exp(-state.sigma * (state.t - state.t0));
  ExtensionDerivative d{Vec(p, 0.0), Mat(p, p)};
  for (std::size_t r = 0; r < omega.rows(); ++r) {
    for (std::size_t i = 0; i < p; ++i) {
      const double oi = omega(r, i);
      if (oi == 0.0) continue;
      d.y_bar_dot[i] += w * oi * y[r];
      for (std::size_t j = 0; j < p; ++j) d.omega_bar_dot(i, j) += w * oi * omega(r, j);
    }
  }
  return d;
}

/// Y = selector adj(Omega_bar) y_bar, Delta = det(Omega_bar). The selector is
/// L for the proposed law; pass any other row selector (e.g. the P-monotone
/// baseline's C) to mix a different subset.
inline MixedSignals mix_first(const Mat& selector, const ExtensionState& state) {
  if (selector.cols() != state.p()) throw DimensionError("mix_first: selector has wrong width");
  MixedSignals m;
  m.Y_psi = selector * (adjugate(state.omega_bar) * state.y_bar);
  m.Delta = det(state.omega_bar);
  m.t = state.t;
  return m;
}

inline MixedSignals mix_first(const NlpreProblem& problem, const ExtensionState& state) {
  return mix_first(problem.selector, state);
}

inline LinearRegression mix_second(const MappingBundle& bundle, const MixedSignals& mixed) {
  if (mixed.Y_psi.size() != bundle.q) throw DimensionError("mix_second: Y_psi length != q");
  const Vec arg_g = bundle.xi_bar_G(mixed.Delta) * mixed.Y_psi;
  const Vec arg_s = bundle.xi_bar_S(mixed.Delta) * mixed.Y_psi;
  const Mat tg = bundle.T_G(arg_g);
  const Vec ts = bundle.T_S(arg_s);
  if (tg.rows() != bundle.q || !tg.square()) throw StructuralError("T_G", bundle.name + ": T_G shape");
  if (ts.size() != bundle.q) throw StructuralError("T_S", bundle.name + ": T_S length");
  LinearRegression reg;
  reg.Y_theta = adjugate(tg) * ts;
  reg.M = det(tg);
  reg.t = mixed.t;
  return reg;
}

struct ExcitationReport {
  double t1 = 0.0;
  double t2 = 0.0;
  Mat gram;  // integral of omega omega^T over [t1, t2]
  double alpha = 0.0;
  bool is_FE = false;
};

inline constexpr double kExcitationThreshold = 1e-10;

/// Trapezoidal integral of omega omega^T over the samples falling inside
/// [t1, t2]; alpha is the smallest eigenvalue of the result.
inline ExcitationReport excitation_level(const TimeSeries<Mat>& omega_series, double t1, double t2) {
  if (!(t2 > t1)) throw ArgumentError("excitation_level: empty window");
  if (omega_series.empty()) throw ArgumentError("excitation_level: empty series");
  const double slack = 1e-9 * std::max(1.0, omega_series.step());
  if (t1 < omega_series.front().t - slack || t2 > omega_series.back().t + slack)
    throw ArgumentError("excitation_level: window outside series span");

  const std::size_t k = omega_series.front().value.rows();
  ExcitationReport rep;
  rep.t1 = t1;
  rep.t2 = t2;
  rep.gram = Mat(k, k);

  const Mat* prev = nullptr;
  double prev_t = 0.0;
  std::size_t used = 0;
  for (const auto& s : omega_series) {
    if (s.t < t1 - slack || s.t > t2 + slack) continue;
    if (s.value.rows() != k) throw DimensionError("excitation_level: inconsistent sample shape");
    ++used;
    if (prev != nullptr) {
      const double dt = s.t - prev_t;
      const Mat a = *prev * transpose(*prev);
      const Mat b = s.value * transpose(s.value);
      for (std::size_t i = 0; i < k * k; ++i)
        rep.gram.data()[i] += 0.5 * dt * (a.data()[i] + b.data()[i]);
    }
    prev = &s.value;
    prev_t = s.t;
  }
  if (used < 2) throw ArgumentError("excitation_level: fewer than two samples in window");
  rep.alpha = symmetric_eigenvalues(rep.gram).front();
  rep.is_FE = rep.alpha > kExcitationThreshold;
  return rep;
}

/// Tracks the time at which Delta first reaches `threshold` and the smallest
/// Delta seen from then on. Omega_bar grows in the Loewner order, so Delta
/// must be nondecreasing; drops larger than slack * max(1, |Delta|) are
/// counted as violations.
struct DeltaMonitor {
  double threshold = 1e-12;
  double slack = 1e-12;
  std::optional<double> t_e_detected;
  double delta_at_te = 0.0;
  double delta_lb_observed = std::numeric_limits<double>::infinity();
  std::size_t samples = 0;
  std::size_t decrease_violations = 0;
  double worst_decrease = 0.0;
  std::size_t below_lb_after_te = 0;
  std::optional<double> last_t;
  double last_delta = 0.0;
};

inline DeltaMonitor monitor_delta(DeltaMonitor monitor, const MixedSignals& mixed) {
  if (monitor.last_t && !(mixed.t > *monitor.last_t))
    throw ArgumentError("monitor_delta: samples out of time order");
  const double d = mixed.Delta;
  if (monitor.last_t) {
    const double drop = monitor.last_delta - d;
    if (drop > monitor.slack * std::max(1.0, std::abs(monitor.last_delta))) {
      ++monitor.decrease_violations;
      monitor.worst_decrease = std::max(monitor.worst_decrease, drop);
    }
  }
  if (!monitor.t_e_detected && d >= monitor.threshold) {
    monitor.t_e_detected = mixed.t;
    monitor.delta_at_te = d;
  }
  if (monitor.t_e_detected) {
    const double rel = monitor.slack * std::max(1.0, std::abs(monitor.delta_at_te));
    if (d < monitor.delta_at_te - rel) ++monitor.below_lb_after_te;
    monitor.delta_lb_observed = std::min(monitor.delta_lb_observed, d);
  }
  ++monitor.samples;
  monitor.last_t = mixed.t;
  monitor.last_delta = d;
  return monitor;
}

}  // namespace nlpre

#endif  // NLPRE_PIPELINE_HPP_
