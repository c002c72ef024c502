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

// Estimation laws driven by the mixed regressions.
//
//  - drem:      gradient descent on the scalar-decoupled regression
//               Y_theta = M theta. Every error component obeys
//               d/dt theta_err_i = -gamma M^2 theta_err_i, hence decays
//               monotonically.
//  - pmono:     gradient law in substituted coordinates eta = D(theta) on
//               Y = Delta W(eta); theta recovered through D^I, which divides.
//  - overparam: classic gradient law on Theta, theta recalculated from Theta.

#ifndef NLPRE_ESTIMATORS_HPP_
#define NLPRE_ESTIMATORS_HPP_

#include <cmath>
#include <functional>
#include <span>
#include <string>

#include "nlpre/errors.hpp"
#include "nlpre/numkit.hpp"
#include "nlpre/pipeline.hpp"

namespace nlpre {

enum class GainMode { kConstant, kNormalized };

inline const char* to_string(GainMode mode) {
  return mode == GainMode::kConstant ? "constant" : "normalized";
}

/// Constant gain gamma0, or gamma0 / (1 + s^2) where s is the law's scalar
/// regressor (M for drem, Delta for pmono).
struct GainSchedule {
  GainMode mode = GainMode::kConstant;
  double gamma0 = 1.0;

  double operator()(double scalar) const {
    return mode == GainMode::kConstant ? gamma0 : gamma0 / (1.0 + scalar * scalar);
  }
};

struct DremEstimatorState {
  Vec theta_hat;
  GainSchedule gain;
  double integral_M2 = 0.0;
};

struct DremDerivative {
  Vec theta_hat_dot;
  double integral_M2_dot = 0.0;
};

inline DremDerivative drem_rhs(const DremEstimatorState& state, const LinearRegression& reg) {
  if (reg.Y_theta.size() != state.theta_hat.size())
    throw DimensionError("drem_rhs: Y_theta length != theta_hat length");
  const double m = reg.M;
  const double gamma = state.gain(m);
  DremDerivative d{Vec(state.theta_hat.size()), m * m};
  for (std::size_t i = 0; i < state.theta_hat.size(); ++i)
    d.theta_hat_dot[i] = -gamma * m * (m * state.theta_hat[i] - reg.Y_theta[i]);
  return d;
}

/// exp(-gamma integral_M2) * theta_err0. Only meaningful for a constant gain.
inline Vec closed_form_error(std::span<const double> theta_err0, const GainSchedule& gain,
                             double integral_M2) {
  if (gain.mode != GainMode::kConstant)
    throw UnsupportedModeError("closed_form_error: requires a constant gain schedule");
  if (integral_M2 < 0.0) throw ArgumentError("closed_form_error: integral_M2 must be >= 0");
  const double decay = std::exp(-gain.gamma0 * integral_M2);
  Vec out(theta_err0.begin(), theta_err0.end());
  for (double& v : out) v *= decay;
  return out;
}

struct PMonotoneBundle {
  std::string name;
  std::size_t eta_dim = 0;
  VecMap W;          // eta -> R^eta_dim
  VecMap DI;         // eta -> theta; may throw SingularityError
  Mat P;             // diagonal, nonnegative
  Mat selector_C;    // eta_dim x p, applied to adj(Omega_bar) y_bar
  GainSchedule gain;

  void validate() const {
    if (P.rows() != eta_dim || !P.square()) throw DimensionError(name + ": P must be eta_dim square");
    for (std::size_t i = 0; i < eta_dim; ++i)
      for (std::size_t j = 0; j < eta_dim; ++j) {
        if (i != j && P(i, j) != 0.0) throw ArgumentError(name + ": P must be diagonal");
        if (i == j && P(i, i) < 0.0) throw ArgumentError(name + ": P must be nonnegative");
      }
    if (selector_C.rows() != eta_dim) throw DimensionError(name + ": C must have eta_dim rows");
  }
};

/// gamma_eta P Delta (Y - Delta W(eta_hat)), where `mixed` carries
/// Y = C adj(Omega_bar) y_bar.
inline Vec pmono_rhs(const PMonotoneBundle& bundle, std::span<const double> eta_hat,
                     const MixedSignals& mixed) {
  if (eta_hat.size() != bundle.eta_dim) throw DimensionError("pmono_rhs: eta_hat length");
  if (mixed.Y_psi.size() != bundle.eta_dim) throw DimensionError("pmono_rhs: mixed length");
  const Vec w = bundle.W(eta_hat);
  const double d = mixed.Delta;
  const double gamma = bundle.gain(d);
  Vec out(bundle.eta_dim);
  for (std::size_t i = 0; i < bundle.eta_dim; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < bundle.eta_dim; ++j)
      acc += bundle.P(i, j) * (mixed.Y_psi[j] - d * w[j]);
    out[i] = gamma * d * acc;
  }
  return out;
}

inline Vec pmono_readout(const PMonotoneBundle& bundle, std::span<const double> eta_hat) {
  return bundle.DI(eta_hat);
}

struct OverparamEstimatorState {
  Vec Theta_hat;
  Mat Gamma;  // positive diagonal
};

inline Vec overparam_rhs(const OverparamEstimatorState& state, const Mat& omega,
                         std::span<const double> y) {
  if (omega.cols() != state.Theta_hat.size()) throw DimensionError("overparam_rhs: regressor width");
  if (omega.rows() != y.size()) throw DimensionError("overparam_rhs: y length");
  Vec resid = omega * state.Theta_hat;
  for (std::size_t i = 0; i < resid.size(); ++i) resid[i] -= y[i];
  Vec d = state.Gamma * (transpose(omega) * resid);
  for (double& v : d) v = -v;
  return d;
}

/// theta from Theta for the academic parametrization
/// Theta = (theta1 theta2 + theta1^2, theta1 + theta2, cos theta1).
inline Vec overparam_readout(std::span<const double> Theta_hat) {
  if (Theta_hat.size() < 2) throw DimensionError("overparam_readout: need at least 2 entries");
  if (std::abs(Theta_hat[1]) < 1e-9)
    throw SingularityError("Theta_hat_2", "overparam_readout: division by Theta_hat_2 ~ 0");
  const double t1 = Theta_hat[0] / Theta_hat[1];
  return Vec{t1, Theta_hat[1] - t1};
}

struct MonotonicityReport {
  std::size_t violations = 0;
  std::vector<std::size_t> per_component;
  double worst_excess = 0.0;
};

/// Counts consecutive sample pairs where |err_i| grows by more than `slack`.
/// Samples holding a non-finite entry end the audit (truncated traces).
inline MonotonicityReport monotonicity_audit(const TimeSeries<Vec>& errors, double slack) {
  if (errors.empty()) throw ArgumentError("monotonicity_audit: empty series");
  const std::size_t q = errors.front().value.size();
  MonotonicityReport rep;
  rep.per_component.assign(q, 0);
  for (std::size_t k = 1; k < errors.size(); ++k) {
    const Vec& a = errors[k - 1].value;
    const Vec& b = errors[k].value;
    bool finite = true;
    for (double v : b) finite = finite && std::isfinite(v);
    if (!finite) break;
    for (std::size_t i = 0; i < q; ++i) {
      const double excess = std::abs(b[i]) - std::abs(a[i]);
      if (excess > slack) {
        ++rep.violations;
        ++rep.per_component[i];
        rep.worst_excess = std::max(rep.worst_excess, excess);
      }
    }
  }
  return rep;
}

}  // namespace nlpre

#endif  // NLPRE_ESTIMATORS_HPP_
