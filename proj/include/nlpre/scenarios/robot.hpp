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

// Planar 2-DOF manipulator M(q) qdd + C(q, qd) qd + grad U(q) = u under a
// certainty-equivalence Slotine-Li controller.
//
// The five lumped inertial parameters Theta are polynomial in the four
// physical ones theta:
//
//   Theta = (th2^2 th4 + th1^2 (th3 + th4), th1 th2 th4, th2^2 th4,
//            th2 th4, th1 (th3 + th4)).
//
// The regression y = Omega Theta is built by first-order filtering
// h[.] = 1 / (p + k) of the momentum form of the dynamics, so only q, qd and
// u are needed; every p h[x] is realized as x - k h[x].

#ifndef NLPRE_SCENARIOS_ROBOT_HPP_
#define NLPRE_SCENARIOS_ROBOT_HPP_

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nlpre/estimators.hpp"
#include "nlpre/mapping.hpp"
#include "nlpre/numkit.hpp"
#include "nlpre/pipeline.hpp"
#include "nlpre/run_table.hpp"

namespace nlpre::robot {

inline constexpr std::size_t kFilterCount = 10;

struct ReferenceSample {
  Vec q;    // q*
  Vec qd;   // dq*/dt
  Vec qdd;  // d2q*/dt2
};

/// q1* = a1 sin(w1 t), q2* = a2 cos(w2 t).
struct SinusoidReference {
  double a1 = 0.5, w1 = 1.0;
  double a2 = 0.5, w2 = 0.7;

  ReferenceSample operator()(double t) const {
    return ReferenceSample{
        Vec{a1 * std::sin(w1 * t), a2 * std::cos(w2 * t)},
        Vec{a1 * w1 * std::cos(w1 * t), -a2 * w2 * std::sin(w2 * t)},
        Vec{-a1 * w1 * w1 * std::sin(w1 * t), -a2 * w2 * w2 * std::cos(w2 * t)}};
  }
};

struct RobotScenario {
  Vec theta_true{0.7, 0.8, 1.5, 0.5};
  double g = 9.8;
  Mat K1 = 3.0 * Mat::identity(2);
  Mat K2 = Mat::identity(2);
  double sigma = 1.0;
  double kappa = 10.0;
  Vec eta_hat0{0.1, 0.1, 0.1, 0.1};
  // Diagonal of P for the P-monotone law; empty means (1, 1, kappa, 1).
  Vec pmono_weights;
  double filter_k = 1.0;
  std::function<ReferenceSample(double)> reference = SinusoidReference{};
  Vec q0{0.0, 0.0};
  Vec qdot0{0.0, 0.0};
  GainSchedule gamma{GainMode::kNormalized, 10.0};
  GainSchedule gamma_eta{GainMode::kNormalized, 5.0};
  double horizon = 60.0;
  double step = 1e-3;
};

struct RobotState {
  Vec q{0.0, 0.0};
  Vec qdot{0.0, 0.0};
  // h[u1], h[u2], h[qd1], h[c2 (2 qd1 + qd2)], h[qd2], h[g c12], h[g c1],
  // h[c2 qd1], h[s2 (qd1^2 + qd1 qd2)], h[qd1 + qd2]
  Vec filters = Vec(kFilterCount, 0.0);
};

inline Vec theta_map(std::span<const double> th) {
  const double a = th[2] + th[3];
  return Vec{th[1] * th[1] * th[3] + th[0] * th[0] * a, th[0] * th[1] * th[3], th[1] * th[1] * th[3],
             th[1] * th[3], th[0] * a};
}

inline NlpreProblem problem() {
  NlpreProblem pr;
  pr.name = "robot";
  pr.n = 2;
  pr.p = 5;
  pr.q = 4;
  pr.theta_map = theta_map;
  pr.selector = make_selector(5, {0, 1, 2, 4});
  pr.validate();
  return pr;
}

inline Mat inertia(std::span<const double> q, std::span<const double> big) {
  const double c2 = std::cos(q[1]);
  return Mat{{big[0] + 2.0 * big[1] * c2, big[2] + big[1] * c2}, {big[2] + big[1] * c2, big[2]}};
}

inline Mat coriolis(std::span<const double> q, std::span<const double> qd,
                    std::span<const double> big) {
  const double s2 = std::sin(q[1]);
  return Mat{{-big[1] * s2 * qd[1], -big[1] * s2 * (qd[0] + qd[1])}, {big[1] * s2 * qd[0], 0.0}};
}

inline Vec gravity_torque(std::span<const double> q, std::span<const double> big, double g) {
  const double c12 = std::cos(q[0] + q[1]);
  return Vec{big[3] * g * c12 + big[4] * g * std::cos(q[0]), big[3] * g * c12};
}

/// qdd = M(q)^-1 (u - C(q, qd) qd - grad U(q)).
inline Vec robot_dynamics(const RobotState& state, std::span<const double> u,
                          std::span<const double> theta, double g) {
  const Vec big = theta_map(theta);
  const Mat m = inertia(state.q, big);
  const double dm = det(m);
  if (std::abs(dm) < 1e-10) throw SingularityError("inertia", "robot_dynamics: singular inertia");
  const Vec cqd = coriolis(state.q, state.qdot, big) * state.qdot;
  const Vec grav = gravity_torque(state.q, big, g);
  const Vec rhs{u[0] - cqd[0] - grav[0], u[1] - cqd[1] - grav[1]};
  const Vec num = adjugate(m) * rhs;
  return Vec{num[0] / dm, num[1] / dm};
}

struct ControlOutput {
  Vec u;
  Mat W;  // 2 x 5
  Vec s;
};

/// u = W(q, qd, t) Theta(theta_hat) - K1 s with s = qd_err + K2 q_err and
/// qd_r = qd* - K2 q_err. W is the regressor of M qdd_r + C qd_r + grad U.
inline ControlOutput slotine_li(const RobotState& state, const ReferenceSample& ref,
                                std::span<const double> theta_hat, const Mat& K1, const Mat& K2,
                                double g) {
  const Vec& q = state.q;
  const Vec& qd = state.qdot;
  const Vec q_err{q[0] - ref.q[0], q[1] - ref.q[1]};
  const Vec qd_err{qd[0] - ref.qd[0], qd[1] - ref.qd[1]};
  const Vec k2q = K2 * q_err;
  const Vec k2qd = K2 * qd_err;
  const Vec qd_r{ref.qd[0] - k2q[0], ref.qd[1] - k2q[1]};
  const Vec qdd_r{ref.qdd[0] - k2qd[0], ref.qdd[1] - k2qd[1]};
  const Vec s{qd_err[0] + k2q[0], qd_err[1] + k2q[1]};

  const double c2 = std::cos(q[1]);
  const double s2 = std::sin(q[1]);
  Mat w(2, 5);
  w(0, 0) = qdd_r[0];
  w(0, 1) = c2 * (2.0 * qdd_r[0] + qdd_r[1]) - s2 * (qd[1] * qd_r[0] + (qd[0] + qd[1]) * qd_r[1]);
  w(0, 2) = qdd_r[1];
  w(0, 3) = g * std::cos(q[0] + q[1]);
  w(0, 4) = g * std::cos(q[0]);
  w(1, 0) = 0.0;
  w(1, 1) = c2 * qdd_r[0] + s2 * qd[0] * qd_r[0];
  w(1, 2) = qdd_r[0] + qdd_r[1];
  w(1, 3) = w(0, 3);
  w(1, 4) = 0.0;

  const Vec ff = w * theta_map(theta_hat);
  const Vec fb = K1 * s;
  return ControlOutput{Vec{ff[0] - fb[0], ff[1] - fb[1]}, std::move(w), s};
}

namespace detail {

inline Vec filter_inputs(const RobotState& st, std::span<const double> u, double g) {
  const double qd1 = st.qdot[0];
  const double qd2 = st.qdot[1];
  const double c2 = std::cos(st.q[1]);
  const double s2 = std::sin(st.q[1]);
  return Vec{u[0],
             u[1],
             qd1,
             c2 * (2.0 * qd1 + qd2),
             qd2,
             g * std::cos(st.q[0] + st.q[1]),
             g * std::cos(st.q[0]),
             c2 * qd1,
             s2 * (qd1 * qd1 + qd1 * qd2),
             qd1 + qd2};
}

}  // namespace detail

/// Derivatives of the ten h[.] filter states.
inline Vec robot_regression_rhs(const RobotState& state, std::span<const double> u,
                                double filter_k, double g) {
  if (!(filter_k > 0.0)) throw ArgumentError("robot_regression_rhs: filter_k must be positive");
  const Vec in = detail::filter_inputs(state, u, g);
  Vec d(kFilterCount);
  for (std::size_t i = 0; i < kFilterCount; ++i) d[i] = -filter_k * state.filters[i] + in[i];
  return d;
}

struct FilteredRegression {
  Vec y;      // 2
  Mat omega;  // 2 x 5
};

/// y = h[u], Omega = h[raw regressor]; p h[x] realized as x - k h[x].
inline FilteredRegression robot_regression_output(const RobotState& state, double filter_k) {
  const Vec& f = state.filters;
  const double qd1 = state.qdot[0];
  const double qd2 = state.qdot[1];
  const double c2 = std::cos(state.q[1]);
  const double k = filter_k;
  FilteredRegression out{Vec{f[0], f[1]}, Mat(2, 5)};
  Mat& om = out.omega;
  om(0, 0) = qd1 - k * f[2];
  om(0, 1) = c2 * (2.0 * qd1 + qd2) - k * f[3];
  om(0, 2) = qd2 - k * f[4];
  om(0, 3) = f[5];
  om(0, 4) = f[6];
  om(1, 1) = c2 * qd1 - k * f[7] + f[8];
  om(1, 2) = (qd1 + qd2) - k * f[9];
  om(1, 3) = f[5];
  return out;
}

/// psi = (Theta1, Theta2, Theta3, Theta5). With e = psi1 - psi3:
///   G = diag(psi4, psi4 psi2, e^2 psi3, e^2 psi3)
///   S = (e, e psi3, e psi3 psi4^2 - psi4^2 psi2^2, psi4^2 psi2^2)
/// Arguments: XiBar_G Y = (Y1, Y2, Y3, Y4, Delta Y3), XiBar_S Y = Y.
/// Substituting Y = Delta psi gives Pi = diag(Delta, Delta^2, Delta^4, Delta^4).
inline MappingBundle bundle() {
  MappingBundle b;
  b.name = "robot";
  b.q = 4;
  b.G = [](std::span<const double> psi) {
    const double e = psi[0] - psi[2];
    const double d = e * e * psi[2];
    return Mat{{psi[3], 0, 0, 0}, {0, psi[3] * psi[1], 0, 0}, {0, 0, d, 0}, {0, 0, 0, d}};
  };
  b.S = [](std::span<const double> psi) {
    const double e = psi[0] - psi[2];
    const double w = psi[3] * psi[3] * psi[1] * psi[1];
    return Vec{e, e * psi[2], e * psi[2] * psi[3] * psi[3] - w, w};
  };
  std::vector<ExponentEntry> g_table(5 * 4, ExponentEntry{0, 1});
  for (std::size_t i = 0; i < 4; ++i) g_table[i * 4 + i] = {1, 1};
  g_table[4 * 4 + 2] = {1, 2};
  b.xi_G = ExponentTable(5, 4, std::move(g_table));
  std::vector<ExponentEntry> s_table(4 * 4, ExponentEntry{0, 1});
  for (std::size_t i = 0; i < 4; ++i) s_table[i * 4 + i] = {1, 1};
  b.xi_S = ExponentTable(4, 4, std::move(s_table));
  b.T_G = [](std::span<const double> a) {
    const double e = a[0] - a[2];
    const double d = e * e * a[4];
    return Mat{{a[3], 0, 0, 0}, {0, a[3] * a[1], 0, 0}, {0, 0, d, 0}, {0, 0, 0, d}};
  };
  b.T_S = [](std::span<const double> a) {
    const double e = a[0] - a[2];
    const double w = a[3] * a[3] * a[1] * a[1];
    return Vec{e, e * a[2], e * a[2] * a[3] * a[3] - w, w};
  };
  b.Pi = [](double d) {
    const double d2 = d * d;
    const double d4 = d2 * d2;
    return Mat{{d, 0, 0, 0}, {0, d2, 0, 0}, {0, 0, d4, 0}, {0, 0, 0, d4}};
  };
  b.ell_theta = 11;
  b.notes = "Pi = diag(Delta, Delta^2, Delta^4, Delta^4), det Pi = Delta^11";
  return b;
}

/// eta = (th1, th2, th2 th4, th1 (th3 + th4)),
/// D^I(eta) = (eta1, eta2, eta4 / eta1 - eta3 / eta2, eta3 / eta2),
/// W(eta) = (eta1 eta3, eta2 eta3, eta3, eta4) = Theta_{2..5}.
inline PMonotoneBundle pmono_bundle(double kappa, GainSchedule gain, Vec weights = {}) {
  if (weights.empty()) weights = Vec{1.0, 1.0, kappa, 1.0};
  if (weights.size() != 4) throw DimensionError("robot pmono_bundle: need 4 weights");
  PMonotoneBundle b;
  b.name = "robot-pmono";
  b.eta_dim = 4;
  b.W = [](std::span<const double> e) { return Vec{e[0] * e[2], e[1] * e[2], e[2], e[3]}; };
  b.DI = [](std::span<const double> e) {
    if (std::abs(e[0]) < 1e-12) throw SingularityError("eta_1", "D^I: division by eta_1 ~ 0");
    if (std::abs(e[1]) < 1e-12) throw SingularityError("eta_2", "D^I: division by eta_2 ~ 0");
    return Vec{e[0], e[1], e[3] / e[0] - e[2] / e[1], e[2] / e[1]};
  };
  b.P = Mat::diagonal(weights);
  b.selector_C = make_selector(5, {1, 2, 3, 4});
  b.gain = gain;
  b.validate();
  return b;
}

inline Vec eta_of_theta(std::span<const double> th) {
  return Vec{th[0], th[1], th[1] * th[3], th[0] * (th[2] + th[3])};
}

enum class Law { kDrem, kPmono, kFrozen };

inline const char* law_name(Law law) {
  switch (law) {
    case Law::kDrem:
      return "drem";
    case Law::kPmono:
      return "pmono";
    case Law::kFrozen:
      return "frozen";
  }
  return "?";
}

/// Closed loop of plant, controller, regression filters, extension and one
/// estimation law. kFrozen keeps theta_hat = theta_true (ideal tracking).
///
/// Columns (L = law name): t; theta_hat_L_i; theta_err_L_i; q_err_L_i;
/// qdot_err_L_i; Delta_L; Y_psi_L_i; omega_L_r_c; then M_L, int_M2_L,
/// Y_theta_L_i for drem or eta_hat_L_i for pmono.
inline RunTable run_closed_loop(const RobotScenario& sc, Law law, std::size_t stride = 10) {
  if (stride == 0) throw ArgumentError("run_closed_loop: stride must be >= 1");
  if (!(sc.filter_k > 0.0)) throw ArgumentError("run_closed_loop: filter_k must be positive");
  const NlpreProblem pr = problem();
  const MappingBundle mb = bundle();
  const PMonotoneBundle pb = pmono_bundle(sc.kappa, sc.gamma_eta, sc.pmono_weights);
  const std::size_t p = pr.p;
  const std::size_t q = pr.q;
  const std::string name = law_name(law);

  constexpr std::size_t kPlant = 4 + kFilterCount;
  const std::size_t ext0 = kPlant;
  const std::size_t est0 = ext0 + ExtensionState::packed_size(p);
  const std::size_t dim = est0 + (law == Law::kDrem ? q + 1 : law == Law::kPmono ? q : 0);

  auto unpack_robot = [](std::span<const double> x) {
    RobotState st;
    st.q = {x[0], x[1]};
    st.qdot = {x[2], x[3]};
    st.filters.assign(x.begin() + 4, x.begin() + 4 + kFilterCount);
    return st;
  };
  auto current_theta_hat = [&](std::span<const double> x) -> Vec {
    switch (law) {
      case Law::kDrem:
        return Vec(x.begin() + est0, x.begin() + est0 + q);
      case Law::kPmono:
        return pmono_readout(pb, x.subspan(est0, q));
      case Law::kFrozen:
        return sc.theta_true;
    }
    return {};
  };

  OdeProblem ode;
  ode.dimension = dim;
  ode.t0 = 0.0;
  ode.x0.assign(dim, 0.0);
  ode.x0[0] = sc.q0[0];
  ode.x0[1] = sc.q0[1];
  ode.x0[2] = sc.qdot0[0];
  ode.x0[3] = sc.qdot0[1];
  if (law == Law::kDrem) {
    const Vec th0 = pmono_readout(pb, sc.eta_hat0);
    std::copy(th0.begin(), th0.end(), ode.x0.begin() + static_cast<std::ptrdiff_t>(est0));
  } else if (law == Law::kPmono) {
    std::copy(sc.eta_hat0.begin(), sc.eta_hat0.end(), ode.x0.begin() + static_cast<std::ptrdiff_t>(est0));
  }

  ode.rhs = [&](double t, std::span<const double> x, std::span<double> dx) {
    const RobotState st = unpack_robot(x);
    const Vec theta_hat = current_theta_hat(x);
    const ControlOutput ctl = slotine_li(st, sc.reference(t), theta_hat, sc.K1, sc.K2, sc.g);
    const Vec qdd = robot_dynamics(st, ctl.u, sc.theta_true, sc.g);
    dx[0] = st.qdot[0];
    dx[1] = st.qdot[1];
    dx[2] = qdd[0];
    dx[3] = qdd[1];
    const Vec df = robot_regression_rhs(st, ctl.u, sc.filter_k, sc.g);
    std::copy(df.begin(), df.end(), dx.begin() + 4);

    const FilteredRegression reg = robot_regression_output(st, sc.filter_k);
    const ExtensionState es = ExtensionState::unpack(x.subspan(ext0), p, t, sc.sigma, 0.0);
    extension_rhs(es, reg.omega, reg.y).pack(dx.subspan(ext0));

    if (law == Law::kDrem) {
      const LinearRegression lin = mix_second(mb, mix_first(pr, es));
      DremEstimatorState est{theta_hat, sc.gamma, x[est0 + q]};
      const DremDerivative d = drem_rhs(est, lin);
      std::copy(d.theta_hat_dot.begin(), d.theta_hat_dot.end(), dx.begin() + est0);
      dx[est0 + q] = d.integral_M2_dot;
    } else if (law == Law::kPmono) {
      const Vec d = pmono_rhs(pb, x.subspan(est0, q), mix_first(pb.selector_C, es));
      std::copy(d.begin(), d.end(), dx.begin() + est0);
    }
  };
  ode.project = [&](double, std::span<double> x) {
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t j = i + 1; j < p; ++j) {
        double& a = x[ext0 + p + i * p + j];
        double& b = x[ext0 + p + j * p + i];
        const double m = 0.5 * (a + b);
        a = m;
        b = m;
      }
  };

  RunTable table;
  auto add = [&](const std::string& sig, std::size_t count) {
    for (std::size_t i = 1; i <= count; ++i)
      table.columns.push_back(sig + "_" + name + "_" + std::to_string(i));
  };
  table.columns.push_back("t");
  add("theta_hat", q);
  add("theta_err", q);
  add("q_err", 2);
  add("qdot_err", 2);
  table.columns.push_back("Delta_" + name);
  add("Y_psi", q);
  for (std::size_t r = 1; r <= 2; ++r)
    for (std::size_t c = 1; c <= p; ++c)
      table.columns.push_back("omega_" + name + "_" + std::to_string(r) + "_" + std::to_string(c));
  if (law == Law::kDrem) {
    table.columns.push_back("M_" + name);
    table.columns.push_back("int_M2_" + name);
    add("Y_theta", q);
  } else if (law == Law::kPmono) {
    add("eta_hat", q);
  }
  table.outcomes.push_back({name, true, std::nullopt, ""});

  auto observer = [&](std::size_t step, double t, std::span<const double> x) {
    if (step % stride != 0) return;
    const RobotState st = unpack_robot(x);
    const Vec theta_hat = current_theta_hat(x);
    const ReferenceSample ref = sc.reference(t);
    const ExtensionState es = ExtensionState::unpack(x.subspan(ext0), p, t, sc.sigma, 0.0);
    const MixedSignals mixed = mix_first(pr, es);
    const FilteredRegression reg = robot_regression_output(st, sc.filter_k);

    std::vector<double> row;
    row.reserve(table.columns.size());
    row.push_back(t);
    row.insert(row.end(), theta_hat.begin(), theta_hat.end());
    for (std::size_t i = 0; i < q; ++i) row.push_back(theta_hat[i] - sc.theta_true[i]);
    row.push_back(st.q[0] - ref.q[0]);
    row.push_back(st.q[1] - ref.q[1]);
    row.push_back(st.qdot[0] - ref.qd[0]);
    row.push_back(st.qdot[1] - ref.qd[1]);
    row.push_back(mixed.Delta);
    row.insert(row.end(), mixed.Y_psi.begin(), mixed.Y_psi.end());
    row.insert(row.end(), reg.omega.data().begin(), reg.omega.data().end());
    if (law == Law::kDrem) {
      const LinearRegression lin = mix_second(mb, mixed);
      row.push_back(lin.M);
      row.push_back(x[est0 + q]);
      row.insert(row.end(), lin.Y_theta.begin(), lin.Y_theta.end());
    } else if (law == Law::kPmono) {
      row.insert(row.end(), x.begin() + est0, x.begin() + est0 + q);
    }
    table.rows.push_back(std::move(row));
  };

  LawOutcome& outcome = table.outcomes.front();
  double last_t = 0.0;
  auto tracking_observer = [&](std::size_t step, double t, std::span<const double> x) {
    last_t = t;
    observer(step, t, x);
  };
  try {
    integrate(ode, sc.horizon, sc.step, tracking_observer, 0);
  } catch (const IntegrationDiverged& e) {
    outcome.ok = false;
    outcome.failed_at = e.time();
    outcome.failure = e.what();
  } catch (const SingularityError& e) {
    outcome.ok = false;
    outcome.failed_at = last_t;
    outcome.failure = std::string(e.what()) + " [" + e.component() + "]";
  }
  if (!outcome.ok) pad_missing_rows(table, sc.horizon, sc.step, stride);
  return table;
}

}  // namespace nlpre::robot

#endif  // NLPRE_SCENARIOS_ROBOT_HPP_
