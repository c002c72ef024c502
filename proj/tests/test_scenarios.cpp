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

#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "nlpre/numkit.hpp"
#include "nlpre/scenarios/academic.hpp"
#include "nlpre/scenarios/robot.hpp"

namespace {

using nlpre::Mat;
using nlpre::Vec;
namespace ac = nlpre::academic;
namespace rb = nlpre::robot;

const Vec kRobotTheta{0.7, 0.8, 1.5, 0.5};

double last_finite(const nlpre::RunTable& t, const std::string& col) {
  const std::size_t c = t.index(col);
  for (auto it = t.rows.rbegin(); it != t.rows.rend(); ++it)
    if (std::isfinite((*it)[c])) return (*it)[c];
  return std::nan("");
}

TEST(AcademicRegressor, Values) {
  const Mat a = ac::regressor(0.0);
  EXPECT_EQ(a(0, 0), 1.0);
  EXPECT_EQ(a(0, 1), 0.0);
  EXPECT_EQ(a(0, 2), 1.0);
  const Mat b = ac::regressor(std::numbers::pi / 2);
  EXPECT_NEAR(b(0, 0), 0.2078796, 1e-7);
  EXPECT_NEAR(b(0, 1), 1.0, 1e-15);
  EXPECT_LT(ac::regressor(50.0)(0, 0), 1e-20);
}

TEST(AcademicScenario, DefaultsMatchPublishedSettings) {
  const ac::AcademicScenario sc;
  EXPECT_EQ(sc.theta_true, (Vec{1.0, 2.0}));
  EXPECT_EQ(sc.gamma.gamma0, 1e13);
  EXPECT_EQ(sc.gamma_eta.gamma0, 1e5);
  EXPECT_EQ(sc.Gamma, 10.0);
  EXPECT_EQ(sc.kappa, 10.0);
  EXPECT_EQ(sc.Theta_hat0, (Vec{0.0, 1.0, 0.0}));
}

TEST(AcademicRun, LayoutAndRowCount) {
  ac::AcademicScenario sc;
  sc.horizon = 2.0;
  const auto t = ac::run(sc, {ac::Law::kDrem, ac::Law::kPmono, ac::Law::kOverparam}, 10);
  EXPECT_EQ(t.rows.size(), 201u);
  EXPECT_EQ(t.columns[0], "t");
  EXPECT_EQ(t.columns[1], "theta_hat_drem_1");
  for (const char* c : {"Delta", "Y_psi_1", "omega_1_3", "M_drem", "int_M2_drem", "Y_theta_drem_2",
                        "eta_hat_pmono_2", "Theta_hat_overparam_3", "theta_err_overparam_2"})
    EXPECT_TRUE(t.find(c).has_value()) << c;
  EXPECT_NEAR(t.rows[1][0], 0.01, 1e-15);
  for (const auto& o : t.outcomes) EXPECT_TRUE(o.ok) << o.law;
  EXPECT_THROW(ac::run(sc, {}, 10), nlpre::ArgumentError);
}

TEST(AcademicRun, QualitativeOutcome) {
  const ac::AcademicScenario sc;
  const auto t = ac::run(sc, {ac::Law::kDrem, ac::Law::kPmono, ac::Law::kOverparam}, 10);
  const double e0 = 2.0;
  for (const char* law : {"drem", "pmono"})
    for (int i = 1; i <= 2; ++i)
      EXPECT_LE(std::abs(last_finite(t, std::string("theta_err_") + law + "_" + std::to_string(i))), 0.01 * e0)
          << law;
  const double o1 = std::abs(last_finite(t, "theta_err_overparam_1"));
  const double o2 = std::abs(last_finite(t, "theta_err_overparam_2"));
  EXPECT_GE(std::max(o1, o2), 0.1);
}

TEST(AcademicRun, Deterministic) {
  ac::AcademicScenario sc;
  sc.horizon = 3.0;
  const auto a = ac::run(sc, {ac::Law::kDrem, ac::Law::kPmono}, 7);
  const auto b = ac::run(sc, {ac::Law::kDrem, ac::Law::kPmono}, 7);
  ASSERT_EQ(a.rows.size(), b.rows.size());
  for (std::size_t r = 0; r < a.rows.size(); ++r)
    for (std::size_t c = 0; c < a.columns.size(); ++c) ASSERT_EQ(a.rows[r][c], b.rows[r][c]);
}

TEST(RobotModel, ThetaMapAndGravity) {
  const Vec big = rb::theta_map(kRobotTheta);
  const Vec grad = rb::gravity_torque(Vec{0.0, 0.0}, big, 9.8);
  EXPECT_NEAR(grad[0], 17.64, 1e-12);
  EXPECT_NEAR(grad[1], 3.92, 1e-12);
}

TEST(RobotModel, StaticEquilibrium) {
  rb::RobotState st;
  st.q = {0.3, -0.7};
  const Vec u = rb::gravity_torque(st.q, rb::theta_map(kRobotTheta), 9.8);
  const Vec qdd = rb::robot_dynamics(st, u, kRobotTheta, 9.8);
  EXPECT_NEAR(qdd[0], 0.0, 1e-13);
  EXPECT_NEAR(qdd[1], 0.0, 1e-13);
}

TEST(RobotModel, FreeFallFromZero) {
  const rb::RobotState st;
  const Vec big = rb::theta_map(kRobotTheta);
  const Vec qdd = rb::robot_dynamics(st, Vec{0.0, 0.0}, kRobotTheta, 9.8);
  const Mat m = rb::inertia(st.q, big);
  const Vec back = m * qdd;
  EXPECT_NEAR(back[0], -17.64, 1e-12);
  EXPECT_NEAR(back[1], -3.92, 1e-12);
}

TEST(RobotModel, SingularInertiaThrows) {
  ASSERT_THROW(rb::robot_dynamics(rb::RobotState{}, Vec{0.0, 0.0}, Vec{1.0, 0.0, 0.0, 0.0}, 9.8),
               nlpre::SingularityError);
}

TEST(RobotModel, InertiaPositiveDefiniteAndSkewSymmetry) {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> ang(-std::numbers::pi, std::numbers::pi);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  const Vec big = rb::theta_map(kRobotTheta);
  const double eps = 1e-6;
  for (int k = 0; k < 1000; ++k) {
    const Vec q{ang(rng), ang(rng)};
    const Vec qd{u(rng), u(rng)};
    const Vec x{u(rng), u(rng)};
    const Mat m = rb::inertia(q, big);
    EXPECT_EQ(m(0, 1), m(1, 0));
    EXPECT_GT(nlpre::symmetric_eigenvalues(m)[0], 0.0);
    const Vec qp{q[0] + eps * qd[0], q[1] + eps * qd[1]};
    const Vec qm{q[0] - eps * qd[0], q[1] - eps * qd[1]};
    const Mat mdot = (1.0 / (2.0 * eps)) * (rb::inertia(qp, big) - rb::inertia(qm, big));
    const Mat n = mdot - 2.0 * rb::coriolis(q, qd, big);
    const Vec nx = n * x;
    EXPECT_LE(std::abs(x[0] * nx[0] + x[1] * nx[1]), 1e-9);
  }
}

TEST(SlotineLi, RegressorAtRest) {
  rb::RobotState st;
  rb::ReferenceSample ref{{0.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}};
  const Vec th_hat{0.7, 0.8, 1.5, 0.5};
  const auto out = rb::slotine_li(st, ref, th_hat, 3.0 * Mat::identity(2), Mat::identity(2), 9.8);
  EXPECT_DOUBLE_EQ(out.W(0, 3), 9.8);
  EXPECT_DOUBLE_EQ(out.W(1, 3), 9.8);
  EXPECT_DOUBLE_EQ(out.W(0, 4), 9.8);
  EXPECT_EQ(out.W(1, 4), 0.0);
  for (std::size_t c = 0; c < 3; ++c) {
    EXPECT_EQ(out.W(0, c), 0.0);
    EXPECT_EQ(out.W(1, c), 0.0);
  }
  const Vec big = rb::theta_map(th_hat);
  EXPECT_NEAR(out.u[0], 9.8 * (big[3] + big[4]), 1e-12);
  EXPECT_NEAR(out.u[1], 9.8 * big[3], 1e-12);
  EXPECT_EQ(out.s, (Vec{0.0, 0.0}));
}

TEST(SlotineLi, PerfectTrackingIsInverseDynamics) {
  const rb::SinusoidReference refgen;
  const Vec big = rb::theta_map(kRobotTheta);
  for (double t : {0.0, 0.4, 1.3, 2.9}) {
    const auto ref = refgen(t);
    rb::RobotState st;
    st.q = ref.q;
    st.qdot = ref.qd;
    const auto out = rb::slotine_li(st, ref, kRobotTheta, 3.0 * Mat::identity(2), Mat::identity(2), 9.8);
    const Vec mq = rb::inertia(st.q, big) * ref.qdd;
    const Vec cq = rb::coriolis(st.q, st.qdot, big) * st.qdot;
    const Vec gq = rb::gravity_torque(st.q, big, 9.8);
    EXPECT_NEAR(out.u[0], mq[0] + cq[0] + gq[0], 1e-12);
    EXPECT_NEAR(out.u[1], mq[1] + cq[1] + gq[1], 1e-12);
  }
}

TEST(SinusoidReference, DerivativesMatchFiniteDifferences) {
  const rb::SinusoidReference r;
  const double h = 1e-5;
  for (double t : {0.2, 1.7, 4.0}) {
    const auto a = r(t - h), b = r(t), c = r(t + h);
    for (int i = 0; i < 2; ++i) {
      EXPECT_NEAR(b.qd[i], (c.q[i] - a.q[i]) / (2 * h), 1e-8);
      EXPECT_NEAR(b.qdd[i], (c.qd[i] - a.qd[i]) / (2 * h), 1e-8);
    }
  }
}

TEST(RegressionFilters, StepResponse) {
  const double k = 2.0;
  const double c = 3.0;
  nlpre::OdeProblem ode;
  ode.dimension = rb::kFilterCount;
  ode.x0.assign(rb::kFilterCount, 0.0);
  ode.rhs = [&](double, std::span<const double> x, std::span<double> dx) {
    rb::RobotState st;
    st.filters.assign(x.begin(), x.end());
    const Vec d = rb::robot_regression_rhs(st, Vec{c, 0.0}, k, 9.8);
    std::copy(d.begin(), d.end(), dx.begin());
  };
  const auto s = nlpre::integrate(ode, 3.0, 1e-3);
  for (const auto& smp : s) EXPECT_NEAR(smp.value[0], c / k * (1.0 - std::exp(-k * smp.t)), 1e-10);
  EXPECT_THROW(rb::robot_regression_rhs(rb::RobotState{}, Vec{0.0, 0.0}, 0.0, 9.8), nlpre::ArgumentError);
}

TEST(RegressionFilters, ZeroSignalsGiveZeroRegression) {
  rb::RobotState st;
  st.q = {std::numbers::pi / 2, 0.0};  // cos q1 = cos(q1 + q2) = 0
  const auto out = rb::robot_regression_output(st, 1.0);
  EXPECT_EQ(out.y, (Vec{0.0, 0.0}));
  EXPECT_EQ(nlpre::max_abs_entry(out.omega), 0.0);
}

// Plant, filters and a controller with frozen true parameters, integrated
// directly; the filtered model must reproduce y once filter transients die.
TEST(RegressionFilters, ClosedLoopConsistency) {
  const rb::RobotScenario sc;
  const Vec big = rb::theta_map(sc.theta_true);
  nlpre::OdeProblem ode;
  ode.dimension = 4 + rb::kFilterCount;
  ode.x0.assign(ode.dimension, 0.0);
  auto unpack = [](std::span<const double> x) {
    rb::RobotState st;
    st.q = {x[0], x[1]};
    st.qdot = {x[2], x[3]};
    st.filters.assign(x.begin() + 4, x.end());
    return st;
  };
  ode.rhs = [&](double t, std::span<const double> x, std::span<double> dx) {
    const auto st = unpack(x);
    const auto ctl = rb::slotine_li(st, sc.reference(t), sc.theta_true, sc.K1, sc.K2, sc.g);
    const Vec qdd = rb::robot_dynamics(st, ctl.u, sc.theta_true, sc.g);
    dx[0] = st.qdot[0];
    dx[1] = st.qdot[1];
    dx[2] = qdd[0];
    dx[3] = qdd[1];
    const Vec df = rb::robot_regression_rhs(st, ctl.u, sc.filter_k, sc.g);
    std::copy(df.begin(), df.end(), dx.begin() + 4);
  };
  const auto s = nlpre::integrate(ode, 15.0, 1e-3, {}, 100);
  for (const auto& smp : s) {
    if (smp.t < 5.0 / sc.filter_k) continue;
    const auto reg = rb::robot_regression_output(unpack(smp.value), sc.filter_k);
    const Vec pred = reg.omega * big;
    const double num = std::hypot(reg.y[0] - pred[0], reg.y[1] - pred[1]);
    const double den = std::hypot(reg.y[0], reg.y[1]);
    EXPECT_LE(num / den, 1e-3) << "t = " << smp.t;
  }
}

TEST(RobotRun, FrozenParametersTrack) {
  rb::RobotScenario sc;
  sc.horizon = 20.0;
  const auto t = rb::run_closed_loop(sc, rb::Law::kFrozen, 100);
  EXPECT_LE(std::abs(last_finite(t, "q_err_frozen_1")), 1e-4);
  EXPECT_LE(std::abs(last_finite(t, "q_err_frozen_2")), 1e-4);
  EXPECT_LE(std::abs(last_finite(t, "qdot_err_frozen_1")), 1e-4);
}

TEST(RobotRun, DremInitialEstimateFromEta) {
  rb::RobotScenario sc;
  sc.horizon = 0.1;
  const auto t = rb::run_closed_loop(sc, rb::Law::kDrem, 10);
  EXPECT_EQ(t.rows.size(), 11u);
  EXPECT_NEAR(t.rows[0][t.index("theta_hat_drem_1")], 0.1, 1e-15);
  EXPECT_NEAR(t.rows[0][t.index("theta_hat_drem_3")], 0.0, 1e-15);
  EXPECT_NEAR(t.rows[0][t.index("theta_hat_drem_4")], 1.0, 1e-15);
}

TEST(RobotRun, PmonoSingularityIsRecordedNotThrown) {
  rb::RobotScenario sc;
  sc.horizon = 1.0;
  sc.eta_hat0 = {0.0, 0.1, 0.1, 0.1};
  const auto t = rb::run_closed_loop(sc, rb::Law::kPmono, 10);
  EXPECT_EQ(t.rows.size(), 101u);
  const auto* o = t.outcome("pmono");
  ASSERT_NE(o, nullptr);
  EXPECT_FALSE(o->ok);
  EXPECT_NE(o->failure.find("eta_1"), std::string::npos);
  EXPECT_TRUE(std::isnan(t.rows.back()[t.index("theta_hat_pmono_1")]));
}

}  // namespace
