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

#include <gtest/gtest.h>

#include "nlpre/estimators.hpp"
#include "nlpre/scenarios/academic.hpp"
#include "nlpre/scenarios/robot.hpp"

namespace {

using nlpre::GainMode;
using nlpre::GainSchedule;
using nlpre::Mat;
using nlpre::Vec;

TEST(GainSchedule, Modes) {
  const GainSchedule c{GainMode::kConstant, 5.0};
  const GainSchedule n{GainMode::kNormalized, 10.0};
  EXPECT_EQ(c(123.0), 5.0);
  EXPECT_EQ(n(0.0), 10.0);
  EXPECT_DOUBLE_EQ(n(3.0), 1.0);
}

TEST(DremRhs, ZeroRegressorFreezes) {
  const nlpre::DremEstimatorState st{{0.3, -0.2}, {GainMode::kConstant, 1.0}, 0.0};
  const auto d = nlpre::drem_rhs(st, nlpre::LinearRegression{{1.0, 1.0}, 0.0, 0.0});
  EXPECT_EQ(d.theta_hat_dot, (Vec{0.0, 0.0}));
  EXPECT_EQ(d.integral_M2_dot, 0.0);
}

TEST(DremRhs, Equilibrium) {
  const nlpre::DremEstimatorState st{{1.0, 2.0}, {GainMode::kConstant, 3.0}, 0.0};
  const auto d = nlpre::drem_rhs(st, nlpre::LinearRegression{{5.0, 10.0}, 5.0, 0.0});
  EXPECT_EQ(d.theta_hat_dot, (Vec{0.0, 0.0}));
}

TEST(DremRhs, HandExample) {
  const nlpre::DremEstimatorState st{{0.0, 0.0}, {GainMode::kConstant, 1.0}, 0.0};
  const auto d = nlpre::drem_rhs(st, nlpre::LinearRegression{{72.0, 144.0}, 72.0, 0.0});
  EXPECT_DOUBLE_EQ(d.theta_hat_dot[0], 5184.0);
  EXPECT_DOUBLE_EQ(d.theta_hat_dot[1], 10368.0);
  EXPECT_DOUBLE_EQ(d.integral_M2_dot, 5184.0);
}

TEST(DremRhs, EachComponentDecaysTowardTruth) {
  const Vec theta{1.0, -2.0, 0.5};
  const Vec hat{3.0, 1.0, 0.5};
  const double m = 0.7;
  Vec yth(3);
  for (std::size_t i = 0; i < 3; ++i) yth[i] = m * theta[i];
  for (GainMode mode : {GainMode::kConstant, GainMode::kNormalized}) {
    const auto d = nlpre::drem_rhs({hat, {mode, 2.0}, 0.0}, {yth, m, 0.0});
    for (std::size_t i = 0; i < 3; ++i) {
      const double err = hat[i] - theta[i];
      EXPECT_LE(d.theta_hat_dot[i] * err, 0.0);
    }
  }
}

TEST(DremRhs, LengthMismatch) {
  EXPECT_THROW(nlpre::drem_rhs({{0.0}, {}, 0.0}, {{1.0, 2.0}, 1.0, 0.0}), nlpre::DimensionError);
}

TEST(ClosedForm, Examples) {
  const GainSchedule g{GainMode::kConstant, 2.0};
  EXPECT_EQ(nlpre::closed_form_error(Vec{2.0, -4.0}, g, 0.0), (Vec{2.0, -4.0}));
  const Vec half = nlpre::closed_form_error(Vec{2.0, -4.0}, g, std::log(2.0) / 2.0);
  EXPECT_NEAR(half[0], 1.0, 1e-15);
  EXPECT_NEAR(half[1], -2.0, 1e-15);
}

TEST(ClosedForm, Errors) {
  EXPECT_THROW(nlpre::closed_form_error(Vec{1.0}, {GainMode::kNormalized, 1.0}, 1.0), nlpre::UnsupportedModeError);
  EXPECT_THROW(nlpre::closed_form_error(Vec{1.0}, {GainMode::kConstant, 1.0}, -1.0), nlpre::ArgumentError);
}

TEST(PMono, ZeroDeltaFreezes) {
  const auto b = nlpre::academic::pmono_bundle(10.0, {GainMode::kConstant, 1.0});
  const Vec d = nlpre::pmono_rhs(b, Vec{0.3, 0.4}, nlpre::MixedSignals{{1.0, 1.0}, 0.0, 0.0});
  EXPECT_EQ(d, (Vec{0.0, 0.0}));
}

TEST(PMono, AcademicHandExample) {
  const auto b = nlpre::academic::pmono_bundle(10.0, {GainMode::kConstant, 1.0});
  const Vec d = nlpre::pmono_rhs(b, Vec{0.0, 0.0}, nlpre::MixedSignals{{6.0, 6.0}, 2.0, 0.0});
  EXPECT_DOUBLE_EQ(d[0], 120.0);
  EXPECT_DOUBLE_EQ(d[1], 12.0);
}

TEST(PMono, EquilibriumAtTruth) {
  const auto b = nlpre::academic::pmono_bundle(10.0, {GainMode::kConstant, 1.0});
  const Vec th{1.0, 2.0};
  const Vec psi = nlpre::eval_psi(nlpre::academic::problem(), th);
  const double delta = 0.37;
  const Vec eta{th[0], th[0] + th[1]};
  const Vec d = nlpre::pmono_rhs(b, eta, nlpre::MixedSignals{{delta * psi[0], delta * psi[1]}, delta, 0.0});
  EXPECT_NEAR(d[0], 0.0, 1e-14);
  EXPECT_NEAR(d[1], 0.0, 1e-14);
  EXPECT_EQ(nlpre::pmono_readout(b, eta), th);
}

TEST(PMono, RobotReadouts) {
  const auto b = nlpre::robot::pmono_bundle(10.0, {GainMode::kNormalized, 5.0});
  const Vec th = nlpre::pmono_readout(b, Vec{0.7, 0.8, 0.4, 1.4});
  EXPECT_NEAR(th[0], 0.7, 1e-15);
  EXPECT_NEAR(th[1], 0.8, 1e-15);
  EXPECT_NEAR(th[2], 1.5, 1e-15);
  EXPECT_NEAR(th[3], 0.5, 1e-15);
  const Vec th0 = nlpre::pmono_readout(b, Vec{0.1, 0.1, 0.1, 0.1});
  EXPECT_NEAR(th0[0], 0.1, 1e-15);
  EXPECT_NEAR(th0[1], 0.1, 1e-15);
  EXPECT_NEAR(th0[2], 0.0, 1e-15);
  EXPECT_NEAR(th0[3], 1.0, 1e-15);
  EXPECT_THROW(nlpre::pmono_readout(b, Vec{0.0, 0.1, 0.1, 0.1}), nlpre::SingularityError);
  EXPECT_THROW(nlpre::pmono_readout(b, Vec{0.1, 0.0, 0.1, 0.1}), nlpre::SingularityError);
}

TEST(PMono, RobotEtaRoundTrip) {
  const Vec th{0.7, 0.8, 1.5, 0.5};
  const Vec eta = nlpre::robot::eta_of_theta(th);
  EXPECT_NEAR(eta[2], 0.4, 1e-15);
  EXPECT_NEAR(eta[3], 1.4, 1e-15);
  const auto b = nlpre::robot::pmono_bundle(10.0, {GainMode::kNormalized, 5.0});
  const Vec w = b.W(eta);
  const Vec big = nlpre::eval_theta_map(nlpre::robot::problem(), th);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(w[i], big[i + 1], 1e-14);
}

TEST(PMono, BundleValidation) {
  auto b = nlpre::academic::pmono_bundle(10.0, {GainMode::kConstant, 1.0});
  EXPECT_NO_THROW(b.validate());
  b.P(0, 1) = 1.0;
  EXPECT_THROW(b.validate(), nlpre::ArgumentError);
  b.P(0, 1) = 0.0;
  b.P(1, 1) = -1.0;
  EXPECT_THROW(b.validate(), nlpre::ArgumentError);
}

TEST(Overparam, Examples) {
  const nlpre::OverparamEstimatorState st{{1.0, 1.0, 0.0}, 10.0 * Mat::identity(3)};
  const Vec d = nlpre::overparam_rhs(st, Mat{{1, 0, 0}}, Vec{3.0});
  EXPECT_DOUBLE_EQ(d[0], 20.0);
  EXPECT_EQ(d[1], 0.0);
  EXPECT_EQ(d[2], 0.0);
  EXPECT_EQ(nlpre::overparam_rhs(st, Mat(1, 3), Vec{0.0}), (Vec{0.0, 0.0, 0.0}));
  const Vec consistent = nlpre::overparam_rhs(st, Mat{{0.5, 2.0, 1.0}}, Vec{2.5});
  EXPECT_EQ(consistent, (Vec{0.0, 0.0, 0.0}));
}

TEST(Overparam, Readout) {
  EXPECT_EQ(nlpre::overparam_readout(Vec{2.0, 2.0, 0.0}), (Vec{1.0, 1.0}));
  EXPECT_EQ(nlpre::overparam_readout(Vec{3.0, 3.0, 0.5}), (Vec{1.0, 2.0}));
  EXPECT_THROW(nlpre::overparam_readout(Vec{1.0, 0.0, 0.0}), nlpre::SingularityError);
}

nlpre::TimeSeries<Vec> series(std::initializer_list<Vec> rows) {
  nlpre::TimeSeries<Vec> s;
  double t = 0.0;
  for (const auto& r : rows) {
    s.push(t, r);
    t += 0.5;
  }
  return s;
}

TEST(Monotonicity, DecayingIsClean) {
  nlpre::TimeSeries<Vec> s;
  for (int k = 0; k < 100; ++k) s.push(0.1 * k, Vec{std::exp(-0.1 * k), -2.0 * std::exp(-0.3 * k)});
  const auto rep = nlpre::monotonicity_audit(s, 1e-9);
  EXPECT_EQ(rep.violations, 0u);
}

TEST(Monotonicity, InjectedBump) {
  const auto rep = nlpre::monotonicity_audit(series({{3.0}, {2.0}, {3.0}, {1.0}}), 1e-9);
  EXPECT_EQ(rep.violations, 1u);
  EXPECT_DOUBLE_EQ(rep.worst_excess, 1.0);
  EXPECT_EQ(rep.per_component, (std::vector<std::size_t>{1}));
}

TEST(Monotonicity, SlackAndTruncation) {
  EXPECT_EQ(nlpre::monotonicity_audit(series({{1.0}, {1.0 + 1e-10}}), 1e-9).violations, 0u);
  const auto rep =
      nlpre::monotonicity_audit(series({{1.0}, {0.5}, {std::nan("")}, {9.0}}), 1e-9);
  EXPECT_EQ(rep.violations, 0u);
  EXPECT_THROW(nlpre::monotonicity_audit(nlpre::TimeSeries<Vec>{}, 1e-9), nlpre::ArgumentError);
}

}  // namespace
