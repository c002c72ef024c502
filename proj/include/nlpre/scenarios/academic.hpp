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

// Scalar academic regression
//
//   y = Omega(t) Theta(theta),  Omega(t) = (e^-t, sin t, 1),
//   Theta(theta) = (theta1 theta2 + theta1^2, theta1 + theta2, cos theta1),
//
// with psi = (Theta1, Theta2). The regressor is finitely but not
// persistently exciting: the e^-t direction dies out.

#ifndef NLPRE_SCENARIOS_ACADEMIC_HPP_
#define NLPRE_SCENARIOS_ACADEMIC_HPP_

#include <cmath>
#include <string>
#include <vector>

#include "nlpre/estimators.hpp"
#include "nlpre/mapping.hpp"
#include "nlpre/numkit.hpp"
#include "nlpre/pipeline.hpp"
#include "nlpre/run_table.hpp"

namespace nlpre::academic {

struct AcademicScenario {
  Vec theta_true{1.0, 2.0};
  double sigma = 1.0;
  GainSchedule gamma{GainMode::kConstant, 1e13};
  GainSchedule gamma_eta{GainMode::kConstant, 1e5};
  double Gamma = 10.0;  // overparam gain, Gamma * I_3
  double kappa = 10.0;
  Vec theta_hat0{0.0, 0.0};
  Vec eta_hat0{0.0, 0.0};
  Vec Theta_hat0{0.0, 1.0, 0.0};
  double horizon = 30.0;
  double step = 1e-3;
};

inline Mat regressor(double t) { return Mat{{std::exp(-t), std::sin(t), 1.0}}; }

inline Vec theta_map(std::span<const double> th) {
  return Vec{th[0] * th[1] + th[0] * th[0], th[0] + th[1], std::cos(th[0])};
}

inline NlpreProblem problem() {
  NlpreProblem pr;
  pr.name = "academic";
  pr.n = 1;
  pr.p = 3;
  pr.q = 2;
  pr.theta_map = theta_map;
  pr.regressor = regressor;
  pr.selector = make_selector(3, {0, 1});
  pr.validate();
  return pr;
}

/// G = diag(psi2, psi2), S = (psi1, psi2^2 - psi1), Pi = diag(Delta, Delta^2).
/// XiBar_G Y = (Y2, Delta Y2), XiBar_S Y = (Y1, Delta Y1, Y2).
inline MappingBundle bundle() {
  MappingBundle b;
  b.name = "academic";
  b.q = 2;
  b.G = [](std::span<const double> psi) { return Mat{{psi[1], 0.0}, {0.0, psi[1]}}; };
  b.S = [](std::span<const double> psi) { return Vec{psi[0], psi[1] * psi[1] - psi[0]}; };
  b.xi_G = ExponentTable(2, 2, {{0, 1}, {1, 1}, {0, 1}, {1, 2}});
  b.xi_S = ExponentTable(3, 2, {{1, 1}, {0, 1}, {1, 2}, {0, 1}, {0, 1}, {1, 1}});
  b.T_G = [](std::span<const double> a) { return Mat{{a[0], 0.0}, {0.0, a[1]}}; };
  b.T_S = [](std::span<const double> a) { return Vec{a[0], a[2] * a[2] - a[1]}; };
  b.Pi = [](double d) { return Mat{{d, 0.0}, {0.0, d * d}}; };
  b.ell_theta = 3;
  b.notes = "det Pi(Delta) = Delta^3";
  return b;
}

/// eta = (theta1, theta1 + theta2), W(eta) = (eta1 eta2, eta2), P = diag(kappa, 1).
inline PMonotoneBundle pmono_bundle(double kappa, GainSchedule gain) {
  PMonotoneBundle b;
  b.name = "academic-pmono";
  b.eta_dim = 2;
  b.W = [](std::span<const double> e) { return Vec{e[0] * e[1], e[1]}; };
  b.DI = [](std::span<const double> e) { return Vec{e[0], e[1] - e[0]}; };
  b.P = Mat{{kappa, 0.0}, {0.0, 1.0}};
  b.selector_C = make_selector(3, {0, 1});
  b.gain = gain;
  b.validate();
  return b;
}

enum class Law { kDrem, kPmono, kOverparam };

inline const char* law_name(Law law) {
  switch (law) {
    case Law::kDrem:
      return "drem";
    case Law::kPmono:
      return "pmono";
    case Law::kOverparam:
      return "overparam";
  }
  return "?";
}

/// Runs every requested law on one shared signal stream and samples every
/// `stride`-th integration step (plus t = 0).
///
/// Columns: t; theta_hat_<law>_i; theta_err_<law>_i; Delta; Y_psi_i;
/// omega_1_j; then per law its internals (M_drem, int_M2_drem,
/// Y_theta_drem_i, eta_hat_pmono_i, Theta_hat_overparam_i).
inline RunTable run(const AcademicScenario& sc, const std::vector<Law>& laws,
                    std::size_t stride = 10) {
  if (laws.empty()) throw ArgumentError("academic::run: no estimation law requested");
  if (stride == 0) throw ArgumentError("academic::run: stride must be >= 1");
  const NlpreProblem pr = problem();
  const MappingBundle mb = bundle();
  const PMonotoneBundle pb = pmono_bundle(sc.kappa, sc.gamma_eta);
  const Vec theta_big = eval_theta_map(pr, sc.theta_true);
  const std::size_t p = pr.p;
  const std::size_t q = pr.q;
  const Mat gamma_over = sc.Gamma * Mat::identity(p);

  // State layout: [extension | law blocks in request order].
  const std::size_t ext = ExtensionState::packed_size(p);
  std::vector<std::size_t> offset(laws.size());
  std::size_t dim = ext;
  for (std::size_t k = 0; k < laws.size(); ++k) {
    offset[k] = dim;
    switch (laws[k]) {
      case Law::kDrem:
        dim += q + 1;
        break;
      case Law::kPmono:
        dim += pb.eta_dim;
        break;
      case Law::kOverparam:
        dim += p;
        break;
    }
  }

  OdeProblem ode;
  ode.dimension = dim;
  ode.t0 = 0.0;
  ode.x0.assign(dim, 0.0);
  for (std::size_t k = 0; k < laws.size(); ++k) {
    double* x = ode.x0.data() + offset[k];
    switch (laws[k]) {
      case Law::kDrem:
        std::copy(sc.theta_hat0.begin(), sc.theta_hat0.end(), x);
        break;
      case Law::kPmono:
        std::copy(sc.eta_hat0.begin(), sc.eta_hat0.end(), x);
        break;
      case Law::kOverparam:
        std::copy(sc.Theta_hat0.begin(), sc.Theta_hat0.end(), x);
        break;
    }
  }

  ode.rhs = [&](double t, std::span<const double> x, std::span<double> dx) {
    const Mat omega = regressor(t);
    const Vec y = omega * theta_big;
    const ExtensionState es = ExtensionState::unpack(x, p, t, sc.sigma, 0.0);
    extension_rhs(es, omega, y).pack(dx);
    const MixedSignals mixed = mix_first(pr, es);
    for (std::size_t k = 0; k < laws.size(); ++k) {
      const std::size_t o = offset[k];
      switch (laws[k]) {
        case Law::kDrem: {
          const LinearRegression reg = mix_second(mb, mixed);
          DremEstimatorState st{Vec(x.begin() + o, x.begin() + o + q), sc.gamma, x[o + q]};
          const DremDerivative d = drem_rhs(st, reg);
          std::copy(d.theta_hat_dot.begin(), d.theta_hat_dot.end(), dx.begin() + o);
          dx[o + q] = d.integral_M2_dot;
          break;
        }
        case Law::kPmono: {
          const Vec d = pmono_rhs(pb, x.subspan(o, pb.eta_dim), mixed);
          std::copy(d.begin(), d.end(), dx.begin() + o);
          break;
        }
        case Law::kOverparam: {
          OverparamEstimatorState st{Vec(x.begin() + o, x.begin() + o + p), gamma_over};
          const Vec d = overparam_rhs(st, omega, y);
          std::copy(d.begin(), d.end(), dx.begin() + o);
          break;
        }
      }
    }
  };
  ode.project = [p](double, std::span<double> x) {
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t j = i + 1; j < p; ++j) {
        double& a = x[p + i * p + j];
        double& b = x[p + j * p + i];
        const double m = 0.5 * (a + b);
        a = m;
        b = m;
      }
  };

  RunTable table;
  table.columns.push_back("t");
  for (Law law : laws)
    for (std::size_t i = 1; i <= q; ++i)
      table.columns.push_back("theta_hat_" + std::string(law_name(law)) + "_" + std::to_string(i));
  for (Law law : laws)
    for (std::size_t i = 1; i <= q; ++i)
      table.columns.push_back("theta_err_" + std::string(law_name(law)) + "_" + std::to_string(i));
  table.columns.push_back("Delta");
  for (std::size_t i = 1; i <= q; ++i) table.columns.push_back("Y_psi_" + std::to_string(i));
  for (std::size_t j = 1; j <= p; ++j) table.columns.push_back("omega_1_" + std::to_string(j));
  for (Law law : laws) {
    switch (law) {
      case Law::kDrem:
        table.columns.push_back("M_drem");
        table.columns.push_back("int_M2_drem");
        for (std::size_t i = 1; i <= q; ++i) table.columns.push_back("Y_theta_drem_" + std::to_string(i));
        break;
      case Law::kPmono:
        for (std::size_t i = 1; i <= pb.eta_dim; ++i)
          table.columns.push_back("eta_hat_pmono_" + std::to_string(i));
        break;
      case Law::kOverparam:
        for (std::size_t i = 1; i <= p; ++i)
          table.columns.push_back("Theta_hat_overparam_" + std::to_string(i));
        break;
    }
  }
  for (Law law : laws) table.outcomes.push_back({law_name(law), true, std::nullopt, ""});

  auto observer = [&](std::size_t step, double t, std::span<const double> x) {
    if (step % stride != 0) return;
    const ExtensionState es = ExtensionState::unpack(x, p, t, sc.sigma, 0.0);
    const MixedSignals mixed = mix_first(pr, es);
    std::vector<double> hats;
    std::vector<double> extras;
    for (std::size_t k = 0; k < laws.size(); ++k) {
      const std::size_t o = offset[k];
      LawOutcome& outcome = table.outcomes[k];
      Vec theta_hat(q, kMissing);
      switch (laws[k]) {
        case Law::kDrem: {
          theta_hat.assign(x.begin() + o, x.begin() + o + q);
          const LinearRegression reg = mix_second(mb, mixed);
          extras.push_back(reg.M);
          extras.push_back(x[o + q]);
          extras.insert(extras.end(), reg.Y_theta.begin(), reg.Y_theta.end());
          break;
        }
        case Law::kPmono:
          theta_hat = pmono_readout(pb, x.subspan(o, pb.eta_dim));
          extras.insert(extras.end(), x.begin() + o, x.begin() + o + pb.eta_dim);
          break;
        case Law::kOverparam:
          if (outcome.ok) {
            try {
              theta_hat = overparam_readout(x.subspan(o, p));
            } catch (const SingularityError& e) {
              outcome.ok = false;
              outcome.failed_at = t;
              outcome.failure = e.what();
            }
          }
          if (outcome.ok) {
            extras.insert(extras.end(), x.begin() + o, x.begin() + o + p);
          } else {
            extras.insert(extras.end(), p, kMissing);
          }
          break;
      }
      hats.insert(hats.end(), theta_hat.begin(), theta_hat.end());
    }
    std::vector<double> row;
    row.reserve(table.columns.size());
    row.push_back(t);
    row.insert(row.end(), hats.begin(), hats.end());
    for (std::size_t k = 0; k < laws.size(); ++k)
      for (std::size_t i = 0; i < q; ++i) row.push_back(hats[k * q + i] - sc.theta_true[i]);
    row.push_back(mixed.Delta);
    row.insert(row.end(), mixed.Y_psi.begin(), mixed.Y_psi.end());
    const Mat omega = regressor(t);
    row.insert(row.end(), omega.data().begin(), omega.data().end());
    row.insert(row.end(), extras.begin(), extras.end());
    table.rows.push_back(std::move(row));
  };

  try {
    integrate(ode, sc.horizon, sc.step, observer, 0);
  } catch (const IntegrationDiverged& e) {
    // Shared stream: a divergence ends every law.
    for (auto& o : table.outcomes) {
      if (!o.ok) continue;
      o.ok = false;
      o.failed_at = e.time();
      o.failure = e.what();
    }
    pad_missing_rows(table, sc.horizon, sc.step, stride);
  }
  return table;
}

}  // namespace nlpre::academic

#endif  // NLPRE_SCENARIOS_ACADEMIC_HPP_
