// Copyright 2026 The mdc Authors
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

#ifndef MDC_SCHEDULE_HPP_
#define MDC_SCHEDULE_HPP_

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mdc/dct.hpp"
#include "mdc/error.hpp"

namespace mdc {

enum class ScheduleKind { cosine, linear, sigmoid, sqrt };

inline std::string to_string(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::cosine: return "cosine";
    case ScheduleKind::linear: return "linear";
    case ScheduleKind::sigmoid: return "sigmoid";
    case ScheduleKind::sqrt: return "sqrt";
  }
  return "?";
}

inline ScheduleKind schedule_kind_from_string(const std::string& s) {
  if (s == "cosine") return ScheduleKind::cosine;
  if (s == "linear") return ScheduleKind::linear;
  if (s == "sigmoid") return ScheduleKind::sigmoid;
  if (s == "sqrt") return ScheduleKind::sqrt;
  throw ConfigError("unknown schedule kind \"" + s +
                    "\" (expected cosine|linear|sigmoid|sqrt)");
}

// Variance tables for a T-step diffusion chain. betas[t] in (0,1),
// alphas[t] = 1 - betas[t], alpha_bars[t] = prod_{s<=t} alphas[s], strictly
// decreasing.
struct NoiseSchedule {
  ScheduleKind kind = ScheduleKind::cosine;
  int T = 0;
  std::vector<double> betas;
  std::vector<double> alphas;
  std::vector<double> alpha_bars;

  double alpha_bar_before(int t) const {  // alpha_bar at t-1, 1 at the start
    return t == 0 ? 1.0 : alpha_bars[t - 1];
  }
};

// Curve definitions (the four names are standard; exact endpoints are
// configurable):
//   linear   beta evenly spaced from beta_start to beta_end
//   cosine   alpha_bar(u) ~ cos^2(((u + s) / (1 + s)) * pi/2), s = 0.008
//   sigmoid  beta follows a logistic ramp over [-6, 6] between the endpoints
//   sqrt     alpha_bar(t) = 1 - sqrt(t / T + 1e-4)
// Betas are clipped to (0, 0.999] and alpha_bars recomputed from the clipped
// betas, so the invariants hold for every kind and T.
inline NoiseSchedule make_schedule(ScheduleKind kind, int T,
                                   double beta_start = 1e-4,
                                   double beta_end = 0.02) {
  if (T < 1) throw BoundsError("schedule needs T >= 1, got " + std::to_string(T));
  NoiseSchedule s;
  s.kind = kind;
  s.T = T;
  s.betas.resize(T);

  const double pi = 3.14159265358979323846;
  switch (kind) {
    case ScheduleKind::linear: {
      for (int t = 0; t < T; ++t)
        s.betas[t] = T == 1 ? beta_start
                            : beta_start + (beta_end - beta_start) * t / (T - 1);
      break;
    }
    case ScheduleKind::cosine: {
      const double offset = 0.008;
      auto f = [&](double u) {
        double c = std::cos((u + offset) / (1.0 + offset) * pi / 2.0);
        return c * c;
      };
      double prev = 1.0;
      for (int t = 0; t < T; ++t) {
        double cur = f(static_cast<double>(t + 1) / T) / f(0.0);
        s.betas[t] = 1.0 - cur / prev;
        prev = cur;
      }
      break;
    }
    case ScheduleKind::sigmoid: {
      auto logistic = [](double x) { return 1.0 / (1.0 + std::exp(-x)); };
      for (int t = 0; t < T; ++t) {
        double x = T == 1 ? 0.0 : -6.0 + 12.0 * t / (T - 1);
        s.betas[t] = beta_start + (beta_end - beta_start) * logistic(x);
      }
      break;
    }
    case ScheduleKind::sqrt: {
      double prev = 1.0;
      for (int t = 0; t < T; ++t) {
        double cur = 1.0 - std::sqrt(static_cast<double>(t) / T + 1e-4);
        s.betas[t] = 1.0 - cur / prev;
        prev = cur;
      }
      break;
    }
  }

  s.alphas.resize(T);
  s.alpha_bars.resize(T);
  double bar = 1.0;
  for (int t = 0; t < T; ++t) {
    if (s.betas[t] > 0.999) s.betas[t] = 0.999;
    if (s.betas[t] < 1e-12) s.betas[t] = 1e-12;
    s.alphas[t] = 1.0 - s.betas[t];
    bar *= s.alphas[t];
    s.alpha_bars[t] = bar;
  }
  return s;
}

inline NoiseSchedule make_schedule(const std::string& kind, int T) {
  return make_schedule(schedule_kind_from_string(kind), T);
}

inline void check_step(const NoiseSchedule& s, int t) {
  if (t < 0 || t >= s.T)
    throw BoundsError("diffusion step " + std::to_string(t) +
                      " outside [0, " + std::to_string(s.T) + ")");
}

// Closed-form forward marginal: sqrt(abar_t) x0 + sqrt(1 - abar_t) eps.
inline Eigen::MatrixXd q_sample(const Eigen::MatrixXd& x0, int t,
                                const Eigen::MatrixXd& eps,
                                const NoiseSchedule& s) {
  check_step(s, t);
  if (eps.rows() != x0.rows() || eps.cols() != x0.cols())
    throw ShapeError("q_sample noise shape does not match x0");
  const double abar = s.alpha_bars[t];
  return std::sqrt(abar) * x0 + std::sqrt(1.0 - abar) * eps;
}

inline DctCoeffs q_sample(const DctCoeffs& x0, int t,
                          const Eigen::MatrixXd& eps, const NoiseSchedule& s) {
  return DctCoeffs{q_sample(x0.coeffs, t, eps, s), x0.n_frames};
}

// One ancestral-sampling step: mean computed from the predicted noise plus
// sigma_t * z, with sigma_t^2 = beta_t (1 - abar_{t-1}) / (1 - abar_t) and
// sigma_0 = 0.
inline Eigen::MatrixXd posterior_step(const Eigen::MatrixXd& x_t,
                                      const Eigen::MatrixXd& predicted_eps,
                                      int t, const Eigen::MatrixXd& z,
                                      const NoiseSchedule& s) {
  check_step(s, t);
  if (predicted_eps.rows() != x_t.rows() || predicted_eps.cols() != x_t.cols())
    throw ShapeError("posterior_step predicted noise shape does not match x_t");
  const double beta = s.betas[t];
  const double alpha = s.alphas[t];
  const double abar = s.alpha_bars[t];
  Eigen::MatrixXd mean =
      (x_t - (beta / std::sqrt(1.0 - abar)) * predicted_eps) / std::sqrt(alpha);
  if (t == 0) return mean;
  if (z.rows() != x_t.rows() || z.cols() != x_t.cols())
    throw ShapeError("posterior_step z shape does not match x_t");
  const double var = beta * (1.0 - s.alpha_bar_before(t)) / (1.0 - abar);
  return mean + std::sqrt(var) * z;
}

inline DctCoeffs posterior_step(const DctCoeffs& x_t,
                                const DctCoeffs& predicted_eps, int t,
                                const Eigen::MatrixXd& z,
                                const NoiseSchedule& s) {
  return DctCoeffs{posterior_step(x_t.coeffs, predicted_eps.coeffs, t, z, s),
                   x_t.n_frames};
}

}  // namespace mdc

#endif  // MDC_SCHEDULE_HPP_
