// Copyright 2026 The micronip Authors. All Rights Reserved.
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

/**
 * @file polyfit.hpp
 * @brief Least-squares estimation of KBKZ/PSM parameters from steady-shear
 *        viscosity data.
 *
 * The objective is the mean squared log-residual
 *   L = (1/M) sum_k [ln eta_model(rate_k) - ln eta_data_k]^2.
 * Parameters are fitted in log space (positivity is structural) by a
 * Levenberg-Marquardt iteration with a forward-difference Jacobian, restarted
 * from a 3x3x3 grid of seeds.
 *
 * With theta, beta and r_eta at their defaults the steady-shear viscosity of
 * mode i depends on lambda_i and alpha only through lambda_i / sqrt(alpha),
 * because the shear strain enters H as gamma^2 / alpha. Viscosity data alone
 * therefore pins eta and lambda / sqrt(alpha); the split between lambda and
 * alpha along that ridge is set by the seed and the tie-break on alpha.
 */

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "micronip/errors.hpp"
#include "micronip/kbkz.hpp"

namespace micronip {

struct RheoPoint {
  double rate;       // 1/s
  double viscosity;  // Pa s
};

struct RheoDataset {
  std::vector<RheoPoint> points;
  std::string label;

  /// >= 3 points, strictly increasing positive rates, positive viscosities.
  void validate() const;
};

struct FitOptions {
  std::size_t max_iterations = 200;
  double step_tol = 1e-10;   // relative parameter step
  double grad_tol = 1e-12;   // infinity norm of J^T r / M
  double fd_step = 1e-6;     // relative (log-space absolute) difference step
  double alpha_cap = 1e8;    // "effectively Newtonian"
  double lambda_ladder_ratio = 10.0;  // n_modes > 1 only
  bool parallel = true;
  EngineOptions engine{};
};

struct FitReport {
  KbkzParams params;
  double loss = 0.0;
  double rms_log_residual = 0.0;
  double gradient_norm = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  bool alpha_capped = false;
  std::vector<double> per_point_residuals;
  /// Objective after each accepted step of the winning start.
  std::vector<double> loss_history;
  std::size_t starts_tried = 0;
  std::size_t starts_converged = 0;
};

/// Every start failed; carries the best-effort report.
class FitNoConvergence : public NumericalError {
 public:
  FitNoConvergence(const std::string& what, FitReport best)
      : NumericalError(what), best_(std::move(best)) {}

  const FitReport& best_effort() const noexcept { return best_; }

 private:
  FitReport best_;
};

/// ln eta_model(rate_k) - ln eta_k for every point.
std::vector<double> log_residuals(const KbkzParams& p, const RheoDataset& data,
                                  const EngineOptions& opts = {});

double loss(const KbkzParams& p, const RheoDataset& data,
            const EngineOptions& opts = {});

/// Number of fitted parameters for a model with n_modes relaxation modes:
/// one eta per mode, a shared alpha and the anchor of the lambda ladder.
std::size_t free_parameter_count(std::size_t n_modes);

FitReport fit_steady_shear(const RheoDataset& data, std::size_t n_modes,
                           const FitOptions& opts = {});

/// Model viscosities times exp(noise_rel * z_k), z_k ~ N(0, 1) from a
/// seeded mt19937_64.
RheoDataset synthesize_dataset(const KbkzParams& p, std::span<const double> rates,
                               double noise_rel, std::uint64_t seed,
                               std::string label = {},
                               const EngineOptions& opts = {});

/// Log-spaced grid of n points on [lo, hi].
std::vector<double> log_grid(double lo, double hi, std::size_t n);

}  // namespace micronip
