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
 * @file kbkz.hpp
 * @brief K-BKZ integral constitutive model with Papanastasiou-Scriven-Macosko
 *        (PSM) damping, evaluated on viscometric flow histories.
 *
 * Extra stress T = T1 + T2 with
 *
 *   T1 = 1/(1-theta) * int_0^inf sum_i m_i(s) H(I1, I2)
 *                      [ (C^-1 - I) + theta (C - I) ] ds
 *   m_i(s) = (1 - r_eta) eta_i / lambda_i^2 * exp(-s / lambda_i)
 *   H = alpha / (alpha + beta*I1 + (1-beta)*I2 - 3)
 *   T2 = 2 r_eta eta D,   eta = sum_i eta_i
 *
 * The rest-state isotropic term is subtracted inside the bracket; it only
 * shifts the pressure and leaves every material function unchanged. Each
 * mode is integrated in u = s / lambda_i.
 */

#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "micronip/kinematics.hpp"

namespace micronip {

enum class Damping { Reversible, Irreversible };

struct RelaxationMode {
  double eta;     // partial viscosity, Pa s
  double lambda;  // relaxation time, s
};

struct KbkzParams {
  std::vector<RelaxationMode> modes;
  double alpha = 1.0;
  double beta = 1.0;
  double theta = 0.0;
  double r_eta = 0.0;
  Damping damping = Damping::Reversible;

  double total_viscosity() const;
  /// Viscoelastic share (1 - r_eta) * total.
  double eta1() const;
  /// Newtonian share r_eta * total.
  double eta2() const;
  double max_relaxation_time() const;

  /// Throws InvalidArgument when any invariant is violated.
  void validate() const;

  static KbkzParams single_mode(double eta, double lambda, double alpha);
};

struct StressTensor {
  Mat3 t{};  // Pa
};

struct ShearMaterialPoint {
  double rate = 0.0;       // 1/s
  double viscosity = 0.0;  // Pa s
  double n1 = 0.0;         // Pa
  double n2 = 0.0;         // Pa
};

struct LinearModuli {
  double g_storage = 0.0;  // Pa
  double g_loss = 0.0;     // Pa
};

struct EngineOptions {
  double rel_tol = 1e-10;
  std::size_t max_intervals = 4000;
};

/// Base truncation point in u = s/lambda; exp(-40) ~ 4e-18.
inline constexpr double kMemoryCutoff = 40.0;

/// Above this alpha the damping is treated as absent for the extension guard.
inline constexpr double kLodgeLikeAlpha = 1e6;

/// PSM damping with I = beta*i1 + (1-beta)*i2.
double damping_psm(const KbkzParams& p, double i1, double i2);

/// PSM damping written in terms of the strain excess I - 3 >= 0.
/// alpha = +inf switches damping off (H = 1, Lodge rubber-like liquid).
inline double damping_from_excess(double alpha, double excess) {
  if (std::isinf(alpha)) return 1.0;
  return alpha / (alpha + excess);
}

/// (eta / lambda^2) exp(-s / lambda).
double memory_kernel(const RelaxationMode& mode, double s);

/// Steady SteadyShear or UniaxialExtension only.
StressTensor extra_stress_steady(const KbkzParams& p, const FlowKind& flow,
                                 const EngineOptions& opts = {});

ShearMaterialPoint steady_shear_point(const KbkzParams& p, double rate,
                                      const EngineOptions& opts = {});

/// Steady uniaxial extensional viscosity (T_xx - T_yy) / rate.
double extensional_viscosity(const KbkzParams& p, double rate,
                             const EngineOptions& opts = {});

/// Largest |rate| in the direction of `rate` for which the steady
/// extensional stress is accepted, or +inf when the memory integral
/// converges for every rate. Lodge-like parameter sets (alpha >= 1e6) are
/// held to 0.45 / max lambda.
double critical_extension_rate(const KbkzParams& p, double rate);
double critical_extension_rate(const KbkzParams& p);

/// Shear stress at time t after inception of shear at constant rate.
double startup_shear_stress(const KbkzParams& p, double rate, double t,
                            const EngineOptions& opts = {});

/// Shear stress for an arbitrary planar shear history. relative_strain(s)
/// returns gamma(t) - gamma(t - s); breakpoints lists kinks in s. Damping
/// follows p.damping; irreversible damping keeps the running minimum of H
/// along increasing s. Returns the xy component of T1 + T2 using
/// newtonian_rate for the instantaneous T2 term.
double shear_stress_for_history(const KbkzParams& p,
                                const std::function<double(double)>& relative_strain,
                                std::span<const double> breakpoints,
                                double newtonian_rate,
                                const EngineOptions& opts = {});

/// Small-strain (H -> 1) Maxwell moduli of the discrete spectrum.
LinearModuli linear_moduli(const KbkzParams& p, double omega);

struct MaterialFunctionRow {
  double rate = 0.0;
  double viscosity = 0.0;
  double n1 = 0.0;
  double n2 = 0.0;
  std::optional<double> eta_e;
  std::optional<double> g_storage;  // evaluated at omega = rate
  std::optional<double> g_loss;
};

struct MaterialFunctions {
  std::vector<MaterialFunctionRow> rows;
  bool has_extensional = false;
  bool has_moduli = false;
};

struct TableColumns {
  bool extensional = false;
  bool moduli = false;
};

/// Batch evaluation on a strictly increasing positive grid. Per-point
/// failures are rethrown as PointEvaluationError naming the rate.
MaterialFunctions material_function_table(const KbkzParams& p,
                                          std::span<const double> rates,
                                          TableColumns columns = {},
                                          const EngineOptions& opts = {});

}  // namespace micronip
