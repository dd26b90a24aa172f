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
 * @file nip.hpp
 * @brief Lubrication (Reynolds) model of the flow between two rigid rolls.
 *
 * With x along the nip, y across the gap (roll 1 at y = 0, roll 2 at y = h)
 * and surface speeds U1, U2 (positive into the nip), the gap-averaged flux
 *
 *   q = (U1 + U2) h / 2 - h^3 / (12 mu) dP/dx
 *
 * is constant, so dP/dx = 12 mu (Ubar h - q) / h^3 with Ubar = (U1 + U2) / 2.
 * The rolls are approximated by the parabola h = h0 + x^2 / (2 R), with
 * 1/R = 1/R1 + 1/R2.
 */

#pragma once

#include <cstddef>
#include <optional>
#include <variant>
#include <vector>

#include "micronip/kbkz.hpp"

namespace micronip {

struct NipGeometry {
  double radius1 = 0.4;   // m
  double radius2 = 0.4;   // m
  double gap0 = 60e-6;    // m, surface-to-surface gap at x = 0
  double speed1 = 20.0;   // m/s
  double speed2 = 20.0;   // m/s
  /// Domain half-width override in m; 0 derives X from h(X) = 100 gap0.
  double domain_half_width = 0.0;

  /// 1 / (1/radius1 + 1/radius2).
  double effective_radius() const;
  /// Domain half-width X (h(X) = 100 gap0 unless overridden).
  double half_width() const;
  double mean_speed() const { return 0.5 * (speed1 + speed2); }

  /// Throws InvalidArgument / RangeError.
  void validate() const;
};

/// Surface speed of a roll of the given radius spinning at omega (rad/s).
inline double surface_speed(double omega, double radius) { return omega * radius; }

struct Newtonian {
  double mu;  // Pa s
};

struct GeneralizedNewtonian {
  KbkzParams params;
};

using FluidModel = std::variant<Newtonian, GeneralizedNewtonian>;

enum class OutletCondition { Sommerfeld, SwiftStieber };

const char* to_string(OutletCondition bc);

struct SolverOptions {
  double flux_tol = 1e-8;                    // relative, on q
  std::size_t max_flux_iterations = 200;     // outlet-condition evaluations
  EngineOptions engine{};
};

struct NipSolution {
  std::vector<double> x;         // m, symmetric stretched grid on [-X, X]
  std::vector<double> h;         // m
  std::vector<double> pressure;  // Pa; zero in the cavitated region
  std::vector<double> dpdx;      // Pa/m
  std::vector<double> mu_eff;    // Pa s
  std::vector<double> wall_rate; // 1/s, characteristic rate per node
  double q = 0.0;                // m^2/s
  double h_star = 0.0;           // m, gap where dP/dx = 0
  OutletCondition bc_used = OutletCondition::Sommerfeld;
  std::optional<double> cavitation_x;
  /// Nodes [0, active_nodes) lie in the film region (x <= cavitation_x).
  std::size_t active_nodes = 0;
  /// |P| and |dP/dx| * X at the outlet point, relative to 6 mu Ubar X / h0^2.
  double outlet_pressure_residual = 0.0;
  double outlet_gradient_residual = 0.0;
  /// |outlet residual| / (p_char X) at each flux iterate.
  std::vector<double> flux_residuals;
  double mean_speed = 0.0;
  double speed1 = 0.0;
  double speed2 = 0.0;

  double active_end() const;
};

struct VelocityProfile {
  double a = 0.0;  // u(y) = a y^2 + b y + c, y in [0, h]
  double b = 0.0;
  double c = 0.0;
  double h = 0.0;

  double operator()(double y) const { return (a * y + b) * y + c; }
  /// Exact integral over [0, h].
  double flux() const { return ((a * h / 3.0 + b / 2.0) * h + c) * h; }
};

struct RecirculationRegion {
  double x_start = 0.0;
  double x_end = 0.0;
  double max_reversed_fraction = 0.0;
};

struct NipMetrics {
  double load = 0.0;           // N/m
  double peak_pressure = 0.0;  // Pa
  double q = 0.0;              // m^2/s
  double film1 = 0.0;          // m
  double film2 = 0.0;          // m
  double n1_proxy = 0.0;       // N/m
  std::vector<RecirculationRegion> recirculation;

  double recirculation_extent() const;
};

/// h0 + x^2 / (2 R); |x| must stay within 0.2 * min radius.
double gap_profile(const NipGeometry& g, double x);

NipSolution solve_reynolds(const NipGeometry& g, const FluidModel& f,
                           OutletCondition bc, std::size_t grid_n,
                           const SolverOptions& opts = {});

/// Effective viscosity of the fluid at a given wall shear rate.
double effective_viscosity(const FluidModel& f, double rate,
                           const EngineOptions& opts = {});

/// Cross-gap profile at x; throws RegionError past the cavitation point.
VelocityProfile velocity_profile(const NipSolution& sol, const FluidModel& f,
                                 const NipGeometry& g, double x);

/// Fraction of the gap where u * sign(U1 + U2) < 0.
double reversed_fraction(const VelocityProfile& u, double flow_sign);

std::vector<RecirculationRegion> detect_recirculation(const NipSolution& sol,
                                                      const FluidModel& f,
                                                      const NipGeometry& g);

NipMetrics nip_metrics(const NipSolution& sol, const FluidModel& f,
                       const NipGeometry& g, const EngineOptions& opts = {});

}  // namespace micronip
