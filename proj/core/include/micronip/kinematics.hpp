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
 * @file kinematics.hpp
 * @brief Closed-form strain histories for viscometric flows.
 *
 * All tensors are full 3x3 arrays in the (x, y, z) frame where x is the flow
 * direction, y the gradient direction and z the neutral direction. The
 * relative strain between the present time t and a past time t - s is
 * described by the Finger tensor C_t^-1 = F F^T and its inverse, the
 * Cauchy-Green tensor C_t, with F the relative deformation gradient.
 */

#pragma once

#include <array>
#include <type_traits>
#include <variant>

namespace micronip {

using Mat3 = std::array<std::array<double, 3>, 3>;

constexpr Mat3 identity3() {
  return Mat3{{{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}}};
}

Mat3 multiply(const Mat3& a, const Mat3& b);
double trace(const Mat3& a);
double determinant(const Mat3& a);
bool is_symmetric(const Mat3& a, double tol = 0.0);

struct SteadyShear {
  double rate;  // 1/s
};

struct StartupShear {
  double rate;     // 1/s
  double elapsed;  // s since inception, >= 0
};

struct UniaxialExtension {
  double rate;  // Hencky strain rate, 1/s
};

struct Oscillatory {
  double frequency;  // rad/s
};

using FlowKind =
    std::variant<SteadyShear, StartupShear, UniaxialExtension, Oscillatory>;

/// Throws InvalidArgument unless rates/frequency are finite and elapsed >= 0.
void validate(const FlowKind& flow);

/// Cauchy-Green tensor and its inverse (the Finger tensor).
struct StrainPair {
  Mat3 c;
  Mat3 c_inv;
};

struct RateOfDeformation {
  Mat3 d;  // 1/s
};

struct StrainInvariants {
  double i1;  // tr(C^-1)
  double i2;  // tr(C)
};

/// Simple shear with accumulated strain gamma; F = [[1, gamma], [0, 1]].
StrainPair shear_strain_tensors(double gamma);

/// Uniaxial extension with Hencky strain epsilon; |epsilon| <= 100.
StrainPair extension_strain_tensors(double epsilon);

StrainInvariants invariants(const StrainPair& sp);

/// Symmetric part of the velocity gradient. For Oscillatory the tensor is
/// the peak rate per unit strain amplitude (d_xy = omega / 2).
RateOfDeformation rate_of_deformation(const FlowKind& flow);

inline constexpr double kMaxHenckyStrain = 100.0;

}  // namespace micronip
