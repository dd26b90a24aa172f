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

#include "micronip/kinematics.hpp"

#include <cmath>
#include <string>

#include "micronip/errors.hpp"

namespace micronip {

Mat3 multiply(const Mat3& a, const Mat3& b) {
  Mat3 out{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      double sum = 0.0;
      for (int k = 0; k < 3; ++k) sum += a[i][k] * b[k][j];
      out[i][j] = sum;
    }
  }
  return out;
}

double trace(const Mat3& a) { return a[0][0] + a[1][1] + a[2][2]; }

double determinant(const Mat3& a) {
  return a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
         a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
         a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
}

bool is_symmetric(const Mat3& a, double tol) {
  return std::abs(a[0][1] - a[1][0]) <= tol &&
         std::abs(a[0][2] - a[2][0]) <= tol &&
         std::abs(a[1][2] - a[2][1]) <= tol;
}

namespace {

void require_finite(double v, const char* name) {
  if (!std::isfinite(v)) {
    throw InvalidArgument(std::string(name) + " must be finite");
  }
}

}  // namespace

void validate(const FlowKind& flow) {
  std::visit(
      [](const auto& f) {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, SteadyShear> ||
                      std::is_same_v<T, UniaxialExtension>) {
          require_finite(f.rate, "rate");
        } else if constexpr (std::is_same_v<T, StartupShear>) {
          require_finite(f.rate, "rate");
          require_finite(f.elapsed, "elapsed");
          if (f.elapsed < 0.0) throw InvalidArgument("elapsed must be >= 0");
        } else {
          require_finite(f.frequency, "frequency");
        }
      },
      flow);
}

StrainPair shear_strain_tensors(double gamma) {
  require_finite(gamma, "shear strain");
  const double g2 = gamma * gamma;
  StrainPair sp;
  sp.c_inv = Mat3{{{1.0 + g2, gamma, 0.0}, {gamma, 1.0, 0.0}, {0.0, 0.0, 1.0}}};
  sp.c = Mat3{{{1.0, -gamma, 0.0}, {-gamma, 1.0 + g2, 0.0}, {0.0, 0.0, 1.0}}};
  return sp;
}

StrainPair extension_strain_tensors(double epsilon) {
  if (!(std::abs(epsilon) <= kMaxHenckyStrain)) {
    throw RangeError("Hencky strain " + std::to_string(epsilon) +
                     " outside [-100, 100]");
  }
  const double stretch2 = std::exp(2.0 * epsilon);
  const double lateral = std::exp(-epsilon);
  StrainPair sp;
  sp.c_inv = Mat3{{{stretch2, 0.0, 0.0}, {0.0, lateral, 0.0}, {0.0, 0.0, lateral}}};
  sp.c = Mat3{{{1.0 / stretch2, 0.0, 0.0},
               {0.0, 1.0 / lateral, 0.0},
               {0.0, 0.0, 1.0 / lateral}}};
  return sp;
}

StrainInvariants invariants(const StrainPair& sp) {
  return {trace(sp.c_inv), trace(sp.c)};
}

RateOfDeformation rate_of_deformation(const FlowKind& flow) {
  validate(flow);
  RateOfDeformation out{};
  std::visit(
      [&out](const auto& f) {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, UniaxialExtension>) {
          out.d[0][0] = f.rate;
          out.d[1][1] = -0.5 * f.rate;
          out.d[2][2] = -0.5 * f.rate;
        } else if constexpr (std::is_same_v<T, Oscillatory>) {
          out.d[0][1] = out.d[1][0] = 0.5 * f.frequency;
        } else {
          out.d[0][1] = out.d[1][0] = 0.5 * f.rate;
        }
      },
      flow);
  return out;
}

}  // namespace micronip
