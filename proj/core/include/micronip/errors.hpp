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

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace micronip {

/// Malformed command line or run configuration (CLI exit code 64).
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A file could not be read or written (CLI exit code 1).
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input value (non-finite, wrong sign, malformed parameter set).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Input outside the validity window of an approximation or overflow guard.
class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Base for all numerical failures (maps to CLI exit code 2).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Adaptive quadrature or an iterative solver could not reach its tolerance.
class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(const std::string& what, double achieved_error,
                   std::vector<double> residual_history = {})
      : NumericalError(what),
        achieved_error_(achieved_error),
        residual_history_(std::move(residual_history)) {}

  double achieved_error() const noexcept { return achieved_error_; }
  const std::vector<double>& residual_history() const noexcept {
    return residual_history_;
  }

 private:
  double achieved_error_;
  std::vector<double> residual_history_;
};

/// Steady extensional stress does not exist (memory integral diverges).
class UnboundedStressError : public NumericalError {
 public:
  UnboundedStressError(const std::string& what, double critical_rate)
      : NumericalError(what), critical_rate_(critical_rate) {}

  double critical_rate() const noexcept { return critical_rate_; }

 private:
  double critical_rate_;
};

/// The requested outlet boundary condition has no solution in the domain.
class BoundaryConditionError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Velocity or stress requested in a cavitated (film-free) region.
class RegionError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Fewer observations than free parameters.
class UnderDeterminedError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Malformed input file; carries the 1-based line number (0 if unknown).
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Well-formed input that violates a domain invariant.
class ValidationError : public std::runtime_error {
 public:
  ValidationError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Failure evaluating the model at one point of a batch; names the point.
class PointEvaluationError : public NumericalError {
 public:
  PointEvaluationError(const std::string& what, std::size_t index, double rate)
      : NumericalError(what), index_(index), rate_(rate) {}

  std::size_t index() const noexcept { return index_; }
  double rate() const noexcept { return rate_; }

 private:
  std::size_t index_;
  double rate_;
};

}  // namespace micronip
