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
 * @file quadrature.hpp
 * @brief Globally adaptive 21-point Gauss-Kronrod quadrature for small
 *        vector-valued integrands.
 *
 * Every component of the integrand is sampled at the same nodes, so ratios
 * between components (for instance N2/N1) are not polluted by independent
 * refinement decisions. An interval is accepted for component k once the
 * summed |K21 - G10| estimate satisfies err_k <= max(abs_tol, rel_tol*|I_k|).
 */

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <queue>
#include <tuple>
#include <utility>
#include <vector>

namespace micronip::quad {

struct Options {
  double rel_tol = 1e-10;
  double abs_tol = 0.0;
  std::size_t max_intervals = 4000;
};

template <std::size_t N>
struct Result {
  std::array<double, N> value{};
  std::array<double, N> error{};
  std::size_t evaluations = 0;
  std::size_t intervals = 0;
  bool converged = false;

  double max_error() const {
    return *std::max_element(error.begin(), error.end());
  }
};

namespace detail {

// Kronrod abscissae on [0, 1]; odd indices are the embedded Gauss points.
inline constexpr std::array<double, 11> kXgk = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.000000000000000000000000000000000};

inline constexpr std::array<double, 11> kWgk = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077208067366298, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};

inline constexpr std::array<double, 5> kWg = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

template <std::size_t N>
struct Panel {
  double a;
  double b;
  std::array<double, N> value;
  std::array<double, N> error;
  double priority;  // largest scaled error; drives bisection order

  bool operator<(const Panel& o) const { return priority < o.priority; }
};

template <std::size_t N, class F>
Panel<N> kronrod21(F& f, double a, double b, std::size_t& evals) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  std::array<double, N> gauss{};
  std::array<double, N> kronrod{};

  const std::array<double, N> fc = f(center);
  for (std::size_t k = 0; k < N; ++k) kronrod[k] = fc[k] * kWgk[10];
  ++evals;

  for (std::size_t j = 0; j < 10; ++j) {
    const double dx = half * kXgk[j];
    const std::array<double, N> f1 = f(center - dx);
    const std::array<double, N> f2 = f(center + dx);
    evals += 2;
    for (std::size_t k = 0; k < N; ++k) {
      const double pair = f1[k] + f2[k];
      kronrod[k] += kWgk[j] * pair;
      if (j % 2 == 1) gauss[k] += kWg[j / 2] * pair;
    }
  }

  Panel<N> p{a, b, {}, {}, 0.0};
  for (std::size_t k = 0; k < N; ++k) {
    p.value[k] = kronrod[k] * half;
    p.error[k] = std::abs((kronrod[k] - gauss[k]) * half);
  }
  return p;
}

}  // namespace detail

/// Integrates f over [a, b]. f maps double -> std::array<double, N>.
/// Never throws on non-convergence; the caller inspects Result::converged.
template <std::size_t N, class F>
Result<N> integrate(F&& f, double a, double b, const Options& opts = {}) {
  Result<N> out;
  if (a == b) {
    out.converged = true;
    return out;
  }

  std::size_t evals = 0;
  std::priority_queue<detail::Panel<N>> heap;

  auto scaled_priority = [](const detail::Panel<N>& p) {
    double worst = 0.0;
    for (std::size_t k = 0; k < N; ++k) worst = std::max(worst, p.error[k]);
    return worst;
  };

  auto totals = [&heap]() {
    // Copying the heap is cheap next to integrand evaluations at the panel
    // counts used here.
    std::array<double, N> value{};
    std::array<double, N> error{};
    auto copy = heap;
    while (!copy.empty()) {
      const auto& p = copy.top();
      for (std::size_t k = 0; k < N; ++k) {
        value[k] += p.value[k];
        error[k] += p.error[k];
      }
      copy.pop();
    }
    return std::pair{value, error};
  };

  auto first = detail::kronrod21<N>(f, a, b, evals);
  first.priority = scaled_priority(first);
  std::array<double, N> value = first.value;
  std::array<double, N> error = first.error;
  heap.push(first);

  auto satisfied = [&opts](const std::array<double, N>& v,
                           const std::array<double, N>& e) {
    for (std::size_t k = 0; k < N; ++k) {
      if (e[k] > std::max(opts.abs_tol, opts.rel_tol * std::abs(v[k]))) {
        return false;
      }
    }
    return true;
  };

  std::size_t since_resync = 0;
  while (!satisfied(value, error) && heap.size() < opts.max_intervals) {
    auto worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      heap.push(worst);
      break;  // interval can no longer be split in double precision
    }
    auto left = detail::kronrod21<N>(f, worst.a, mid, evals);
    auto right = detail::kronrod21<N>(f, mid, worst.b, evals);
    left.priority = scaled_priority(left);
    right.priority = scaled_priority(right);
    for (std::size_t k = 0; k < N; ++k) {
      value[k] += left.value[k] + right.value[k] - worst.value[k];
      error[k] += left.error[k] + right.error[k] - worst.error[k];
    }
    heap.push(left);
    heap.push(right);
    // Running sums drift; resum periodically.
    if (++since_resync == 64) {
      std::tie(value, error) = totals();
      since_resync = 0;
    }
  }

  std::tie(value, error) = totals();
  out.value = value;
  out.error = error;
  out.evaluations = evals;
  out.intervals = heap.size();
  out.converged = satisfied(value, error);
  return out;
}

/// Scalar convenience wrapper.
Result<1> integrate_scalar(const std::function<double(double)>& f, double a,
                           double b, const Options& opts = {});

}  // namespace micronip::quad
