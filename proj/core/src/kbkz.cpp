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

#include "micronip/kbkz.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "micronip/errors.hpp"
#include "micronip/quadrature.hpp"

namespace micronip {

double KbkzParams::total_viscosity() const {
  double sum = 0.0;
  for (const auto& m : modes) sum += m.eta;
  return sum;
}

double KbkzParams::eta1() const { return (1.0 - r_eta) * total_viscosity(); }

double KbkzParams::eta2() const { return r_eta * total_viscosity(); }

double KbkzParams::max_relaxation_time() const {
  double lam = 0.0;
  for (const auto& m : modes) lam = std::max(lam, m.lambda);
  return lam;
}

void KbkzParams::validate() const {
  if (modes.empty()) throw InvalidArgument("at least one relaxation mode required");
  for (std::size_t i = 0; i < modes.size(); ++i) {
    const auto& m = modes[i];
    if (!(m.eta > 0.0) || !std::isfinite(m.eta) || !(m.lambda > 0.0) ||
        !std::isfinite(m.lambda)) {
      throw InvalidArgument("mode " + std::to_string(i) +
                            ": eta and lambda must be positive and finite");
    }
  }
  if (!(alpha > 0.0) || std::isnan(alpha)) {
    throw InvalidArgument("alpha must be > 0");
  }
  if (!(beta >= 0.0 && beta <= 1.0)) throw InvalidArgument("beta must lie in [0, 1]");
  if (!std::isfinite(theta) || theta == 1.0) {
    throw InvalidArgument("theta must be finite and != 1");
  }
  if (!(r_eta >= 0.0 && r_eta < 1.0)) throw InvalidArgument("r_eta must lie in [0, 1)");
}

KbkzParams KbkzParams::single_mode(double eta, double lambda, double alpha) {
  KbkzParams p;
  p.modes = {{eta, lambda}};
  p.alpha = alpha;
  return p;
}

double damping_psm(const KbkzParams& p, double i1, double i2) {
  const double excess = p.beta * i1 + (1.0 - p.beta) * i2 - 3.0;
  return damping_from_excess(p.alpha, std::max(excess, 0.0));
}

double memory_kernel(const RelaxationMode& mode, double s) {
  return mode.eta / (mode.lambda * mode.lambda) * std::exp(-s / mode.lambda);
}

namespace {

constexpr double kAbsFloor = 1e-14;
constexpr double kTailCap = kMemoryCutoff * 128.0;

quad::Options quad_options(const EngineOptions& opts, double abs_tol) {
  quad::Options q;
  q.rel_tol = opts.rel_tol;
  q.abs_tol = abs_tol;
  q.max_intervals = opts.max_intervals;
  return q;
}

std::string format_error(const char* what, double estimate) {
  std::ostringstream os;
  os << what << " (achieved error estimate " << estimate << ")";
  return os.str();
}

// Points where the damping function changes character; keeps the adaptive
// rule from stepping over a sharp feature near u = 0.
std::vector<double> damping_breaks(double u_feature) {
  std::vector<double> breaks;
  if (!(u_feature > 0.0) || !std::isfinite(u_feature)) return breaks;
  for (double u = u_feature * 1e-2; u < kMemoryCutoff; u *= 10.0) {
    if (u > 1e-300) breaks.push_back(u);
  }
  return breaks;
}

template <std::size_t N>
struct MemoryIntegral {
  std::array<double, N> value{};
  double error = 0.0;
  bool tail_converged = true;
};

// Integrates f(u) on [0, inf) as panels [0, ..breaks.., 40] followed by
// doubling tail panels until a panel no longer contributes at the requested
// tolerance.
template <std::size_t N, class F>
MemoryIntegral<N> integrate_memory(F&& f, std::vector<double> breaks,
                                   const EngineOptions& opts) {
  breaks.push_back(0.0);
  breaks.push_back(kMemoryCutoff);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  MemoryIntegral<N> out;
  const auto q = quad_options(opts, kAbsFloor);
  for (std::size_t j = 0; j + 1 < breaks.size(); ++j) {
    auto r = quad::integrate<N>(f, breaks[j], breaks[j + 1], q);
    if (!r.converged) {
      throw ConvergenceError(
          format_error("memory integral failed to converge", r.max_error()),
          r.max_error());
    }
    for (std::size_t k = 0; k < N; ++k) out.value[k] += r.value[k];
    out.error += r.max_error();
  }

  double lo = breaks.back();
  for (;;) {
    const double hi = 2.0 * lo;
    if (lo >= kTailCap) {
      out.tail_converged = false;
      break;
    }
    auto r = quad::integrate<N>(f, lo, hi, q);
    if (!r.converged) {
      throw ConvergenceError(
          format_error("memory tail failed to converge", r.max_error()),
          r.max_error());
    }
    bool negligible = true;
    for (std::size_t k = 0; k < N; ++k) {
      out.value[k] += r.value[k];
      const double allowed =
          std::max(kAbsFloor, 0.1 * opts.rel_tol * std::abs(out.value[k]));
      if (std::abs(r.value[k]) > allowed) negligible = false;
    }
    out.error += r.max_error();
    if (negligible) break;
    lo = hi;
  }
  return out;
}

// Dimensionless shear integrals A = int e^-u H gamma du and
// B = int e^-u H gamma^2 du for gamma = wi * u.
MemoryIntegral<2> steady_shear_integrals(double alpha, double wi,
                                         const EngineOptions& opts) {
  auto f = [alpha, wi](double u) {
    const double g = wi * u;
    const double h = damping_from_excess(alpha, g * g);
    const double w = std::exp(-u) * h;
    return std::array<double, 2>{w * g, w * g * g};
  };
  const double u_feature = wi > 0.0 ? std::sqrt(alpha) / wi : 0.0;
  return integrate_memory<2>(f, damping_breaks(u_feature), opts);
}

// Normal components (xx, yy) of exp(-u) H [(C^-1 - I) + theta (C - I)] for
// uniaxial extension with Hencky strain eps; zz equals yy.
std::array<double, 2> extension_integrand(double u, double eps, double alpha,
                                          double beta, double theta) {
  const double d = std::abs(eps);
  if (d <= 300.0) {
    const double cinv_xx = std::expm1(2.0 * eps);
    const double cinv_yy = std::expm1(-eps);
    const double c_xx = std::expm1(-2.0 * eps);
    const double c_yy = std::expm1(eps);
    const double excess =
        beta * (cinv_xx + 2.0 * cinv_yy) + (1.0 - beta) * (c_xx + 2.0 * c_yy);
    const double w = std::exp(-u) * damping_from_excess(alpha, std::max(excess, 0.0));
    return {w * (cinv_xx + theta * c_xx), w * (cinv_yy + theta * c_yy)};
  }
  if (d > 700.0) return {0.0, 0.0};

  auto sc = [d](double k) { return std::exp(k - 2.0 * d); };
  const double xx = sc(2.0 * eps) - sc(0.0) + theta * (sc(-2.0 * eps) - sc(0.0));
  const double yy = sc(-eps) - sc(0.0) + theta * (sc(eps) - sc(0.0));
  auto signed_exp = [](double v, double log_mag) {
    if (v == 0.0) return 0.0;
    const double mag = std::exp(log_mag + std::log(std::abs(v)));
    return v < 0.0 ? -mag : mag;
  };
  if (std::isinf(alpha)) {
    return {signed_exp(xx, -u + 2.0 * d), signed_exp(yy, -u + 2.0 * d)};
  }

  // Numerator and denominator are scaled by exp(-2|eps|); work in logs.

  // Positive terms of (alpha + I - 3) * exp(-2|eps|); the -3 term is smaller
  // than the dominant term by at least exp(-300).
  double terms[5] = {std::log(alpha) - 2.0 * d,
                     beta > 0.0 ? std::log(beta) + 2.0 * eps - 2.0 * d : -INFINITY,
                     beta > 0.0 ? std::log(2.0 * beta) - eps - 2.0 * d : -INFINITY,
                     beta < 1.0 ? std::log(1.0 - beta) - 2.0 * eps - 2.0 * d : -INFINITY,
                     beta < 1.0 ? std::log(2.0 * (1.0 - beta)) + eps - 2.0 * d
                                : -INFINITY};
  const double top = *std::max_element(std::begin(terms), std::end(terms));
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - top);
  const double log_den = top + std::log(acc);

  const double log_mag = -u + std::log(alpha) - log_den;
  return {signed_exp(xx, log_mag), signed_exp(yy, log_mag)};
}

void require_valid(const KbkzParams& p) { p.validate(); }

}  // namespace

double critical_extension_rate(const KbkzParams& p, double rate) {
  const double lam = p.max_relaxation_time();
  if (p.alpha >= kLodgeLikeAlpha) return 0.45 / lam;
  int growth = 0;
  if (rate >= 0.0) {
    growth = p.beta > 0.0 ? 0 : 1;
  } else {
    growth = (p.beta < 1.0 || p.theta == 0.0) ? 0 : 1;
  }
  if (growth == 0) return std::numeric_limits<double>::infinity();
  return 1.0 / (growth * lam);
}

double critical_extension_rate(const KbkzParams& p) {
  return critical_extension_rate(p, 1.0);
}

namespace {

StressTensor shear_stress_tensor(const KbkzParams& p, double rate,
                                 const EngineOptions& opts) {
  StressTensor out;
  if (rate == 0.0) return out;
  const double scale = 1.0 / (1.0 - p.theta);
  double xy = 0.0;
  double normal = 0.0;
  for (const auto& m : p.modes) {
    const double weight = (1.0 - p.r_eta) * m.eta / m.lambda;
    const auto r = steady_shear_integrals(p.alpha, rate * m.lambda, opts);
    xy += weight * r.value[0];
    normal += weight * r.value[1];
  }
  // Shear components of (C^-1 - I) + theta (C - I): xy = gamma (1 - theta),
  // xx = gamma^2, yy = theta gamma^2, zz = 0.
  out.t[0][1] = out.t[1][0] = xy + p.eta2() * rate;
  out.t[0][0] = scale * normal;
  out.t[1][1] = scale * p.theta * normal;
  out.t[2][2] = 0.0;
  return out;
}

StressTensor extension_stress_tensor(const KbkzParams& p, double rate,
                                     const EngineOptions& opts) {
  StressTensor out;
  if (rate == 0.0) return out;
  const double critical = critical_extension_rate(p, rate);
  if (std::abs(rate) >= critical) {
    std::ostringstream os;
    os << "steady extensional stress unbounded at rate " << rate
       << " 1/s (critical rate " << critical << " 1/s)";
    throw UnboundedStressError(os.str(), critical);
  }
  const double scale = 1.0 / (1.0 - p.theta);
  double xx = 0.0;
  double yy = 0.0;
  for (const auto& m : p.modes) {
    const double weight = (1.0 - p.r_eta) * m.eta / m.lambda;
    const double wi = rate * m.lambda;
    auto f = [&p, wi](double u) {
      return extension_integrand(u, wi * u, p.alpha, p.beta, p.theta);
    };
    const double eps_feature =
        p.alpha <= 1.0 ? std::sqrt(p.alpha / 3.0) : 0.5 * std::log(p.alpha) + 0.5;
    const auto r = integrate_memory<2>(f, damping_breaks(eps_feature / std::abs(wi)), opts);
    if (!r.tail_converged) {
      const double c = 1.0 / m.lambda;
      std::ostringstream os;
      os << "steady extensional stress did not converge at rate " << rate
         << " 1/s; memory tail keeps growing (critical rate ~" << c << " 1/s)";
      throw UnboundedStressError(os.str(), c);
    }
    xx += weight * r.value[0];
    yy += weight * r.value[1];
  }
  const double eta2 = p.eta2();
  out.t[0][0] = scale * xx + 2.0 * eta2 * rate;
  out.t[1][1] = scale * yy - eta2 * rate;
  out.t[2][2] = out.t[1][1];
  return out;
}

}  // namespace

StressTensor extra_stress_steady(const KbkzParams& p, const FlowKind& flow,
                                 const EngineOptions& opts) {
  require_valid(p);
  validate(flow);
  if (const auto* s = std::get_if<SteadyShear>(&flow)) {
    return shear_stress_tensor(p, s->rate, opts);
  }
  if (const auto* e = std::get_if<UniaxialExtension>(&flow)) {
    return extension_stress_tensor(p, e->rate, opts);
  }
  throw InvalidArgument("extra_stress_steady supports steady shear and uniaxial extension only");
}

ShearMaterialPoint steady_shear_point(const KbkzParams& p, double rate,
                                      const EngineOptions& opts) {
  if (!(rate >= 0.0) || !std::isfinite(rate)) {
    throw InvalidArgument("shear rate must be finite and >= 0");
  }
  require_valid(p);
  ShearMaterialPoint pt;
  pt.rate = rate;
  if (rate == 0.0) {
    pt.viscosity = p.total_viscosity();
    return pt;
  }
  const auto t = shear_stress_tensor(p, rate, opts);
  pt.viscosity = t.t[0][1] / rate;
  pt.n1 = t.t[0][0] - t.t[1][1];
  pt.n2 = t.t[1][1] - t.t[2][2];
  return pt;
}

double extensional_viscosity(const KbkzParams& p, double rate,
                             const EngineOptions& opts) {
  if (rate == 0.0 || !std::isfinite(rate)) {
    throw InvalidArgument("extension rate must be finite and nonzero");
  }
  require_valid(p);
  const auto t = extension_stress_tensor(p, rate, opts);
  return (t.t[0][0] - t.t[1][1]) / rate;
}

namespace {

// Running minimum of H along increasing s, sampled on a fixed path grid.
class PathMinimum {
 public:
  PathMinimum(const std::function<double(double)>& strain, double alpha,
              double s_max, std::span<const double> breaks) {
    constexpr std::size_t kNodes = 8192;
    nodes_.reserve(kNodes + breaks.size() + 1);
    for (std::size_t j = 0; j <= kNodes; ++j) {
      const double x = static_cast<double>(j) / kNodes;
      nodes_.push_back(s_max * x * x * x);
    }
    for (double b : breaks) {
      if (b >= 0.0 && b <= s_max) nodes_.push_back(b);
    }
    std::sort(nodes_.begin(), nodes_.end());
    nodes_.erase(std::unique(nodes_.begin(), nodes_.end()), nodes_.end());
    running_.reserve(nodes_.size());
    double lowest = 1.0;
    for (double s : nodes_) {
      const double g = strain(s);
      lowest = std::min(lowest, damping_from_excess(alpha, g * g));
      running_.push_back(lowest);
    }
  }

  double at(double s) const {
    auto it = std::upper_bound(nodes_.begin(), nodes_.end(), s);
    if (it == nodes_.begin()) return 1.0;
    return running_[static_cast<std::size_t>(it - nodes_.begin()) - 1];
  }

 private:
  std::vector<double> nodes_;
  std::vector<double> running_;
};

}  // namespace

double shear_stress_for_history(const KbkzParams& p,
                                const std::function<double(double)>& relative_strain,
                                std::span<const double> breakpoints,
                                double newtonian_rate,
                                const EngineOptions& opts) {
  require_valid(p);
  const double s_max = kTailCap * p.max_relaxation_time();
  std::optional<PathMinimum> path;
  if (p.damping == Damping::Irreversible) {
    path.emplace(relative_strain, p.alpha, s_max, breakpoints);
  }

  double xy = 0.0;
  for (const auto& m : p.modes) {
    const double lam = m.lambda;
    auto f = [&](double u) {
      const double s = lam * u;
      const double g = relative_strain(s);
      double h = damping_from_excess(p.alpha, g * g);
      if (path) h = std::min(h, path->at(s));
      return std::array<double, 1>{std::exp(-u) * h * g};
    };
    std::vector<double> breaks;
    for (double b : breakpoints) {
      if (b > 0.0) breaks.push_back(b / lam);
    }
    const auto r = integrate_memory<1>(f, breaks, opts);
    xy += (1.0 - p.r_eta) * m.eta / lam * r.value[0];
  }
  return xy + p.eta2() * newtonian_rate;
}

double startup_shear_stress(const KbkzParams& p, double rate, double t,
                            const EngineOptions& opts) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw InvalidArgument("time must be finite and >= 0");
  if (!(rate >= 0.0) || !std::isfinite(rate)) {
    throw InvalidArgument("shear rate must be finite and >= 0");
  }
  require_valid(p);
  if (t == 0.0 || rate == 0.0) return 0.0;

  // Before inception the fluid was at rest, so the relative strain saturates
  // at rate * t for s > t.
  auto strain = [rate, t](double s) { return rate * std::min(s, t); };
  std::vector<double> breaks = {t};
  const double lam = p.max_relaxation_time();
  if (rate * lam > 0.0) {
    // Resolve the damping onset inside [0, t].
    const double s_feature = std::sqrt(p.alpha) / rate;
    for (double s = s_feature * 1e-2; s < t; s *= 10.0) breaks.push_back(s);
  }
  return shear_stress_for_history(p, strain, breaks, rate, opts);
}

LinearModuli linear_moduli(const KbkzParams& p, double omega) {
  if (!(omega > 0.0) || !std::isfinite(omega)) {
    throw InvalidArgument("omega must be finite and > 0");
  }
  require_valid(p);
  LinearModuli g;
  for (const auto& m : p.modes) {
    const double modulus = (1.0 - p.r_eta) * m.eta / m.lambda;
    const double wl = m.lambda * omega;
    const double den = 1.0 + wl * wl;
    g.g_storage += modulus * wl * wl / den;
    g.g_loss += modulus * wl / den;
  }
  g.g_loss += p.eta2() * omega;
  return g;
}

MaterialFunctions material_function_table(const KbkzParams& p,
                                          std::span<const double> rates,
                                          TableColumns columns,
                                          const EngineOptions& opts) {
  if (rates.empty()) throw InvalidArgument("rate grid is empty");
  for (std::size_t i = 0; i < rates.size(); ++i) {
    if (!(rates[i] > 0.0) || !std::isfinite(rates[i])) {
      throw InvalidArgument("rate grid must be positive and finite");
    }
    if (i > 0 && !(rates[i] > rates[i - 1])) {
      throw InvalidArgument("rate grid must be strictly increasing");
    }
  }
  require_valid(p);

  MaterialFunctions out;
  out.has_extensional = columns.extensional;
  out.has_moduli = columns.moduli;
  out.rows.reserve(rates.size());
  for (std::size_t i = 0; i < rates.size(); ++i) {
    const double rate = rates[i];
    try {
      MaterialFunctionRow row;
      const auto pt = steady_shear_point(p, rate, opts);
      row.rate = rate;
      row.viscosity = pt.viscosity;
      row.n1 = pt.n1;
      row.n2 = pt.n2;
      if (columns.extensional) row.eta_e = extensional_viscosity(p, rate, opts);
      if (columns.moduli) {
        const auto g = linear_moduli(p, rate);
        row.g_storage = g.g_storage;
        row.g_loss = g.g_loss;
      }
      out.rows.push_back(row);
    } catch (const std::exception& e) {
      std::ostringstream os;
      os << "evaluation failed at rate " << rate << " 1/s (row " << i
         << "): " << e.what();
      throw PointEvaluationError(os.str(), i, rate);
    }
  }
  return out;
}

}  // namespace micronip
