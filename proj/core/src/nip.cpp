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

#include "micronip/nip.hpp"

#include <algorithm>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <cstdint>
#include <functional>
#include <sstream>
#include <string>

#include "micronip/errors.hpp"
#include "micronip/quadrature.hpp"

namespace micronip {

namespace {

constexpr double kOutletGapRatio = 100.0;
constexpr double kParabolicWindow = 0.2;
constexpr double kMaxGapToRadius = 1e-2;
constexpr double kMaxStretch = 1.05;

}  // namespace

const char* to_string(OutletCondition bc) {
  return bc == OutletCondition::Sommerfeld ? "sommerfeld" : "swift-stieber";
}

double NipGeometry::effective_radius() const {
  return 1.0 / (1.0 / radius1 + 1.0 / radius2);
}

double NipGeometry::half_width() const {
  if (domain_half_width > 0.0) return domain_half_width;
  return std::sqrt(2.0 * effective_radius() * (kOutletGapRatio - 1.0) * gap0);
}

void NipGeometry::validate() const {
  if (!(radius1 > 0.0) || !(radius2 > 0.0) || !std::isfinite(radius1) ||
      !std::isfinite(radius2)) {
    throw InvalidArgument("roll radii must be positive and finite");
  }
  if (!(gap0 > 0.0) || !std::isfinite(gap0)) {
    throw InvalidArgument("gap must be positive and finite");
  }
  if (!std::isfinite(speed1) || !std::isfinite(speed2)) {
    throw InvalidArgument("roll speeds must be finite");
  }
  if (!(gap0 / std::min(radius1, radius2) < kMaxGapToRadius)) {
    throw RangeError("gap / radius must be below 1e-2 for the lubrication approximation");
  }
  if (!(domain_half_width >= 0.0) || !std::isfinite(domain_half_width)) {
    throw InvalidArgument("domain half-width override must be >= 0 and finite");
  }
  if (half_width() > kParabolicWindow * std::min(radius1, radius2)) {
    throw RangeError("domain half-width exceeds the parabolic gap window (0.2 * radius)");
  }
}

double NipSolution::active_end() const {
  return cavitation_x ? *cavitation_x : x.back();
}

double NipMetrics::recirculation_extent() const {
  double sum = 0.0;
  for (const auto& r : recirculation) sum += r.x_end - r.x_start;
  return sum;
}

double gap_profile(const NipGeometry& g, double x) {
  if (!(std::abs(x) <= kParabolicWindow * std::min(g.radius1, g.radius2))) {
    throw RangeError("x outside the parabolic gap window");
  }
  return g.gap0 + x * x / (2.0 * g.effective_radius());
}

double effective_viscosity(const FluidModel& f, double rate, const EngineOptions& opts) {
  if (const auto* n = std::get_if<Newtonian>(&f)) return n->mu;
  const auto& p = std::get<GeneralizedNewtonian>(f).params;
  return steady_shear_point(p, std::abs(rate), opts).viscosity;
}

namespace {

double reference_viscosity(const FluidModel& f) {
  if (const auto* n = std::get_if<Newtonian>(&f)) return n->mu;
  return std::get<GeneralizedNewtonian>(f).params.total_viscosity();
}

void validate_fluid(const FluidModel& f) {
  if (const auto* n = std::get_if<Newtonian>(&f)) {
    if (!(n->mu > 0.0) || !std::isfinite(n->mu)) {
      throw InvalidArgument("Newtonian viscosity must be positive and finite");
    }
  } else {
    std::get<GeneralizedNewtonian>(f).params.validate();
  }
}

// Symmetric grid x_k = X sinh(c xi_k) / sinh(c), clustered at x = 0; the
// stretch c is capped so neighbouring cells differ by at most 5%.
std::vector<double> stretched_grid(double half_width, double nip_length, std::size_t n) {
  const double cap = 0.5 * static_cast<double>(n - 1) * std::log(kMaxStretch);
  const double c = std::min(std::asinh(half_width / nip_length), cap);
  std::vector<double> x(n, 0.0);
  for (std::size_t k = 0; k < n / 2; ++k) {
    const double xi = -1.0 + 2.0 * static_cast<double>(k) / static_cast<double>(n - 1);
    const double v = c > 1e-8 ? half_width * std::sinh(c * xi) / std::sinh(c) : half_width * xi;
    x[k] = v;
    x[n - 1 - k] = -v;
  }
  x.front() = -half_width;
  x.back() = half_width;
  return x;
}

double wall_rate(double speed1, double speed2, double mean_speed, double h, double q) {
  return (std::abs(speed2 - speed1) + std::abs(6.0 * (mean_speed * h - q)) / h) / h;
}

// Pressure gradient dP/dx = 12 mu(x; q) (Ubar h - q) / h^3 and its exact
// integrals. The viscosity depends on q through the wall rate, which
// vanishes where h = q / Ubar, so those points are quadrature breakpoints.
class ReynoldsSystem {
 public:
  ReynoldsSystem(const NipGeometry& g, const FluidModel& f, const EngineOptions& engine,
                 double p_char)
      : g_(g), f_(f), engine_(engine), ubar_(g.mean_speed()),
        newtonian_(std::holds_alternative<Newtonian>(f)) {
    opts_.rel_tol = 1e-12;
    // Absolute floor so cancelling pieces near a root stay cheap.
    opts_.abs_tol = 1e-15 * p_char;
    opts_.max_intervals = 2000;
  }

  double mean_speed() const { return ubar_; }
  bool newtonian() const { return newtonian_; }

  double viscosity(double x, double q) const {
    if (newtonian_) return std::get<Newtonian>(f_).mu;
    return effective_viscosity(f_, wall_rate(g_.speed1, g_.speed2, ubar_, gap_profile(g_, x), q),
                               engine_);
  }

  double gradient(double x, double q) const {
    const double h = gap_profile(g_, x);
    return 12.0 * viscosity(x, q) * (ubar_ * h - q) / (h * h * h);
  }

  /// Integral of dP/dx over [a, b] for flux q.
  double rise(double a, double b, double q) const {
    std::vector<double> cuts = {a};
    if (ubar_ != 0.0 && q / ubar_ > g_.gap0) {
      const double xs = std::sqrt(2.0 * g_.effective_radius() * (q / ubar_ - g_.gap0));
      for (double c : {-xs, xs}) {
        if (c > a && c < b) cuts.push_back(c);
      }
    }
    if (0.0 > a && 0.0 < b) cuts.push_back(0.0);
    cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      const auto r = quad::integrate_scalar([&](double x) { return gradient(x, q); }, cuts[i],
                                            cuts[i + 1], opts_);
      if (!r.converged) throw NumericalError("pressure quadrature did not converge");
      sum += r.value[0];
    }
    return sum;
  }

  /// Integral of mu / h^k over [a, b]; used only for the Newtonian closed form.
  double moment(double a, double b, int k) const {
    const double mu = std::get<Newtonian>(f_).mu;
    quad::Options o = opts_;
    o.abs_tol = 0.0;
    const auto r = quad::integrate_scalar(
        [&](double x) { return mu / std::pow(gap_profile(g_, x), k); }, a, b, o);
    if (!r.converged) throw NumericalError("pressure quadrature did not converge");
    return r.value[0];
  }

 private:
  const NipGeometry& g_;
  const FluidModel& f_;
  EngineOptions engine_;
  double ubar_;
  bool newtonian_;
  quad::Options opts_;
};

struct FluxSolve {
  double q = 0.0;
  std::optional<double> cavitation_x;
};

// Largest root of residual(r) on r in (1, r_max], r = h* / h0, with
// residual(r_max) < 0. A coarse scan downward from r_max brackets the first
// sign change; Newtonian residuals are monotone and need no scan.
double largest_root(const std::function<double(double)>& residual, double r_max, bool scan,
                    const SolverOptions& opts, std::vector<double>& history, double scale,
                    bool& found) {
  auto eval = [&](double r) {
    const double v = residual(r);
    history.push_back(std::abs(v) / scale);
    if (history.size() > opts.max_flux_iterations) {
      throw ConvergenceError("flux iteration did not converge", history.back(), history);
    }
    return v;
  };
  constexpr int kScanPoints = 48;
  constexpr double kMinExcess = 1e-9;
  double hi = r_max;
  double f_hi = eval(hi);
  double lo = 1.0 + kMinExcess;
  double f_lo = 0.0;
  found = false;
  if (scan) {
    const double step = std::log((r_max - 1.0) / kMinExcess) / kScanPoints;
    for (int k = 1; k <= kScanPoints; ++k) {
      const double r = 1.0 + (r_max - 1.0) * std::exp(-step * k);
      const double v = eval(r);
      if (v > 0.0) {
        lo = r;
        f_lo = v;
        found = true;
        break;
      }
      hi = r;
      f_hi = v;
    }
  } else {
    f_lo = eval(lo);
    found = f_lo > 0.0;
  }
  if (!found || !(f_hi < 0.0)) {
    found = false;
    return 0.0;
  }
  std::uintmax_t iters = opts.max_flux_iterations;
  auto tol = [&opts](double a, double b) {
    return std::abs(b - a) <= 0.25 * opts.flux_tol * std::min(std::abs(a), std::abs(b));
  };
  const auto bracket = boost::math::tools::toms748_solve(eval, lo, hi, f_lo, f_hi, tol, iters);
  return 0.5 * (bracket.first + bracket.second);
}

}  // namespace

NipSolution solve_reynolds(const NipGeometry& g, const FluidModel& f,
                           OutletCondition bc, std::size_t grid_n,
                           const SolverOptions& opts) {
  g.validate();
  validate_fluid(f);
  if (grid_n < 200) throw InvalidArgument("grid_n must be >= 200");
  const double ubar = g.mean_speed();
  if (bc == OutletCondition::SwiftStieber && ubar < 0.0) {
    throw InvalidArgument("Swift-Stieber needs the net surface motion along +x");
  }

  const double half = g.half_width();
  const double nip_length = std::sqrt(2.0 * g.effective_radius() * g.gap0);
  const std::size_t n = grid_n;
  const double p_char = 6.0 * reference_viscosity(f) * std::abs(ubar) * half / (g.gap0 * g.gap0);
  const ReynoldsSystem sys(g, f, opts.engine, p_char);

  NipSolution sol;
  sol.x = stretched_grid(half, nip_length, n);
  sol.h.resize(n);
  for (std::size_t j = 0; j < n; ++j) sol.h[j] = gap_profile(g, sol.x[j]);
  sol.bc_used = bc;
  sol.mean_speed = ubar;
  sol.speed1 = g.speed1;
  sol.speed2 = g.speed2;
  sol.pressure.assign(n, 0.0);
  sol.dpdx.assign(n, 0.0);

  // Fluxes are parametrised by r = h* / h0 with q = Ubar h0 r.
  const double r_max = gap_profile(g, half) / g.gap0;
  FluxSolve flux;
  if (ubar != 0.0 && bc == OutletCondition::Sommerfeld && sys.newtonian()) {
    // Constant viscosity factors out: q = Ubar int h^-2 / int h^-3.
    flux.q = ubar * sys.moment(-half, half, 2) / sys.moment(-half, half, 3);
  } else if (ubar != 0.0 && bc == OutletCondition::Sommerfeld) {
    const double sign = ubar > 0.0 ? 1.0 : -1.0;
    auto residual = [&](double r) { return sign * sys.rise(-half, half, ubar * g.gap0 * r); };
    bool found = false;
    const double r = largest_root(residual, r_max, true, opts, sol.flux_residuals,
                                  p_char * half, found);
    if (!found) {
      throw ConvergenceError("no flux satisfies the outlet condition", INFINITY,
                             sol.flux_residuals);
    }
    flux.q = ubar * g.gap0 * r;
  } else if (ubar != 0.0) {
    // Swift-Stieber: q = Ubar h(x_c) makes dP/dx(x_c) = 0; P(x_c) = 0 fixes x_c.
    const double radius = g.effective_radius();
    auto xc_of = [&](double r) {
      return std::min(half, std::sqrt(2.0 * radius * g.gap0 * (r - 1.0)));
    };
    auto residual = [&](double r) { return sys.rise(-half, xc_of(r), ubar * g.gap0 * r); };
    bool found = false;
    const double r = largest_root(residual, r_max, !sys.newtonian(), opts, sol.flux_residuals,
                                  p_char * half, found);
    if (!found) {
      throw BoundaryConditionError(
          "no cavitation point with P = dP/dx = 0 inside the domain; "
          "use the Sommerfeld condition instead");
    }
    flux.q = ubar * g.gap0 * r;
    flux.cavitation_x = xc_of(r);
  }

  sol.q = flux.q;
  sol.cavitation_x = flux.cavitation_x;
  sol.h_star = ubar != 0.0 ? flux.q / ubar : 0.0;
  sol.active_nodes = n;
  if (sol.cavitation_x) {
    sol.active_nodes = static_cast<std::size_t>(
        std::upper_bound(sol.x.begin(), sol.x.end(), *sol.cavitation_x) - sol.x.begin());
  }
  sol.wall_rate.resize(n);
  sol.mu_eff.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    sol.wall_rate[j] = wall_rate(g.speed1, g.speed2, ubar, sol.h[j], sol.q);
    sol.mu_eff[j] = sys.viscosity(sol.x[j], sol.q);
  }
  if (ubar == 0.0) return sol;

  for (std::size_t j = 0; j < sol.active_nodes; ++j) {
    sol.dpdx[j] = sys.gradient(sol.x[j], sol.q);
  }
  for (std::size_t j = 1; j < sol.active_nodes; ++j) {
    sol.pressure[j] = sol.pressure[j - 1] + sys.rise(sol.x[j - 1], sol.x[j], sol.q);
  }

  if (p_char > 0.0) {
    double p_out = sol.pressure.back();
    double dp_out = 0.0;
    if (sol.cavitation_x) {
      const std::size_t k = sol.active_nodes - 1;
      const double xc = *sol.cavitation_x;
      p_out = sol.pressure[k] + sys.rise(sol.x[k], xc, sol.q);
      dp_out = sys.gradient(xc, sol.q);
    }
    sol.outlet_pressure_residual = std::abs(p_out) / p_char;
    sol.outlet_gradient_residual = std::abs(dp_out) * half / p_char;
  }
  return sol;
}

namespace {

// Poiseuille curvature of the cross-gap profile; the viscosity cancels
// between dP/dx = 12 mu (Ubar h - q)/h^3 and a = dP/dx / (2 mu).
VelocityProfile profile_at(double speed1, double speed2, double ubar, double q, double h) {
  VelocityProfile u;
  u.h = h;
  u.a = 6.0 * (ubar * h - q) / (h * h * h);
  u.b = (speed2 - speed1) / h - u.a * h;
  u.c = speed1;
  return u;
}

void check_inside(const NipSolution& sol, double x) {
  if (!(x >= sol.x.front() && x <= sol.x.back())) {
    throw RangeError("x outside the solved domain");
  }
  if (sol.cavitation_x && x > *sol.cavitation_x) {
    throw RegionError("x lies in the cavitated region downstream of the film rupture");
  }
}

double flow_sign(const NipSolution& sol) {
  const double s = sol.speed1 + sol.speed2;
  return s < 0.0 ? -1.0 : 1.0;
}

// min over y in [0, h] of sign * u(y).
double min_directed_speed(const VelocityProfile& u, double sign) {
  double m = std::min(sign * u(0.0), sign * u(u.h));
  if (u.a != 0.0) {
    const double yv = -u.b / (2.0 * u.a);
    if (yv > 0.0 && yv < u.h) m = std::min(m, sign * u(yv));
  }
  return m;
}

}  // namespace

VelocityProfile velocity_profile(const NipSolution& sol, const FluidModel& f,
                                 const NipGeometry& g, double x) {
  validate_fluid(f);
  check_inside(sol, x);
  return profile_at(g.speed1, g.speed2, g.mean_speed(), sol.q, gap_profile(g, x));
}

double reversed_fraction(const VelocityProfile& u, double sign) {
  const double h = u.h;
  // Real roots of a y^2 + b y + c inside (0, h).
  std::vector<double> cuts = {0.0};
  const double scale = std::abs(u.b) * h + std::abs(u.c);
  if (std::abs(u.a) * h * h <= 1e-14 * scale) {
    if (u.b != 0.0) cuts.push_back(-u.c / u.b);
  } else {
    const double disc = u.b * u.b - 4.0 * u.a * u.c;
    if (disc > 0.0) {
      const double root = std::sqrt(disc);
      const double t = -0.5 * (u.b + (u.b >= 0.0 ? root : -root));
      cuts.push_back(t / u.a);
      if (t != 0.0) cuts.push_back(u.c / t);
    }
  }
  cuts.push_back(h);
  std::sort(cuts.begin(), cuts.end());
  double reversed = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = std::clamp(cuts[i], 0.0, h);
    const double b = std::clamp(cuts[i + 1], 0.0, h);
    if (b <= a) continue;
    if (sign * u(0.5 * (a + b)) < 0.0) reversed += b - a;
  }
  return reversed / h;
}

std::vector<RecirculationRegion> detect_recirculation(const NipSolution& sol,
                                                      const FluidModel& f,
                                                      const NipGeometry& g) {
  validate_fluid(f);
  std::vector<RecirculationRegion> regions;
  const double sign = flow_sign(sol);
  const double ubar = g.mean_speed();
  auto profile = [&](double x) {
    return profile_at(g.speed1, g.speed2, ubar, sol.q, gap_profile(g, x));
  };
  auto indicator = [&](double x) { return min_directed_speed(profile(x), sign); };

  // Continuous edge between a non-reversed node and a reversed one.
  auto edge = [&](double x_out, double x_in) {
    const double f_out = indicator(x_out);
    const double f_in = indicator(x_in);
    if (!(f_out >= 0.0 && f_in < 0.0)) return x_in;
    std::uintmax_t iters = 100;
    const auto b = boost::math::tools::toms748_solve(
        indicator, std::min(x_out, x_in), std::max(x_out, x_in),
        x_out < x_in ? f_out : f_in, x_out < x_in ? f_in : f_out,
        boost::math::tools::eps_tolerance<double>(50), iters);
    return 0.5 * (b.first + b.second);
  };

  const std::size_t n = sol.active_nodes;
  std::vector<double> frac(n);
  for (std::size_t j = 0; j < n; ++j) frac[j] = reversed_fraction(profile(sol.x[j]), sign);

  std::size_t j = 0;
  while (j < n) {
    if (frac[j] <= 0.0) {
      ++j;
      continue;
    }
    std::size_t k = j;
    double peak = 0.0;
    while (k < n && frac[k] > 0.0) {
      peak = std::max(peak, frac[k]);
      ++k;
    }
    RecirculationRegion r;
    r.x_start = j == 0 ? sol.x[0] : edge(sol.x[j - 1], sol.x[j]);
    if (k < n) {
      r.x_end = edge(sol.x[k], sol.x[k - 1]);
    } else if (sol.cavitation_x) {
      r.x_end = *sol.cavitation_x;
    } else {
      r.x_end = sol.x[n - 1];
    }
    r.max_reversed_fraction = peak;
    regions.push_back(r);
    j = k;
  }
  return regions;
}

NipMetrics nip_metrics(const NipSolution& sol, const FluidModel& f,
                       const NipGeometry& g, const EngineOptions& opts) {
  validate_fluid(f);
  NipMetrics m;
  m.q = sol.q;
  const std::size_t n = sol.active_nodes;

  const GeneralizedNewtonian* gn = std::get_if<GeneralizedNewtonian>(&f);
  std::vector<double> n1(n, 0.0);
  if (gn) {
    for (std::size_t j = 0; j < n; ++j) {
      n1[j] = steady_shear_point(gn->params, sol.wall_rate[j], opts).n1;
    }
  }

  for (std::size_t j = 0; j < n; ++j) m.peak_pressure = std::max(m.peak_pressure, sol.pressure[j]);
  for (std::size_t j = 1; j < n; ++j) {
    const double dx = sol.x[j] - sol.x[j - 1];
    m.load += 0.5 * dx * (sol.pressure[j - 1] + sol.pressure[j]);
    m.n1_proxy += 0.5 * dx * (n1[j - 1] + n1[j]);
  }
  if (sol.cavitation_x) {
    // Partial cell up to the film rupture, where P = 0.
    const double xc = *sol.cavitation_x;
    const double dx = xc - sol.x[n - 1];
    m.load += 0.5 * dx * sol.pressure[n - 1];
    if (gn) {
      const double hc = gap_profile(g, xc);
      const double rate = wall_rate(g.speed1, g.speed2, g.mean_speed(), hc, sol.q);
      m.n1_proxy += 0.5 * dx * (n1[n - 1] + steady_shear_point(gn->params, rate, opts).n1);
    }
  }

  // Film split: roll i carries the share U_i^2 / (U1^2 + U2^2) of the flux,
  // i.e. film_i = q U_i / (U1^2 + U2^2). Equal speeds give q / (2U) each and
  // U1 film1 + U2 film2 = q always holds.
  const double s2 = g.speed1 * g.speed1 + g.speed2 * g.speed2;
  if (s2 > 0.0) {
    m.film1 = sol.q * g.speed1 / s2;
    m.film2 = sol.q * g.speed2 / s2;
  }

  m.recirculation = detect_recirculation(sol, f, g);
  return m;
}

}  // namespace micronip
