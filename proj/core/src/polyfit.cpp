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

#include "micronip/polyfit.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <thread>

namespace micronip {

void RheoDataset::validate() const {
  if (points.size() < 3) {
    throw ValidationError("dataset needs at least 3 points, got " +
                          std::to_string(points.size()));
  }
  for (std::size_t k = 0; k < points.size(); ++k) {
    const auto& pt = points[k];
    if (!(pt.rate > 0.0) || !std::isfinite(pt.rate)) {
      throw ValidationError("point " + std::to_string(k) + ": rate must be positive");
    }
    if (!(pt.viscosity > 0.0) || !std::isfinite(pt.viscosity)) {
      throw ValidationError("point " + std::to_string(k) +
                            ": viscosity must be positive");
    }
    if (k > 0 && !(pt.rate > points[k - 1].rate)) {
      throw ValidationError("point " + std::to_string(k) +
                            ": rates must be strictly increasing");
    }
  }
}

std::vector<double> log_residuals(const KbkzParams& p, const RheoDataset& data,
                                  const EngineOptions& opts) {
  std::vector<double> r;
  r.reserve(data.points.size());
  for (std::size_t k = 0; k < data.points.size(); ++k) {
    const auto& pt = data.points[k];
    try {
      const double model = steady_shear_point(p, pt.rate, opts).viscosity;
      r.push_back(std::log(model) - std::log(pt.viscosity));
    } catch (const std::exception& e) {
      std::ostringstream os;
      os << "model evaluation failed at point " << k << " (rate " << pt.rate
         << "): " << e.what();
      throw PointEvaluationError(os.str(), k, pt.rate);
    }
  }
  return r;
}

double loss(const KbkzParams& p, const RheoDataset& data, const EngineOptions& opts) {
  data.validate();
  const auto r = log_residuals(p, data, opts);
  double sum = 0.0;
  for (double v : r) sum += v * v;
  return sum / static_cast<double>(r.size());
}

std::size_t free_parameter_count(std::size_t n_modes) { return n_modes + 2; }

std::vector<double> log_grid(double lo, double hi, std::size_t n) {
  if (n == 0) return {};
  if (n == 1) return {lo};
  std::vector<double> g(n);
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  for (std::size_t i = 0; i < n; ++i) {
    g[i] = std::pow(10.0, a + (b - a) * static_cast<double>(i) / (n - 1));
  }
  g.front() = lo;
  g.back() = hi;
  return g;
}

RheoDataset synthesize_dataset(const KbkzParams& p, std::span<const double> rates,
                               double noise_rel, std::uint64_t seed,
                               std::string label, const EngineOptions& opts) {
  if (!(noise_rel >= 0.0)) throw InvalidArgument("noise_rel must be >= 0");
  const auto table = material_function_table(p, rates, {}, opts);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  RheoDataset out;
  out.label = std::move(label);
  out.points.reserve(rates.size());
  for (const auto& row : table.rows) {
    double eta = row.viscosity;
    if (noise_rel > 0.0) eta *= std::exp(noise_rel * normal(rng));
    out.points.push_back({row.rate, eta});
  }
  return out;
}

namespace {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Parameter vector layout: [ln alpha, ln eta_1 .. ln eta_n, ln lambda_0].
struct Layout {
  std::size_t n_modes;
  double ladder_ratio;

  std::size_t size() const { return n_modes + 2; }

  KbkzParams to_params(const Vec& x) const {
    KbkzParams p;
    p.alpha = std::exp(x[0]);
    const double lambda0 = std::exp(x[static_cast<Eigen::Index>(n_modes + 1)]);
    for (std::size_t i = 0; i < n_modes; ++i) {
      p.modes.push_back({std::exp(x[static_cast<Eigen::Index>(i + 1)]),
                         lambda0 * std::pow(ladder_ratio, static_cast<double>(i))});
    }
    return p;
  }
};

struct Bounds {
  Vec lo;
  Vec hi;

  Vec clamp(const Vec& x) const { return x.cwiseMax(lo).cwiseMin(hi); }
};

Bounds make_bounds(const Layout& layout, double alpha_cap) {
  const auto n = static_cast<Eigen::Index>(layout.size());
  Bounds b{Vec::Constant(n, -60.0), Vec::Constant(n, 60.0)};
  b.lo[0] = std::log(1e-12);
  b.hi[0] = std::log(alpha_cap);
  b.lo[n - 1] = std::log(1e-12);
  b.hi[n - 1] = std::log(1e6);
  return b;
}

struct StartResult {
  Vec x;
  double loss = std::numeric_limits<double>::infinity();
  double gradient_norm = std::numeric_limits<double>::infinity();
  std::size_t iterations = 0;
  bool converged = false;
  bool failed = false;
  std::vector<double> history;
};

class Problem {
 public:
  Problem(const RheoDataset& data, Layout layout, const FitOptions& opts)
      : data_(data), layout_(layout), opts_(opts),
        bounds_(make_bounds(layout, opts.alpha_cap)) {}

  std::optional<Vec> residuals(const Vec& x) const {
    try {
      const auto r = log_residuals(layout_.to_params(x), data_, opts_.engine);
      Vec out(static_cast<Eigen::Index>(r.size()));
      for (std::size_t k = 0; k < r.size(); ++k) {
        if (!std::isfinite(r[k])) return std::nullopt;
        out[static_cast<Eigen::Index>(k)] = r[k];
      }
      return out;
    } catch (const NumericalError&) {
      return std::nullopt;
    }
  }

  std::optional<Mat> jacobian(const Vec& x, const Vec& r) const {
    const auto m = r.size();
    const auto n = x.size();
    Mat J(m, n);
    for (Eigen::Index j = 0; j < n; ++j) {
      double h = opts_.fd_step * std::max(1.0, std::abs(x[j]));
      if (x[j] + h > bounds_.hi[j]) h = -h;
      Vec xp = x;
      xp[j] += h;
      const auto rp = residuals(xp);
      if (!rp) return std::nullopt;
      J.col(j) = (*rp - r) / h;
    }
    return J;
  }

  StartResult run(Vec x) const {
    StartResult res;
    x = bounds_.clamp(x);
    const double m = static_cast<double>(data_.points.size());
    auto r = residuals(x);
    if (!r) {
      res.failed = true;
      return res;
    }
    double current = r->squaredNorm() / m;
    res.history.push_back(current);
    double mu = 1e-3;

    for (std::size_t it = 0; it < opts_.max_iterations; ++it) {
      res.iterations = it + 1;
      const auto J = jacobian(x, *r);
      if (!J) {
        res.failed = true;
        break;
      }
      const Vec g = J->transpose() * *r;
      res.gradient_norm = g.lpNorm<Eigen::Infinity>() / m;
      if (res.gradient_norm < opts_.grad_tol) {
        res.converged = true;
        break;
      }
      const Mat A = J->transpose() * *J;
      Vec diag = A.diagonal().cwiseMax(1e-12 * std::max(1.0, A.diagonal().maxCoeff()));

      bool accepted = false;
      bool stationary = false;
      for (int attempt = 0; attempt < 30; ++attempt) {
        Mat damped = A;
        damped.diagonal() += mu * diag;
        const Vec delta = damped.ldlt().solve(-g);
        const Vec x_new = bounds_.clamp(x + delta);
        const double step = (x_new - x).lpNorm<Eigen::Infinity>();
        if (!std::isfinite(step)) {
          mu *= 4.0;
          continue;
        }
        const auto r_new = residuals(x_new);
        const double trial =
            r_new ? r_new->squaredNorm() / m : std::numeric_limits<double>::infinity();
        if (trial < current) {
          x = x_new;
          r = r_new;
          current = trial;
          res.history.push_back(current);
          mu = std::max(mu / 3.0, 1e-12);
          accepted = true;
          if (step < opts_.step_tol) stationary = true;
          break;
        }
        if (step < opts_.step_tol) {
          stationary = true;
          break;
        }
        mu *= 4.0;
      }
      if (stationary) {
        res.converged = true;
        break;
      }
      if (!accepted) break;
    }
    res.x = x;
    res.loss = current;
    return res;
  }

  const Layout& layout() const { return layout_; }

 private:
  const RheoDataset& data_;
  Layout layout_;
  const FitOptions& opts_;
  Bounds bounds_;
};

std::vector<Vec> seed_grid(const RheoDataset& data, const Layout& layout) {
  const double eta0 = data.points.front().viscosity;
  double onset = 10.0 * data.points.back().rate;
  for (const auto& pt : data.points) {
    if (pt.viscosity < 0.9 * eta0) {
      onset = pt.rate;
      break;
    }
  }
  // eta(rate)/eta0 ~ 1 - 6 (rate lambda)^2 / alpha for small strains, so a
  // 10% drop sits near rate * lambda / sqrt(alpha) ~ 0.13.
  const double n = static_cast<double>(layout.n_modes);
  const double centre_shift = std::pow(layout.ladder_ratio, 0.5 * (n - 1.0));

  std::vector<Vec> seeds;
  for (double alpha : {0.01, 1.0, 100.0}) {
    const double lambda_seed = 0.13 * std::sqrt(alpha) / onset / centre_shift;
    for (double eta_factor : {1.0 / 3.0, 1.0, 3.0}) {
      for (double lambda_factor : {0.1, 1.0, 10.0}) {
        Vec x(static_cast<Eigen::Index>(layout.size()));
        x[0] = std::log(alpha);
        for (std::size_t i = 0; i < layout.n_modes; ++i) {
          x[static_cast<Eigen::Index>(i + 1)] = std::log(eta0 * eta_factor / n);
        }
        x[static_cast<Eigen::Index>(layout.n_modes + 1)] =
            std::log(lambda_seed * lambda_factor);
        seeds.push_back(x);
      }
    }
  }
  return seeds;
}

// Equal losses (to noise) prefer the smaller alpha.
bool better(const StartResult& a, const StartResult& b) {
  const double tol = 1e-18 + 1e-8 * std::max(a.loss, b.loss);
  if (std::abs(a.loss - b.loss) <= tol) return a.x[0] < b.x[0];
  return a.loss < b.loss;
}

}  // namespace

FitReport fit_steady_shear(const RheoDataset& data, std::size_t n_modes,
                           const FitOptions& opts) {
  if (n_modes < 1) throw InvalidArgument("n_modes must be >= 1");
  data.validate();
  const std::size_t n_free = free_parameter_count(n_modes);
  if (data.points.size() <= n_free) {
    std::ostringstream os;
    os << "under-determined fit: " << data.points.size() << " data points for "
       << n_free << " free parameters (" << n_modes << " mode"
       << (n_modes == 1 ? "" : "s") << ")";
    throw UnderDeterminedError(os.str());
  }

  const Layout layout{n_modes, opts.lambda_ladder_ratio};
  const Problem problem(data, layout, opts);
  const auto seeds = seed_grid(data, layout);

  std::vector<StartResult> results(seeds.size());
  const std::size_t workers =
      opts.parallel ? std::max(1u, std::thread::hardware_concurrency()) : 1;
  if (workers <= 1) {
    for (std::size_t i = 0; i < seeds.size(); ++i) results[i] = problem.run(seeds[i]);
  } else {
    for (std::size_t base = 0; base < seeds.size(); base += workers) {
      std::vector<std::future<StartResult>> batch;
      for (std::size_t i = base; i < std::min(seeds.size(), base + workers); ++i) {
        batch.push_back(std::async(std::launch::async,
                                   [&problem, &seeds, i] { return problem.run(seeds[i]); }));
      }
      for (std::size_t i = 0; i < batch.size(); ++i) results[base + i] = batch[i].get();
    }
  }

  const StartResult* best = nullptr;
  const StartResult* best_any = nullptr;
  std::size_t n_converged = 0;
  for (const auto& r : results) {
    if (r.failed || !std::isfinite(r.loss)) continue;
    if (!best_any || better(r, *best_any)) best_any = &r;
    if (!r.converged) continue;
    ++n_converged;
    if (!best || better(r, *best)) best = &r;
  }

  auto assemble = [&](const StartResult& r) {
    FitReport rep;
    rep.params = layout.to_params(r.x);
    rep.loss = r.loss;
    // Data with no resolvable thinning is reported on the Newtonian plateau.
    if (r.converged && rep.params.alpha < opts.alpha_cap) {
      KbkzParams capped = rep.params;
      capped.alpha = opts.alpha_cap;
      const double capped_loss = loss(capped, data, opts.engine);
      if (capped_loss <= r.loss + 1e-18 + 1e-8 * r.loss) {
        rep.params = capped;
        rep.loss = capped_loss;
      }
    }
    rep.rms_log_residual = std::sqrt(rep.loss);
    rep.gradient_norm = r.gradient_norm;
    rep.iterations = r.iterations;
    rep.converged = r.converged;
    rep.alpha_capped = rep.params.alpha >= opts.alpha_cap * (1.0 - 1e-9);
    rep.per_point_residuals = log_residuals(rep.params, data, opts.engine);
    rep.loss_history = r.history;
    rep.starts_tried = results.size();
    rep.starts_converged = n_converged;
    return rep;
  };

  if (best) return assemble(*best);
  if (best_any) {
    throw FitNoConvergence("no multi-start candidate converged", assemble(*best_any));
  }
  FitReport empty;
  empty.starts_tried = results.size();
  throw FitNoConvergence("every multi-start candidate diverged", empty);
}

}  // namespace micronip
