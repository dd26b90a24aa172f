#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "micronip/errors.hpp"
#include "micronip/kbkz.hpp"
#include "micronip/polyfit.hpp"

using namespace micronip;

namespace {

KbkzParams table1(int k) {
  static const double alpha[] = {0.0013, 8.91, 15.7};
  static const double eta[] = {0.15, 0.3, 0.7};
  return KbkzParams::single_mode(eta[k], 0.01, alpha[k]);
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// Steady-shear viscosity depends on lambda and alpha only through
// lambda / sqrt(alpha); this is the combination a shear fit can recover.
double onset_time(const KbkzParams& p) { return p.modes[0].lambda / std::sqrt(p.alpha); }

const std::vector<double> kRates = log_grid(1e-1, 1e5, 20);

}  // namespace

TEST_CASE("log grid") {
  const auto g = log_grid(1e-1, 1e5, 20);
  REQUIRE(g.size() == 20);
  CHECK(g.front() == 1e-1);
  CHECK(g.back() == doctest::Approx(1e5).epsilon(1e-15));
  for (std::size_t k = 1; k < g.size(); ++k) {
    CHECK(g[k] / g[k - 1] == doctest::Approx(std::pow(1e6, 1.0 / 19.0)));
  }
}

TEST_CASE("dataset validation") {
  RheoDataset d;
  d.points = {{1.0, 1.0}, {2.0, 1.0}};
  CHECK_THROWS_AS(d.validate(), ValidationError);
  d.points = {{1.0, 1.0}, {2.0, 1.0}, {2.0, 1.0}};
  CHECK_THROWS_AS(d.validate(), ValidationError);
  d.points = {{1.0, 1.0}, {2.0, -1.0}, {3.0, 1.0}};
  CHECK_THROWS_AS(d.validate(), ValidationError);
  d.points = {{1.0, 1.0}, {2.0, 1.0}, {3.0, 1.0}};
  CHECK_NOTHROW(d.validate());
}

TEST_CASE("loss examples") {
  const auto p = table1(1);
  const auto exact = synthesize_dataset(p, kRates, 0.0, 1);
  CHECK(loss(p, exact) < 1e-16);

  auto doubled = exact;
  for (auto& pt : doubled.points) pt.viscosity *= 2.0;
  CHECK(loss(p, doubled) == doctest::Approx(std::log(2.0) * std::log(2.0)).epsilon(1e-10));

  auto one_bad = exact;
  one_bad.points[7].viscosity *= std::exp(1.0);
  CHECK(loss(p, one_bad) == doctest::Approx(1.0 / 20.0).epsilon(1e-10));

  const auto r = log_residuals(p, one_bad);
  CHECK(r[7] == doctest::Approx(-1.0).epsilon(1e-10));
}

TEST_CASE("synthesized datasets are deterministic") {
  const auto p = table1(2);
  const auto a = synthesize_dataset(p, kRates, 0.01, 7);
  const auto b = synthesize_dataset(p, kRates, 0.01, 7);
  const auto c = synthesize_dataset(p, kRates, 0.01, 8);
  bool differs = false;
  for (std::size_t k = 0; k < kRates.size(); ++k) {
    CHECK(a.points[k].viscosity == b.points[k].viscosity);
    CHECK(a.points[k].rate == kRates[k]);
    differs = differs || a.points[k].viscosity != c.points[k].viscosity;
  }
  CHECK(differs);

  const auto exact = synthesize_dataset(p, kRates, 0.0, 99);
  for (std::size_t k = 0; k < kRates.size(); ++k) {
    CHECK(exact.points[k].viscosity == steady_shear_point(p, kRates[k]).viscosity);
  }
}

TEST_CASE("synthesized noise has the requested moments") {
  // Lodge limit keeps the model constant, so log ratios are the raw noise.
  const auto p = KbkzParams::single_mode(1.0, 0.01, std::numeric_limits<double>::infinity());
  const auto rates = log_grid(1e-2, 1e2, 1000);
  const double noise = 0.05;
  std::vector<double> means;
  for (std::uint64_t seed : {1u, 2u}) {
    const auto d = synthesize_dataset(p, rates, noise, seed);
    std::vector<double> z;
    for (const auto& pt : d.points) z.push_back(std::log(pt.viscosity) / noise);
    const double mean = std::accumulate(z.begin(), z.end(), 0.0) / z.size();
    double var = 0.0;
    for (double v : z) var += (v - mean) * (v - mean);
    var /= static_cast<double>(z.size() - 1);
    // 4-sigma bounds for n = 1000 standard normal samples.
    CHECK(std::abs(mean) < 4.0 / std::sqrt(1000.0));
    CHECK(std::abs(var - 1.0) < 4.0 * std::sqrt(2.0 / 999.0));
    means.push_back(mean);
  }
  CHECK(means[0] != means[1]);
}

TEST_CASE("noise-free round trip recovers the identifiable parameters") {
  for (int k = 0; k < 3; ++k) {
    const auto truth = table1(k);
    const auto data = synthesize_dataset(truth, kRates, 0.0, 1);
    const auto rep = fit_steady_shear(data, 1);
    CHECK(rep.converged);
    CHECK(rep.loss < 1e-12);
    CHECK(rel(rep.params.total_viscosity(), truth.total_viscosity()) < 1e-3);
    CHECK(rel(onset_time(rep.params), onset_time(truth)) < 1e-3);
    CHECK(rep.per_point_residuals.size() == data.points.size());
    for (std::size_t i = 1; i < rep.loss_history.size(); ++i) {
      CHECK(rep.loss_history[i] <= rep.loss_history[i - 1]);
    }
    CHECK(rep.starts_tried == 27);
    CHECK(rep.params.beta == 1.0);
    CHECK(rep.params.theta == 0.0);
  }
}

TEST_CASE("Newtonian data hits the alpha cap") {
  RheoDataset d;
  for (double r : kRates) d.points.push_back({r, 0.42});
  const auto rep = fit_steady_shear(d, 1);
  CHECK(rep.alpha_capped);
  CHECK(rep.params.alpha <= 1e8);
  CHECK(rel(rep.params.total_viscosity(), 0.42) < 1e-3);
}

TEST_CASE("scale equivariance") {
  const auto data = synthesize_dataset(table1(1), kRates, 0.0, 1);
  auto scaled = data;
  for (auto& pt : scaled.points) pt.viscosity *= 3.0;
  const auto a = fit_steady_shear(data, 1);
  const auto b = fit_steady_shear(scaled, 1);
  CHECK(rel(b.params.total_viscosity(), 3.0 * a.params.total_viscosity()) < 5e-3);
  CHECK(rel(onset_time(b.params), onset_time(a.params)) < 1e-2);
}

TEST_CASE("noisy round trip keeps the viscosity within 3%") {
  const auto truth = table1(1);
  for (std::uint64_t seed = 11; seed < 21; ++seed) {
    const auto data = synthesize_dataset(truth, kRates, 0.01, seed);
    const auto rep = fit_steady_shear(data, 1);
    CHECK(rel(rep.params.total_viscosity(), 0.3) < 0.03);
  }
}

TEST_CASE("parameter counting") {
  CHECK(free_parameter_count(1) == 3);
  CHECK(free_parameter_count(2) == 4);
  RheoDataset d;
  d.points = {{1.0, 1.0}, {10.0, 0.9}, {100.0, 0.5}, {1000.0, 0.1}};
  CHECK_THROWS_AS(fit_steady_shear(d, 2), UnderDeterminedError);
  CHECK_THROWS_AS(fit_steady_shear(d, 0), InvalidArgument);
}

TEST_CASE("two-mode fit of a two-mode spectrum") {
  KbkzParams truth;
  truth.modes = {{0.4, 0.1}, {0.2, 0.01}};
  truth.alpha = 2.0;
  const auto data = synthesize_dataset(truth, log_grid(1e-2, 1e5, 30), 0.0, 1);
  FitOptions opts;
  const auto rep = fit_steady_shear(data, 2, opts);
  CHECK(rep.params.modes.size() == 2);
  CHECK(rep.params.modes[1].lambda / rep.params.modes[0].lambda ==
        doctest::Approx(opts.lambda_ladder_ratio));
  CHECK(rep.rms_log_residual < 0.02);
  CHECK(rel(rep.params.total_viscosity(), 0.6) < 0.01);
}

TEST_CASE("serial and parallel multi-start agree") {
  const auto data = synthesize_dataset(table1(2), kRates, 0.01, 5);
  FitOptions serial;
  serial.parallel = false;
  const auto a = fit_steady_shear(data, 1, serial);
  const auto b = fit_steady_shear(data, 1);
  CHECK(a.params.alpha == b.params.alpha);
  CHECK(a.params.modes[0].eta == b.params.modes[0].eta);
  CHECK(a.loss == b.loss);
}
