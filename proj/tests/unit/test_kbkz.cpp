#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "micronip/errors.hpp"
#include "micronip/kbkz.hpp"
#include "micronip/polyfit.hpp"

using namespace micronip;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

KbkzParams table1(int k) {
  static const double alpha[] = {0.0013, 8.91, 15.7};
  static const double eta[] = {0.15, 0.3, 0.7};
  return KbkzParams::single_mode(eta[k], 0.01, alpha[k]);
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// Independent oracle: Boost adaptive Gauss-Kronrod on the dimensionless
// shear integrals, split at the damping onset so the small-alpha spike is
// resolved.
struct ShearOracle {
  double viscosity;
  double n1;
};

double gk(const std::function<double(double)>& f, double a, double b) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 12, 1e-13);
}

ShearOracle shear_oracle(const KbkzParams& p, double rate) {
  ShearOracle out{0.0, 0.0};
  for (const auto& m : p.modes) {
    const double wi = rate * m.lambda;
    auto h = [&](double u) { return p.alpha / (p.alpha + wi * wi * u * u); };
    const double onset = std::sqrt(p.alpha) / wi;
    std::vector<double> cuts = {0.0};
    for (double c = onset / 100.0; c < 200.0; c *= 10.0) cuts.push_back(c);
    cuts.push_back(200.0);
    double a = 0.0;
    double b = 0.0;
    for (std::size_t j = 0; j + 1 < cuts.size(); ++j) {
      a += gk([&](double u) { return std::exp(-u) * h(u) * u; }, cuts[j], cuts[j + 1]);
      b += gk([&](double u) { return std::exp(-u) * h(u) * wi * u * u; }, cuts[j], cuts[j + 1]);
    }
    out.viscosity += (1.0 - p.r_eta) * m.eta * a;
    out.n1 += (1.0 - p.r_eta) * m.eta / m.lambda * wi * b;
  }
  out.viscosity += p.eta2();
  return out;
}

}  // namespace

TEST_CASE("damping function examples") {
  const auto p = KbkzParams::single_mode(0.3, 0.01, 8.91);
  CHECK(damping_psm(p, 3.0, 3.0) == 1.0);
  CHECK(damping_psm(p, 4.0, 4.0) == doctest::Approx(8.91 / 9.91).epsilon(1e-15));
  auto q = KbkzParams::single_mode(0.3, 0.01, 1e12);
  CHECK(std::abs(damping_psm(q, 100.0, 100.0) - 1.0) < 1e-10);
  q.alpha = kInf;
  CHECK(damping_psm(q, 1e9, 1e9) == 1.0);
  q = p;
  q.beta = 0.25;
  CHECK(damping_psm(q, 5.0, 7.0) == doctest::Approx(8.91 / (8.91 + 0.25 * 5 + 0.75 * 7 - 3)));
}

TEST_CASE("memory kernel") {
  const RelaxationMode m{0.15, 0.01};
  CHECK(memory_kernel(m, 0.0) == doctest::Approx(1500.0).epsilon(1e-14));
  CHECK(memory_kernel(m, 10.0) == 0.0);
  boost::math::quadrature::exp_sinh<double> es;
  const double first_moment = es.integrate([&](double s) { return memory_kernel(m, s) * s; });
  CHECK(first_moment == doctest::Approx(0.15).epsilon(1e-12));
}

TEST_CASE("parameter validation") {
  auto p = table1(1);
  CHECK_NOTHROW(p.validate());
  p.beta = 1.5;
  CHECK_THROWS_AS(p.validate(), InvalidArgument);
  p = table1(1);
  p.theta = 1.0;
  CHECK_THROWS_AS(p.validate(), InvalidArgument);
  p = table1(1);
  p.r_eta = 1.0;
  CHECK_THROWS_AS(p.validate(), InvalidArgument);
  p = table1(1);
  p.alpha = 0.0;
  CHECK_THROWS_AS(p.validate(), InvalidArgument);
  p = table1(1);
  p.modes.clear();
  CHECK_THROWS_AS(p.validate(), InvalidArgument);

  p = table1(2);
  p.r_eta = 0.25;
  CHECK(p.total_viscosity() == 0.7);
  CHECK(p.eta1() == doctest::Approx(0.525));
  CHECK(p.eta2() == doctest::Approx(0.175));
}

TEST_CASE("zero-shear viscosity anchors to the Table I values") {
  const double expected[] = {0.15, 0.3, 0.7};
  for (int k = 0; k < 3; ++k) {
    const auto pt = steady_shear_point(table1(k), 1e-3);
    CHECK(rel(pt.viscosity, expected[k]) < 0.01);
    CHECK(steady_shear_point(table1(k), 0.0).viscosity == expected[k]);
  }
}

TEST_CASE("shear material functions match an independent quadrature") {
  std::vector<KbkzParams> sets = {table1(0), table1(1), table1(2)};
  KbkzParams multi;
  multi.modes = {{0.2, 0.1}, {0.1, 0.01}, {0.05, 0.001}};
  multi.alpha = 3.0;
  multi.r_eta = 0.1;
  sets.push_back(multi);
  for (const auto& p : sets) {
    for (double rate : {0.1, 10.0, 1e3, 1e5}) {
      const auto pt = steady_shear_point(p, rate);
      const auto o = shear_oracle(p, rate);
      CHECK(rel(pt.viscosity, o.viscosity) < 1e-8);
      CHECK(rel(pt.n1, o.n1) < 1e-8);
    }
  }
}

TEST_CASE("Lodge limit reproduces the closed forms") {
  KbkzParams p;
  p.modes = {{0.3, 0.01}, {0.2, 0.5}};
  p.alpha = kInf;
  for (double rate : log_grid(1e-2, 1e4, 13)) {
    const auto pt = steady_shear_point(p, rate);
    CHECK(rel(pt.viscosity, 0.5) < 1e-8);
    CHECK(rel(pt.n1, 2.0 * (0.3 * 0.01 + 0.2 * 0.5) * rate * rate) < 1e-8);
  }
}

TEST_CASE("normal stress ratio and theta invariance") {
  for (double theta : {-0.3, -0.2, 0.2}) {
    for (int k = 0; k < 3; ++k) {
      auto p = table1(k);
      p.theta = theta;
      const auto base = steady_shear_point(table1(k), 100.0);
      const auto pt = steady_shear_point(p, 100.0);
      CHECK(rel(pt.n2 / pt.n1, theta / (1.0 - theta)) < 1e-12);
      CHECK(rel(pt.viscosity, base.viscosity) < 1e-12);
      CHECK(rel(pt.n1, base.n1) < 1e-12);
    }
  }
  CHECK(steady_shear_point(table1(1), 50.0).n2 == 0.0);
}

TEST_CASE("beta does not enter shear") {
  auto p0 = table1(1);
  p0.beta = 0.0;
  for (double rate : {1.0, 1e3, 1e5}) {
    const auto a = steady_shear_point(p0, rate);
    const auto b = steady_shear_point(table1(1), rate);
    CHECK(a.viscosity == b.viscosity);
    CHECK(a.n1 == b.n1);
  }
}

TEST_CASE("shear thinning is monotone and N1 is nonnegative") {
  KbkzParams multi;
  multi.modes = {{0.2, 0.1}, {0.1, 0.01}};
  multi.alpha = 0.5;
  for (const auto& p : {table1(0), table1(1), table1(2), multi}) {
    double prev = kInf;
    for (double rate : log_grid(1e-3, 1e6, 28)) {
      const auto pt = steady_shear_point(p, rate);
      CHECK(pt.viscosity <= prev);
      CHECK(pt.n1 >= 0.0);
      prev = pt.viscosity;
    }
  }
}

TEST_CASE("tighter quadrature tolerance changes results below 1e-8") {
  EngineOptions tight;
  tight.rel_tol = 1e-12;
  for (int k = 0; k < 3; ++k) {
    for (double rate : {1.0, 1e3, 1e5}) {
      const auto a = steady_shear_point(table1(k), rate);
      const auto b = steady_shear_point(table1(k), rate, tight);
      CHECK(rel(a.viscosity, b.viscosity) < 1e-8);
      CHECK(rel(a.n1, b.n1) < 1e-8);
    }
  }
}

TEST_CASE("solvent share adds a Newtonian term") {
  auto p = table1(1);
  p.r_eta = 0.2;
  const auto pt = steady_shear_point(p, 1e4);
  const auto base = steady_shear_point(table1(1), 1e4);
  CHECK(rel(pt.viscosity, 0.8 * base.viscosity + 0.2 * 0.3) < 1e-12);
  const auto t = extra_stress_steady(p, SteadyShear{1e4});
  CHECK(t.t[0][1] == doctest::Approx(pt.viscosity * 1e4));
  CHECK(is_symmetric(t.t));
  const auto zero = extra_stress_steady(p, SteadyShear{0.0});
  CHECK(zero.t[0][1] == 0.0);
  CHECK(zero.t[0][0] == 0.0);
}

TEST_CASE("extensional viscosity: Trouton and Lodge closed form") {
  for (int k = 0; k < 3; ++k) {
    const auto p = table1(k);
    CHECK(rel(extensional_viscosity(p, 1e-4), 3.0 * p.total_viscosity()) < 1e-5);
  }
  auto lodge = KbkzParams::single_mode(0.3, 0.01, kInf);
  for (double wi : {0.05, 0.2, 0.4}) {
    const double expected = 0.3 * 3.0 / ((1.0 - 2.0 * wi) * (1.0 + wi));
    CHECK(rel(extensional_viscosity(lodge, wi / 0.01), expected) < 1e-8);
  }
  // Compression: the closed form also holds for negative rates.
  const double wi = -0.3;
  CHECK(rel(extensional_viscosity(lodge, wi / 0.01), 0.9 / ((1.0 - 2.0 * wi) * (1.0 + wi))) <
        1e-8);
}

TEST_CASE("extensional divergence guard") {
  auto lodge = KbkzParams::single_mode(0.3, 0.01, 1e7);
  CHECK(critical_extension_rate(lodge) == doctest::Approx(45.0));
  try {
    extensional_viscosity(lodge, 50.0);
    FAIL("expected UnboundedStressError");
  } catch (const UnboundedStressError& e) {
    CHECK(e.critical_rate() == doctest::Approx(45.0));
  }
  auto p = table1(1);
  p.beta = 0.0;
  CHECK(critical_extension_rate(p) == doctest::Approx(100.0));
  CHECK_THROWS_AS(extensional_viscosity(p, 200.0), UnboundedStressError);
  CHECK(critical_extension_rate(table1(1)) == kInf);
  CHECK(std::isfinite(extensional_viscosity(table1(1), 1e4)));
}

TEST_CASE("beta matters in extension") {
  auto p0 = table1(1);
  p0.beta = 0.0;
  const double a = extensional_viscosity(p0, 50.0);
  const double b = extensional_viscosity(table1(1), 50.0);
  CHECK(std::isfinite(a));
  CHECK(std::isfinite(b));
  CHECK(rel(a, b) > 1e-3);
}

TEST_CASE("startup shear") {
  const auto p = table1(1);
  CHECK(startup_shear_stress(p, 100.0, 0.0) == 0.0);
  for (double rate : {10.0, 1e3}) {
    const double steady = steady_shear_point(p, rate).viscosity * rate;
    CHECK(rel(startup_shear_stress(p, rate, 20.0 * 0.01), steady) < 1e-6);
    CHECK(rel(startup_shear_stress(p, rate, 1.0), steady) < 1e-9);
  }
}

TEST_CASE("startup shear is nondecreasing at low Weissenberg number") {
  const auto p = table1(1);
  double prev = 0.0;
  for (double t = 1e-4; t <= 0.5; t *= 1.5) {
    const double s = startup_shear_stress(p, 10.0, t);
    CHECK(s >= prev * (1.0 - 1e-12));
    prev = s;
  }
}

TEST_CASE("startup overshoot peaks at strain sqrt(alpha)") {
  // d sigma/dt is proportional to g'(rate t) exp(-t/lambda) with
  // g(gamma) = alpha gamma / (alpha + gamma^2), so the peak sits at
  // rate * t = sqrt(alpha) whenever the kernel has not yet decayed.
  const auto p = table1(1);
  const double rate = 100.0;
  const double t_peak = std::sqrt(p.alpha) / rate;
  const double peak = startup_shear_stress(p, rate, t_peak);
  CHECK(peak > startup_shear_stress(p, rate, 0.97 * t_peak));
  CHECK(peak > startup_shear_stress(p, rate, 1.03 * t_peak));
  CHECK(peak > steady_shear_point(p, rate).viscosity * rate);
}

TEST_CASE("irreversible damping equals reversible for monotonic startup") {
  auto rev = table1(2);
  auto irr = rev;
  irr.damping = Damping::Irreversible;
  for (double t : {0.001, 0.01, 0.05}) {
    const double a = startup_shear_stress(rev, 1e3, t);
    const double b = startup_shear_stress(irr, 1e3, t);
    CHECK(rel(b, a) < 1e-9);
  }
}

TEST_CASE("irreversible damping on a reversing history") {
  // Strain rises linearly to a * s1 and returns to zero at 2 s1. Past s1 the
  // irreversible damping is frozen at H(a s1), which gives a closed form for
  // the second leg.
  const double eta = 0.3;
  const double lam = 0.01;
  const double alpha = 0.5;
  const double a = 500.0;
  const double s1 = 0.01;
  auto strain = [=](double s) {
    if (s <= s1) return a * s;
    if (s <= 2.0 * s1) return a * (2.0 * s1 - s);
    return 0.0;
  };
  auto rev = KbkzParams::single_mode(eta, lam, alpha);
  auto irr = rev;
  irr.damping = Damping::Irreversible;
  const std::vector<double> breaks = {s1, 2.0 * s1};
  const double sigma_rev = shear_stress_for_history(rev, strain, breaks, 0.0);
  const double sigma_irr = shear_stress_for_history(irr, strain, breaks, 0.0);

  auto h = [=](double g) { return alpha / (alpha + g * g); };
  const double k = eta / (lam * lam);
  const double leg1 = gk([&](double s) { return std::exp(-s / lam) * h(a * s) * a * s; }, 0.0, s1);
  const double leg2_frozen =
      h(a * s1) * a * std::exp(-s1 / lam) * (lam * s1 - lam * lam * (1.0 - std::exp(-s1 / lam)));
  const double leg2_rev = gk(
      [&](double s) {
        const double g = a * (2.0 * s1 - s);
        return std::exp(-s / lam) * h(g) * g;
      },
      s1, 2.0 * s1);
  CHECK(rel(sigma_irr, k * (leg1 + leg2_frozen)) < 1e-6);
  CHECK(rel(sigma_rev, k * (leg1 + leg2_rev)) < 1e-8);
  CHECK(sigma_irr < sigma_rev);
}

TEST_CASE("linear viscoelastic moduli") {
  auto p = KbkzParams::single_mode(0.3, 0.01, 8.91);
  const auto low = linear_moduli(p, 1e-6);
  CHECK(rel(low.g_loss / 1e-6, 0.3) < 1e-9);
  const auto cross = linear_moduli(p, 100.0);
  CHECK(rel(cross.g_storage, cross.g_loss) < 1e-14);
  p.r_eta = 0.2;
  const auto split = linear_moduli(p, 100.0);
  CHECK(rel(split.g_storage, split.g_loss - 0.06 * 100.0) < 1e-12);
  CHECK_THROWS_AS(linear_moduli(p, 0.0), InvalidArgument);

  double prev_s = 0.0;
  double prev_l = 0.0;
  for (int k = 0; k < 3; ++k) {
    const auto g = linear_moduli(table1(k), 100.0);
    CHECK(g.g_storage > prev_s);
    CHECK(g.g_loss > prev_l);
    prev_s = g.g_storage;
    prev_l = g.g_loss;
  }
}

TEST_CASE("material function table") {
  const auto p = table1(2);
  const std::vector<double> one = {42.0};
  const auto t1 = material_function_table(p, one);
  REQUIRE(t1.rows.size() == 1);
  const auto pt = steady_shear_point(p, 42.0);
  CHECK(t1.rows[0].viscosity == pt.viscosity);
  CHECK(t1.rows[0].n1 == pt.n1);
  CHECK_FALSE(t1.rows[0].eta_e.has_value());

  const auto grid = log_grid(1e-3, 1e5, 41);
  const auto t = material_function_table(p, grid, {true, true});
  REQUIRE(t.rows.size() == 41);
  CHECK(t.has_extensional);
  CHECK(t.has_moduli);
  for (std::size_t k = 1; k < t.rows.size(); ++k) {
    CHECK(t.rows[k].viscosity <= t.rows[k - 1].viscosity);
  }

  CHECK_THROWS(material_function_table(p, std::vector<double>{}));
  CHECK_THROWS(material_function_table(p, std::vector<double>{2.0, 1.0}));

  auto lodge = KbkzParams::single_mode(0.3, 0.01, 1e7);
  const std::vector<double> rates = {1.0, 10.0, 100.0};
  try {
    material_function_table(lodge, rates, {true, false});
    FAIL("expected PointEvaluationError");
  } catch (const PointEvaluationError& e) {
    CHECK(e.index() == 2);
    CHECK(e.rate() == 100.0);
  }
}
