#include <array>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "micronip/quadrature.hpp"

using namespace micronip;

TEST_CASE("polynomials are integrated exactly") {
  const auto r = quad::integrate_scalar([](double x) { return std::pow(x, 5); }, 0.0, 1.0);
  CHECK(r.converged);
  CHECK(r.value[0] == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
  CHECK(r.intervals == 1);
}

TEST_CASE("smooth and endpoint-singular integrands") {
  auto r = quad::integrate_scalar([](double x) { return std::sin(x); }, 0.0, std::numbers::pi);
  CHECK(r.converged);
  CHECK(r.value[0] == doctest::Approx(2.0).epsilon(1e-13));

  r = quad::integrate_scalar([](double x) { return std::sqrt(x); }, 0.0, 1.0);
  CHECK(r.converged);
  CHECK(r.value[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-10));

  r = quad::integrate_scalar([](double x) { return std::exp(-x); }, 0.0, 40.0);
  CHECK(r.value[0] == doctest::Approx(-std::expm1(-40.0)).epsilon(1e-12));
}

TEST_CASE("vector integrands converge per component") {
  auto f = [](double u) {
    return std::array<double, 2>{std::exp(-u) * u, std::exp(-u) * u * u};
  };
  const auto r = quad::integrate<2>(f, 0.0, 60.0);
  CHECK(r.converged);
  CHECK(r.value[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.value[1] == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("interval budget exhaustion is reported") {
  quad::Options opts;
  opts.max_intervals = 3;
  const auto r = quad::integrate_scalar([](double x) { return std::sin(1.0 / x); }, 1e-4, 1.0,
                                        opts);
  CHECK_FALSE(r.converged);
  CHECK(r.max_error() > 0.0);
}

TEST_CASE("tighter tolerance agrees with the default") {
  auto f = [](double u) { return std::exp(-u) / (1.0 + 0.3 * u * u); };
  quad::Options tight;
  tight.rel_tol = 1e-13;
  const double a = quad::integrate_scalar(f, 0.0, 40.0).value[0];
  const double b = quad::integrate_scalar(f, 0.0, 40.0, tight).value[0];
  CHECK(std::abs(a - b) < 1e-10 * std::abs(b));
}
