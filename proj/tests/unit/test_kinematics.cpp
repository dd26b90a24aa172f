#include <algorithm>
#include <cmath>
#include <limits>

#include "doctest.h"
#include "micronip/errors.hpp"
#include "micronip/kinematics.hpp"

using namespace micronip;

namespace {

void check_mat(const Mat3& a, const Mat3& b, double tol) {
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      CHECK(std::abs(a[i][j] - b[i][j]) <= tol * std::max(1.0, std::abs(b[i][j])));
    }
  }
}

}  // namespace

TEST_CASE("shear strain tensors match hand values") {
  const auto sp = shear_strain_tensors(2.0);
  check_mat(sp.c_inv, Mat3{{{5, 2, 0}, {2, 1, 0}, {0, 0, 1}}}, 1e-15);
  check_mat(sp.c, Mat3{{{1, -2, 0}, {-2, 5, 0}, {0, 0, 1}}}, 1e-15);
  check_mat(multiply(sp.c, sp.c_inv), identity3(), 1e-15);
  CHECK(determinant(sp.c_inv) == doctest::Approx(1.0));
  CHECK(is_symmetric(sp.c_inv));
  const auto inv = invariants(sp);
  CHECK(inv.i1 == 7.0);
  CHECK(inv.i2 == 7.0);
}

TEST_CASE("zero strain is the identity") {
  const auto sp = shear_strain_tensors(0.0);
  check_mat(sp.c_inv, identity3(), 0.0);
  const auto ex = extension_strain_tensors(0.0);
  check_mat(ex.c, identity3(), 0.0);
  CHECK(invariants(ex).i1 == 3.0);
}

TEST_CASE("non-finite shear strain is rejected") {
  CHECK_THROWS_AS(shear_strain_tensors(std::nan("")), InvalidArgument);
  CHECK_THROWS_AS(shear_strain_tensors(std::numeric_limits<double>::infinity()),
                  InvalidArgument);
}

TEST_CASE("uniaxial extension tensors") {
  const double e = 0.5;
  const auto sp = extension_strain_tensors(e);
  CHECK(sp.c_inv[0][0] == doctest::Approx(std::exp(1.0)));
  CHECK(sp.c_inv[1][1] == doctest::Approx(std::exp(-0.5)));
  CHECK(sp.c_inv[2][2] == doctest::Approx(std::exp(-0.5)));
  CHECK(sp.c_inv[0][1] == 0.0);
  CHECK(determinant(sp.c_inv) == doctest::Approx(1.0));
  const auto inv = invariants(sp);
  CHECK(inv.i1 == doctest::Approx(std::exp(1.0) + 2.0 * std::exp(-0.5)));
  CHECK(inv.i2 == doctest::Approx(std::exp(-1.0) + 2.0 * std::exp(0.5)));
  check_mat(multiply(sp.c, sp.c_inv), identity3(), 1e-14);
}

TEST_CASE("extension strain guard") {
  CHECK_NOTHROW(extension_strain_tensors(100.0));
  CHECK_NOTHROW(extension_strain_tensors(-100.0));
  CHECK_THROWS_AS(extension_strain_tensors(100.5), RangeError);
  CHECK_THROWS_AS(extension_strain_tensors(std::nan("")), RangeError);
}

TEST_CASE("rate of deformation per flow kind") {
  auto d = rate_of_deformation(SteadyShear{3.0}).d;
  CHECK(d[0][1] == 1.5);
  CHECK(d[1][0] == 1.5);
  CHECK(trace(d) == 0.0);

  d = rate_of_deformation(UniaxialExtension{2.0}).d;
  CHECK(d[0][0] == 2.0);
  CHECK(d[1][1] == -1.0);
  CHECK(d[2][2] == -1.0);
  CHECK(trace(d) == 0.0);

  d = rate_of_deformation(Oscillatory{10.0}).d;
  CHECK(d[0][1] == 5.0);

  d = rate_of_deformation(StartupShear{4.0, 1.0}).d;
  CHECK(d[0][1] == 2.0);
}

TEST_CASE("flow validation") {
  CHECK_THROWS_AS(validate(StartupShear{1.0, -1.0}), InvalidArgument);
  CHECK_THROWS_AS(validate(SteadyShear{std::nan("")}), InvalidArgument);
  CHECK_NOTHROW(validate(UniaxialExtension{-1.0}));
}

TEST_CASE("matrix helpers") {
  const Mat3 a{{{1, 2, 3}, {0, 1, 4}, {5, 6, 0}}};
  CHECK(determinant(a) == doctest::Approx(1.0));
  CHECK(trace(a) == 2.0);
  CHECK_FALSE(is_symmetric(a));
  check_mat(multiply(a, identity3()), a, 0.0);
}
