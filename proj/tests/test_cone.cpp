#include <doctest.h>

#include <cmath>
#include <numbers>

#include "rlab/cone_model.hpp"
#include "rlab/errors.hpp"

using namespace rlab;

TEST_CASE("harmonic dimensions") {
  CHECK(harmonic_dimension(3, 4) == 9);
  CHECK(harmonic_dimension(5, 1) == 5);
  CHECK(harmonic_dimension(6, 2) == 20);
  CHECK(sphere_volume(3) == doctest::Approx(4 * std::numbers::pi));
  CHECK(sphere_volume(4) == doctest::Approx(2 * std::numbers::pi * std::numbers::pi));
}

TEST_CASE("projection kernels") {
  CHECK(projection_kernel(3, 1, 0.4) == doctest::Approx(3 * 0.4 / (4 * std::numbers::pi)).epsilon(1e-14));
  // trace of the projector is the harmonic dimension
  for (int n : {3, 5, 6})
    for (int j : {0, 1, 3}) CHECK(projection_kernel(n, j, 1) * sphere_volume(n) == doctest::Approx(harmonic_dimension(n, j)));
  const ConeGeometry g = ConeGeometry::scaled(3, 1.3);
  CHECK(mode_of(g, 2).lambda == doctest::Approx(6 / (1.3 * 1.3)));
}

TEST_CASE("free resolvent on R^3") {
  for (double k : {0.01, 0.3, 1.0}) {
    const double r = 1, rp = 2.5, c = -0.3;
    const double d = std::sqrt(r * r + rp * rp - 2 * r * rp * c);
    CHECK(free_resolvent_sum(3, k, r, rp, c, 400) == doctest::Approx(std::exp(-k * d) / (4 * std::numbers::pi * d)).epsilon(1e-10));
  }
  CHECK_THROWS_AS(free_resolvent_sum(3, 1, 1, 1, 1, 50), DomainError);
}
