#include <doctest.h>

#include <cmath>
#include <numbers>

#include "rlab/errors.hpp"
#include "rlab/specfun.hpp"

using namespace rlab;

TEST_CASE("half-integer orders against elementary closed forms") {
  for (double z : {1e-3, 0.2, 1.0, 3.7, 25.0, 300.0}) {
    const double k = std::sqrt(std::numbers::pi / (2 * z)) * std::exp(-z);
    CHECK(bessel_k(0.5, z) == doctest::Approx(k).epsilon(1e-13));
    CHECK(log_bessel_k(1.5, z) == doctest::Approx(std::log(k * (1 + 1 / z))).epsilon(1e-13));
    if (z < 200) {
      const double i = std::sqrt(2 / (std::numbers::pi * z)) * std::sinh(z);
      CHECK(bessel_i(0.5, z) == doctest::Approx(i).epsilon(1e-13));
    }
  }
}

TEST_CASE("log-domain values survive large arguments") {
  const double z = 2000;
  CHECK(log_bessel_k(1, z) == doctest::Approx(-z + 0.5 * std::log(std::numbers::pi / (2 * z)) + std::log1p(3 / (8 * z)))
                                  .epsilon(1e-10));
  CHECK(std::isfinite(log_bessel_i(40, z)));
}

TEST_CASE("Wronskian across methods") {
  for (double nu : {0.0, 0.75, 3.0, 60.0})
    for (double z : {1e-4, 0.5, 8.0, 120.0}) {
      const BesselIK b = bessel_ik_log(nu, z);
      CHECK(std::exp(b.log_i + b.log_k) * (b.dk_over_k - b.di_over_i) * z == doctest::Approx(-1).epsilon(1e-10));
    }
}

TEST_CASE("K_1 small-argument expansion") {
  const SmallArgExpansion e = small_arg_expansion(1, BesselFamily::K, 2);
  bool found = false;
  for (const auto& t : e.terms)
    if (t.power == 1 && t.logpower == 0) {
      found = true;
      CHECK(t.coefficient == doctest::Approx(-(2 * std::log(2.0) + 1 - 2 * std::numbers::egamma) / 4).epsilon(1e-12));
    }
  CHECK(found);
  CHECK(e.evaluate(1e-3) == doctest::Approx(bessel_k(1, 1e-3)).epsilon(1e-10));
}

TEST_CASE("comparison integral") {
  CHECK(comp_closed_form(2) == doctest::Approx(-std::numbers::pi).epsilon(1e-14));
  CHECK(comp_closed_form(1.5) == doctest::Approx(-std::sqrt(2 * std::numbers::pi)).epsilon(1e-14));
  // the integral itself is half the closed form
  for (double nu : {1.1, 2.0, 3.0}) CHECK(comp_integral(nu) / comp_closed_form(nu) == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("gamma") {
  CHECK(gamma_fn(0.5) == doctest::Approx(std::sqrt(std::numbers::pi)).epsilon(1e-15));
  CHECK(gamma_fn(6) == doctest::Approx(120).epsilon(1e-15));
}
