#include <doctest.h>

#include <cmath>
#include <vector>

#include "rlab/errors.hpp"
#include "rlab/radial.hpp"
#include "rlab/specfun.hpp"
#include "rlab/verify.hpp"

using namespace rlab;

TEST_CASE("free Green function is I K") {
  const RadialProblem p = free_problem(ConeGeometry::round(3));
  for (int j : {0, 2}) {
    const ModeSolver s(p, p.mode(j));
    const double nu = s.nu();
    for (double k : {1e-3, 0.1, 2.0}) {
      const double t = -0.4, tp = 1.1;
      const double ref = bessel_i(nu, k * std::exp(t)) * bessel_k(nu, k * std::exp(tp));
      CHECK(s.green(k, t, tp) == doctest::Approx(ref).epsilon(1e-8));
      CHECK(s.green(k, tp, t) == doctest::Approx(ref).epsilon(1e-8));
    }
  }
}

TEST_CASE("apply_resolvent agrees with the Green function") {
  const RadialProblem p = planted_problem(5, 1);
  const ModeSolver s(p, p.mode(0));
  const double k = 0.2;
  const int f_lo = -100;
  std::vector<double> F(201);
  for (int i = 0; i < 201; ++i) {
    const double x = (i - 100) / 100.0;
    F[i] = std::exp(-1 / (1 - x * x + 1e-300));
  }
  F.front() = F.back() = 0;
  const GridSolution g = s.apply_resolvent(k, f_lo, F, -300, 300);
  const EnergySolution e = s.at(k);
  for (int o : {-300, -50, 0, 120, 300}) {
    double ref = 0;
    for (int i = 0; i < 201; ++i) ref += (i == 0 || i == 200 ? 0.5 : 1.0) * e.green(s.t(o), s.t(f_lo + i)) * F[i];
    ref *= s.h();
    CHECK(g.phi[o + 300] == doctest::Approx(ref).epsilon(1e-6));
  }
}

TEST_CASE("zero-energy solutions of the free operator") {
  const RadialProblem p = free_problem(ConeGeometry::round(3));
  const ZeroSolutions z = zero_solutions(reduce(p, p.mode(1), 0));
  CHECK(z.regular.at_zero.exponent == doctest::Approx(2).epsilon(1e-6));
  CHECK(z.decaying.at_infinity.exponent == doctest::Approx(-1).epsilon(1e-6));
  CHECK_THROWS_AS(zero_solutions(reduce(p, p.mode(1), 0.5)), PreconditionError);
}

TEST_CASE("planted kernels are detected") {
  const ZeroModeReport a = detect_kernel(planted_problem(5, 1), 3);
  CHECK(a.kernel_dimension == 5);
  CHECK(a.m_prime == doctest::Approx(1));
  CHECK_FALSE(a.resonance);
  const ZeroModeReport b = detect_kernel(resonance_problem(3), 3);
  CHECK(b.kernel_dimension == 0);
  CHECK(b.resonance);
  CHECK(detect_kernel(free_problem(ConeGeometry::round(4)), 3).kernel_dimension == 0);
}

TEST_CASE("profile exponents must match the mode") {
  CHECK_THROWS_AS(potential_from_mode(5, 1, ProductProfile{0, {{1, 2, 1.25}}}), PreconditionError);
  CHECK_THROWS_AS(potential_from_mode(5, 1, ProductProfile{1, {{1, 2, 1.0}}}), PreconditionError);
}

TEST_CASE("finite part of the n = 4 resonance norm") {
  const RadialProblem p = resonance_problem(4);
  const ZeroModeReport rep = detect_kernel(p, 1);
  REQUIRE(rep.normalized_modes.size() == 1);
  const FinitePart fp = finite_part_norm(rep.normalized_modes[0].profile, 1);
  // psi ~ r^-2 / sqrt(Vol S^3) contributes log R with unit weight
  CHECK(fp.log_coefficient == doctest::Approx(1).epsilon(1e-6));
}
