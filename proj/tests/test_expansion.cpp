#include <doctest.h>

#include <cmath>
#include <numbers>

#include "rlab/errors.hpp"
#include "rlab/expansion.hpp"
#include "rlab/verify.hpp"

using namespace rlab;

TEST_CASE("fit_expansion recovers synthetic coefficients") {
  const auto k = geometric_grid(1e-4, 1e-2, 16);
  std::vector<double> v;
  for (double x : k) v.push_back(0.7 / (x * x) - 0.2 / x + 1.5 + 3 * x * std::log(x));
  const ExpansionFit f = fit_expansion(k, v, {{-2, 0, 0}, {-1, 0, 0}, {0, 0, 0}, {1, 1, 0}, {1, 0, 0}});
  CHECK(f.coefficient({-2, 0, 0}) == doctest::Approx(0.7).epsilon(1e-9));
  CHECK(f.coefficient({-1, 0, 0}) == doctest::Approx(-0.2).epsilon(1e-7));
  CHECK(f.coefficient({1, 1, 0}) == doctest::Approx(3).epsilon(1e-4));
  CHECK(f.coefficient({5, 0, 0}) == 0);
  CHECK_THROWS(fit_expansion(std::vector<double>(5, 1.0), std::vector<double>(5, 1.0), {{-2, 0, 0}, {0, 0, 0}}));
}

TEST_CASE("inverse-log basis") {
  const auto b = inverse_log_basis(3, {{0, 0, 0}});
  REQUIRE(b.size() == 4);
  CHECK(b[0] == BasisTerm{-2, 0, 1});
  CHECK(b[0](1e-3) == doctest::Approx(1e6 / std::log(1e-3)));
}

TEST_CASE("resonance Green constants") {
  CHECK(check_resonance_ab(resonance_problem(3)).predicted == doctest::Approx(-1 / (4 * std::numbers::pi)));
  CHECK(check_resonance_ab(resonance_problem(3)).pass);
  CHECK(check_resonance_ab(resonance_problem(4)).pass);
}

TEST_CASE("complicated lemma sign") {
  const RadialProblem p = planted_problem(6, 2);
  const double expect = 1 / (2.0 * 6 * 4 * std::pow(std::numbers::pi, 3));  // Vol S^5 = pi^3
  CHECK(complicated_leading(p, -1) == doctest::Approx(expect).epsilon(1e-5));
  CHECK(complicated_leading(p, +1) < 0);
}

TEST_CASE("free problem expansion has no kernel") {
  const RadialProblem p = free_problem(ConeGeometry::round(3));
  const auto s = sample_resolvent(p, {1, 2, 0.3}, geometric_grid(1e-4, 1e-2, 16));
  const ExpansionFit f = fit_expansion(s, {{-2, 0, 0}, {-1, 0, 0}, {0, 0, 0}, {1, 0, 0}, {2, 0, 0}});
  CHECK(check_vanishing("k^-2", f, {-2, 0, 0}, std::abs(f.coefficient({0, 0, 0}))).pass);
  // G = e^{-kd}/(4 pi d): the k^0 and k^1 terms are 1/(4 pi d) and -1/(4 pi)
  const double d = std::sqrt(1 + 4 - 4 * 0.3);
  CHECK(f.coefficient({0, 0, 0}) == doctest::Approx(1 / (4 * std::numbers::pi * d)).epsilon(1e-8));
  CHECK(f.coefficient({1, 0, 0}) == doctest::Approx(-1 / (4 * std::numbers::pi)).epsilon(1e-5));
}

TEST_CASE("sampler preconditions") {
  const RadialProblem p = free_problem(ConeGeometry::round(3));
  const ResolventSampler s(p);
  CHECK_THROWS_AS(s.sample({{1, 1, 0.3}}, {0.1}), DomainError);
  CHECK_THROWS_AS(s.sample({{1, 2, 0.3}}, {-0.1}), PreconditionError);
}

TEST_CASE("audit flags terms outside the family") {
  const auto k = geometric_grid(1e-4, 1e-2, 16);
  std::vector<double> v;
  for (double x : k) v.push_back(1 / (x * x) + 0.5 / x + 2);
  const ExpansionFit f = fit_expansion(k, v, {{-2, 0, 0}, {-1, 0, 0}, {0, 0, 0}, {1, 0, 0}});
  IndexFamily fam;
  fam[Face::zf] = IndexSet::parse("{(-2,0),(0,0)}+trunc(1)");
  const AuditReport a = audit_against_index_family(f, fam, Face::zf);
  CHECK_FALSE(a.pass);
  REQUIRE(a.violations.size() == 1);
  CHECK(a.violations[0].term == BasisTerm{-1, 0, 0});
  fam[Face::zf] = IndexSet::parse("{(-2,0),(-1,0),(0,0)}+trunc(1)");
  CHECK(audit_against_index_family(f, fam, Face::zf).pass);
}
