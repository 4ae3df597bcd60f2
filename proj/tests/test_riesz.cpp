#include <doctest.h>

#include <cmath>

#include "rlab/errors.hpp"
#include "rlab/riesz.hpp"
#include "rlab/verify.hpp"

using namespace rlab;

TEST_CASE("threshold ranges") {
  const auto a = threshold_range(5, 1);
  CHECK(a.p_lo == doctest::Approx(1.25));
  CHECK(a.p_hi == doctest::Approx(2.5));
  const auto b = threshold_range(6, 2);
  CHECK(b.p_lo == doctest::Approx(1));
  CHECK(b.p_hi == doctest::Approx(6));
  CHECK_THROWS_AS(threshold_range(2, 1), PreconditionError);
  CHECK_THROWS_AS(threshold_range(5, 2.5), PreconditionError);
}

TEST_CASE("isometry on L2 without potential") {
  for (int n : {3, 5})
    for (int j : {0, 1}) {
      const RadialProblem p = free_problem(ConeGeometry::round(n));
      const ModeFunction f = log_bump(p, j, 1.0);
      const RieszField t = riesz_apply(p, f, -1100, 1100);
      const double nf = mode_lp_norm(p, j, f.lo, f.value, {}, 2, 1e-9, 1e9);
      const double nt = mode_lp_norm(p, j, t.lo, t.u, t.du, 2, 1e-9, 1e9);
      CHECK(nt == doctest::Approx(nf).epsilon(1e-3));
    }
}

TEST_CASE("linearity and quadrature split") {
  const RadialProblem p = planted_problem(5, 1);
  const ModeFunction f = log_bump(p, 2, 1.0), g = log_bump(p, 2, 3.0);
  ModeFunction s = f;
  const int off = g.lo - f.lo;
  s.value.resize(std::max(s.value.size(), g.value.size() + off), 0.0);
  for (auto& v : s.value) v *= 2;
  for (size_t i = 0; i < g.value.size(); ++i) s.value[i + off] += 3 * g.value[i];
  RieszOptions fixed;
  fixed.k_lo = 1e-6;
  fixed.k_hi = 10;
  const RieszField tf = riesz_apply(p, f, -400, 400, fixed), tg = riesz_apply(p, g, -400, 400, fixed),
                   ts = riesz_apply(p, s, -400, 400, fixed);
  RieszOptions split = fixed;
  split.k_split = 0.37;
  const RieszField tf2 = riesz_apply(p, f, -400, 400, split);
  // default k ranges differ per source; the wide one is cut into pieces
  const RieszField df = riesz_apply(p, f, -400, 400), dg = riesz_apply(p, g, -400, 400), ds = riesz_apply(p, s, -400, 400);
  double scale = 0, lin = 0, sp = 0, dlin = 0;
  for (size_t i = 0; i < ts.u.size(); ++i) {
    scale = std::max(scale, std::abs(ts.u[i]));
    lin = std::max(lin, std::abs(ts.u[i] - 2 * tf.u[i] - 3 * tg.u[i]));
    sp = std::max(sp, std::abs(tf.u[i] - tf2.u[i]));
    dlin = std::max(dlin, std::abs(ds.u[i] - 2 * df.u[i] - 3 * dg.u[i]));
  }
  CHECK(lin < 1e-10 * scale);
  CHECK(sp < 1e-6 * scale);
  CHECK(dlin < 1e-2 * scale);
}

TEST_CASE("kernel input maps to zero") {
  const RadialProblem p = planted_problem(5, 1);
  const ZeroModeReport rep = detect_kernel(p, 2);
  const RadialProfile& pr = rep.normalized_modes.at(0).profile;
  ModeFunction f;
  f.j = 1;
  f.lo = static_cast<int>(std::lround(pr.t0 / pr.h));
  for (int i = 0; i < pr.size(); ++i) f.value.push_back(std::exp(-1.5 * pr.t(i)) * pr.phi[i]);
  const RieszField t = riesz_apply(p, f, -100, 100);
  CHECK(t.in_kernel);
  CHECK(t.kernel_component == doctest::Approx(1).epsilon(1e-6));
  for (double u : t.u) CHECK(u == 0);
}

TEST_CASE("divergent regime and link preconditions") {
  const RadialProblem p = planted_problem(3, 1);
  const RieszField t = riesz_apply(p, log_bump(p, 1, 1), -100, 100);
  CHECK(t.divergent);
  CHECK_THROWS_AS(lp_threshold_sweep(p, threshold_range(3, 1), {2}, {10, 20, 40, 80, 160}), PreconditionError);
  const RadialProblem c = conic_problem(1.25);
  CHECK_THROWS_AS(riesz_apply(c, log_bump(c, 0, 1), -100, 100), PreconditionError);
}

TEST_CASE("log-log slope") {
  const SlopeFit s = loglog_slope({1, 10, 100, 1000}, {3, 30 * std::sqrt(10.0), 3000, 3000 * std::sqrt(1000.0)});
  CHECK(s.slope == doctest::Approx(1.5));
  CHECK_THROWS_AS(loglog_slope({1, 2}, {1, 2}), DomainError);
}
