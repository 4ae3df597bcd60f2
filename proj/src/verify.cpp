#include "rlab/verify.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <tuple>

#include <Eigen/Dense>
#include <boost/math/tools/roots.hpp>

#include "rlab/errors.hpp"
#include "rlab/specfun.hpp"

namespace rlab {

RadialProblem planted_problem(int n, int ell) {
  // f = r^ell (1 + r^{2q})^{-b} with ell - 2 q b = -(n - 2 + ell)
  const double q = ell >= 2 ? 3 : 2;
  const double b = (2 * ell + n - 2) / (2 * q);
  return potential_from_mode(n, ell, ProductProfile{double(ell), {{1, q, b}}});
}

RadialProblem n5_m0_problem() { return potential_from_mode(5, 0, ProductProfile{0, {{1, 2, 0.75}}}); }

RadialProblem resonance_problem(int n) {
  if (n != 3 && n != 4) throw PreconditionError("resonances exist only for n = 3, 4");
  return potential_from_mode(n, 0, ProductProfile{0, {{1, 2, (n - 2) / 4.0}}});
}

RadialProblem n3_combined_problem() {
  // the l = 1 zero mode r (1+r^4)^{-3/8} (1+(r/R)^4)^{-3/8}; R tuned so that l = 0 turns resonant
  auto make = [](double R) { return potential_from_mode(3, 1, ProductProfile{1, {{1, 2, 0.375}, {R, 2, 0.375}}}); };
  auto rho = [&](double R) {
    const RadialProblem p = make(R);
    return ModeSolver(p, p.mode(0), GridOptions{0, 0}).kernel_indicator();
  };
  boost::uintmax_t it = 80;
  const auto r = boost::math::tools::toms748_solve(rho, 3.0, 5.0,
                                                   [](double a, double b) { return std::abs(a - b) < 1e-13; }, it);
  return make(0.5 * (r.first + r.second));
}

RadialProblem conic_problem(double nu) {
  const double c = std::sqrt(2 / (nu * nu - 0.25));
  const double a = nu - 0.5;
  return potential_from_mode(ConeGeometry::scaled(3, c), 1, ProductProfile{a, {{1, 2, (a + nu + 0.5) / 4}}});
}

const std::vector<std::string>& tolerance_keys() {
  static const std::vector<std::string> keys = {
      "lemma_comp", "wronskian",   "remainder_slope", "k1_linear",   "free_space",  "green_constants",
      "projector",  "n5_anomalous", "n3_resonance",   "n3_d11",      "n4_leading",  "n4_ratio",
      "conic_order", "rb0_collapse", "rb0_order",     "audit_order", "rayleigh_slope",
      "rayleigh_control"};
  return keys;
}

const char* criterion_title(int id) {
  static const char* t[] = {"",
                            "comparison integral closed form",
                            "Bessel layer",
                            "free-space reconstruction",
                            "Green-formula constants",
                            "k^-2 projector and kernel rank",
                            "n=5 m=0 anomalous k^-1 term",
                            "n=3 resonance k^-1 term",
                            "n=4 resonance inverse-log series",
                            "conic fractional orders",
                            "rb0 profile collapse",
                            "index audit",
                            "Riesz thresholds",
                            "Rayleigh unboundedness"};
  return id >= 1 && id <= kCriteria ? t[id] : "unknown";
}

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

CoefficientCheck abs_check(std::string name, double predicted, double fitted, double tol, std::string note = "") {
  CoefficientCheck c;
  c.name = std::move(name);
  c.predicted = predicted;
  c.fitted = fitted;
  c.rel_err = std::abs(fitted - predicted);
  c.tolerance = tol;
  c.pass = c.rel_err <= tol;
  c.note = note.empty() ? "absolute error" : note;
  return c;
}

CoefficientCheck flag_check(std::string name, bool ok, std::string note) {
  CoefficientCheck c;
  c.name = std::move(name);
  c.pass = ok;
  c.fitted = ok ? 1 : 0;
  c.predicted = 1;
  c.note = std::move(note);
  return c;
}

std::vector<GreenSample> column(const std::vector<std::vector<GreenSample>>& s, size_t a) {
  std::vector<GreenSample> out;
  for (const auto& row : s) out.push_back(row[a]);
  return out;
}

const std::vector<BasisTerm> kPowers = {{-2, 0, 0}, {-1, 0, 0}, {0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {3, 0, 0}};
const std::vector<BasisTerm> kPowersLog = {{-2, 0, 0}, {-1, 0, 0}, {0, 0, 0}, {0, 1, 0}, {1, 0, 0}, {2, 0, 0}};

const std::vector<PointPair>& test_pairs() {
  static const std::vector<PointPair> p = {
      {1, 2, 0.3}, {0.7, 1.5, -0.4}, {1.2, 3, 0.9}, {0.5, 2.5, 0.1}, {1.5, 2.2, -0.8}};
  return p;
}

// fits shared between the expansion criteria and the audit
struct ExpansionCase {
  std::string label;
  RadialProblem problem;
  ZeroModeReport rep;
  std::vector<ExpansionFit> fits;  // one per test pair
  std::vector<ExpansionFit> extra;  // one per extra pair
};

std::vector<double> unit_vector(std::mt19937& g, int n) {
  std::normal_distribution<double> d;
  std::vector<double> v(n);
  double s = 0;
  for (auto& x : v) x = d(g), s += x * x;
  for (auto& x : v) x /= std::sqrt(s);
  return v;
}

ExpansionCase projector_case(int n, int ell, const std::vector<PointPair>& extra = {}) {
  ExpansionCase c;
  c.problem = planted_problem(n, ell);
  c.rep = detect_kernel(c.problem, 4);
  std::ostringstream os;
  os << "n=" << n << " l=" << ell;
  c.label = os.str();
  const ResolventSampler s(c.problem);
  const auto grid = geometric_grid(1e-4, 1e-2, 16);
  std::vector<PointPair> pairs = test_pairs();
  pairs.insert(pairs.end(), extra.begin(), extra.end());
  const auto samples = s.sample(pairs, grid);
  for (size_t a = 0; a < pairs.size(); ++a)
    (a < test_pairs().size() ? c.fits : c.extra)
        .push_back(fit_expansion(column(samples, a), n == 6 ? kPowersLog : kPowers));
  return c;
}

// ---------------------------------------------------------------- criteria

void criterion1(SuiteResult& r, const VerifyOptions& o) {
  for (double nu : {1.1, 1.25, 1.5, 2.0, 3.0}) {
    const double v = comp_integral(nu), cf = comp_closed_form(nu);
    r.add(make_check("comp_integral(" + fmt(nu) + ")", cf, v, o.tol("lemma_comp", 1e-8),
                     "ratio to closed form " + fmt(v / cf)));
  }
  r.add(make_check("closed form at nu=2", -std::numbers::pi, comp_closed_form(2), 1e-12));
  r.add(make_check("closed form at nu=1.5", -std::sqrt(2 * std::numbers::pi), comp_closed_form(1.5), 1e-12));
}

void criterion2(SuiteResult& r, const VerifyOptions& o) {
  double worst = 0;
  for (double nu : {0.0, 0.3, 1.0, 2.5, 7.25, 40.0})
    for (double z : {1e-3, 0.1, 1.0, 7.0, 30.0, 200.0}) {
      const BesselIK b = bessel_ik_log(nu, z);
      const double w = std::exp(b.log_i + b.log_k) * (b.dk_over_k - b.di_over_i) * z;
      worst = std::max(worst, std::abs(w + 1));
    }
  r.add(make_check("Wronskian z(I K' - I' K) = -1", -1, -1 + worst, o.tol("wronskian", 1e-10), "worst deviation"));

  // (nu, requested truncation); the remainder must stay resolvable above roundoff somewhere in [1e-4, 1e-2]
  for (auto [nu, req] : {std::pair{0.0, 0.0}, std::pair{0.3, 0.0}, std::pair{0.3, 1.0}, std::pair{0.7, 1.0},
                         std::pair{1.0, 0.5}, std::pair{1.2, 0.5}, std::pair{1.5, 0.0}, std::pair{2.0, -0.5}}) {
    const SmallArgExpansion e = small_arg_expansion(nu, BesselFamily::K, req);
    std::vector<double> zs, rem;
    for (double z : geometric_grid(1e-4, 1e-2, 8)) {
      const double exact = bessel_k(nu, z), d = exact - e.evaluate(z);
      if (std::abs(d) > 1e-12 * std::abs(exact)) zs.push_back(z), rem.push_back(d);
    }
    std::ostringstream os;
    os << "K_" << nu << " remainder order";
    if (zs.size() < 9) {
      r.add(flag_check(os.str(), false, "remainder below roundoff on [1e-4, 1e-2]"));
      continue;
    }
    for (size_t i = 0; i < zs.size(); ++i)
      rem[i] = std::abs(rem[i]) / std::pow(std::abs(std::log(zs[i])), e.truncation_logpower);
    const SlopeFit f = loglog_slope(zs, rem);
    std::ostringstream note;
    note << "z in [" << zs.front() << ", " << zs.back() << "], log power " << e.truncation_logpower;
    r.add(abs_check(os.str(), e.truncation_power, f.slope, o.tol("remainder_slope", 0.1), note.str()));
  }
  const SmallArgExpansion k1 = small_arg_expansion(1, BesselFamily::K, 2);
  double lin = 0;
  for (const auto& t : k1.terms)
    if (std::abs(t.power - 1) < 1e-12 && t.logpower == 0) lin = t.coefficient;
  const double alpha = -(2 * std::log(2.0) + 1 - 2 * std::numbers::egamma) / 4;
  r.add(make_check("K_1 linear coefficient", alpha, lin, o.tol("k1_linear", 1e-6)));
}

void criterion3(SuiteResult& r, const VerifyOptions& o) {
  const RadialProblem p = free_problem(ConeGeometry::round(3));
  const ResolventSampler s(p);
  const std::vector<PointPair> pairs = {{0.5, 1, 1},     {1, 1.5, 0.3},  {1, 4, 0.5},
                                        {2, 3, -0.5},    {1, 5, 0.8},    {0.3, 0.6, -1},
                                        {1.5, 2.5, 0.9}, {0.25, 4.5, 0.0}};
  const auto grid = geometric_grid(0.01, 1, 8);
  const auto samples = s.sample(pairs, grid);
  double worst = 0, dmin = 1e300, dmax = 0;
  for (size_t a = 0; a < pairs.size(); ++a) {
    const auto& z = pairs[a];
    const double d = std::sqrt(z.r * z.r + z.r_p * z.r_p - 2 * z.r * z.r_p * z.costheta);
    dmin = std::min(dmin, d), dmax = std::max(dmax, d);
    for (size_t i = 0; i < grid.size(); ++i) {
      const double exact = std::exp(-grid[i] * d) / (4 * std::numbers::pi * d);
      worst = std::max(worst, std::abs(samples[i][a].value / exact - 1));
    }
  }
  CoefficientCheck c = make_check("mode sum vs e^{-kd}/(4 pi d)", 1, 1 + worst, o.tol("free_space", 1e-6),
                                  "worst relative error over d in [" + fmt(dmin) + ", " + fmt(dmax) + "]");
  r.add(c);
}

void criterion4(SuiteResult& r, const VerifyOptions& o) {
  const double tol = o.tol("green_constants", 1e-5);
  r.add(check_resonance_ab(resonance_problem(3), tol));
  r.add(check_resonance_ab(resonance_problem(4), tol));
  {
    const RadialProblem p = n5_m0_problem();
    r.add(check_n5_theta(p, detect_kernel(p, 2), tol));
  }
  r.add(check_complicated_leading(planted_problem(6, 2), tol));
}

void criterion5(SuiteResult& r, const VerifyOptions& o) {
  std::mt19937 gen(o.seed);
  for (auto [n, ell, dim] : {std::tuple{5, 1, 5}, std::tuple{6, 2, 20}, std::tuple{3, 1, 3}}) {
    // k^-2 coefficient matrix over random directions at r = 1, r' = 2; planted dimension dim
    const int N = dim + 4;
    std::vector<std::vector<double>> u, v;
    for (int i = 0; i < N; ++i) u.push_back(unit_vector(gen, n)), v.push_back(unit_vector(gen, n));
    std::vector<PointPair> pairs;
    for (int a = 0; a < N; ++a)
      for (int b = 0; b < N; ++b) {
        double dot = 0;
        for (int q = 0; q < n; ++q) dot += u[a][q] * v[b][q];
        pairs.push_back({1, 2, std::clamp(dot, -1.0, 1.0)});
      }
    const ExpansionCase c = projector_case(n, ell, pairs);
    for (size_t a = 0; a < c.fits.size(); ++a) {
      CoefficientCheck ch =
          check_leading_projector(c.problem, c.rep, test_pairs()[a], c.fits[a], Convention::function,
                                  o.tol("projector", 1e-3));
      ch.name = c.label + " " + ch.name + " pair " + std::to_string(a);
      r.add(ch);
    }
    r.add(abs_check(c.label + " detected kernel dimension", dim, c.rep.kernel_dimension, 0.5));
    Eigen::MatrixXd M(N, N);
    for (int a = 0; a < N; ++a)
      for (int b = 0; b < N; ++b) M(a, b) = c.extra[a * N + b].coefficient({-2, 0, 0});
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
    const auto sv = svd.singularValues();
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
      if (sv(i) > 1e-3 * sv(0)) ++rank;
    std::ostringstream os;
    os << N << "x" << N << " directions, singular values " << sv(dim - 1) / sv(0) << " (last kept), "
       << (dim < N ? sv(dim) / sv(0) : 0.0) << " (first dropped)";
    r.add(abs_check(c.label + " kernel rank", dim, rank, 0.5, os.str()));
  }
}

void criterion6(SuiteResult& r, const VerifyOptions& o) {
  const auto grid = geometric_grid(1e-4, 1e-2, 16);
  {
    const RadialProblem p = n5_m0_problem();
    const ZeroModeReport rep = detect_kernel(p, 3);
    const ResolventSampler s(p);
    const auto samples = s.sample(test_pairs(), grid);
    for (size_t a = 0; a < test_pairs().size(); ++a) {
      const ExpansionFit fit = fit_expansion(column(samples, a), kPowers);
      CoefficientCheck c = check_n5_m0_term(p, rep, test_pairs()[a], fit, o.tol("n5_anomalous", 1e-2));
      c.name += " pair " + std::to_string(a);
      r.add(c);
    }
  }
  {
    const RadialProblem p = planted_problem(5, 1);
    const ResolventSampler s(p);
    const auto samples = s.sample(test_pairs(), grid);
    for (size_t a = 0; a < test_pairs().size(); ++a) {
      const ExpansionFit fit = fit_expansion(column(samples, a), kPowers);
      CoefficientCheck c = check_vanishing("control m=1 k^-1", fit, {-1, 0, 0}, std::abs(fit.coefficient({-2, 0, 0})));
      c.name += " pair " + std::to_string(a);
      r.add(c);
    }
  }
}

void criterion7(SuiteResult& r, const VerifyOptions& o) {
  const auto grid = geometric_grid(1e-4, 1e-2, 16);
  {
    const RadialProblem p = resonance_problem(3);
    const ZeroModeReport rep = detect_kernel(p, 3);
    const ResolventSampler s(p);
    const auto samples = s.sample(test_pairs(), grid);
    for (size_t a = 0; a < test_pairs().size(); ++a) {
      const ExpansionFit fit = fit_expansion(column(samples, a), kPowers);
      CoefficientCheck c = check_n3_minus1(p, rep, test_pairs()[a], fit, o.tol("n3_resonance", 1e-2));
      c.name = "resonance only, pair " + std::to_string(a);
      r.add(c);
    }
  }
  {
    const RadialProblem p = n3_combined_problem();
    const ZeroModeReport rep = detect_kernel(p, 4);
    const ResolventSampler s(p);
    r.notes.push_back("combined problem: l=0 resonance, l=1 zero modes (dimension " +
                      std::to_string(rep.kernel_dimension) + "), l=0 bound state kappa " +
                      fmt(s.bound_state_scale()));
    const auto samples = s.sample(test_pairs(), grid);
    for (size_t a = 0; a < test_pairs().size(); ++a) {
      const PointPair& z = test_pairs()[a];
      const ExpansionFit fit = fit_expansion(column(samples, a), kPowers);
      CoefficientCheck c = check_n3_minus1(p, rep, z, fit, o.tol("n3_d11", 2e-2));
      c.name = "resonance - d11 psi psi, pair " + std::to_string(a);
      // the same fit against the opposite sign of the d11 term
      const double res = kernel_product(p, rep, z, true);
      const double d = res - c.predicted;
      c.note += "; psi~psi~ + d11 psi psi = " + fmt(res + d) + " (rel " + fmt(std::abs(c.fitted / (res + d) - 1)) + ")";
      r.add(c);
      CoefficientCheck j = check_jensen_kato(p, rep, z, fit, o.tol("n3_d11", 2e-2));
      j.name = "Jensen-Kato quadrature, pair " + std::to_string(a);
      r.add(j);
    }
  }
}

ExpansionFit n4_fit(const RadialProblem& p, const PointPair& z, ExpansionFit* power_fit) {
  const ResolventSampler s(p);
  const auto grid = geometric_grid(1e-8, 1e-2, 16);
  const auto samples = column(s.sample({z}, grid), 0);
  if (power_fit) {
    *power_fit = fit_expansion(samples, {{-2, 0, 0}, {-2, 1, 0}, {-1, 0, 0}, {0, 0, 0}, {0, 1, 0}, {1, 0, 0},
                                         {2, 0, 0}, {2, 1, 0}});
  }
  return fit_expansion(samples, inverse_log_basis(6, {{0, 0, 0}, {0, 1, 0}, {0, 0, 1}}));
}

void criterion8(SuiteResult& r, const VerifyOptions& o) {
  const RadialProblem p = resonance_problem(4);
  const ZeroModeReport rep = detect_kernel(p, 3);
  const PointPair z{1, 2, 0.3};
  ExpansionFit pw;
  const ExpansionFit il = n4_fit(p, z, &pw);
  r.add(flag_check("pure powers fail", pw.residual_norm >= 10 * il.residual_norm,
                   "power residual " + fmt(pw.residual_norm) + ", inverse-log residual " + fmt(il.residual_norm)));
  const auto checks = check_n4_resonance_series(p, rep, z, il);
  for (auto c : checks) {
    if (c.name == "R_{0,1}") c.tolerance = o.tol("n4_leading", c.tolerance), c.pass = c.rel_err <= c.tolerance;
    if (c.name.find("-omega") != std::string::npos) {
      c.tolerance = o.tol("n4_ratio", c.tolerance);
      c.pass = c.rel_err <= c.tolerance;
      r.add(c);
    } else if (c.name == "R_{0,1}") {
      r.add(c);
    } else {
      r.notes.push_back(c.name + ": predicted " + fmt(c.predicted) + ", fitted " + fmt(c.fitted) + ", rel " +
                        fmt(c.rel_err));
    }
  }
}

FractionalCheck conic_check(double nu) {
  const RadialProblem p = conic_problem(nu);
  const ZeroModeReport rep = detect_kernel(p, 3);
  const ResolventSampler s(p);
  const PointPair z{1, 2, 0.3};
  const auto samples = column(s.sample({z}, geometric_grid(1e-7, 1e-3, 16)), 0);
  return check_fractional_orders(p, rep, z, samples);
}

void criterion9(SuiteResult& r, const VerifyOptions& o) {
  for (double nu : {0.75, 1.25}) {
    FractionalCheck f = conic_check(nu);
    for (auto c : f.checks) {
      if (c.name.find("order") != std::string::npos) {
        const double tol = o.tol("conic_order", 0.05);
        c = abs_check(c.name, c.predicted, c.fitted, tol);
      }
      c.name = "nu=" + fmt(nu) + " " + c.name;
      r.add(c);
    }
  }
}

Rb0Check rb0_check(const VerifyOptions& o) {
  const RadialProblem p = planted_problem(5, 1);
  const ZeroModeReport rep = detect_kernel(p, 3);
  const ResolventSampler s(p);
  return check_rb0_profile(s, rep, 1.0, 0.5, geometric_grid(1e-4, 1e-3, 8), {0.25, 0.5, 1, 2, 4},
                           o.tol("rb0_collapse", 2e-2));
}

void criterion10(SuiteResult& r, const VerifyOptions& o) {
  const Rb0Check c = rb0_check(o);
  for (auto ch : c.checks) {
    if (ch.name == "rb0 x'-order") ch = abs_check(ch.name, ch.predicted, ch.fitted, o.tol("rb0_order", 0.05));
    r.add(ch);
  }
}

void add_audit(SuiteResult& r, const std::string& name, const ExpansionFit& fit, const IndexFamily& fam,
               double order_tol, bool expect_pass) {
  const AuditReport a = audit_against_index_family(fit, fam, Face::zf, order_tol);
  std::ostringstream os;
  if (a.violations.empty()) os << "no violations";
  for (const auto& v : a.violations) os << v.term.label() << " = " << v.coeff << " +- " << v.stderr_ << "; ";
  r.add(flag_check(name, a.pass == expect_pass, os.str()));
}

void criterion11(SuiteResult& r, const VerifyOptions& o) {
  const double otol = o.tol("audit_order", 0.05);
  for (auto [n, ell] : {std::pair{5, 1}, std::pair{6, 2}, std::pair{3, 1}}) {
    const ExpansionCase c = projector_case(n, ell);
    const IndexFamily fam = n == 3 ? theorem_index_family(Theorem::dim3_full, 3, c.rep.m_prime)
                                   : theorem_index_family(Theorem::euclidean_nullspace, n, c.rep.m_prime);
    for (size_t a = 0; a < c.fits.size(); ++a)
      add_audit(r, c.label + " zf pair " + std::to_string(a), c.fits[a], fam, 1e-9, true);
  }
  const auto grid = geometric_grid(1e-4, 1e-2, 16);
  {
    const RadialProblem p = n5_m0_problem();
    const ZeroModeReport rep = detect_kernel(p, 3);
    const auto fit = fit_expansion(column(ResolventSampler(p).sample({test_pairs()[0]}, grid), 0), kPowers);
    add_audit(r, "n=5 m=0 zf", fit, theorem_index_family(Theorem::euclidean_nullspace, 5, 0, false), 1e-9, true);
  }
  for (const RadialProblem& p : {resonance_problem(3), n3_combined_problem()}) {
    const ZeroModeReport rep = detect_kernel(p, 4);
    const auto fit = fit_expansion(column(ResolventSampler(p).sample({test_pairs()[0]}, grid), 0), kPowers);
    add_audit(r, rep.kernel_dimension ? "n=3 combined zf" : "n=3 resonance zf", fit,
              theorem_index_family(Theorem::dim3_full, 3, rep.kernel_dimension ? rep.m_prime : 2), 1e-9, true);
  }
  for (double nu : {0.75, 1.25}) {
    const FractionalCheck f = conic_check(nu);
    add_audit(r, "conic nu=" + fmt(nu) + " zf", f.fit.fit, fractional_index_family(3, nu, nu < 1), otol, true);
  }
  {
    const Rb0Check c = rb0_check(o);
    const IndexFamily fam = theorem_index_family(Theorem::euclidean_nullspace, 5, 1);
    const bool ok = fam.at(Face::rb0).admits(c.fitted_order, 0, otol);
    r.add(flag_check("n=5 m'=1 rb0 order", ok, "fitted " + fmt(c.fitted_order) + " against " + fam.at(Face::rb0).to_string()));
  }
  {
    const RadialProblem p = resonance_problem(4);
    const ExpansionFit il = n4_fit(p, {1, 2, 0.3}, nullptr);
    for (Theorem t : {Theorem::euclidean_nullspace, Theorem::conic_nullspace}) {
      const IndexFamily fam = theorem_index_family(t, 4, 2, false);
      add_audit(r, std::string("n=4 inverse-log fit rejected by ") +
                       (t == Theorem::euclidean_nullspace ? "euclidean" : "conic") + " family",
                il, fam, 1e-9, false);
    }
  }
}

void criterion12(SuiteResult& r, const VerifyOptions& o) {
  struct Case {
    int n, ell;
    std::vector<double> ps;
  };
  const double ci = 2;  // |slope| above twice its standard error
  for (const Case& c : {Case{5, 1, {1.1, 2, 3}}, Case{3, 2, {1.1, 2, 4}}, Case{6, 2, {1.1, 3, 8}}}) {
    const RadialProblem p = planted_problem(c.n, c.ell);
    const ZeroModeReport rep = detect_kernel(p, 4);
    const ThresholdPrediction pred = threshold_range(c.n, rep.m_prime);
    std::ostringstream os;
    os << "n=" << c.n << " m'=" << rep.m_prime << ": thresholds (" << pred.p_lo << ", " << pred.p_hi << ")";
    r.notes.push_back(os.str());
    const auto probes = lp_threshold_sweep(p, pred, c.ps, {10, 20, 40, 80, 160, 320});
    for (const auto& pr : probes) {
      std::ostringstream name, note;
      name << "n=" << c.n << " m'=" << rep.m_prime << " " << family_name(pr.family) << " p=" << pr.p;
      note << "slope " << pr.fitted_slope << " +- " << pr.slope_stderr << ", predicted " << pr.predicted_slope;
      CoefficientCheck ch;
      ch.name = name.str();
      ch.predicted = pr.predicted_slope;
      ch.fitted = pr.fitted_slope;
      ch.rel_err = pr.slope_stderr;
      ch.tolerance = ci;
      ch.pass = std::abs(pr.fitted_slope) > ci * pr.slope_stderr && (pr.fitted_slope > 0) == (pr.predicted_slope > 0);
      ch.note = note.str();
      r.add(ch);
    }
  }
}

void criterion13(SuiteResult& r, const VerifyOptions& o) {
  const std::vector<double> R = {10, 20, 50, 100, 200, 500, 1000};
  const RayleighResult a = rayleigh_unboundedness(planted_problem(3, 1), R);
  r.add(abs_check("alpha(R) slope", 1, a.slope, o.tol("rayleigh_slope", 0.2), "stderr " + fmt(a.slope_stderr)));
  const auto& pts = a.points;
  const double A = pts.back().projection, drift = std::abs(pts.back().projection - pts[pts.size() - 2].projection);
  r.add(flag_check("<phi_R, psi> converges to A != 0", drift < 1e-2 * std::abs(A) && std::abs(A) > 1e-3,
                   "A = " + fmt(A) + ", last change " + fmt(drift)));
  const RayleighResult f = rayleigh_unboundedness(free_problem(ConeGeometry::round(3)), R);
  r.add(abs_check("free control slope", 0, f.slope, o.tol("rayleigh_control", 0.1)));
}

}  // namespace

SuiteResult run_criterion(int id, const VerifyOptions& opt) {
  SuiteResult r;
  r.id = id;
  r.title = criterion_title(id);
  const auto t0 = std::chrono::steady_clock::now();
  using Fn = void (*)(SuiteResult&, const VerifyOptions&);
  static const Fn fns[] = {nullptr,     criterion1,  criterion2,  criterion3, criterion4,
                           criterion5,  criterion6,  criterion7,  criterion8, criterion9,
                           criterion10, criterion11, criterion12, criterion13};
  if (id < 1 || id > kCriteria) throw DomainError("no criterion " + std::to_string(id));
  fns[id](r, opt);
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

}  // namespace rlab
