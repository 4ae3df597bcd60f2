#include "rlab/expansion.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <functional>
#include <numbers>
#include <sstream>

#include "rlab/errors.hpp"
#include "rlab/lsq.hpp"
#include "rlab/specfun.hpp"

namespace rlab {

namespace {

constexpr double kPi = std::numbers::pi;

// Neumaier summation
struct Accumulator {
  double sum = 0, c = 0;
  void add(double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      c += (sum - t) + x;
    else
      c += (x - t) + sum;
    sum = t;
  }
  double value() const { return sum + c; }
};

double link_volume(const ConeGeometry& g) {
  const double v = sphere_volume(g.n);
  return g.link == LinkKind::scaled_sphere ? v * std::pow(g.c, g.n - 1) : v;
}

const NormalizedMode* first_mode(const ZeroModeReport& rep, bool l2) {
  for (const auto& m : rep.normalized_modes)
    if (m.l2 == l2) return &m;
  return nullptr;
}

double mode_product(const RadialProblem& p, const NormalizedMode& m, const PointPair& z) {
  return std::pow(z.r * z.r_p, 1 - p.n / 2.0) * m.profile.at(std::log(z.r)) * m.profile.at(std::log(z.r_p)) *
         link_projection_kernel(p.geom, m.j, z.costheta);
}

}  // namespace

const char* convention_name(Convention c) {
  switch (c) {
    case Convention::function: return "function";
    case Convention::b_half_density: return "b_half_density";
    case Convention::sc_half_density: return "sc_half_density";
  }
  return "?";
}

double convention_factor(int n, Convention c, double r, double r_p) {
  return c == Convention::b_half_density ? std::pow(r * r_p, n / 2.0) : 1.0;
}

PointPair pair_from_points(const std::vector<double>& z, const std::vector<double>& zp) {
  if (z.size() != zp.size() || z.empty()) throw DomainError("points must have the same positive dimension");
  double a = 0, b = 0, ab = 0;
  for (size_t i = 0; i < z.size(); ++i) a += z[i] * z[i], b += zp[i] * zp[i], ab += z[i] * zp[i];
  if (a == 0 || b == 0) throw DomainError("points at the cone tip are not admitted");
  PointPair p;
  p.r = std::sqrt(a);
  p.r_p = std::sqrt(b);
  p.costheta = std::clamp(ab / (p.r * p.r_p), -1.0, 1.0);
  return p;
}

std::vector<double> geometric_grid(double k_min, double k_max, int per_decade) {
  if (!(k_min > 0) || !(k_max > k_min) || per_decade < 1) throw DomainError("geometric_grid: bad range");
  const int steps = static_cast<int>(std::lround(std::log10(k_max / k_min) * per_decade));
  std::vector<double> out;
  for (int i = 0; i <= steps; ++i) out.push_back(k_min * std::pow(k_max / k_min, static_cast<double>(i) / steps));
  return out;
}

ResolventSampler::ResolventSampler(const RadialProblem& p, const SamplerOptions& opt) : problem_(&p), opt_(opt) {
  const double h = 1.0 / p.steps_per_unit;
  for (double t = std::log(p.r_min); t <= std::log(p.r_max); t += h)
    attractive_ = std::max(attractive_, -p.potential.r2v(t));
}

const ModeSolver& ResolventSampler::solver(int j) const {
  while (static_cast<int>(solvers_.size()) <= j) {
    const int i = static_cast<int>(solvers_.size());
    solvers_.push_back(std::make_unique<ModeSolver>(*problem_, problem_->mode(i), opt_.grid));
  }
  return *solvers_[j];
}

double ResolventSampler::bound_state_scale() const {
  if (kappa_min_) return *kappa_min_;
  double kmin = INFINITY;
  for (int j = 0;; ++j) {
    const Mode m = problem_->mode(j);
    if (m.nu * m.nu >= attractive_) break;
    for (double k : solver(j).bound_state_kappas()) kmin = std::min(kmin, k);
  }
  kappa_min_ = kmin;
  return kmin;
}

std::vector<std::vector<GreenSample>> ResolventSampler::sample(const std::vector<PointPair>& pairs,
                                                               const std::vector<double>& k_grid, Convention c) const {
  const int n = problem_->n;
  for (const auto& z : pairs) {
    if (!(z.r > 0) || !(z.r_p > 0)) throw DomainError("sample: radii must be positive");
    if (std::abs(z.r - z.r_p) < 1e-3 * std::max(z.r, z.r_p))
      throw DomainError("sample: equal radii are not resolved by the mode sum");
  }
  const double kb = bound_state_scale();
  for (double k : k_grid)
    if (!(k > 0) || k >= opt_.k_fraction * kb) {
      std::ostringstream os;
      os << "sample: k=" << k << " outside (0, " << opt_.k_fraction * kb << ") set by the bound-state scale";
      throw PreconditionError(os.str());
    }
  const ConeGeometry& g = problem_->geom;
  const double vol = link_volume(g);
  std::vector<std::vector<GreenSample>> out(k_grid.size(), std::vector<GreenSample>(pairs.size()));
  for (size_t ik = 0; ik < k_grid.size(); ++ik) {
    const double k = k_grid[ik];
    std::vector<Accumulator> acc(pairs.size());
    std::vector<char> active(pairs.size(), 1);
    size_t left = pairs.size();
    int j = 0;
    for (; left > 0; ++j) {
      if (j > opt_.j_cap) throw NumericError("sample: mode sum did not converge within the mode cap");
      const Mode m = problem_->mode(j);
      const EnergySolution e = solver(j).at(k);
      std::map<std::pair<double, double>, double> radial;  // pairs sharing radii share the mode term
      for (size_t a = 0; a < pairs.size(); ++a) {
        if (!active[a]) continue;
        const auto& z = pairs[a];
        auto [it, fresh] = radial.try_emplace({z.r, z.r_p}, 0.0);
        if (fresh)
          it->second = e.green(std::log(z.r), std::log(z.r_p)) * std::pow(z.r * z.r_p, 1 - n / 2.0) *
                       convention_factor(n, c, z.r, z.r_p);
        acc[a].add(it->second * link_projection_kernel(g, j, z.costheta));
      }
      if (m.nu * m.nu <= 1.01 * attractive_) continue;
      // comparison with the free problem of order sqrt(nu^2 - attractive) bounds every later mode
      std::map<std::pair<double, double>, double> tails;
      for (size_t a = 0; a < pairs.size(); ++a) {
        if (!active[a]) continue;
        const auto& z = pairs[a];
        auto [it, fresh] = tails.try_emplace({z.r, z.r_p}, 0.0);
        if (fresh) {
          const double lo = k * std::min(z.r, z.r_p), hi = k * std::max(z.r, z.r_p);
          const double pre = std::pow(z.r * z.r_p, 1 - n / 2.0) * convention_factor(n, c, z.r, z.r_p);
          double tail = 0;
          for (int jj = j + 1; jj < j + 100000; ++jj) {
            const Mode mm = problem_->mode(jj);
            const double nu_eff = std::sqrt(mm.nu * mm.nu - attractive_);
            const double t = mm.multiplicity / vol * pre * std::exp(log_ik_product_bound(nu_eff, lo, hi));
            tail += t;
            if (jj > j + 3 && t < 1e-6 * tail) break;
          }
          it->second = tail;
        }
        const double tail = it->second;
        if (tail <= opt_.rel_tol * std::abs(acc[a].value())) {
          active[a] = 0;
          --left;
          auto& s = out[ik][a];
          s.k = k;
          s.r = z.r;
          s.r_p = z.r_p;
          s.costheta = z.costheta;
          s.value = acc[a].value();
          s.convention = c;
          s.modes_used = j + 1;
          s.tail_bound = tail;
        }
      }
    }
  }
  return out;
}

std::vector<GreenSample> sample_resolvent(const RadialProblem& p, const PointPair& z, const std::vector<double>& k_grid,
                                          Convention c) {
  ResolventSampler s(p);
  auto all = s.sample({z}, k_grid, c);
  std::vector<GreenSample> out;
  for (auto& row : all) out.push_back(row[0]);
  return out;
}

double BasisTerm::operator()(double k) const {
  const double l = std::log(k);
  return std::pow(k, power) * std::pow(l, logpower) * std::pow(l, -invlogpower);
}

std::string BasisTerm::label() const {
  std::ostringstream os;
  os << "k^" << power;
  if (logpower) os << " log^" << logpower;
  if (invlogpower) os << " log^-" << invlogpower;
  return os.str();
}

std::optional<size_t> ExpansionFit::find(const BasisTerm& t, double tol) const {
  for (size_t i = 0; i < basis.size(); ++i)
    if (std::abs(basis[i].power - t.power) <= tol && basis[i].logpower == t.logpower &&
        basis[i].invlogpower == t.invlogpower)
      return i;
  return std::nullopt;
}

double ExpansionFit::coefficient(const BasisTerm& t) const {
  const auto i = find(t);
  return i ? coeff[*i] : 0.0;
}

double ExpansionFit::error(const BasisTerm& t) const {
  const auto i = find(t);
  return i ? stderr_[*i] : 0.0;
}

ExpansionFit fit_expansion(const std::vector<double>& k, const std::vector<double>& values,
                           const std::vector<BasisTerm>& basis) {
  if (k.size() != values.size()) throw DomainError("fit_expansion: size mismatch");
  if (k.size() < 3 * basis.size()) throw PreconditionError("fit_expansion: need at least 3 samples per basis term");
  const auto m = static_cast<Eigen::Index>(k.size()), p = static_cast<Eigen::Index>(basis.size());
  Eigen::MatrixXd a(m, p);
  Eigen::VectorXd b(m), w(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) a(i, j) = basis[j](k[i]);
    b(i) = values[i];
    if (values[i] == 0) throw DomainError("fit_expansion: zero sample cannot carry a relative weight");
    w(i) = 1 / std::abs(values[i]);
  }
  const LsqResult r = weighted_lsq(a, b, w);
  ExpansionFit f;
  f.basis = basis;
  f.coeff.assign(r.coeff.data(), r.coeff.data() + p);
  f.stderr_.assign(r.stderr_.data(), r.stderr_.data() + p);
  f.residual_norm = r.residual_norm;
  f.condition = r.condition;
  f.k_min = *std::min_element(k.begin(), k.end());
  f.k_max = *std::max_element(k.begin(), k.end());
  f.samples = static_cast<int>(m);
  return f;
}

ExpansionFit fit_expansion(const std::vector<GreenSample>& samples, const std::vector<BasisTerm>& basis) {
  std::vector<double> k, v;
  for (const auto& s : samples) k.push_back(s.k), v.push_back(s.value);
  return fit_expansion(k, v, basis);
}

std::vector<BasisTerm> basis_from_index_set(const IndexSet& s, int extra_orders, bool with_logs) {
  std::vector<BasisTerm> out;
  for (const auto& e : s.entries()) out.push_back({e.order, e.logpower, 0});
  double top = s.entries().empty() ? s.truncation() : std::max(s.truncation(), s.entries().back().order);
  if (!std::isfinite(top)) top = 0;
  const double start = std::floor(top + 1e-9) + 1;
  for (int i = 0; i < extra_orders; ++i) {
    out.push_back({start + i, 0, 0});
    if (with_logs) out.push_back({start + i, 1, 0});
  }
  return out;
}

std::vector<BasisTerm> inverse_log_basis(int terms, const std::vector<BasisTerm>& remainder) {
  std::vector<BasisTerm> out;
  for (int j = 1; j <= terms; ++j) out.push_back({-2, 0, j});
  out.insert(out.end(), remainder.begin(), remainder.end());
  return out;
}

namespace {

double golden_min(const std::function<double(double)>& f, double a, double b, double tol) {
  const double g = (std::sqrt(5.0) - 1) / 2;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc < fd) {
      b = d, d = c, fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c, c = d, fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

double free_residual(const std::vector<double>& k, const std::vector<double>& v, const std::vector<double>& orders,
                     const std::vector<BasisTerm>& fixed) {
  std::vector<BasisTerm> basis;
  for (double o : orders) basis.push_back({o, 0, 0});
  basis.insert(basis.end(), fixed.begin(), fixed.end());
  try {
    return fit_expansion(k, v, basis).residual_norm;
  } catch (const IllPosedError&) {
    return INFINITY;
  }
}

}  // namespace

FreeOrderFit fit_free_orders(const std::vector<double>& k, const std::vector<double>& values, int count, double lo,
                             double hi, const std::vector<BasisTerm>& fixed) {
  if (count < 1 || count > 2) throw PreconditionError("fit_free_orders: one or two free orders supported");
  constexpr double gap = 0.05, tol = 1e-6;
  FreeOrderFit out;
  if (count == 1) {
    const double a = golden_min([&](double x) { return free_residual(k, values, {x}, fixed); }, lo, hi, tol);
    out.orders = {a};
  } else {
    auto inner = [&](double a1, double* best) {
      const double a2 = golden_min([&](double x) { return free_residual(k, values, {a1, x}, fixed); }, a1 + gap, hi, tol);
      if (best) *best = a2;
      return free_residual(k, values, {a1, a2}, fixed);
    };
    const double a1 = golden_min([&](double x) { return inner(x, nullptr); }, lo, hi - gap, tol);
    double a2 = 0;
    inner(a1, &a2);
    out.orders = {a1, a2};
  }
  std::vector<BasisTerm> basis;
  for (double o : out.orders) basis.push_back({o, 0, 0});
  basis.insert(basis.end(), fixed.begin(), fixed.end());
  out.fit = fit_expansion(k, values, basis);
  return out;
}

CoefficientCheck make_check(std::string name, double predicted, double fitted, double tol, std::string note) {
  CoefficientCheck c;
  c.name = std::move(name);
  c.predicted = predicted;
  c.fitted = fitted;
  c.tolerance = tol;
  c.rel_err = predicted != 0 ? std::abs(fitted / predicted - 1) : std::abs(fitted);
  c.pass = std::isfinite(c.rel_err) && c.rel_err <= tol;
  c.note = std::move(note);
  return c;
}

double kernel_product(const RadialProblem& p, const ZeroModeReport& rep, const PointPair& z, bool resonant,
                      Convention c) {
  double s = 0;
  for (const auto& m : rep.normalized_modes)
    if (m.l2 != resonant) s += mode_product(p, m, z);
  return s * convention_factor(p.n, c, z.r, z.r_p);
}

CoefficientCheck check_leading_projector(const RadialProblem& p, const ZeroModeReport& rep, const PointPair& z,
                                         const ExpansionFit& fit, Convention c, double tol) {
  if (rep.kernel_dimension == 0) throw PreconditionError("check_leading_projector: no L2 kernel");
  return make_check("Rzf^-2", kernel_product(p, rep, z, false, c), fit.coefficient({-2, 0, 0}), tol,
                    std::string("convention ") + convention_name(c));
}

CoefficientCheck check_vanishing(const std::string& name, const ExpansionFit& fit, const BasisTerm& t, double scale,
                                 double rel_floor) {
  const auto i = fit.find(t);
  if (!i) throw PreconditionError("check_vanishing: term not in the fitted basis");
  CoefficientCheck c;
  c.name = name;
  c.fitted = fit.coeff[*i];
  c.tolerance = std::max(5 * fit.stderr_[*i], rel_floor * std::abs(scale));
  c.rel_err = scale != 0 ? std::abs(c.fitted / scale) : std::abs(c.fitted);
  c.pass = std::abs(c.fitted) <= c.tolerance;
  c.note = "zero within max(5 sigma, floor)";
  return c;
}

CoefficientCheck check_n5_m0_term(const RadialProblem& p, const ZeroModeReport& rep, const PointPair& z,
                                  const ExpansionFit& fit, double tol) {
  if (p.n != 5) throw PreconditionError("check_n5_m0_term: n = 5 required");
  const NormalizedMode* m0 = nullptr;
  for (const auto& m : rep.normalized_modes)
    if (m.l2 && m.j == 0) m0 = &m;
  if (!m0) throw PreconditionError("check_n5_m0_term: no l = 0 zero mode");
  // c_0^2 Vol(S^4) equals the squared per-mode leading coefficient
  const double pred = m0->leading * m0->leading * mode_product(p, *m0, z);
  std::ostringstream os;
  os << "c0^2 Vol = " << m0->leading * m0->leading;
  return make_check("Rzf^-1 (n=5, m=0)", pred, fit.coefficient({-1, 0, 0}), tol, os.str());
}

CoefficientCheck check_n5_theta(const RadialProblem& p, const ZeroModeReport& rep, double tol) {
  if (p.n != 5) throw PreconditionError("check_n5_theta: n = 5 required");
  const NormalizedMode* m0 = nullptr;
  for (const auto& m : rep.normalized_modes)
    if (m.l2 && m.j == 0) m0 = &m;
  if (!m0) throw PreconditionError("check_n5_theta: no l = 0 zero mode");
  ModeSolver s(p, p.mode(0));
  const double nu = s.nu();
  const RadialProfile& phi = m0->profile;
  std::vector<double> f(phi.size());
  for (int i = 0; i < phi.size(); ++i) f[i] = std::exp(2 * phi.t(i)) * phi.phi[i];
  BehaviorWindow w;
  w.at_infinity = nu;
  const SourceSolution sol = solve_source(s, f, w);
  const double t1 = phi.t(phi.size() - 1);
  const TailFit ft = fit_tail(sol.u, {{nu, 0}, {2 - nu, 0}, {-nu, 0}}, t1 - 4, t1);
  const TailFit fc = fit_tail(phi, {{-nu, 0}}, t1 - 4, t1);
  const double vol = sphere_volume(5);
  const double c0 = fc.coeff[0] / std::sqrt(vol), e0 = ft.coeff[0] / std::sqrt(vol);
  return make_check("e0", -1 / (3 * c0 * vol), e0, tol);
}

CoefficientCheck check_resonance_ab(const RadialProblem& p, double tol) {
  if (p.n != 3 && p.n != 4) throw PreconditionError("check_resonance_ab: n = 3 or 4 required");
  ModeSolver s(p, p.mode(0));
  if (!s.is_kernel()) throw PreconditionError("check_resonance_ab: no l = 0 resonance");
  const double nu = s.nu();
  RadialProfile phi = s.profile(s.regular0());
  std::vector<double> f2(phi.size());
  for (int i = 0; i < phi.size(); ++i) f2[i] = phi.phi[i] * phi.phi[i];
  const double nrm = integrate_samples(f2, phi.h) + (f2.front() + f2.back()) / (2 * nu);
  const double sc = 1 / std::sqrt(nrm);
  for (auto& v : phi.phi) v *= sc;
  for (auto& v : phi.dphi) v *= sc;
  const SourceSolution sol = solve_source(s, phi.phi, BehaviorWindow{});
  const double t1 = phi.t(phi.size() - 1);
  const TailFit fu = fit_tail(sol.u, {{nu, 0}, {-nu, 1}, {-nu, 0}}, t1 - 4, t1);
  const TailFit fp = fit_tail(phi, {{-nu, 0}}, t1 - 4, t1);
  const double vol = sphere_volume(p.n);
  const double expect = p.n == 3 ? -1 / (4 * std::numbers::pi) : -1 / (2 * vol);
  return make_check(p.n == 3 ? "ab (n=3)" : "ab (n=4)", expect, fu.coeff[0] * fp.coeff[0] / vol, tol);
}

double complicated_leading(const RadialProblem& p, int sign) {
  ModeSolver s(p, p.mode(0));
  if (s.is_kernel()) throw PreconditionError("complicated_leading: mode 0 must be kernel free");
  const double nu = s.nu(), A = s.growth_coefficient();
  const double vol = sphere_volume(p.n);
  const RadialProfile reg = s.profile(s.regular0());
  std::vector<double> F(reg.size());
  for (int i = 0; i < reg.size(); ++i) F[i] = sign * std::exp(2 * reg.t(i)) * reg.phi[i] / (2 * nu * A * vol);
  const SourceSolution sol = solve_source(s, F, BehaviorWindow{});
  const double t1 = reg.t(reg.size() - 1);
  const TailFit ft = fit_tail(sol.u, {{nu + 2, 0}, {nu, 0}, {2 - nu, 0}, {-nu, 0}}, t1 - 4, t1);
  return ft.coeff[0];
}

CoefficientCheck check_complicated_leading(const RadialProblem& p, double tol) {
  const int n = p.n;
  const double expect = 1 / (2.0 * n * (n - 2) * sphere_volume(n));
  std::ostringstream os;
  os << "literal sign gives " << complicated_leading(p, 1);
  return make_check("complicated leading", expect, complicated_leading(p, -1), tol, os.str());
}

CoefficientCheck check_n3_minus1(const RadialProblem& p, const ZeroModeReport& rep, const PointPair& z,
                                 const ExpansionFit& fit, double tol) {
  if (p.n != 3) throw PreconditionError("check_n3_minus1: n = 3 required");
  double pred = kernel_product(p, rep, z, true);
  double d_part = 0;
  for (const auto& m : rep.normalized_modes)
    if (m.l2 && m.j == 1) d_part += m.leading * m.leading * mode_product(p, m, z);
  pred -= d_part;
  std::ostringstream os;
  os << "resonant part " << pred + d_part << ", -d11 part " << -d_part;
  return make_check("Rzf^-1 (n=3)", pred, fit.coefficient({-1, 0, 0}), tol, os.str());
}

N4Omega n4_omega(const ZeroModeReport& rep) {
  const NormalizedMode* m = first_mode(rep, false);
  if (!m || std::abs(m->nu - 1) > 1e-9) throw PreconditionError("n4_omega: needs an n = 4 resonance");
  const FinitePart fp = finite_part_norm(m->profile, m->nu);
  N4Omega o;
  o.finite_part = fp.value;
  o.omega = -(2 * std::log(2.0) - 1 - std::numbers::egamma) / 4 - fp.value;
  o.derived_ratio = std::log(2.0) - std::numbers::egamma + fp.value;
  return o;
}

std::vector<CoefficientCheck> check_n4_resonance_series(const RadialProblem& p, const ZeroModeReport& rep,
                                                        const PointPair& z, const ExpansionFit& fit) {
  if (p.n != 4 || !rep.resonance) throw PreconditionError("check_n4_resonance_series: n = 4 resonance required");
  if (!fit.trusted()) throw IllPosedError("check_n4_resonance_series: inverse-log fit is ill-conditioned");
  const double pp = kernel_product(p, rep, z, true);
  const double c1 = fit.coefficient({-2, 0, 1}), c2 = fit.coefficient({-2, 0, 2});
  const N4Omega o = n4_omega(rep);
  std::vector<CoefficientCheck> out;
  out.push_back(make_check("R_{0,1}", -pp, c1, 3e-2));
  std::ostringstream os;
  os << "omega = " << o.omega << ", fp = " << o.finite_part;
  out.push_back(make_check("R_{0,2}/R_{0,1} vs -omega", -o.omega, c2 / c1, 5e-2, os.str()));
  out.push_back(make_check("R_{0,2}/R_{0,1} vs log2 - gamma + fp", o.derived_ratio, c2 / c1, 5e-2,
                           "K_0 tail of the Wronskian integral"));
  return out;
}

FractionalCheck check_fractional_orders(const RadialProblem& p, const ZeroModeReport& rep, const PointPair& z,
                                        const std::vector<GreenSample>& samples) {
  if (p.geom.link != LinkKind::scaled_sphere) throw PreconditionError("check_fractional_orders: conic link required");
  if (!p.engineered) throw PreconditionError("check_fractional_orders: planted mode required");
  const double nu = p.engineered->nu;
  std::vector<double> k, v;
  for (const auto& s : samples) k.push_back(s.k), v.push_back(s.value);
  FractionalCheck out;
  if (nu > 0.5 && nu < 1) {
    out.fit = fit_free_orders(k, v, 2, -2.5, -0.05, {{0, 0, 0}});
    out.checks.push_back(make_check("singular order", -2 * nu, out.fit.orders[0], 0.05 / (2 * nu)));
    // psi normalized by its leading coefficient 2^{nu-1/2} sqrt(Gamma(nu)/Gamma(1-nu)) per unit harmonic
    const double lead = std::pow(2.0, nu - 0.5) * std::sqrt(std::tgamma(nu) / std::tgamma(1 - nu));
    const double pred = lead * lead * kernel_product(p, rep, z, true);
    const auto fixed = fit_expansion(k, v, {{-2 * nu, 0, 0}, {2 - 4 * nu, 0, 0}, {0, 0, 0}});
    out.checks.push_back(make_check("G_zf^{-2nu}", pred, fixed.coeff[0], 2e-2));
  } else if (nu > 1 && nu < 1.5) {
    out.fit = fit_free_orders(k, v, 2, -2.5, -0.05, {{0, 0, 0}});
    out.checks.push_back(make_check("leading order", -2, out.fit.orders[0], 0.05 / 2));
    out.checks.push_back(make_check("subleading order", 2 * nu - 4, out.fit.orders[1], 0.05 / (4 - 2 * nu)));
  } else {
    throw PreconditionError("check_fractional_orders: planted order outside (1/2,1) and (1,3/2)");
  }
  return out;
}

Rb0Check check_rb0_profile(const ResolventSampler& s, const ZeroModeReport& rep, double r, double costheta,
                           const std::vector<double>& k_grid, const std::vector<double>& kappa_grid, double tol) {
  const RadialProblem& p = s.problem();
  const int n = p.n;
  Rb0Check out;
  if (rep.kernel_dimension > 0) {
    out.nu = n / 2.0 - 1 + rep.m_prime;
    out.order = n / 2.0 - 4 + rep.m_prime;
  } else {
    out.nu = n / 2.0 - 1;
    out.order = n / 2.0 - 2;
  }
  // R_b(k; z, r') = k^order Phi(kappa'), kappa' = k r'
  const size_t mid = kappa_grid.size() / 2;
  Eigen::MatrixXd a(k_grid.size(), 2);
  Eigen::VectorXd b(k_grid.size()), w = Eigen::VectorXd::Ones(k_grid.size());
  for (size_t i = 0; i < k_grid.size(); ++i) {
    const double k = k_grid[i];
    std::vector<PointPair> pairs;
    for (double kp : kappa_grid) pairs.push_back({r, kp / k, costheta});
    const auto samples = s.sample(pairs, {k}, Convention::b_half_density)[0];
    for (size_t j = 0; j < kappa_grid.size(); ++j) {
      const double kp = kappa_grid[j];
      out.k.push_back(k);
      out.kappa.push_back(kp);
      out.collapsed.push_back(samples[j].value / std::pow(k, out.order) / (kp * bessel_k(out.nu, kp)));
    }
    // x'-order at fixed kappa': slope of log|R_b| against log x' = log(k / kappa')
    a(i, 0) = 1;
    a(i, 1) = std::log(k / kappa_grid[mid]);
    b(i) = std::log(std::abs(samples[mid].value));
  }
  double num = 0;
  for (double c : out.collapsed) num += c;
  out.scale = num / out.collapsed.size();
  for (double c : out.collapsed) out.max_deviation = std::max(out.max_deviation, std::abs(c / out.scale - 1));
  const LsqResult lr = weighted_lsq(a, b, w);
  out.fitted_order = lr.coeff(1);
  out.order_stderr = lr.stderr_(1);
  std::ostringstream os;
  os << "profile kappa' K_" << out.nu << "(kappa')";
  CoefficientCheck collapse;
  collapse.name = "rb0 profile collapse";
  collapse.fitted = out.max_deviation;
  collapse.rel_err = out.max_deviation;
  collapse.tolerance = tol;
  collapse.pass = out.max_deviation < tol;
  collapse.note = os.str();
  out.checks.push_back(collapse);
  CoefficientCheck order;
  order.name = "rb0 x'-order";
  order.predicted = out.order;
  order.fitted = out.fitted_order;
  order.rel_err = std::abs(out.fitted_order - out.order);
  order.tolerance = 0.05;
  order.pass = order.rel_err <= 0.05;
  order.note = "absolute error";
  out.checks.push_back(order);
  return out;
}

JensenKato jensen_kato(const RadialProblem& p, const ZeroModeReport& rep, const PointPair& z) {
  if (p.n != 3 || p.geom.link != LinkKind::round_sphere) throw PreconditionError("jensen_kato: flat R^3 required");
  JensenKato out;
  // |w-w'|^2 = |w|^2 + |w'|^2 - 2 w.w'; the first two pair with int V psi (zero unless l = 0),
  // the last with the first moments, which only l = 1 harmonics carry
  for (const auto& m : rep.normalized_modes) {
    if (!m.l2) continue;
    const RadialProfile& f = m.profile;
    std::vector<double> g0(f.size()), g1(f.size());
    for (int i = 0; i < f.size(); ++i) {
      const double t = f.t(i);
      // V psi_r r^2 dr and V psi_r r^3 dr in t, with psi_r = e^{-t/2} phi
      const double v = p.potential.r2v(t) * f.phi[i];
      g0[i] = v * std::exp(0.5 * t);
      g1[i] = v * std::exp(1.5 * t);
    }
    const double m0 = integrate_samples(g0, f.h);
    out.zeroth_moment.push_back(m.j == 0 ? m0 * std::sqrt(4 * kPi) : 0.0);
    if (m.j == 1) {
      const double i1 = integrate_samples(g1, f.h);
      // first moment of V psi_i along w_k is delta_ik sqrt(4 pi / 3) i1
      out.value += -(4 * kPi / 3) * i1 * i1 / (12 * kPi) * mode_product(p, m, z);
    }
  }
  return out;
}

CoefficientCheck check_jensen_kato(const RadialProblem& p, const ZeroModeReport& rep, const PointPair& z,
                                   const ExpansionFit& fit, double tol) {
  const JensenKato jk = jensen_kato(p, rep, z);
  const double res = rep.resonance ? kernel_product(p, rep, z, true) : 0.0;
  std::ostringstream os;
  os << "quadrature " << jk.value << ", resonant part " << res;
  return make_check("Pi0 V G2 V Pi0", jk.value + res, fit.coefficient({-1, 0, 0}), tol, os.str());
}

AuditReport audit_against_index_family(const ExpansionFit& fit, const IndexFamily& fam, Face face, double order_tol) {
  AuditReport rep;
  rep.face = face;
  const auto it = fam.find(face);
  const IndexSet empty;
  const IndexSet& s = it == fam.end() ? empty : it->second;
  for (size_t i = 0; i < fit.basis.size(); ++i) {
    if (!(std::abs(fit.coeff[i]) > 5 * fit.stderr_[i])) continue;
    const BasisTerm& t = fit.basis[i];
    // index sets carry nonnegative log powers only; inverse logs are never admitted
    const bool ok = t.invlogpower == 0 && s.admits(t.power, t.logpower, order_tol);
    if (!ok) rep.violations.push_back({t, fit.coeff[i], fit.stderr_[i]});
  }
  rep.pass = rep.violations.empty();
  return rep;
}

}  // namespace rlab
