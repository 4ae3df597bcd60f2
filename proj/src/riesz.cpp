#include "rlab/riesz.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/gegenbauer.hpp>

#include "rlab/errors.hpp"
#include "rlab/index_algebra.hpp"

namespace rlab {

ThresholdPrediction threshold_range(int n, double m_prime) {
  if (n < 3) throw PreconditionError("threshold range needs n >= 3");
  if (!(m_prime >= 0 && m_prime <= 2)) throw PreconditionError("m' must lie in [0, 2]");
  if (!m_prime_condition(n, m_prime)) throw PreconditionError("m' violates the m' condition for this n");
  return {n, m_prime, n / (n - 2 + m_prime), n / (3 - m_prime)};
}

namespace {

void require_round(const RadialProblem& p) {
  if (p.geom.link != LinkKind::round_sphere) throw PreconditionError("Riesz transforms need a round link");
}

// Gauss-Legendre nodes and weights on [-1, 1]
template <int N>
void gauss_rule(std::vector<double>& x, std::vector<double>& w) {
  using G = boost::math::quadrature::gauss<double, N>;
  const auto& a = G::abscissa();
  const auto& b = G::weights();
  x.clear(), w.clear();
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0) {
      x.push_back(0), w.push_back(b[i]);
      continue;
    }
    x.push_back(a[i]), w.push_back(b[i]);
    x.push_back(-a[i]), w.push_back(b[i]);
  }
}

void gauss_nodes(int n, std::vector<double>& x, std::vector<double>& w) {
  switch (n) {
    case 4: gauss_rule<4>(x, w); break;
    case 8: gauss_rule<8>(x, w); break;
    case 12: gauss_rule<12>(x, w); break;
    case 16: gauss_rule<16>(x, w); break;
    default: throw DomainError("unsupported Gauss order (use 4, 8, 12 or 16)");
  }
}

}  // namespace

RieszField riesz_apply(const RadialProblem& p, const ModeFunction& f, int out_lo, int out_hi, const RieszOptions& opt) {
  require_round(p);
  const ModeSolver ms(p, p.mode(f.j));
  const double h = ms.h(), nu = ms.nu(), n = p.n;
  RieszField out;
  out.j = f.j;
  out.lo = out_lo;
  out.u.assign(out_hi - out_lo + 1, 0.0);
  out.du.assign(out_hi - out_lo + 1, 0.0);

  if (ms.is_kernel() && nu >= 0.5 - 1e-12 && nu <= 1.5 + 1e-12) {
    out.divergent = true;
    std::ostringstream os;
    os << "mode " << f.j << " carries a zero mode with nu = " << nu
       << "; R(k) on the positive subspace is not integrable at k = 0";
    out.note = os.str();
    return out;
  }

  // trimmed reduced source F = e^{(1+n/2)t} g
  int a = 0, b = static_cast<int>(f.value.size()) - 1;
  while (a <= b && f.value[a] == 0) ++a;
  while (b >= a && f.value[b] == 0) --b;
  if (a > b) return out;
  // one zero sample on each side inside the grid, so every nonzero sample carries a full trapezoid weight
  const int f_lo = std::max(f.lo + a - 1, ms.i_min()), f_hi = std::min(f.lo + b + 1, ms.i_max());
  std::vector<double> F(f_hi - f_lo + 1, 0.0);
  for (int i = std::max(f_lo, f.lo + a); i <= std::min(f_hi, f.lo + b); ++i)
    F[i - f_lo] = std::exp((1 + n / 2) * ms.t(i)) * f.value[i - f.lo];

  // projections onto the L2 kernel and the bound states of this mode, in reduced form
  struct Piece {
    RadialProfile phi;
    double coeff, kappa;
  };
  std::vector<Piece> pieces;
  double fnorm = 0;
  {
    std::vector<double> sq(F.size());
    for (size_t i = 0; i < F.size(); ++i) sq[i] = F[i] * F[i] * std::exp(-2 * ms.t(f_lo + i));
    fnorm = std::sqrt(integrate_samples(sq, h));
  }
  auto coefficient = [&](const RadialProfile& pr) {
    std::vector<double> v(F.size());
    // trapezoid, matching the quadrature inside apply_resolvent
    double c = 0;
    for (size_t i = 0; i < F.size(); ++i) c += (i == 0 || i + 1 == F.size() ? 0.5 : 1.0) * F[i] * pr.at(ms.t(f_lo + i));
    return c * h;
  };
  if (ms.is_kernel() && nu > 1) {
    RadialProfile pr = ms.profile(ms.regular0());
    std::vector<double> sq(pr.size());
    for (int i = 0; i < pr.size(); ++i) sq[i] = std::exp(2 * pr.t(i)) * pr.phi[i] * pr.phi[i];
    const double s = 1 / std::sqrt(integrate_samples(sq, h));
    for (auto& v : pr.phi) v *= s;
    for (auto& v : pr.dphi) v *= s;
    pieces.push_back({pr, coefficient(pr), 0.0});
    out.kernel_component = pieces.back().coeff;
  }
  for (double kb : ms.bound_state_kappas()) {
    RadialProfile pr = ms.bound_state(kb);
    pieces.push_back({pr, coefficient(pr), kb});
    out.bound_components.push_back(pieces.back().coeff);
  }
  {
    // residual after projection
    std::vector<double> sq(F.size());
    for (size_t i = 0; i < F.size(); ++i) {
      const double tt = ms.t(f_lo + i);
      double v = F[i] * std::exp(-tt);
      for (const auto& pc : pieces) v -= pc.coeff * pc.phi.at(tt) * std::exp(tt);
      sq[i] = v * v;
    }
    const double rest = std::sqrt(integrate_samples(sq, h));
    double outside = 0;
    for (const auto& pc : pieces) outside += pc.coeff * pc.coeff;
    if (rest <= 1e-12 * fnorm && std::sqrt(std::max(0.0, fnorm * fnorm - outside)) <= 1e-6 * fnorm) {
      out.in_kernel = true;
      out.note = "source lies in the kernel and negative spectrum; Tf = 0";
      return out;
    }
  }

  // wide sources: smooth partition of unity in log r, each piece with its own k range
  const double t_a = ms.t(f.lo + a), t_b = ms.t(f.lo + b);  // nonzero support
  const double pw = opt.piece_width;
  if (pw > 0 && t_b - t_a > 2 * pw + 1e-9) {
    const int pieces_n = static_cast<int>(std::ceil((t_b - t_a) / pw));
    out.k_lo = 1e300;
    for (int c = 0; c <= pieces_n; ++c) {
      const double tc = t_a + c * pw;
      ModeFunction piece{f.j, f.lo, std::vector<double>(f.value.size(), 0.0)};
      for (size_t i = 0; i < f.value.size(); ++i) {
        const double x = (ms.t(f.lo + static_cast<int>(i)) - tc) / pw;
        if (std::abs(x) < 1) piece.value[i] = f.value[i] * std::pow(std::cos(std::numbers::pi * x / 2), 2);
      }
      const RieszField part = riesz_apply(p, piece, out_lo, out_hi, opt);
      for (int i = 0; i <= out_hi - out_lo; ++i) out.u[i] += part.u[i], out.du[i] += part.du[i];
      out.k_nodes += part.k_nodes;
      out.k_lo = std::min(out.k_lo, part.k_lo);
      out.k_hi = std::max(out.k_hi, part.k_hi);
    }
    return out;
  }

  const double r_far = std::max(std::exp(ms.t(out_hi)), std::exp(t_b));
  const double rb = std::exp(t_b);
  double k_lo = opt.k_lo > 0 ? opt.k_lo : 3e-3 / r_far;
  double k_hi = opt.k_hi > 0 ? opt.k_hi : opt.resolution / (h * rb);
  if (!(k_hi > k_lo)) throw DomainError("empty k range");
  out.k_lo = k_lo, out.k_hi = k_hi;

  const int m = out_hi - out_lo + 1;
  std::vector<double> acc(m, 0.0), dacc(m, 0.0);
  auto integrand = [&](double k, double weight) {
    const GridSolution g = ms.apply_resolvent(k, f_lo, F, out_lo, out_hi, opt.reach);
    for (int i = 0; i < m; ++i) {
      const double tt = ms.t(out_lo + i);
      double v = g.phi[i], dv = g.dphi[i];
      for (const auto& pc : pieces) {
        const double c = pc.coeff / (k * k - pc.kappa * pc.kappa);
        const double ti = (tt - pc.phi.t0) / pc.phi.h;
        const int ii = static_cast<int>(std::lround(ti));
        if (ii < 0 || ii >= pc.phi.size()) continue;
        v -= c * pc.phi.phi[ii];
        dv -= c * pc.phi.dphi[ii];
      }
      acc[i] += weight * v;
      dacc[i] += weight * dv;
    }
    ++out.k_nodes;
  };

  // [0, k_lo] by the midpoint rule, then log-k Gauss panels on [k_lo, k0] and [k0, k_hi]
  integrand(k_lo / 2, k_lo);
  std::vector<double> gx, gw;
  gauss_nodes(opt.nodes, gx, gw);
  const double k0 = std::clamp(opt.k_split > 0 ? opt.k_split : std::sqrt(k_lo * k_hi), k_lo, k_hi);
  for (auto [ka, kb] : {std::pair{k_lo, k0}, std::pair{k0, k_hi}}) {
    if (!(kb > ka)) continue;
    const double s0 = std::log(ka), s1 = std::log(kb);
    const int panels = std::max(1, static_cast<int>(std::ceil((s1 - s0) / std::log(10.0) * opt.panels_per_decade)));
    const double ds = (s1 - s0) / panels;
    for (int pn = 0; pn < panels; ++pn) {
      const double mid = s0 + (pn + 0.5) * ds;
      for (size_t q = 0; q < gx.size(); ++q) {
        const double k = std::exp(mid + 0.5 * ds * gx[q]);
        integrand(k, 0.5 * ds * gw[q] * k);
      }
    }
  }
  // [k_hi, inf): phi ~ a/k^2 - e^{-2t} L a / k^4 with a = F e^{-2t}, minus the subtracted pieces
  {
    const int lo = std::max(out_lo, f_lo - 2), hi = std::min(out_hi, f_hi + 2);
    if (lo <= hi) {
      auto A = [&](int i) {
        if (i < f_lo || i > f_hi) return 0.0;
        return F[i - f_lo] * std::exp(-2 * ms.t(i));
      };
      std::vector<double> tail(hi - lo + 1);
      for (int i = lo; i <= hi; ++i) {
        const double tt = ms.t(i);
        const double a0 = A(i), d2 = (A(i + 1) - 2 * a0 + A(i - 1)) / (h * h);
        const double La = -d2 + ms.q(tt, 0) * a0;
        tail[i - lo] = a0 / k_hi - std::exp(-2 * tt) * La / (3 * k_hi * k_hi * k_hi);
      }
      for (int i = lo; i <= hi; ++i) {
        const double d = (i > lo && i < hi) ? (tail[i + 1 - lo] - tail[i - 1 - lo]) / (2 * h) : 0.0;
        acc[i - out_lo] += tail[i - lo];
        dacc[i - out_lo] += d;
      }
    }
    for (const auto& pc : pieces)
      for (int i = 0; i < m; ++i) {
        const double tt = ms.t(out_lo + i);
        const double ti = (tt - pc.phi.t0) / pc.phi.h;
        const int ii = static_cast<int>(std::lround(ti));
        if (ii < 0 || ii >= pc.phi.size()) continue;
        // int_{K}^inf dk / (k^2 - kappa^2)
        const double w = pc.kappa > 0 ? std::log((k_hi + pc.kappa) / (k_hi - pc.kappa)) / (2 * pc.kappa) : 1 / k_hi;
        acc[i] -= pc.coeff * w * pc.phi.phi[ii];
        dacc[i] -= pc.coeff * w * pc.phi.dphi[ii];
      }
  }

  const double c = 2 / std::numbers::pi;
  for (int i = 0; i < m; ++i) {
    const double tt = ms.t(out_lo + i);
    const double phi = c * acc[i], dphi = c * dacc[i];
    out.u[i] = std::exp((1 - n / 2) * tt) * phi;
    out.du[i] = std::exp(-n * tt / 2) * ((1 - n / 2) * phi + dphi);
  }
  return out;
}

double mode_lp_norm(const RadialProblem& p, int j, int lo, const std::vector<double>& g, const std::vector<double>& dg,
                    double pp, double r_a, double r_b) {
  require_round(p);
  if (!(pp >= 1)) throw DomainError("L^p norm needs p >= 1");
  const int n = p.n;
  const double h = 1.0 / p.steps_per_unit;
  const double lam = (n - 2) / 2.0;
  std::vector<double> gx, gw;
  gauss_nodes(16, gx, gw);
  // angular nodes in theta, 8 panels of 16
  std::vector<double> cz, wz, z2, dz2;
  const int panels = 8;
  for (int pn = 0; pn < panels; ++pn)
    for (size_t q = 0; q < gx.size(); ++q) {
      const double th = std::numbers::pi * (pn + 0.5 + 0.5 * gx[q]) / panels;
      const double c = std::cos(th), s = std::sin(th);
      const double Z = boost::math::gegenbauer(static_cast<unsigned>(j), lam, c);
      const double dZ = j == 0 ? 0.0 : boost::math::gegenbauer_derivative(static_cast<unsigned>(j), lam, c, 1);
      cz.push_back(c);
      wz.push_back(std::numbers::pi / panels * 0.5 * gw[q] * std::pow(s, n - 2));
      z2.push_back(Z * Z);
      dz2.push_back(s * s * dZ * dZ);
    }
  const double vol = sphere_volume(n - 1);
  const int ia = static_cast<int>(std::ceil(std::log(r_a) / h - 1e-9));
  const int ib = static_cast<int>(std::floor(std::log(r_b) / h + 1e-9));
  const int first = std::max(ia, lo), last = std::min(ib, lo + static_cast<int>(g.size()) - 1);
  if (last - first < 4) throw DomainError("too few radial samples for the L^p norm");
  std::vector<double> f(last - first + 1);
  for (int i = first; i <= last; ++i) {
    const double t = i * h, r = std::exp(t);
    const double a = dg.empty() ? g[i - lo] : dg[i - lo];
    const double b = dg.empty() ? 0.0 : g[i - lo] / r;
    double s = 0;
    for (size_t q = 0; q < cz.size(); ++q) s += wz[q] * std::pow(a * a * z2[q] + b * b * dz2[q], pp / 2);
    f[i - first] = vol * s * std::exp(n * t);
  }
  return std::pow(integrate_samples(f, h), 1 / pp);
}

ModeFunction log_bump(const RadialProblem& p, int j, double R, double width) {
  const double h = 1.0 / p.steps_per_unit, tc = std::log(R);
  ModeFunction f;
  f.j = j;
  f.lo = static_cast<int>(std::floor((tc - width) / h));
  const int hi = static_cast<int>(std::ceil((tc + width) / h));
  for (int i = f.lo; i <= hi; ++i) {
    const double x = (i * h - tc) / width;
    f.value.push_back(std::abs(x) < 1 ? std::exp(-1 / (1 - x * x)) : 0.0);
  }
  return f;
}

const char* family_name(ProbeFamily f) {
  switch (f) {
    case ProbeFamily::boundary_bump: return "boundary_bump";
    case ProbeFamily::mode_bump: return "mode_bump";
    case ProbeFamily::rayleigh: return "rayleigh";
  }
  return "?";
}

SlopeFit loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const size_t n = x.size();
  if (n < 3 || y.size() != n) throw DomainError("slope fit needs at least three points");
  double mx = 0, my = 0;
  for (size_t i = 0; i < n; ++i) mx += std::log(x[i]), my += std::log(y[i]);
  mx /= n, my /= n;
  double sxx = 0, sxy = 0;
  for (size_t i = 0; i < n; ++i) {
    const double dx = std::log(x[i]) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(y[i]) - my);
  }
  SlopeFit s;
  s.slope = sxy / sxx;
  s.intercept = my - s.slope * mx;
  double rss = 0;
  for (size_t i = 0; i < n; ++i) {
    const double e = std::log(y[i]) - s.intercept - s.slope * std::log(x[i]);
    rss += e * e;
  }
  s.stderr_ = std::sqrt(rss / (n - 2) / sxx);
  return s;
}

std::vector<RieszProbe> lp_threshold_sweep(const RadialProblem& p, const ThresholdPrediction& pred,
                                           const std::vector<double>& p_list, const std::vector<double>& R_grid,
                                           const RieszOptions& opt) {
  require_round(p);
  if (R_grid.size() < 3 || R_grid.back() / R_grid.front() < 10 - 1e-9)
    throw PreconditionError("R grid must span at least one decade");
  const ZeroModeReport rep = detect_kernel(p, 4);
  int j = -1;
  for (const auto& nm : rep.normalized_modes)
    if (nm.l2) {
      j = nm.j;
      break;
    }
  if (j < 0) throw PreconditionError("threshold sweep needs an L2 zero mode");
  const double h = 1.0 / p.steps_per_unit;
  const int n = p.n;
  auto idx = [&](double r) { return static_cast<int>(std::lround(std::log(r) / h)); };
  const double shell_a = std::exp(-0.5), shell_b = std::exp(0.5);

  std::vector<RieszProbe> out;
  for (ProbeFamily fam : {ProbeFamily::boundary_bump, ProbeFamily::mode_bump}) {
    std::vector<std::vector<double>> ratios(p_list.size());
    for (double R : R_grid) {
      ModeFunction f;
      RieszField tf;
      double ra, rbb;
      if (fam == ProbeFamily::boundary_bump) {
        f = log_bump(p, j, R);
        ra = shell_a, rbb = shell_b;
      } else {
        f = log_bump(p, j, 1.0);
        ra = R, rbb = 2 * R;
      }
      tf = riesz_apply(p, f, idx(ra) - 2, idx(rbb) + 2, opt);
      if (tf.divergent) throw PreconditionError(tf.note);
      for (size_t q = 0; q < p_list.size(); ++q) {
        const double num = mode_lp_norm(p, j, tf.lo, tf.u, tf.du, p_list[q], ra, rbb);
        const double den = mode_lp_norm(p, j, f.lo, f.value, {}, p_list[q], 1e-300, 1e300);
        ratios[q].push_back(num / den);
      }
    }
    for (size_t q = 0; q < p_list.size(); ++q) {
      RieszProbe pr;
      pr.family = fam;
      pr.j = j;
      pr.p = p_list[q];
      pr.R_grid = R_grid;
      pr.norm_ratios = ratios[q];
      const SlopeFit s = loglog_slope(R_grid, ratios[q]);
      pr.fitted_slope = s.slope, pr.slope_stderr = s.stderr_;
      pr.predicted_slope = fam == ProbeFamily::boundary_bump ? 3 - pred.m_prime - n / pr.p
                                                             : n / pr.p - (n - 2 + pred.m_prime);
      pr.inconclusive = std::abs(s.slope) <= 2 * s.stderr_;
      pr.consistent = !pr.inconclusive && (s.slope > 0) == (pr.predicted_slope > 0);
      out.push_back(pr);
    }
  }
  return out;
}

RayleighResult rayleigh_unboundedness(const RadialProblem& p, const std::vector<double>& R_grid, int j_free) {
  require_round(p);
  const int n = p.n;
  const ZeroModeReport rep = detect_kernel(p, 4);
  RayleighResult res;
  const NormalizedMode* psi = nullptr;
  for (const auto& nm : rep.normalized_modes)
    if (nm.l2) {
      psi = &nm;
      break;
    }
  if (psi) {
    const double m = rep.m;
    const bool ok = (n == 3 && m > 0.5 && m < 1.5) || (n == 4 && m > 0 && m < 1) || (n == 5 && std::abs(m) < 1e-6);
    if (!ok) throw PreconditionError("planted decay rate lies outside the Rayleigh regime");
    res.j = psi->j;
    res.has_kernel = true;
  } else {
    if (rep.resonance) throw PreconditionError("resonant problems are outside the Rayleigh regime");
    res.j = j_free;
  }
  const ModeSolver ms(p, p.mode(res.j));
  const double h = ms.h(), lam = ms.mode().lambda;
  const int lo = ms.i_min(), hi = ms.i_max();
  auto chi = [](double s, double& d) {
    auto e = [](double x) { return x > 0 ? std::exp(-1 / x) : 0.0; };
    auto de = [](double x) { return x > 0 ? std::exp(-1 / x) / (x * x) : 0.0; };
    const double a = e(2 - s), b = e(s - 1), da = -de(2 - s), db = de(s - 1);
    d = (da * (a + b) - a * (da + db)) / ((a + b) * (a + b));
    return a / (a + b);
  };
  const int N = hi - lo + 1;
  std::vector<double> ps(N), dps(N), v(N), w(N);
  for (int i = 0; i < N; ++i) {
    const double t = ms.t(lo + i);
    w[i] = std::exp(n * t);
    v[i] = p.potential.r2v(t) * std::exp(-2 * t);
    if (psi) {
      const double ph = psi->profile.at(t);
      const double ti = (t - psi->profile.t0) / h;
      const int ii = std::clamp(static_cast<int>(std::lround(ti)), 0, psi->profile.size() - 1);
      const double dph = psi->profile.dphi[ii];
      ps[i] = std::exp((1 - n / 2.0) * t) * ph;
      dps[i] = std::exp(-n * t / 2.0) * ((1 - n / 2.0) * ph + dph);
    }
  }
  auto quad = [&](const std::vector<double>& f) { return integrate_samples(f, h); };
  std::vector<double> xs, ys;
  for (double R : R_grid) {
    std::vector<double> a(N), da(N);
    for (int i = 0; i < N; ++i) {
      const double r = std::exp(ms.t(lo + i));
      double d;
      a[i] = chi(r / R, d) / R;
      da[i] = d / (R * R);
    }
    RayleighPoint pt;
    pt.R = R;
    std::vector<double> tmp(N);
    if (psi) {
      for (int i = 0; i < N; ++i) tmp[i] = a[i] * ps[i] * w[i];
      pt.projection = quad(tmp);
    }
    auto forms = [&](const std::vector<double>& f, const std::vector<double>& df, double& dir, double& en) {
      std::vector<double> g1(N), g2(N);
      for (int i = 0; i < N; ++i) {
        const double r = std::exp(ms.t(lo + i));
        g1[i] = (df[i] * df[i] + lam * f[i] * f[i] / (r * r)) * w[i];
        g2[i] = v[i] * f[i] * f[i] * w[i];
      }
      dir = quad(g1);
      en = dir + quad(g2);
    };
    double d0;
    forms(a, da, d0, pt.energy_phi);
    std::vector<double> f(N), df(N);
    for (int i = 0; i < N; ++i) f[i] = a[i] - pt.projection * ps[i], df[i] = da[i] - pt.projection * dps[i];
    forms(f, df, pt.dirichlet, pt.energy);
    pt.alpha = pt.dirichlet / pt.energy;
    res.points.push_back(pt);
    xs.push_back(R), ys.push_back(pt.alpha);
  }
  if (xs.size() >= 3) {
    const SlopeFit s = loglog_slope(xs, ys);
    res.slope = s.slope, res.slope_stderr = s.stderr_;
  }
  return res;
}

}  // namespace rlab
