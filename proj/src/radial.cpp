#include "rlab/radial.hpp"

#include <algorithm>
#include <array>
#include <boost/math/interpolators/makima.hpp>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <sstream>

#include "rlab/errors.hpp"
#include "rlab/index_algebra.hpp"
#include "rlab/lsq.hpp"
#include "rlab/specfun.hpp"

namespace rlab {

namespace odeint = boost::numeric::odeint;
using State = std::array<double, 2>;

namespace {

// weights of int_j^{j+1} of the quartic through nodes 0..4
struct LocalWeights {
  double w[4][5];
  LocalWeights() {
    for (int m = 0; m < 5; ++m) {
      // coefficients of L_m(x) = prod_{l != m} (x - l)/(m - l)
      double c[5] = {1, 0, 0, 0, 0};
      int deg = 0;
      double denom = 1;
      for (int l = 0; l < 5; ++l) {
        if (l == m) continue;
        for (int d = deg + 1; d > 0; --d) c[d] = c[d - 1] - l * c[d];
        c[0] = -l * c[0];
        ++deg;
        denom *= (m - l);
      }
      for (int j = 0; j < 4; ++j) {
        double v = 0;
        for (int d = 0; d < 5; ++d) v += c[d] * (std::pow(j + 1.0, d + 1) - std::pow(double(j), d + 1)) / (d + 1);
        w[j][m] = v / denom;
      }
    }
  }
};

const LocalWeights& local_weights() {
  static const LocalWeights lw;
  return lw;
}

// int over [x_i, x_{i+1}] of samples f (uniform spacing h), quartic local rule
double interval_integral(const std::vector<double>& f, size_t i, double h) {
  const size_t n = f.size();
  if (n < 5) throw NumericError("grid too short for quadrature");
  size_t b = i >= 1 ? i - 1 : 0;
  if (b + 4 >= n) b = n - 5;
  const int j = static_cast<int>(i - b);
  const auto& w = local_weights().w[j];
  double s = 0;
  for (int m = 0; m < 5; ++m) s += w[m] * f[b + m];
  return s * h;
}

std::vector<double> cumulative(const std::vector<double>& f, double h, double head) {
  std::vector<double> out(f.size());
  out[0] = head;
  for (size_t i = 0; i + 1 < f.size(); ++i) out[i + 1] = out[i] + interval_integral(f, i, h);
  return out;
}

double integrate_exp(double c, double a, double b) {
  if (std::abs(c) < 1e-12) return b - a;
  return (std::exp(c * b) - std::exp(c * a)) / c;
}

double log_sum_exp_signed(double la, int sa, double lb, int sb, int& sign) {
  if (sa == 0) {
    sign = sb;
    return lb;
  }
  if (sb == 0) {
    sign = sa;
    return la;
  }
  const double m = std::max(la, lb);
  const double v = sa * std::exp(la - m) + sb * std::exp(lb - m);
  sign = v > 0 ? 1 : (v < 0 ? -1 : 0);
  return m + std::log(std::abs(v));
}

double sigmoid_u(double x) { return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); }

}  // namespace

double integrate_samples(const std::vector<double>& f, double h) {
  double s = 0;
  for (size_t i = 0; i + 1 < f.size(); ++i) s += interval_integral(f, i, h);
  return s;
}

std::vector<double> cumulative_samples(const std::vector<double>& f, double h, double head) {
  return cumulative(f, h, head);
}

// ---------------------------------------------------------------- profiles and potentials

double ProductProfile::log_value(double r) const {
  const double t = std::log(r);
  double v = a * t;
  for (const auto& f : factors) {
    const double x = 2 * f.q * (t - std::log(f.R));
    v -= f.b * (x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)));
  }
  return v;
}

double ProductProfile::log_derivative(double r) const {
  const double t = std::log(r);
  double v = a;
  for (const auto& f : factors) v -= 2 * f.q * f.b * sigmoid_u(2 * f.q * (t - std::log(f.R)));
  return v;
}

double ProductProfile::exponent_at_infinity() const {
  double v = a;
  for (const auto& f : factors) v -= 2 * f.q * f.b;
  return v;
}

Potential zero_potential() {
  Potential p;
  p.r2v = [](double) { return 0.0; };
  p.tag = "zero";
  return p;
}

namespace {

void certify_decay(Potential& p, double r0, double l) {
  p.decay_order = l;
  p.r0 = r0;
  double c = 0;
  for (double lr = std::log(r0); lr <= std::log(1e8); lr += 0.05) {
    const double t = lr;
    c = std::max(c, std::abs(p.r2v(t)) * std::exp((l - 2) * t));
  }
  p.C = 1.05 * c;
}

}  // namespace

Potential product_potential(int n, const ProductProfile& f) {
  if (f.factors.empty()) throw PreconditionError("product profile needs at least one factor");
  double ctot = 0, qmin = 1e300, rmax = 0;
  for (const auto& fa : f.factors) {
    if (!(fa.q > 0) || !(fa.b > 0) || !(fa.R > 0)) throw PreconditionError("profile factors need q, b, R > 0");
    ctot += 2 * fa.q * fa.b;
    qmin = std::min(qmin, fa.q);
    rmax = std::max(rmax, fa.R);
  }
  const double excess = ctot - (2 * f.a + n - 2);
  struct F {
    double c, q, lr;
  };
  std::vector<F> fs;
  for (const auto& fa : f.factors) fs.push_back({2 * fa.q * fa.b, fa.q, std::log(fa.R)});
  Potential p;
  p.r2v = [fs, excess](double t) {
    double s = 0, d = 0, qq = 0;
    for (const auto& x : fs) {
      const double arg = 2 * x.q * (t - x.lr);
      const double u = sigmoid_u(arg), w = sigmoid_u(-arg);
      s += x.c * u;
      d += x.c * w;
      qq += 2 * x.q * x.c * u * w;
    }
    return -s * d + excess * s - qq;
  };
  p.tag = "product";
  certify_decay(p, 2 * rmax, std::abs(excess) > 1e-12 ? 2.0 : 2 * qmin + 2);
  return p;
}

Potential tabulated_potential(const std::vector<double>& r, const std::vector<double>& v) {
  if (r.size() != v.size() || r.size() < 8) throw PreconditionError("potential table needs >= 8 (r,V) rows");
  for (size_t i = 1; i < r.size(); ++i)
    if (!(r[i] > r[i - 1]) || !(r[0] > 0)) throw PreconditionError("potential table radii must increase from r > 0");
  // decay from the last decade of the table
  std::vector<double> xs, ys;
  const double rl = r.back();
  for (size_t i = 0; i < r.size(); ++i)
    if (r[i] >= rl / 10 && v[i] != 0) {
      xs.push_back(std::log(r[i]));
      ys.push_back(std::log(std::abs(v[i])));
    }
  if (xs.size() < 3) throw PreconditionError("potential table tail too short to certify decay");
  double mx = 0, my = 0;
  for (size_t i = 0; i < xs.size(); ++i) mx += xs[i], my += ys[i];
  mx /= xs.size(), my /= xs.size();
  double sxy = 0, sxx = 0;
  for (size_t i = 0; i < xs.size(); ++i) sxy += (xs[i] - mx) * (ys[i] - my), sxx += (xs[i] - mx) * (xs[i] - mx);
  const double l = -sxy / sxx;
  if (l < 3) {
    std::ostringstream os;
    os << "potential table decays like r^-" << l << ", need order >= 3";
    throw PreconditionError(os.str());
  }
  std::vector<double> t(r.size()), w(r.size());
  for (size_t i = 0; i < r.size(); ++i) t[i] = std::log(r[i]), w[i] = r[i] * r[i] * v[i];
  const double t0 = t.front(), t1 = t.back(), v0 = v.front(), w1 = w.back();
  auto spline = std::make_shared<boost::math::interpolators::makima<std::vector<double>>>(std::move(t), std::move(w));
  Potential p;
  p.r2v = [spline, t0, t1, v0, w1, l](double tt) {
    if (tt <= t0) return v0 * std::exp(2 * tt);
    if (tt >= t1) return w1 * std::exp((2 - l) * (tt - t1));
    return (*spline)(tt);
  };
  p.tag = "table";
  certify_decay(p, rl, l);
  return p;
}

Potential profile_potential(int n, int ell, std::function<double(double)> f, std::function<double(double)> df,
                            std::function<double(double)> d2f) {
  const double lambda = ell * (ell + n - 2.0);
  Potential p;
  p.r2v = [=](double t) {
    const double r = std::exp(t);
    const double fv = f(r);
    if (!(fv > 0)) throw DomainError("profile must be positive");
    return (r * r * d2f(r) + (n - 1) * r * df(r)) / fv - lambda;
  };
  p.tag = "profile";
  const double va = std::abs(p.r2v(std::log(1e2))), vb = std::abs(p.r2v(std::log(1e4)));
  const double l = 2 - std::log(vb / va) / std::log(1e2);
  if (!(l >= 3)) throw PreconditionError("profile potential decays slower than r^-3");
  certify_decay(p, 10.0, std::floor(l * 100) / 100);
  return p;
}

namespace {

void set_grid_end(RadialProblem& p) {
  const auto& v = p.potential;
  if (v.is_zero() || v.C == 0) return;
  const double rv = std::pow(v.C / 1e-14, 1.0 / (v.decay_order - 2));
  p.r_max = std::clamp(rv, 1e4, 1e8);
}

}  // namespace

RadialProblem free_problem(const ConeGeometry& geom) {
  RadialProblem p;
  p.n = geom.n;
  p.geom = geom;
  return p;
}

RadialProblem potential_from_mode(const ConeGeometry& geom, int j, const ProductProfile& f) {
  const Mode m = mode_of(geom, j);
  const double h = (geom.n - 2) / 2.0;
  if (std::abs(f.a - (m.nu - h)) > 1e-9) {
    std::ostringstream os;
    os << "profile exponent at 0 is " << f.a << ", mode " << j << " needs " << m.nu - h;
    throw PreconditionError(os.str());
  }
  if (std::abs(f.exponent_at_infinity() + (m.nu + h)) > 1e-9) {
    std::ostringstream os;
    os << "profile exponent at infinity is " << f.exponent_at_infinity() << ", mode " << j << " needs "
       << -(m.nu + h);
    throw PreconditionError(os.str());
  }
  RadialProblem p;
  p.n = geom.n;
  p.geom = geom;
  p.potential = product_potential(geom.n, f);
  p.engineered = EngineeredMode{j, m.nu, f};
  set_grid_end(p);
  return p;
}

RadialProblem potential_from_mode(int n, int ell, const ProductProfile& f) {
  return potential_from_mode(ConeGeometry::round(n), ell, f);
}

double RadialOperator::effective_potential(double r) const {
  return (nu * nu - 0.25) / (r * r) + problem->potential(r);
}

RadialOperator reduce(const RadialProblem& p, const Mode& m, double k) {
  if (k < 0) throw DomainError("reduce: k must be >= 0");
  return RadialOperator{&p, m, m.nu, k * k};
}

double RadialProfile::at(double t) const {
  const double x = (t - t0) / h;
  int i = static_cast<int>(std::floor(x));
  if (i < 0 || i >= size() - 1) {
    if (i == size() - 1 && x - i < 1e-9) return phi.back();
    throw DomainError("profile evaluated outside its grid");
  }
  const double s = x - i;
  const double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s);
  const double h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
  return h00 * phi[i] + h10 * h * dphi[i] + h01 * phi[i + 1] + h11 * h * dphi[i + 1];
}

// ---------------------------------------------------------------- mode solver

double ModeSolver::q(double t, double k2) const {
  double v = mode_.nu * mode_.nu + problem_->potential.r2v(t);
  if (k2 > 0) v += k2 * std::exp(2 * t);
  return v;
}

int ModeSolver::nearest(double t) const {
  return std::clamp(static_cast<int>(std::lround(t / h_)), i_min_, i_max_);
}

Sweep ModeSolver::sweep(double k2, int from, int to, double y0, double dy0, double s0) const {
  Sweep sw;
  sw.lo = std::min(from, to);
  sw.hi = std::max(from, to);
  const size_t n = sw.hi - sw.lo + 1;
  sw.y.resize(n), sw.dy.resize(n), sw.s.resize(n);
  auto stepper = odeint::make_controlled(1e-15, 1e-13, odeint::runge_kutta_fehlberg78<State>());
  auto sys = [this, k2](const State& x, State& dx, double t) {
    dx[0] = x[1];
    dx[1] = q(t, k2) * x[0];
  };
  State x{y0, dy0};
  double s = s0;
  const int d = to >= from ? 1 : -1;
  auto store = [&](int i) {
    sw.y[i - sw.lo] = x[0];
    sw.dy[i - sw.lo] = x[1];
    sw.s[i - sw.lo] = s;
  };
  store(from);
  for (int i = from; i != to; i += d) {
    odeint::integrate_adaptive(stepper, sys, x, t(i), t(i + d), d * h_);
    const double m = std::max(std::abs(x[0]), std::abs(x[1]));
    if (!std::isfinite(m)) throw NumericError("radial integration produced a non-finite value");
    if (m > 1e32 || m < 1e-32) {
      x[0] /= m, x[1] /= m;
      s += std::log(m);
    }
    store(i + d);
  }
  return sw;
}

std::pair<double, double> ModeSolver::evaluate(const Sweep& sw, double k2, double tt) const {
  const int i = std::clamp(static_cast<int>(std::lround(tt / h_)), sw.lo, sw.hi);
  State x{sw.y[i - sw.lo], sw.dy[i - sw.lo]};
  const double ti = t(i);
  if (std::abs(tt - ti) > 1e-14) {
    auto stepper = odeint::make_controlled(1e-15, 1e-13, odeint::runge_kutta_fehlberg78<State>());
    auto sys = [this, k2](const State& xx, State& dx, double t) {
      dx[0] = xx[1];
      dx[1] = q(t, k2) * xx[0];
    };
    odeint::integrate_adaptive(stepper, sys, x, ti, tt, tt - ti);
  }
  // returned as log-scaled pair packed into value and derivative relative to e^s
  return {x[0] * std::exp(sw.s[i - sw.lo]), x[1] * std::exp(sw.s[i - sw.lo])};
}

ModeSolver::ModeSolver(const RadialProblem& p, const Mode& m, const GridOptions& opt) : problem_(&p), mode_(m) {
  if (!(m.nu > 0)) throw PreconditionError("mode order must be positive");
  h_ = 1.0 / p.steps_per_unit;
  i_min_ = static_cast<int>(std::floor(std::log(p.r_min) / h_));
  i_max_ = static_cast<int>(std::ceil(std::log(p.r_max) / h_));
  const double nu = m.nu;
  const double tmin = t(i_min_), tmax = t(i_max_);
  const double e2 = std::exp(2 * tmin);
  const double c1 = p.potential.r2v(tmin) / e2 / (4 * (nu + 1));
  reg0_ = sweep(0, i_min_, i_max_, 1 + c1 * e2, nu + (nu + 2) * c1 * e2, nu * tmin);
  dec0_ = sweep(0, i_max_, i_min_, 1, -nu, -nu * tmax);
  const int i0 = nearest(0.0);
  const double yd = dec0_.y[i0 - i_min_], dyd = dec0_.dy[i0 - i_min_];
  const double yr = reg0_.y[i0 - i_min_], dyr = reg0_.dy[i0 - i_min_];
  const double wm = yd * dyr - dyd * yr;
  rho_ = wm / (2 * nu * std::hypot(yd, dyd) * std::hypot(yr, dyr));
  auto count_nodes = [](const Sweep& sw, int from, int to) {
    int c = 0;
    for (int i = from + 1; i <= to; ++i)
      if ((sw.y[i - sw.lo] > 0) != (sw.y[i - 1 - sw.lo] > 0)) ++c;
    return c;
  };
  if (std::abs(rho_) < opt.kernel_tol) {
    kernel_ = true;
    // each sweep is trusted only on the side it was started from
    nodes0_ = count_nodes(reg0_, i_min_, i0) + count_nodes(dec0_, i0, i_max_);
    const double b = reg0_.value(i0) / dec0_.value(i0);
    // splice: the outward sweep below t = 0, the rescaled inward sweep above
    const double lb = std::log(std::abs(b));
    for (int i = i0; i <= i_max_; ++i) {
      const int k = i - i_min_;
      reg0_.y[k] = b < 0 ? -dec0_.y[k] : dec0_.y[k];
      reg0_.dy[k] = b < 0 ? -dec0_.dy[k] : dec0_.dy[k];
      reg0_.s[k] = dec0_.s[k] + lb;
    }
    A_ = 0;
    B_ = b;
    log_b_ = std::log(std::abs(b));
    sign_b_ = b > 0 ? 1 : -1;
  } else if (std::abs(rho_) > opt.nonkernel_tol) {
    A_ = wm * std::exp(dec0_.s[i0 - i_min_] + reg0_.s[i0 - i_min_]) / (2 * nu);
    const int k = i_max_ - i_min_;
    const double bm = (nu * reg0_.y[k] - reg0_.dy[k]) / (2 * nu);
    log_b_ = std::log(std::abs(bm)) + reg0_.s[k] + nu * tmax;
    sign_b_ = bm > 0 ? 1 : (bm < 0 ? -1 : 0);
    B_ = sign_b_ * std::exp(std::min(log_b_, 700.0));
  } else {
    std::ostringstream os;
    os << "zero-energy matching in mode " << m.j << " is borderline (indicator " << rho_ << ")";
    throw AmbiguityError(os.str());
  }
  if (!kernel_) nodes0_ = count_nodes(reg0_, i_min_, i_max_);
}

EnergySolution ModeSolver::at(double k) const {
  if (!(k > 0)) throw DomainError("resolvent needs k > 0");
  const double nu = mode_.nu, k2 = k * k;
  int i_start = std::min(i_max_, static_cast<int>(std::floor(std::log(50.0 / k) / h_)));
  if (i_start < i_min_ + 16) throw DomainError("k too large for the radial grid");
  const double ts = t(i_start);
  const BesselIK b = bessel_ik_log(nu, k * std::exp(ts));
  EnergySolution e;
  e.k = k;
  e.solver_ = this;
  e.dec_ = sweep(k2, i_start, i_min_, 1.0, k * std::exp(ts) * b.dk_over_k, b.log_k);
  // J = int e^{2t} phi0 phi_dec dt
  const int n = i_start - i_min_ + 1;
  std::vector<double> lg(n), mant(n);
  double smax = -1e300;
  for (int i = 0; i < n; ++i) {
    lg[i] = 2 * t(i_min_ + i) + reg0_.s[i] + e.dec_.s[i];
    mant[i] = reg0_.y[i] * e.dec_.y[i];
    smax = std::max(smax, lg[i]);
  }
  std::vector<double> f(n), fa(n);
  for (int i = 0; i < n; ++i) {
    f[i] = mant[i] * std::exp(lg[i] - smax);
    fa[i] = std::abs(f[i]);
  }
  double sum = f[0] / 2, asum = fa[0] / 2;
  for (int i = 0; i + 1 < n; ++i) {
    sum += interval_integral(f, i, h_);
    asum += interval_integral(fa, i, h_);
  }
  int sign = sum > 0 ? 1 : -1;
  double lj = smax + std::log(std::abs(sum));
  if (i_start == i_max_) {
    // free tail: phi0 = A e^{nu t} + B e^{-nu t}, phi_dec = K_nu(k r)
    const double rm = std::exp(t(i_max_)), lk = std::log(k);
    if (A_ != 0) {
      const double la = std::log(std::abs(A_)) + (1 + nu) * std::log(rm) + log_bessel_k(nu + 1, k * rm) - lk;
      lj = log_sum_exp_signed(lj, sign, la, A_ > 0 ? 1 : -1, sign);
    }
    if (sign_b_ != 0) {
      const double lb = log_b_ + (1 - nu) * std::log(rm) + log_bessel_k(std::abs(nu - 1), k * rm) - lk;
      lj = log_sum_exp_signed(lj, sign, lb, sign_b_, sign);
    }
  }
  if (std::abs(sum) < 1e-10 * asum) {
    std::ostringstream os;
    os << "energy -k^2 with k=" << k << " collides with a bound state in mode " << mode_.j;
    throw SpectralError(os.str());
  }
  e.log_j_ = lj;
  e.sign_j_ = sign;
  return e;
}

void ModeSolver::ensure_reg(const EnergySolution& e, int upto) const {
  upto = std::min(upto, i_max_);
  Sweep& r = e.reg_;
  const double k2 = e.k * e.k, nu = mode_.nu;
  if (r.hi < r.lo) {
    const double tmin = t(i_min_), e2 = std::exp(2 * tmin);
    const double c1 = (problem_->potential.r2v(tmin) / e2 + k2) / (4 * (nu + 1));
    r = sweep(k2, i_min_, std::max(upto, i_min_ + 4), 1 + c1 * e2, nu + (nu + 2) * c1 * e2, nu * tmin);
    return;
  }
  if (r.hi >= upto) return;
  const int last = r.hi - r.lo;
  Sweep ext = sweep(k2, r.hi, upto, r.y[last], r.dy[last], r.s[last]);
  r.y.insert(r.y.end(), ext.y.begin() + 1, ext.y.end());
  r.dy.insert(r.dy.end(), ext.dy.begin() + 1, ext.dy.end());
  r.s.insert(r.s.end(), ext.s.begin() + 1, ext.s.end());
  r.hi = upto;
}

namespace {

// value of a stored sweep at t, as (sign, log|value|)
std::pair<int, double> sweep_log_value(const ModeSolver& ms, const Sweep& sw, double k2, double t) {
  const int i = std::clamp(static_cast<int>(std::lround(t / ms.h())), sw.lo, sw.hi);
  const double s = sw.s[i - sw.lo];
  Sweep tmp;
  tmp.lo = tmp.hi = i;
  tmp.y = {sw.y[i - sw.lo]};
  tmp.dy = {sw.dy[i - sw.lo]};
  tmp.s = {0.0};
  const double v = ms.evaluate(tmp, k2, t).first;
  return {v > 0 ? 1 : (v < 0 ? -1 : 0), std::log(std::abs(v)) + s};
}

}  // namespace

double EnergySolution::green(double ta, double tb) const {
  const ModeSolver& ms = *solver_;
  const double tl = std::min(ta, tb), tg = std::max(ta, tb);
  const double k2 = k * k, nu = ms.nu();
  std::pair<int, double> pr, pd;
  const double tmin = ms.t(ms.i_min());
  if (tl < tmin) {
    const double e2 = std::exp(2 * tl);
    const double c1 = (ms.problem().potential.r2v(tl) / e2 + k2) / (4 * (nu + 1));
    pr = {1, nu * tl + std::log1p(c1 * e2)};
  } else {
    ms.ensure_reg(*this, ms.nearest(tl) + 1);
    pr = sweep_log_value(ms, reg_, k2, tl);
  }
  if (tg > ms.t(dec_.hi)) {
    pd = {1, log_bessel_k(nu, k * std::exp(tg))};
  } else {
    pd = sweep_log_value(ms, dec_, k2, tg);
  }
  return pr.first * pd.first * sign_j_ * std::exp(pr.second + pd.second - 2 * std::log(k) - log_j_);
}

int ModeSolver::nodes(double kappa) const {
  const double k2 = kappa * kappa, nu = mode_.nu;
  const double tmin = t(i_min_), e2 = std::exp(2 * tmin);
  const double c1 = (problem_->potential.r2v(tmin) / e2 + k2) / (4 * (nu + 1));
  const Sweep sw = sweep(k2, i_min_, i_max_, 1 + c1 * e2, nu + (nu + 2) * c1 * e2, nu * tmin);
  int c = 0;
  for (size_t i = 1; i < sw.y.size(); ++i)
    if ((sw.y[i] > 0) != (sw.y[i - 1] > 0)) ++c;
  return c;
}

std::vector<double> ModeSolver::bound_state_kappas() const {
  std::vector<double> out;
  const int total = kernel_ ? nodes0_ : nodes(0.0);
  if (total == 0) return out;
  double k2max = 0;
  for (int i = i_min_; i <= i_max_; ++i) k2max = std::max(k2max, -q(t(i), 0.0) * std::exp(-2 * t(i)));
  const double kmax = std::sqrt(k2max) * 1.01 + 1e-12;
  for (int c = 1; c <= total; ++c) {
    double lo = 0, hi = kmax;
    for (int it = 0; it < 200 && hi - lo > 1e-13 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (nodes(mid) >= c)
        lo = mid;
      else
        hi = mid;
    }
    out.push_back(0.5 * (lo + hi));
  }
  return out;
}

RadialProfile ModeSolver::bound_state(double kappa) const {
  const double k2 = kappa * kappa, nu = mode_.nu;
  int im = i_min_;
  for (int i = i_min_; i <= i_max_; ++i)
    if (q(t(i), k2) < 0) im = i;
  if (im == i_min_) throw PreconditionError("bound_state: no classically allowed region at this energy");
  const double tmin = t(i_min_), e2 = std::exp(2 * tmin);
  const double c1 = (problem_->potential.r2v(tmin) / e2 + k2) / (4 * (nu + 1));
  const Sweep reg = sweep(k2, i_min_, im, 1 + c1 * e2, nu + (nu + 2) * c1 * e2, nu * tmin);
  const int i_start = std::min(i_max_, static_cast<int>(std::floor(std::log(50.0 / kappa) / h_)));
  const double ts = t(std::max(i_start, im + 1));
  const BesselIK b = bessel_ik_log(nu, kappa * std::exp(ts));
  const int is = std::max(i_start, im + 1);
  const Sweep dec = sweep(k2, is, im, 1.0, kappa * std::exp(ts) * b.dk_over_k, 0.0);
  const double lr = reg.log_abs(im), ld = dec.log_abs(im);
  const double sgn = ((reg.y[im - reg.lo] > 0) == (dec.y[im - dec.lo] > 0)) ? 1 : -1;
  RadialProfile p;
  p.t0 = t(i_min_);
  p.h = h_;
  const int n = i_max_ - i_min_ + 1;
  p.phi.resize(n), p.dphi.resize(n);
  for (int i = i_min_; i <= i_max_; ++i) {
    double v, d;
    if (i <= im) {
      const double sc = std::exp(reg.s[i - reg.lo] - lr);
      v = reg.y[i - reg.lo] * sc, d = reg.dy[i - reg.lo] * sc;
    } else if (i <= is) {
      const double sc = sgn * std::exp(dec.s[i - dec.lo] - ld);
      v = dec.y[i - dec.lo] * sc, d = dec.dy[i - dec.lo] * sc;
    } else {
      const double r = std::exp(t(i));
      const BesselIK bi = bessel_ik_log(nu, kappa * r);
      const double sc = sgn * std::exp(bi.log_k - b.log_k - ld);
      v = sc, d = sc * kappa * r * bi.dk_over_k;
    }
    p.phi[i - i_min_] = v, p.dphi[i - i_min_] = d;
  }
  std::vector<double> f(n);
  for (int i = 0; i < n; ++i) f[i] = std::exp(2 * p.t(i)) * p.phi[i] * p.phi[i];
  double norm = f[0] / 2;
  for (int i = 0; i + 1 < n; ++i) norm += interval_integral(f, i, h_);
  const double sc = 1 / std::sqrt(norm);
  for (int i = 0; i < n; ++i) p.phi[i] *= sc, p.dphi[i] *= sc;
  return p;
}

RadialProfile ModeSolver::profile(const Sweep& sw, double scale) const {
  RadialProfile p;
  p.t0 = t(sw.lo);
  p.h = h_;
  const size_t n = sw.y.size();
  p.phi.resize(n), p.dphi.resize(n);
  for (size_t i = 0; i < n; ++i) {
    const double e = scale * std::exp(sw.s[i]);
    p.phi[i] = sw.y[i] * e;
    p.dphi[i] = sw.dy[i] * e;
  }
  return p;
}

// ---------------------------------------------------------------- zero solutions and kernel detection

namespace {

ExponentFit fit_exponent(const RadialProfile& p, double ta, double tb) {
  std::vector<int> idx;
  for (int i = 0; i < p.size(); ++i)
    if (p.t(i) >= ta - 1e-12 && p.t(i) <= tb + 1e-12) idx.push_back(i);
  if (idx.size() < 8) throw NumericError("exponent fit window too short");
  const Eigen::Index m = idx.size();
  Eigen::MatrixXd a(m, 3);
  Eigen::VectorXd b(m), w = Eigen::VectorXd::Ones(m);
  for (Eigen::Index r = 0; r < m; ++r) {
    const double tt = p.t(idx[r]);
    const double v = p.phi[idx[r]];
    if (!(std::isfinite(v)) || v == 0) throw NumericError("profile blows up or vanishes inside the fit window");
    a(r, 0) = tt;
    a(r, 1) = 1;
    a(r, 2) = std::log(std::abs(tt));
    b(r) = std::log(std::abs(v)) + tt / 2;
  }
  ExponentFit out;
  const LsqResult with_log = weighted_lsq(a, b, w);
  out.log_coefficient = with_log.coeff(2);
  out.log_factor = std::abs(with_log.coeff(2)) > 5 * with_log.stderr_(2) && std::abs(with_log.coeff(2)) > 1e-3;
  if (out.log_factor) {
    out.exponent = with_log.coeff(0);
    out.stderr_ = with_log.stderr_(0);
  } else {
    const LsqResult plain = weighted_lsq(a.leftCols(2), b, w);
    out.exponent = plain.coeff(0);
    out.stderr_ = plain.stderr_(0);
  }
  return out;
}

double l2_norm_sq(const ModeSolver& s, const RadialProfile& p) {
  const int n = p.size();
  std::vector<double> f(n);
  for (int i = 0; i < n; ++i) f[i] = std::exp(2 * p.t(i)) * p.phi[i] * p.phi[i];
  double v = f[0] / 2;
  for (int i = 0; i + 1 < n; ++i) v += interval_integral(f, i, s.h());
  // free tail of a decaying solution B e^{-nu t}, nu > 1
  v += f[n - 1] / (2 * s.nu() - 2);
  return v;
}

}  // namespace

ZeroSolutions zero_solutions(const RadialOperator& op) {
  if (op.k2 != 0) throw PreconditionError("zero_solutions needs k = 0");
  const ModeSolver s(*op.problem, op.mode);
  ZeroSolutions z;
  z.regular.profile = s.profile(s.regular0());
  z.decaying.profile = s.profile(s.decaying0());
  const double t0 = s.t(s.i_min()), t1 = s.t(s.i_max()), dec = std::log(10.0);
  for (ZeroSolution* zs : {&z.regular, &z.decaying}) {
    zs->at_zero = fit_exponent(zs->profile, t0, t0 + dec);
    zs->at_infinity = fit_exponent(zs->profile, t1 - dec, t1);
  }
  return z;
}

ZeroModeReport detect_kernel(const RadialProblem& p, int j_max) {
  ZeroModeReport rep;
  const double h = (p.n - 2) / 2.0;
  for (int j = 0; j <= j_max; ++j) {
    const Mode m = p.mode(j);
    const ModeSolver s(p, m);
    ZeroModeEntry e;
    e.j = j;
    e.nu = m.nu;
    e.indicator = s.kernel_indicator();
    e.decay_exponent = m.nu + h;
    e.regular_exponent = m.nu - h;
    if (s.is_kernel()) {
      e.count = m.multiplicity;
      if (std::abs(m.nu - 1) < 1e-6 && std::abs(m.nu - 1) > 1e-12) {
        std::ostringstream os;
        os << "mode " << j << " decays at the L2 threshold within tolerance (nu=" << m.nu << ")";
        throw AmbiguityError(os.str());
      }
      e.l2 = m.nu > 1 + 1e-12;
      NormalizedMode nm;
      nm.j = j;
      nm.nu = m.nu;
      nm.l2 = e.l2;
      const RadialProfile raw = s.profile(s.regular0());
      nm.alpha = e.l2 ? 1 / std::sqrt(l2_norm_sq(s, raw)) : 1 / s.decay_coefficient();
      nm.profile = s.profile(s.regular0(), nm.alpha);
      nm.leading = nm.alpha * s.decay_coefficient();
      rep.normalized_modes.push_back(std::move(nm));
      if (e.l2) {
        rep.m = std::min(rep.m, e.decay_exponent - (p.n - 2));
        rep.kernel_dimension += m.multiplicity;
      } else {
        rep.resonance = true;
      }
    }
    e.bound_states = s.is_kernel() ? s.zero_energy_nodes() : s.nodes(0.0);
    rep.modes.push_back(e);
  }
  rep.m_prime = std::min(2.0, rep.m);
  rep.m_condition = rep.kernel_dimension == 0 || m_prime_condition(p.n, rep.m_prime);
  return rep;
}

// ---------------------------------------------------------------- source solves

SourceSolution solve_source(const ModeSolver& s, const std::vector<double>& src, const BehaviorWindow& win,
                            double pairing_tol) {
  const int n = s.i_max() - s.i_min() + 1;
  if (static_cast<int>(src.size()) != n) throw PreconditionError("source must be sampled on the solver grid");
  const double h = s.h(), nu = s.nu();
  const RadialProfile y1 = s.profile(s.regular0());
  RadialProfile y2;
  const int i0 = s.nearest(0.0);
  const int k0 = i0 - s.i_min();
  if (s.is_kernel()) {
    const double a = y1.phi[k0], da = y1.dphi[k0], den = a * a + da * da;
    const Sweep up = s.sweep(0, i0, s.i_max(), -da / den, a / den, 0.0);
    const Sweep dn = s.sweep(0, i0, s.i_min(), -da / den, a / den, 0.0);
    const RadialProfile pu = s.profile(up), pd = s.profile(dn);
    y2 = pd;
    y2.phi.insert(y2.phi.end(), pu.phi.begin() + 1, pu.phi.end());
    y2.dphi.insert(y2.dphi.end(), pu.dphi.begin() + 1, pu.dphi.end());
  } else {
    y2 = s.profile(s.decaying0());
    const double w = y1.phi[k0] * y2.dphi[k0] - y1.dphi[k0] * y2.phi[k0];
    for (int i = 0; i < n; ++i) y2.phi[i] /= w, y2.dphi[i] /= w;
  }
  std::vector<double> f1(n), f2(n), fa(n);
  for (int i = 0; i < n; ++i) {
    f1[i] = y1.phi[i] * src[i];
    f2[i] = y2.phi[i] * src[i];
    fa[i] = std::abs(f1[i]);
  }
  auto rate = [h](double a, double b) { return (a != 0 && b != 0 && (a > 0) == (b > 0)) ? std::log(b / a) / h : 0.0; };
  const double r0 = rate(f1[0], f1[1]);
  const std::vector<double> i1 = cumulative(f1, h, r0 > 0.05 ? f1[0] / r0 : 0.0);
  std::vector<double> i2(n);
  SourceSolution out;
  if (s.is_kernel()) {
    i2 = cumulative(f2, h, 0.0);
    const double re = rate(f1[n - 2], f1[n - 1]);
    const double pairing = i1[n - 1] + (re < -0.05 ? -f1[n - 1] / re : 0.0);
    double scale = fa[0] / 2;
    for (int i = 0; i + 1 < n; ++i) scale += interval_integral(fa, i, h);
    out.pairing = pairing;
    if (win.at_infinity < nu - 1e-9 && std::abs(pairing) > pairing_tol * scale) {
      std::ostringstream os;
      os << "source is not orthogonal to the obstructing zero solution (pairing " << pairing << ")";
      throw SolvabilityError(os.str(), pairing);
    }
  } else {
    // I2(t) = -int_t^T y2 f with T = inf when convergent, else the grid end
    const double re = rate(f2[n - 2], f2[n - 1]);
    const double tail = re < -0.05 ? -f2[n - 1] / re : 0.0;
    i2[n - 1] = -tail;
    for (int i = n - 2; i >= 0; --i) i2[i] = i2[i + 1] - interval_integral(f2, i, h);
  }
  out.u.t0 = y1.t0;
  out.u.h = h;
  out.u.phi.resize(n), out.u.dphi.resize(n);
  for (int i = 0; i < n; ++i) {
    out.u.phi[i] = y1.phi[i] * i2[i] - y2.phi[i] * i1[i];
    out.u.dphi[i] = y1.dphi[i] * i2[i] - y2.dphi[i] * i1[i];
  }
  (void)win.at_zero;
  return out;
}

SourceSolution solve_source(const ModeSolver& s, const std::function<double(double)>& source,
                            const BehaviorWindow& w, double pairing_tol) {
  std::vector<double> v(s.i_max() - s.i_min() + 1);
  for (int i = s.i_min(); i <= s.i_max(); ++i) v[i - s.i_min()] = source(s.t(i));
  return solve_source(s, v, w, pairing_tol);
}

// ---------------------------------------------------------------- tails and pairings

TailFit fit_tail(const RadialProfile& f, const std::vector<TailTerm>& basis, double ta, double tb) {
  std::vector<int> idx;
  for (int i = 0; i < f.size(); ++i)
    if (f.t(i) >= ta - 1e-12 && f.t(i) <= tb + 1e-12) idx.push_back(i);
  const Eigen::Index m = idx.size(), p = basis.size();
  if (m < 3 * p) throw IllPosedError("tail fit window has too few samples");
  Eigen::MatrixXd a(m, p);
  Eigen::VectorXd b(m), w(m);
  for (Eigen::Index r = 0; r < m; ++r) {
    const double tt = f.t(idx[r]);
    double mx = 0;
    for (Eigen::Index c = 0; c < p; ++c) {
      a(r, c) = std::pow(tt, basis[c].tpower) * std::exp(basis[c].rate * tt);
      mx = std::max(mx, std::abs(a(r, c)));
    }
    b(r) = f.phi[idx[r]];
    w(r) = 1 / mx;
  }
  const LsqResult res = weighted_lsq(a, b, w);
  TailFit out;
  out.basis = basis;
  out.coeff.assign(res.coeff.data(), res.coeff.data() + p);
  out.stderr_.assign(res.stderr_.data(), res.stderr_.data() + p);
  out.residual = res.residual_norm;
  return out;
}

PairingResult boundary_pairing(const TailFit& u, const TailFit& v) {
  // u v' - u' v for c t^p e^{g t} and d t^q e^{e t}: c d e^{(g+e)t} [ (e-g) t^{p+q} + (q-p) t^{p+q-1} ]
  PairingResult out;
  std::vector<double> poly(8, 0.0);
  for (size_t i = 0; i < u.basis.size(); ++i)
    for (size_t j = 0; j < v.basis.size(); ++j) {
      const double c = u.coeff[i] * v.coeff[j];
      const double noise = 5 * (std::abs(u.stderr_[i] * v.coeff[j]) + std::abs(u.coeff[i] * v.stderr_[j]));
      if (std::abs(c) <= noise) continue;
      const double g = u.basis[i].rate + v.basis[j].rate;
      const int p = u.basis[i].tpower, q = v.basis[j].tpower;
      const double e1 = v.basis[j].rate - u.basis[i].rate;
      if (g < -1e-9) continue;
      if (g > 1e-9) {
        if (std::abs(e1) > 1e-12 || p != q) {
          out.divergent = true;
          out.divergence_rate = std::max(out.divergence_rate, g);
        }
        continue;
      }
      poly[p + q] += c * e1;
      if (p + q >= 1) poly[p + q - 1] += c * (q - p);
    }
  for (size_t d = 1; d < poly.size(); ++d)
    if (std::abs(poly[d]) > 1e-9 * (std::abs(poly[0]) + 1e-300)) out.divergent = true;
  out.value = poly[0];
  return out;
}

FinitePart finite_part_norm(const RadialProfile& phi, double nu, bool require_unit) {
  const int n = phi.size();
  std::vector<double> f(n);
  for (int i = 0; i < n; ++i) f[i] = std::exp(2 * phi.t(i)) * phi.phi[i] * phi.phi[i];
  const std::vector<double> cum = cumulative(f, phi.h, f[0] / 2);
  const double tn = phi.t(n - 1), pn = phi.phi[n - 1], dn = phi.dphi[n - 1];
  const double a = (nu * pn - dn) * std::exp(nu * tn) / (2 * nu), b = (nu * pn + dn) * std::exp(-nu * tn) / (2 * nu);
  auto beyond = [&](double tt) {
    return a * a * integrate_exp(2 - 2 * nu, tn, tt) + 2 * a * b * integrate_exp(2, tn, tt) +
           b * b * integrate_exp(2 + 2 * nu, tn, tt);
  };
  std::vector<double> ts, vs;
  const double ta = std::log(1e2), tb = std::log(1e6);
  for (int i = 0; i < n; i += 8)
    if (phi.t(i) >= ta && phi.t(i) <= tb) ts.push_back(phi.t(i)), vs.push_back(cum[i]);
  for (double tt = tn + 0.125; tt <= tb + 1e-12; tt += 0.125) ts.push_back(tt), vs.push_back(cum[n - 1] + beyond(tt));
  const Eigen::Index m = ts.size();
  Eigen::MatrixXd am(m, 2);
  Eigen::VectorXd bv(m);
  for (Eigen::Index i = 0; i < m; ++i) am(i, 0) = ts[i], am(i, 1) = 1, bv(i) = vs[i];
  const LsqResult r = weighted_lsq(am, bv, Eigen::VectorXd::Ones(m));
  FinitePart out;
  out.log_coefficient = r.coeff(0);
  out.value = r.coeff(1);
  if (require_unit && std::abs(out.log_coefficient - 1) > 1e-4) {
    std::ostringstream os;
    os << "finite part: log coefficient " << out.log_coefficient << " is not 1; profile not resonance-normalized";
    throw PreconditionError(os.str());
  }
  return out;
}

}  // namespace rlab

namespace rlab {

GridSolution ModeSolver::apply_resolvent(double k, int f_lo, const std::vector<double>& F, int out_lo, int out_hi,
                                         double reach) const {
  if (!(k > 0)) throw DomainError("resolvent needs k > 0");
  if (F.empty()) throw DomainError("empty source");
  const int f_hi = f_lo + static_cast<int>(F.size()) - 1;
  if (f_lo < i_min_ || f_hi > i_max_ || out_lo < i_min_ || out_hi > i_max_ || out_lo > out_hi)
    throw DomainError("index range outside the radial grid");
  GridSolution out;
  out.lo = out_lo;
  out.phi.assign(out_hi - out_lo + 1, 0.0);
  out.dphi.assign(out_hi - out_lo + 1, 0.0);
  const double ra = std::exp(t(f_lo)), rb = std::exp(t(f_hi));
  int lo_eff = out_lo, hi_eff = out_hi;
  if (ra - reach / k > std::exp(t(out_lo)))
    lo_eff = std::max(out_lo, static_cast<int>(std::floor(std::log(ra - reach / k) / h_)));
  hi_eff = std::min(out_hi, static_cast<int>(std::ceil(std::log(rb + reach / k) / h_)));
  if (lo_eff > hi_eff) return out;
  const int top = std::max(hi_eff, f_hi), bottom = std::min(lo_eff, f_lo);

  const double k2 = k * k, nu = mode_.nu;
  const double tmin = t(i_min_), e2 = std::exp(2 * tmin);
  const double c1 = (problem_->potential.r2v(tmin) / e2 + k2) / (4 * (nu + 1));
  const Sweep reg = sweep(k2, i_min_, std::max(top, i_min_ + 1), 1 + c1 * e2, nu + (nu + 2) * c1 * e2, nu * tmin);
  int i_top = static_cast<int>(std::ceil(std::log(std::exp(t(top)) + 50.0 / k) / h_));
  i_top = std::clamp(i_top, top, i_max_);
  const double zt = k * std::exp(t(i_top));
  const BesselIK b = bessel_ik_log(nu, zt);
  const Sweep dec = sweep(k2, i_top, std::min(bottom, i_top - 1), 1.0, zt * b.dk_over_k, b.log_k);

  auto R = [&](int i) { return i - reg.lo; };
  auto D = [&](int i) { return i - dec.lo; };
  // Wronskian phi_reg phi_dec' - phi_reg' phi_dec, as sign and log
  const int iw = f_lo;
  const double wm = reg.y[R(iw)] * dec.dy[D(iw)] - reg.dy[R(iw)] * dec.y[D(iw)];
  double lw = reg.s[R(iw)] + dec.s[D(iw)] + std::log(std::abs(wm));
  double sw = wm > 0 ? 1 : -1;
  if (i_top == i_max_ && 50.0 / k >= std::exp(t(i_max_))) {
    // at small k the two solutions are nearly dependent; W = -k^2 J avoids the cancellation
    const EnergySolution e = at(k);
    lw = 2 * std::log(k) + e.log_abs_j();
    sw = -e.sign_j();
  }

  const int m = f_hi - f_lo + 1;
  std::vector<double> a(m, 0.0), c(m, 0.0);
  for (int i = f_lo + 1; i <= f_hi; ++i) {
    const double e = std::exp(reg.s[R(i - 1)] - reg.s[R(i)]);
    a[i - f_lo] = a[i - 1 - f_lo] * e + 0.5 * h_ * (reg.y[R(i - 1)] * F[i - 1 - f_lo] * e + reg.y[R(i)] * F[i - f_lo]);
  }
  for (int i = f_hi - 1; i >= f_lo; --i) {
    const double e = std::exp(dec.s[D(i + 1)] - dec.s[D(i)]);
    c[i - f_lo] = c[i + 1 - f_lo] * e + 0.5 * h_ * (dec.y[D(i + 1)] * F[i + 1 - f_lo] * e + dec.y[D(i)] * F[i - f_lo]);
  }
  for (int i = lo_eff; i <= hi_eff; ++i) {
    double v, dv;
    if (i < f_lo) {
      const double sc = -sw * c[0] * std::exp(reg.s[R(i)] + dec.s[D(f_lo)] - lw);
      v = reg.y[R(i)] * sc, dv = reg.dy[R(i)] * sc;
    } else if (i > f_hi) {
      const double sc = -sw * a[m - 1] * std::exp(dec.s[D(i)] + reg.s[R(f_hi)] - lw);
      v = dec.y[D(i)] * sc, dv = dec.dy[D(i)] * sc;
    } else {
      const double sc = -sw * std::exp(reg.s[R(i)] + dec.s[D(i)] - lw);
      v = (dec.y[D(i)] * a[i - f_lo] + reg.y[R(i)] * c[i - f_lo]) * sc;
      dv = (dec.dy[D(i)] * a[i - f_lo] + reg.dy[R(i)] * c[i - f_lo]) * sc;
    }
    out.phi[i - out_lo] = v;
    out.dphi[i - out_lo] = dv;
  }
  return out;
}

}  // namespace rlab
