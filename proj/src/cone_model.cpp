#include "rlab/cone_model.hpp"

#include <algorithm>
#include <boost/math/special_functions/gegenbauer.hpp>
#include <cmath>
#include <numbers>
#include <sstream>

#include "rlab/errors.hpp"
#include "rlab/specfun.hpp"

namespace rlab {

double sphere_volume(int n) { return 2.0 * std::pow(std::numbers::pi, n / 2.0) / std::tgamma(n / 2.0); }

int harmonic_dimension(int n, int j) {
  // C(j+n-1, n-1) - C(j+n-3, n-1)
  auto binom = [](int a, int b) -> double {
    if (b < 0 || a < b) return 0.0;
    double r = 1;
    for (int i = 1; i <= b; ++i) r = r * (a - b + i) / i;
    return r;
  };
  return static_cast<int>(std::lround(binom(j + n - 1, n - 1) - binom(j + n - 3, n - 1)));
}

Mode mode_of(const ConeGeometry& geom, int j) {
  const double h = (geom.n - 2) / 2.0;
  Mode m;
  m.j = j;
  switch (geom.link) {
    case LinkKind::round_sphere:
      m.lambda = j * (j + geom.n - 2.0);
      m.nu = h + j;
      m.multiplicity = harmonic_dimension(geom.n, j);
      return m;
    case LinkKind::scaled_sphere:
      m.lambda = j * (j + geom.n - 2.0) / (geom.c * geom.c);
      m.multiplicity = harmonic_dimension(geom.n, j);
      break;
    case LinkKind::explicit_spectrum:
      if (j >= static_cast<int>(geom.spectrum.size())) throw PreconditionError("mode index beyond explicit spectrum");
      m.lambda = geom.spectrum[j].first;
      m.multiplicity = geom.spectrum[j].second;
      break;
  }
  m.nu = std::sqrt(h * h + m.lambda);
  return m;
}

std::vector<Mode> mode_table(const ConeGeometry& geom, int j_max) {
  std::vector<Mode> out;
  for (int j = 0; j <= j_max; ++j) out.push_back(mode_of(geom, j));
  std::stable_sort(out.begin(), out.end(), [](const Mode& a, const Mode& b) { return a.nu < b.nu; });
  return out;
}

double projection_kernel(int n, int j, double costheta) {
  if (n < 2) throw PreconditionError("projection_kernel: n >= 2 required");
  costheta = std::clamp(costheta, -1.0, 1.0);
  const double dim = harmonic_dimension(n, j);
  const double vol = sphere_volume(n);
  if (n == 2) return (j == 0 ? 1.0 : 2.0 * std::cos(j * std::acos(costheta))) / vol;
  const double alpha = (n - 2) / 2.0;
  const double g = boost::math::gegenbauer(static_cast<unsigned>(j), alpha, costheta);
  const double g1 = boost::math::gegenbauer(static_cast<unsigned>(j), alpha, 1.0);
  return dim / vol * g / g1;
}

double link_projection_kernel(const ConeGeometry& geom, int j, double costheta) {
  switch (geom.link) {
    case LinkKind::round_sphere: return projection_kernel(geom.n, j, costheta);
    case LinkKind::scaled_sphere: return projection_kernel(geom.n, j, costheta) / std::pow(geom.c, geom.n - 1);
    case LinkKind::explicit_spectrum:
      throw CapabilityError("projection kernels for explicit_spectrum links must be supplied by the caller");
  }
  return 0;
}

namespace {

double max_kernel(const ConeGeometry& geom, const Mode& m) {
  const double scale = geom.link == LinkKind::scaled_sphere ? std::pow(geom.c, geom.n - 1) : 1.0;
  return m.multiplicity / (sphere_volume(geom.n) * scale);
}

// sum of bounds for modes j_first, j_first+1, ... given a per-mode log bound
template <class F>
double tail_bound(const ConeGeometry& geom, int j_first, F log_bound) {
  if (geom.link == LinkKind::explicit_spectrum) return 0.0;
  double sum = 0;
  for (int j = j_first; j < j_first + 5000; ++j) {
    const Mode m = mode_of(geom, j);
    const double t = max_kernel(geom, m) * std::exp(log_bound(m.nu));
    sum += t;
    if (j > j_first + 5 && t < 1e-18 * (sum + 1e-300)) return sum;
  }
  return INFINITY;
}

}  // namespace

double bf0_kernel(const ConeGeometry& geom, const std::vector<Mode>& modes, double kappa, double kappa_p,
                  double costheta, std::optional<ResonanceTerm> resonance, double tol) {
  if (!(kappa > 0) || !(kappa_p > 0)) throw DomainError("bf0_kernel: kappa must be positive");
  const double a = std::min(kappa, kappa_p), b = std::max(kappa, kappa_p);
  double sum = 0;
  int j_last = -1;
  for (const auto& m : modes) {
    const BesselIK ia = bessel_ik_log(m.nu, a);
    const double lk = log_bessel_k(m.nu, b);
    sum += link_projection_kernel(geom, m.j, costheta) * std::exp(ia.log_i + lk);
    j_last = std::max(j_last, m.j);
  }
  if (resonance) {
    const Mode* rm = nullptr;
    for (const auto& m : modes)
      if (std::abs(m.nu - resonance->nu_r) < 1e-9) rm = &m;
    if (!rm) throw PreconditionError("bf0_kernel: resonance order matches no supplied mode");
    sum += resonance->c_coeff * link_projection_kernel(geom, rm->j, costheta) *
           std::exp(log_bessel_k(rm->nu, kappa) + log_bessel_k(rm->nu, kappa_p));
  }
  if (tol > 0) {
    const double bound = tail_bound(geom, j_last + 1, [&](double nu) { return log_ik_product_bound(nu, a, b); });
    if (!(bound <= 1e-3 * tol * std::max(std::abs(sum), 1e-300))) {
      std::ostringstream os;
      os << "bf0_kernel: mode tail bound " << bound << " not below tolerance";
      throw NumericError(os.str());
    }
  }
  return sum;
}

double ff_kernel(const ConeGeometry& geom, const std::vector<Mode>& modes, double s, double costheta, double tol) {
  if (!(s > 0)) throw DomainError("ff_kernel: s must be positive");
  const double ls = std::abs(std::log(s));
  double sum = 0;
  int j_last = -1;
  for (const auto& m : modes) {
    sum += link_projection_kernel(geom, m.j, costheta) * std::exp(-m.nu * ls) / (2.0 * m.nu);
    j_last = std::max(j_last, m.j);
  }
  if (tol > 0) {
    const double bound = tail_bound(geom, j_last + 1, [&](double nu) { return -nu * ls - std::log(2.0 * nu); });
    if (!(bound <= 1e-3 * tol * std::max(std::abs(sum), 1e-300))) {
      std::ostringstream os;
      os << "ff_kernel: mode tail bound " << bound << " not below tolerance";
      throw NumericError(os.str());
    }
  }
  return sum;
}

double free_resolvent_sum(int n, double k, double r, double r_p, double costheta, int j_max,
                          const FreeSumOptions& opt) {
  const double d2 = r * r + r_p * r_p - 2 * r * r_p * costheta;
  const double d = std::sqrt(std::max(d2, 0.0));
  if (d < opt.min_separation) {
    std::ostringstream os;
    os << "free_resolvent_sum: separation " << d << " below " << opt.min_separation;
    throw DomainError(os.str());
  }
  const double a = k * std::min(r, r_p), b = k * std::max(r, r_p);
  const double pre = -(n - 2) / 2.0 * std::log(r * r_p);
  const ConeGeometry geom = ConeGeometry::round(n);
  double sum = 0;
  for (int j = 0; j <= j_max; ++j) {
    const double nu = (n - 2) / 2.0 + j;
    const double li = log_bessel_i(nu, a);
    const double lk = log_bessel_k(nu, b);
    sum += projection_kernel(n, j, costheta) * std::exp(pre + li + lk);
    if (j >= 4) {
      const double bound =
          std::exp(pre) * tail_bound(geom, j + 1, [&](double nn) { return log_ik_product_bound(nn, a, b); });
      if (bound < 1e-3 * opt.rel_tol * std::abs(sum)) return sum;
    }
  }
  const double bound = std::exp(pre) * tail_bound(geom, j_max + 1, [&](double nn) { return log_ik_product_bound(nn, a, b); });
  if (bound > opt.rel_tol * std::abs(sum)) {
    std::ostringstream os;
    os << "free_resolvent_sum: tail bound " << bound << " exceeds tolerance at j_max=" << j_max;
    throw NumericError(os.str());
  }
  return sum;
}

}  // namespace rlab
