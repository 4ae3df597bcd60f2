#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rlab/cone_model.hpp"

namespace rlab {

// f(r) = r^a prod_i (1 + (r/R_i)^{2 q_i})^{-b_i}
struct ProfileFactor {
  double R = 1;
  double q = 2;
  double b = 1;
};

struct ProductProfile {
  double a = 0;
  std::vector<ProfileFactor> factors;

  double log_value(double r) const;
  double value(double r) const { return std::exp(log_value(r)); }
  double log_derivative(double r) const;  // r f'/f
  double exponent_at_infinity() const;
};

struct Potential {
  std::function<double(double)> r2v;  // r^2 V as a function of t = log r
  double decay_order = 1e300;         // l with |V| <= C r^-l for r >= r0
  double C = 0;
  double r0 = 1;
  std::string tag = "zero";

  double operator()(double r) const { return r2v(std::log(r)) / (r * r); }
  bool is_zero() const { return tag == "zero"; }
};

Potential zero_potential();
// r^2 V for (Delta + V)(f Y) = 0 with Y of link eigenvalue lambda; requires lambda = a(a+n-2)
Potential product_potential(int n, const ProductProfile& f);
Potential tabulated_potential(const std::vector<double>& r, const std::vector<double>& v);
Potential profile_potential(int n, int ell, std::function<double(double)> f, std::function<double(double)> df,
                            std::function<double(double)> d2f);

struct EngineeredMode {
  int j = 0;
  double nu = 0;
  ProductProfile profile;
};

struct RadialProblem {
  int n = 3;
  ConeGeometry geom = ConeGeometry::round(3);
  Potential potential = zero_potential();
  std::optional<EngineeredMode> engineered;
  double r_min = 1e-4;
  double r_max = 1e4;  // grid end; raised by the decay certificate when needed
  int steps_per_unit = 128;

  Mode mode(int j) const { return mode_of(geom, j); }
};

RadialProblem free_problem(const ConeGeometry& geom);
RadialProblem potential_from_mode(int n, int ell, const ProductProfile& f);
RadialProblem potential_from_mode(const ConeGeometry& geom, int j, const ProductProfile& f);

struct RadialOperator {
  const RadialProblem* problem = nullptr;
  Mode mode;
  double nu = 0;
  double k2 = 0;
  double effective_potential(double r) const;
};

RadialOperator reduce(const RadialProblem& p, const Mode& m, double k);

// Solution of -phi'' + (nu^2 + r^2 V + k^2 r^2) phi = 0 in t = log r,
// phi = y e^s, phi' = dy e^s on grid indices [lo, hi].
struct Sweep {
  int lo = 0;
  int hi = -1;
  std::vector<double> y, dy, s;

  bool covers(int i) const { return i >= lo && i <= hi; }
  double value(int i) const { return y[i - lo] * std::exp(s[i - lo]); }
  double deriv(int i) const { return dy[i - lo] * std::exp(s[i - lo]); }
  double log_abs(int i) const { return std::log(std::abs(y[i - lo])) + s[i - lo]; }
};

// Reduced b-coefficient phi(t) and phi'(t) on a uniform t grid (function value is r^{1-n/2} phi).
struct RadialProfile {
  double t0 = 0;
  double h = 1;
  std::vector<double> phi, dphi;

  double t(int i) const { return t0 + i * h; }
  int size() const { return static_cast<int>(phi.size()); }
  double at(double t) const;  // cubic Hermite
};

// quartic local-interpolation quadrature on uniform samples
double integrate_samples(const std::vector<double>& f, double h);
std::vector<double> cumulative_samples(const std::vector<double>& f, double h, double head = 0);

class ModeSolver;

// Resolvent data at one energy -k^2: G_L(t,t') = phi_reg(t<) phi_dec(t>) / (k^2 J)
class EnergySolution {
 public:
  double k = 0;
  double green(double t, double tp) const;
  double log_abs_j() const { return log_j_; }
  int sign_j() const { return sign_j_; }

 private:
  friend class ModeSolver;
  const ModeSolver* solver_ = nullptr;
  Sweep dec_;
  mutable Sweep reg_;
  double log_j_ = 0;
  int sign_j_ = 1;
};

// phi and its t-derivative on grid indices [lo, lo + size)
struct GridSolution {
  int lo = 0;
  std::vector<double> phi, dphi;
};

struct GridOptions {
  double kernel_tol = 1e-8;
  double nonkernel_tol = 1e-4;
};

class ModeSolver {
 public:
  ModeSolver(const RadialProblem& p, const Mode& m, const GridOptions& opt = {});

  const RadialProblem& problem() const { return *problem_; }
  const Mode& mode() const { return mode_; }
  double nu() const { return mode_.nu; }
  double h() const { return h_; }
  int i_min() const { return i_min_; }
  int i_max() const { return i_max_; }
  double t(int i) const { return i * h_; }
  int nearest(double t) const;

  const Sweep& regular0() const { return reg0_; }
  const Sweep& decaying0() const { return dec0_; }
  bool is_kernel() const { return kernel_; }
  double kernel_indicator() const { return rho_; }
  // phi_reg ~ e^{nu t} at -inf and ~ A e^{nu t} + B e^{-nu t} at +inf; A = 0 exactly for kernel modes
  double growth_coefficient() const { return A_; }
  double decay_coefficient() const { return B_; }
  int zero_energy_nodes() const { return nodes0_; }

  double q(double t, double k2) const;
  Sweep sweep(double k2, int from, int to, double y0, double dy0, double s0) const;
  // value and t-derivative at arbitrary t by integrating from the nearest stored grid point
  std::pair<double, double> evaluate(const Sweep& sw, double k2, double t) const;

  EnergySolution at(double k) const;
  double green(double k, double t, double tp) const { return at(k).green(t, tp); }

  // (L + k^2 e^{2t})^{-1} F for F sampled on [f_lo, f_lo + F.size()), returned on [out_lo, out_hi];
  // points farther than reach / k in r from the support of F are set to zero
  GridSolution apply_resolvent(double k, int f_lo, const std::vector<double>& F, int out_lo, int out_hi,
                               double reach = 60) const;

  int nodes(double kappa) const;
  std::vector<double> bound_state_kappas() const;
  // normalized to int e^{2t} phi^2 dt = 1
  RadialProfile bound_state(double kappa) const;

  RadialProfile profile(const Sweep& sw, double scale = 1.0) const;

 private:
  void ensure_reg(const EnergySolution& e, int upto) const;
  friend class EnergySolution;

  const RadialProblem* problem_;
  Mode mode_;
  double h_;
  int i_min_, i_max_;
  Sweep reg0_, dec0_;
  bool kernel_ = false;
  double rho_ = 0, A_ = 0, B_ = 0, log_b_ = 0;
  int sign_b_ = 0;
  int nodes0_ = 0;
};

struct ExponentFit {
  double exponent = 0;
  double stderr_ = 0;
  bool log_factor = false;
  double log_coefficient = 0;
};

struct ZeroSolution {
  RadialProfile profile;
  ExponentFit at_zero, at_infinity;  // exponents of the reduced u = r^{1/2} phi
};

struct ZeroSolutions {
  ZeroSolution regular, decaying;
};

ZeroSolutions zero_solutions(const RadialOperator& op);

struct ZeroModeEntry {
  int j = 0;
  double nu = 0;
  int count = 0;  // multiplicity of the kernel in this mode (0 if none)
  bool l2 = false;
  double decay_exponent = 0;    // function convention, psi ~ r^{-decay_exponent}
  double regular_exponent = 0;  // function convention, psi ~ r^{regular_exponent} at 0
  double indicator = 0;
  int bound_states = 0;
};

struct NormalizedMode {
  int j = 0;
  double nu = 0;
  bool l2 = false;
  RadialProfile profile;  // phi with psi_f(r) = r^{1-n/2} phi(t), unit L2 (resonances: unit b-L2)
  double alpha = 0;       // profile = alpha * phi_reg
  double leading = 0;     // coefficient of e^{-nu t}
};

struct ZeroModeReport {
  std::vector<ZeroModeEntry> modes;
  double m = 1e300;
  double m_prime = 2;
  bool resonance = false;
  bool m_condition = true;
  int kernel_dimension = 0;
  std::vector<NormalizedMode> normalized_modes;
};

ZeroModeReport detect_kernel(const RadialProblem& p, int j_max);

struct BehaviorWindow {
  double at_zero = -1e300;  // growth rates of the reduced phi allowed at t -> -inf
  double at_infinity = 1e300;
};

struct SourceSolution {
  RadialProfile u;
  double pairing = 0;  // obstruction pairing (kernel modes) or 0
};

SourceSolution solve_source(const ModeSolver& s, const std::vector<double>& source, const BehaviorWindow& w,
                            double pairing_tol = 1e-6);
SourceSolution solve_source(const ModeSolver& s, const std::function<double(double)>& source,
                            const BehaviorWindow& w, double pairing_tol = 1e-6);

// f(t) ~ sum_i c_i t^{p_i} e^{g_i t}
struct TailTerm {
  double rate;
  int tpower = 0;
};

struct TailFit {
  std::vector<TailTerm> basis;
  std::vector<double> coeff, stderr_;
  double residual = 0;
};

TailFit fit_tail(const RadialProfile& f, const std::vector<TailTerm>& basis, double t_from, double t_to);

struct PairingResult {
  double value = 0;
  bool divergent = false;
  double divergence_rate = 0;
};

// lim_{t->inf} (u v' - u' v) from fitted tails
PairingResult boundary_pairing(const TailFit& u, const TailFit& v);

// n = 4 mode profile phi (psi = r^{-1} phi Y): finite part and log R coefficient of int_{|z|<R} |psi|^2,
// fitted over R in [1e2, 1e6]; the profile is continued past its grid as a zero-energy free solution.
struct FinitePart {
  double value = 0;
  double log_coefficient = 0;
};
FinitePart finite_part_norm(const RadialProfile& phi, double nu, bool require_unit = true);

}  // namespace rlab
