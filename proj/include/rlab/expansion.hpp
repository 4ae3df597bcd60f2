#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rlab/index_algebra.hpp"
#include "rlab/radial.hpp"

namespace rlab {

enum class Convention { function, b_half_density, sc_half_density };
const char* convention_name(Convention c);
// factor turning a function-convention kernel value into the given trivialization (x = 1/r)
double convention_factor(int n, Convention c, double r, double r_p);

// two points of the cone described by their radii and the angle between their link directions
struct PointPair {
  double r = 1;
  double r_p = 2;
  double costheta = 1;
};
PointPair pair_from_points(const std::vector<double>& z, const std::vector<double>& z_p);

struct GreenSample {
  double k = 0;
  double r = 0, r_p = 0, costheta = 1;
  double value = 0;
  Convention convention = Convention::function;
  int modes_used = 0;
  double tail_bound = 0;  // certified bound on the omitted modes
};

std::vector<double> geometric_grid(double k_min, double k_max, int per_decade = 16);

struct SamplerOptions {
  double rel_tol = 1e-13;
  int j_cap = 4000;
  double k_fraction = 0.5;  // k must stay below this fraction of the smallest bound-state kappa
  GridOptions grid;
};

// Full resolvent kernel as a sum over link modes of per-mode Green functions.
class ResolventSampler {
 public:
  explicit ResolventSampler(const RadialProblem& p, const SamplerOptions& opt = {});

  const RadialProblem& problem() const { return *problem_; }
  const SamplerOptions& options() const { return opt_; }
  const ModeSolver& solver(int j) const;
  // smallest bound-state kappa over all modes (infinity if the spectrum is nonnegative)
  double bound_state_scale() const;

  // result[i][a]: k_grid[i], pairs[a]
  std::vector<std::vector<GreenSample>> sample(const std::vector<PointPair>& pairs, const std::vector<double>& k_grid,
                                               Convention c = Convention::function) const;

 private:
  const RadialProblem* problem_;
  SamplerOptions opt_;
  double attractive_ = 0;  // sup of the attractive part of r^2 V
  mutable std::vector<std::unique_ptr<ModeSolver>> solvers_;
  mutable std::optional<double> kappa_min_;
};

std::vector<GreenSample> sample_resolvent(const RadialProblem& p, const PointPair& z, const std::vector<double>& k_grid,
                                          Convention c = Convention::function);

// k^power (log k)^logpower (log k)^{-invlogpower}
struct BasisTerm {
  double power = 0;
  int logpower = 0;
  int invlogpower = 0;

  double operator()(double k) const;
  std::string label() const;
  bool operator==(const BasisTerm&) const = default;
};

struct ExpansionFit {
  std::vector<BasisTerm> basis;
  std::vector<double> coeff, stderr_;
  double residual_norm = 0;  // relative-weighted
  double condition = 0;
  double k_min = 0, k_max = 0;
  int samples = 0;

  bool trusted() const { return condition <= 1e10; }
  std::optional<size_t> find(const BasisTerm& t, double tol = 1e-9) const;
  double coefficient(const BasisTerm& t) const;  // 0 when the term is absent
  double error(const BasisTerm& t) const;
};

ExpansionFit fit_expansion(const std::vector<double>& k, const std::vector<double>& values,
                           const std::vector<BasisTerm>& basis);
ExpansionFit fit_expansion(const std::vector<GreenSample>& samples, const std::vector<BasisTerm>& basis);

// leading basis from an index set, continued above its truncation by integer orders (with logs when asked)
std::vector<BasisTerm> basis_from_index_set(const IndexSet& s, int extra_orders, bool with_logs);
std::vector<BasisTerm> inverse_log_basis(int terms, const std::vector<BasisTerm>& remainder);

struct FreeOrderFit {
  std::vector<double> orders;  // fitted free orders, ascending
  ExpansionFit fit;            // final fit with the free orders first
};
// orders a_1 < ... < a_count in [lo, hi] fitted by variable projection, with the fixed terms appended
FreeOrderFit fit_free_orders(const std::vector<double>& k, const std::vector<double>& values, int count, double lo,
                             double hi, const std::vector<BasisTerm>& fixed);

struct CoefficientCheck {
  std::string name;
  double predicted = 0;
  double fitted = 0;
  double rel_err = 0;
  double tolerance = 0;
  bool pass = false;
  std::string note;
};
CoefficientCheck make_check(std::string name, double predicted, double fitted, double tol, std::string note = "");

// sum over planted modes of psi_j(z) psi_j(z') (L2 modes, or resonant modes when resonant = true)
double kernel_product(const RadialProblem& p, const ZeroModeReport& rep, const PointPair& z, bool resonant,
                      Convention c = Convention::function);

CoefficientCheck check_leading_projector(const RadialProblem& p, const ZeroModeReport& rep, const PointPair& z,
                                         const ExpansionFit& fit, Convention c = Convention::function,
                                         double tol = 1e-3);
// coefficient of the given term compatible with zero: |c| below 5 standard errors or rel_floor * scale
CoefficientCheck check_vanishing(const std::string& name, const ExpansionFit& fit, const BasisTerm& t, double scale,
                                 double rel_floor = 1e-8);
CoefficientCheck check_n5_m0_term(const RadialProblem& p, const ZeroModeReport& rep, const PointPair& z,
                                  const ExpansionFit& fit, double tol = 1e-2);
// leading coefficient of theta with P theta = psi_0 against -(3 c_0 Vol S^4)^{-1}
CoefficientCheck check_n5_theta(const RadialProblem& p, const ZeroModeReport& rep, double tol = 1e-5);

// product a b of the resonance's leading coefficient and the leading growth of P^{-1} applied to it (n = 3, 4, l = 0)
CoefficientCheck check_resonance_ab(const RadialProblem& p, double tol = 1e-5);
// leading coefficient of v~ with P v~ = sign x^{-2} w in the l = 0 mode (n = 6 style, mode 0 without kernel)
double complicated_leading(const RadialProblem& p, int sign);
CoefficientCheck check_complicated_leading(const RadialProblem& p, double tol = 1e-5);

// n = 3: k^{-1} coefficient against psi~ psi~ - sum d_ii psi_i psi_i
CoefficientCheck check_n3_minus1(const RadialProblem& p, const ZeroModeReport& rep, const PointPair& z,
                                 const ExpansionFit& fit, double tol = 2e-2);

struct N4Omega {
  double finite_part = 0;
  double omega = 0;          // -(2 log 2 - 1 - gamma)/4 - fp
  double derived_ratio = 0;  // log 2 - gamma + fp, the ratio implied by the K_0 tail of the Wronskian integral
};
N4Omega n4_omega(const ZeroModeReport& rep);
std::vector<CoefficientCheck> check_n4_resonance_series(const RadialProblem& p, const ZeroModeReport& rep,
                                                        const PointPair& z, const ExpansionFit& fit);

struct FractionalCheck {
  FreeOrderFit fit;
  std::vector<CoefficientCheck> checks;
};
FractionalCheck check_fractional_orders(const RadialProblem& p, const ZeroModeReport& rep, const PointPair& z,
                                        const std::vector<GreenSample>& samples);

struct Rb0Check {
  double nu = 0;     // Bessel order of the profile
  double order = 0;  // predicted x'-order (b convention)
  double fitted_order = 0, order_stderr = 0;
  double scale = 0;  // fitted profile constant
  double max_deviation = 0;
  std::vector<double> kappa, k, collapsed;  // samples divided by k^order and the profile
  std::vector<CoefficientCheck> checks;
};
Rb0Check check_rb0_profile(const ResolventSampler& s, const ZeroModeReport& rep, double r, double costheta,
                           const std::vector<double>& k_grid, const std::vector<double>& kappa_grid,
                           double tol = 2e-2);

struct JensenKato {
  double value = 0;                   // Pi_0 V G_2 V Pi_0 at (z, z') with G_2 = |z-z'|^2/(24 pi)
  std::vector<double> zeroth_moment;  // int V psi per planted mode
};
JensenKato jensen_kato(const RadialProblem& p, const ZeroModeReport& rep, const PointPair& z);
CoefficientCheck check_jensen_kato(const RadialProblem& p, const ZeroModeReport& rep, const PointPair& z,
                                   const ExpansionFit& fit, double tol = 2e-2);

struct AuditViolation {
  BasisTerm term;
  double coeff = 0, stderr_ = 0;
};
struct AuditReport {
  Face face = Face::zf;
  bool pass = true;
  std::vector<AuditViolation> violations;
};
AuditReport audit_against_index_family(const ExpansionFit& fit, const IndexFamily& fam, Face face,
                                       double order_tol = 1e-9);

}  // namespace rlab
