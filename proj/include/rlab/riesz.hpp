#pragma once

#include <string>
#include <vector>

#include "rlab/radial.hpp"

namespace rlab {

struct ThresholdPrediction {
  int n = 3;
  double m_prime = 2;
  double p_lo = 1, p_hi = 3;
};
ThresholdPrediction threshold_range(int n, double m_prime);

// g(r) Z_j(y) with Z_j the zonal harmonic of degree j, g sampled on grid indices [lo, lo + size)
struct ModeFunction {
  int j = 0;
  int lo = 0;
  std::vector<double> value;
};

struct RieszOptions {
  double k_lo = 0;  // 0: chosen from the output range
  double k_hi = 0;  // 0: chosen from the grid resolution at the support
  double k_split = 0;  // 0: geometric mean of k_lo and k_hi
  int panels_per_decade = 2;
  int nodes = 8;
  double resolution = 0.25;  // k r h at the top of the quadrature
  double reach = 60;
  double piece_width = 0.5;  // sources wider than twice this in log r are cut into pieces
};

// u = (P_>)^{-1/2} f in the mode of f; Tf = d(u Z_j)
struct RieszField {
  int j = 0;
  int lo = 0;
  std::vector<double> u, du;  // u(r) and du/dr on [lo, lo + size)
  double kernel_component = 0;
  std::vector<double> bound_components;
  bool in_kernel = false;
  bool divergent = false;
  std::string note;
  double k_lo = 0, k_hi = 0;
  int k_nodes = 0;
};

RieszField riesz_apply(const RadialProblem& p, const ModeFunction& f, int out_lo, int out_hi,
                       const RieszOptions& opt = {});

// L^p norm over r in [r_a, r_b] of g Z_j (dg empty) or of d(g Z_j) with dg = g'
double mode_lp_norm(const RadialProblem& p, int j, int lo, const std::vector<double>& g, const std::vector<double>& dg,
                    double prob_p, double r_a, double r_b);

// smooth bump in log r, supported on |log r - log R| < width, in mode j
ModeFunction log_bump(const RadialProblem& p, int j, double R, double width = 1);

enum class ProbeFamily { boundary_bump, mode_bump, rayleigh };
const char* family_name(ProbeFamily f);

struct RieszProbe {
  ProbeFamily family = ProbeFamily::boundary_bump;
  int j = 0;
  double p = 2;
  std::vector<double> R_grid, norm_ratios;
  double fitted_slope = 0, slope_stderr = 0;
  double predicted_slope = 0;
  bool inconclusive = false;
  bool consistent = false;  // fitted sign matches the predicted sign
};

// boundary_bump: f_R = bump at radius R, norm of Tf_R on the shell e^{-1/2} < r < e^{1/2}
// mode_bump: fixed bump at r = 1, norm of Tg on the annulus R < r < 2R
std::vector<RieszProbe> lp_threshold_sweep(const RadialProblem& p, const ThresholdPrediction& pred,
                                           const std::vector<double>& p_list, const std::vector<double>& R_grid,
                                           const RieszOptions& opt = {});

struct RayleighPoint {
  double R = 0;
  double alpha = 0;
  double projection = 0;   // <phi_R, psi>
  double dirichlet = 0;    // <df_R, df_R>
  double energy = 0;       // <P f_R, f_R>
  double energy_phi = 0;   // <P phi_R, phi_R>
};
struct RayleighResult {
  int j = 0;
  bool has_kernel = false;
  std::vector<RayleighPoint> points;
  double slope = 0, slope_stderr = 0;
};
// without a kernel the mode j_free is used and f_R = phi_R
RayleighResult rayleigh_unboundedness(const RadialProblem& p, const std::vector<double>& R_grid, int j_free = 1);

struct SlopeFit {
  double slope = 0, stderr_ = 0, intercept = 0;
};
SlopeFit loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace rlab
