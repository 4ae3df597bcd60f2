#pragma once

#include <vector>

namespace rlab {

enum class BesselMethod { series, uniform_asymptotic, continued_fraction };

struct BesselEval {
  double order = 0;
  double argument = 0;
  double value = 0;
  BesselMethod method = BesselMethod::series;
  double est_abs_err = 0;
  bool underflow = false;
};

// Log-domain evaluation of I_nu, K_nu and their logarithmic derivatives.
struct BesselIK {
  double log_i = 0;
  double log_k = 0;
  double di_over_i = 0;  // I'/I
  double dk_over_k = 0;  // K'/K
  BesselMethod method_i = BesselMethod::series;
  BesselMethod method_k = BesselMethod::series;
};

double gamma_fn(double x);

BesselIK bessel_ik_log(double nu, double z);
double log_bessel_k(double nu, double z);
double log_bessel_i(double nu, double z);

BesselEval bessel_i_eval(double nu, double z);
BesselEval bessel_k_eval(double nu, double z);
double bessel_i(double nu, double z);
double bessel_k(double nu, double z);

enum class BesselFamily { I, K };

struct SeriesTerm {
  double power;
  int logpower;
  double coefficient;
};

struct SmallArgExpansion {
  double order = 0;
  BesselFamily family = BesselFamily::K;
  std::vector<SeriesTerm> terms;
  // first power left out of the returned terms
  double truncation_power = 0;
  int truncation_logpower = 0;

  double evaluate(double z) const;
};

SmallArgExpansion small_arg_expansion(double nu, BesselFamily family, double truncation_power);

double comp_integral(double nu);
double comp_closed_form(double nu);
double comp_f0(double nu);

// Uniform large-order bound used for mode-sum tails: |I_nu(a)K_nu(b)| for a <= b.
double log_ik_product_bound(double nu, double a, double b);

}  // namespace rlab
