#pragma once

#include <optional>
#include <utility>
#include <vector>

namespace rlab {

struct Mode {
  int j = 0;
  double lambda = 0;
  double nu = 0;
  int multiplicity = 1;
};

enum class LinkKind { round_sphere, scaled_sphere, explicit_spectrum };

struct ConeGeometry {
  int n = 3;
  LinkKind link = LinkKind::round_sphere;
  double c = 1.0;  // scaled_sphere radius
  std::vector<std::pair<double, int>> spectrum;  // explicit_spectrum: (lambda, multiplicity)

  static ConeGeometry round(int n) { return {n, LinkKind::round_sphere, 1.0, {}}; }
  static ConeGeometry scaled(int n, double c) { return {n, LinkKind::scaled_sphere, c, {}}; }
};

double sphere_volume(int n);  // Vol(S^{n-1})
int harmonic_dimension(int n, int j);

std::vector<Mode> mode_table(const ConeGeometry& geom, int j_max);
Mode mode_of(const ConeGeometry& geom, int j);

double projection_kernel(int n, int j, double costheta);
// Projection kernel on the link of geom (scaled spheres rescale by the link volume).
double link_projection_kernel(const ConeGeometry& geom, int j, double costheta);

struct ResonanceTerm {
  double nu_r;
  double c_coeff;
};

// Mode-sum tail beyond the supplied list is checked against tol when tol > 0.
double bf0_kernel(const ConeGeometry& geom, const std::vector<Mode>& modes, double kappa, double kappa_p,
                  double costheta, std::optional<ResonanceTerm> resonance = std::nullopt, double tol = 0);

double ff_kernel(const ConeGeometry& geom, const std::vector<Mode>& modes, double s, double costheta,
                 double tol = 0);

struct FreeSumOptions {
  double rel_tol = 1e-14;
  double min_separation = 1e-3;
};

double free_resolvent_sum(int n, double k, double r, double r_p, double costheta, int j_max,
                          const FreeSumOptions& opt = {});

}  // namespace rlab
