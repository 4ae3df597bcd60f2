#pragma once

#include <map>
#include <string>
#include <vector>

#include "rlab/expansion.hpp"
#include "rlab/riesz.hpp"

namespace rlab {

// planted problems shared by the suites
RadialProblem planted_problem(int n, int ell);        // L2 zero mode of degree ell, decay r^{-(n-2+ell)}
RadialProblem n5_m0_problem();                        // n = 5, l = 0 zero mode
RadialProblem resonance_problem(int n);               // n = 3 or 4, l = 0 resonance
RadialProblem n3_combined_problem();                  // n = 3 resonance in l = 0 plus an l = 1 zero mode
RadialProblem conic_problem(double nu);               // n = 3 scaled-sphere link, planted mode of order nu

struct SuiteResult {
  int id = 0;
  std::string title;
  bool pass = true;
  std::vector<CoefficientCheck> checks;
  std::vector<std::string> notes;
  double seconds = 0;

  void add(const CoefficientCheck& c) {
    checks.push_back(c);
    pass = pass && c.pass;
  }
};

struct VerifyOptions {
  unsigned seed = 20240531;
  std::map<std::string, double> tolerances;  // overrides by key, see tolerance_keys()

  double tol(const std::string& key, double fallback) const {
    const auto it = tolerances.find(key);
    return it == tolerances.end() ? fallback : it->second;
  }
};
const std::vector<std::string>& tolerance_keys();

constexpr int kCriteria = 13;
const char* criterion_title(int id);
SuiteResult run_criterion(int id, const VerifyOptions& opt = {});

}  // namespace rlab
