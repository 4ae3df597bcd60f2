#include <cstdio>
#include <cstdlib>
#include <exception>
#include <string>

#include "rlab/verify.hpp"

int main(int argc, char** argv) {
  int first = 1, last = rlab::kCriteria;
  if (argc > 1) first = last = std::atoi(argv[1]);
  bool all = true;
  for (int id = first; id <= last; ++id) {
    bool pass = false;
    try {
      const rlab::SuiteResult r = rlab::run_criterion(id);
      pass = r.pass;
      for (const auto& c : r.checks)
        std::printf("  [%s] %s: predicted %.10g fitted %.10g err %.3g tol %.3g %s\n", c.pass ? "ok" : "FAIL",
                    c.name.c_str(), c.predicted, c.fitted, c.rel_err, c.tolerance, c.note.c_str());
      for (const auto& n : r.notes) std::printf("  note: %s\n", n.c_str());
      std::printf("criterion %d (%s): %s  [%.1fs]\n", id, r.title.c_str(), pass ? "PASS" : "FAIL", r.seconds);
    } catch (const std::exception& e) {
      std::printf("criterion %d (%s): FAIL  (%s)\n", id, rlab::criterion_title(id), e.what());
    }
    std::fflush(stdout);
    all = all && pass;
  }
  return all ? 0 : 1;
}
