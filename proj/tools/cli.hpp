#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rlab/radial.hpp"

namespace rlab::cli {

enum class Command { specfun, cone_kernel, solve, zero_modes, expand, riesz_sweep, verify };
const char* command_name(Command c);
std::optional<Command> parse_command(const std::string& s);

struct RunConfig {
  Command command = Command::verify;
  std::string problem_path;
  std::string output_dir;  // empty: report to stdout
  std::map<std::string, double> tolerances;
  unsigned seed = 20240531;

  // verify
  std::vector<std::string> suites;  // empty with all = false: nothing to run
  bool all = false;
  // specfun
  std::vector<double> nu = {0.5, 1, 2.5};
  std::vector<double> z = {1e-3, 0.1, 1, 10};
  double truncation = 2;
  // cone-kernel
  int n = 3;
  int j_max = 40;
  double kappa = 1, kappa_p = 2;
  // solve, expand
  double k_min = 1e-4, k_max = 1e-2;
  int per_decade = 16;
  std::vector<std::vector<double>> pairs = {{1, 2, 0.3}};  // r, r', cos theta
  double costheta = 0.3;
  // riesz-sweep
  std::vector<double> p_list = {1.1, 2, 3};
  std::vector<double> R_grid = {10, 20, 40, 80, 160, 320};
};

// YAML mapping; errors carry the offending line
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

// problem definition: n, link, potential and grid
RadialProblem parse_problem(const std::string& text, const std::string& base_dir = ".");
RadialProblem load_problem(const std::string& path);

const std::vector<std::string>& suite_names();
std::optional<int> suite_id(const std::string& name);

struct Report {
  nlohmann::ordered_json json;
  std::map<std::string, std::string> csv;  // file name -> contents
  bool pass = true;
};

Report run(const RunConfig& cfg);
// writes the report files (or prints the JSON when no output directory is set); returns the exit status
int emit(const RunConfig& cfg, const Report& r);

}  // namespace rlab::cli
