#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "cli.hpp"
#include "rlab/errors.hpp"

using namespace rlab::cli;

int main(int argc, char** argv) {
  CLI::App app{"rlab: zero-energy resolvent and Riesz transform checks on cones"};
  app.require_subcommand(1);

  std::string config_path, problem, out, tol_text;
  std::vector<std::string> tols, suites;
  long seed = -1;
  bool all = false;
  std::map<Command, CLI::App*> subs;
  for (const char* name : {"specfun", "cone-kernel", "solve", "zero-modes", "expand", "riesz-sweep", "verify"}) {
    CLI::App* s = app.add_subcommand(name);
    s->add_option("--config", config_path, "YAML run configuration");
    s->add_option("--problem", problem, "YAML problem definition");
    s->add_option("--out", out, "output directory (default: print to stdout)");
    s->add_option("--seed", seed, "seed for randomized grids");
    s->add_option("--tol", tols, "tolerance override key=value");
    subs[*parse_command(name)] = s;
  }
  subs[Command::verify]->add_flag("--all", all, "run every acceptance suite");
  subs[Command::verify]->add_option("--suite", suites, "suite name (repeatable)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    Command cmd = Command::verify;
    for (const auto& [c, s] : subs)
      if (s->parsed()) cmd = c;
    RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
    cfg.command = cmd;
    if (!problem.empty()) cfg.problem_path = problem;
    if (!out.empty()) cfg.output_dir = out;
    if (seed >= 0) cfg.seed = static_cast<unsigned>(seed);
    if (all) cfg.all = true;
    for (const auto& s : suites) cfg.suites.push_back(s);
    if (!tols.empty()) {
      std::string yaml = "tolerances:\n";
      for (const auto& t : tols) {
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw rlab::ParseError("--tol expects key=value", 0);
        yaml += "  " + t.substr(0, eq) + ": " + t.substr(eq + 1) + "\n";
      }
      for (const auto& [k, v] : parse_config(yaml).tolerances) cfg.tolerances[k] = v;
    }
    return emit(cfg, run(cfg));
  } catch (const rlab::ParseError& e) {
    std::cerr << "error";
    if (e.line > 0) std::cerr << " (line " << e.line << ")";
    std::cerr << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
