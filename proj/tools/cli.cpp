#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "rlab/errors.hpp"
#include "rlab/expansion.hpp"
#include "rlab/riesz.hpp"
#include "rlab/specfun.hpp"
#include "rlab/verify.hpp"

namespace rlab::cli {

using nlohmann::ordered_json;

namespace {

const std::pair<Command, const char*> kCommands[] = {
    {Command::specfun, "specfun"},       {Command::cone_kernel, "cone-kernel"}, {Command::solve, "solve"},
    {Command::zero_modes, "zero-modes"}, {Command::expand, "expand"},           {Command::riesz_sweep, "riesz-sweep"},
    {Command::verify, "verify"}};

int line_of(const YAML::Node& n) { return n.Mark().line + 1; }

[[noreturn]] void fail_at(const YAML::Node& n, const std::string& what) { throw ParseError(what, line_of(n)); }

template <class T>
T get(const YAML::Node& n, const std::string& key) {
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    fail_at(n, "bad value for '" + key + "'");
  }
}

std::vector<double> get_list(const YAML::Node& n, const std::string& key) {
  if (!n.IsSequence()) fail_at(n, "'" + key + "' must be a list");
  std::vector<double> v;
  for (const auto& x : n) v.push_back(get<double>(x, key));
  return v;
}

YAML::Node load_yaml(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ParseError(e.msg, e.mark.line + 1);
  }
  if (root.IsNull()) return YAML::Node(YAML::NodeType::Map);
  if (!root.IsMap()) throw ParseError("expected a mapping of keys to values", line_of(root));
  return root;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

ordered_json check_json(const CoefficientCheck& c) {
  return {{"name", c.name},         {"predicted", c.predicted}, {"fitted", c.fitted}, {"error", c.rel_err},
          {"tolerance", c.tolerance}, {"pass", c.pass},          {"note", c.note}};
}

ordered_json fit_json(const ExpansionFit& f) {
  ordered_json terms = ordered_json::array();
  for (size_t i = 0; i < f.basis.size(); ++i)
    terms.push_back({{"term", f.basis[i].label()}, {"coefficient", f.coeff[i]}, {"stderr", f.stderr_[i]}});
  return {{"terms", terms},
          {"residual", f.residual_norm},
          {"condition", f.condition},
          {"trusted", f.trusted()},
          {"k_min", f.k_min},
          {"k_max", f.k_max},
          {"samples", f.samples}};
}

std::string csv_number(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

const char* method_name(BesselMethod m) {
  switch (m) {
    case BesselMethod::series: return "series";
    case BesselMethod::uniform_asymptotic: return "uniform_asymptotic";
    case BesselMethod::continued_fraction: return "continued_fraction";
  }
  return "?";
}

std::vector<PointPair> config_pairs(const RunConfig& cfg) {
  std::vector<PointPair> out;
  for (const auto& p : cfg.pairs) out.push_back({p[0], p[1], p[2]});
  return out;
}

RadialProblem need_problem(const RunConfig& cfg) {
  if (cfg.problem_path.empty()) throw PreconditionError(std::string(command_name(cfg.command)) + " needs a problem file");
  return load_problem(cfg.problem_path);
}

Report run_specfun(const RunConfig& cfg) {
  Report r;
  std::ostringstream csv;
  csv << "nu,z,I,K,method_I,method_K,wronskian_error\n";
  ordered_json values = ordered_json::array(), expansions = ordered_json::array();
  for (double nu : cfg.nu) {
    for (double z : cfg.z) {
      const BesselEval i = bessel_i_eval(nu, z), k = bessel_k_eval(nu, z);
      const BesselIK b = bessel_ik_log(nu, z);
      const double w = std::abs(std::exp(b.log_i + b.log_k) * (b.dk_over_k - b.di_over_i) * z + 1);
      values.push_back({{"nu", nu},
                        {"z", z},
                        {"I", i.value},
                        {"K", k.value},
                        {"method_I", method_name(i.method)},
                        {"method_K", method_name(k.method)},
                        {"wronskian_error", w}});
      csv << csv_number(nu) << ',' << csv_number(z) << ',' << csv_number(i.value) << ',' << csv_number(k.value) << ','
          << method_name(i.method) << ',' << method_name(k.method) << ',' << csv_number(w) << '\n';
    }
    const SmallArgExpansion e = small_arg_expansion(nu, BesselFamily::K, cfg.truncation);
    ordered_json terms = ordered_json::array();
    for (const auto& t : e.terms) terms.push_back({{"power", t.power}, {"logpower", t.logpower}, {"coefficient", t.coefficient}});
    expansions.push_back({{"nu", nu},
                          {"family", "K"},
                          {"terms", terms},
                          {"truncation_power", e.truncation_power},
                          {"truncation_logpower", e.truncation_logpower}});
  }
  r.json["values"] = values;
  r.json["expansions"] = expansions;
  r.csv["specfun.csv"] = csv.str();
  return r;
}

Report run_cone_kernel(const RunConfig& cfg) {
  Report r;
  const ConeGeometry g = cfg.problem_path.empty() ? ConeGeometry::round(cfg.n) : need_problem(cfg).geom;
  const auto modes = mode_table(g, cfg.j_max);
  ordered_json table = ordered_json::array();
  for (const auto& m : modes)
    table.push_back({{"j", m.j},
                     {"lambda", m.lambda},
                     {"nu", m.nu},
                     {"multiplicity", m.multiplicity},
                     {"projection_kernel", link_projection_kernel(g, m.j, cfg.costheta)}});
  r.json["n"] = g.n;
  r.json["modes"] = table;
  r.json["kappa"] = cfg.kappa;
  r.json["kappa_p"] = cfg.kappa_p;
  r.json["costheta"] = cfg.costheta;
  r.json["mode_tail_tolerance"] = 1e-8;
  r.json["bf0_kernel"] = bf0_kernel(g, modes, cfg.kappa, cfg.kappa_p, cfg.costheta, std::nullopt, 1e-8);
  r.json["ff_kernel"] = ff_kernel(g, modes, cfg.kappa / cfg.kappa_p, cfg.costheta, 1e-8);
  return r;
}

Report run_solve(const RunConfig& cfg) {
  Report r;
  const RadialProblem p = need_problem(cfg);
  const ResolventSampler s(p);
  const auto grid = geometric_grid(cfg.k_min, cfg.k_max, cfg.per_decade);
  const auto pairs = config_pairs(cfg);
  const auto samples = s.sample(pairs, grid);
  std::ostringstream csv;
  csv << "pair,r,r_p,costheta,k,value,modes_used,tail_bound\n";
  for (size_t a = 0; a < pairs.size(); ++a)
    for (const auto& row : samples) {
      const auto& x = row[a];
      csv << a << ',' << csv_number(x.r) << ',' << csv_number(x.r_p) << ',' << csv_number(x.costheta) << ','
          << csv_number(x.k) << ',' << csv_number(x.value) << ',' << x.modes_used << ',' << csv_number(x.tail_bound)
          << '\n';
    }
  r.json["samples"] = static_cast<int>(grid.size() * pairs.size());
  r.json["bound_state_scale"] = s.bound_state_scale();
  r.csv["resolvent.csv"] = csv.str();
  return r;
}

ordered_json report_json(const ZeroModeReport& rep) {
  ordered_json modes = ordered_json::array();
  for (const auto& m : rep.modes)
    modes.push_back({{"j", m.j},
                     {"nu", m.nu},
                     {"count", m.count},
                     {"l2", m.l2},
                     {"decay_exponent", m.decay_exponent},
                     {"regular_exponent", m.regular_exponent},
                     {"indicator", m.indicator},
                     {"bound_states", m.bound_states}});
  ordered_json j = {{"modes", modes},
                    {"kernel_dimension", rep.kernel_dimension},
                    {"resonance", rep.resonance},
                    {"m_prime", rep.m_prime},
                    {"m_condition", rep.m_condition}};
  j["m"] = rep.m < 1e299 ? ordered_json(rep.m) : ordered_json("none");
  return j;
}

Report run_zero_modes(const RunConfig& cfg) {
  Report r;
  const RadialProblem p = need_problem(cfg);
  r.json["report"] = report_json(detect_kernel(p, std::min(cfg.j_max, 8)));
  return r;
}

Report run_expand(const RunConfig& cfg) {
  Report r;
  const RadialProblem p = need_problem(cfg);
  const ZeroModeReport rep = detect_kernel(p, 4);
  const ResolventSampler s(p);
  const auto grid = geometric_grid(cfg.k_min, cfg.k_max, cfg.per_decade);
  const auto pairs = config_pairs(cfg);
  const auto samples = s.sample(pairs, grid);
  const std::vector<BasisTerm> basis = {{-2, 0, 0}, {-1, 0, 0}, {0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {3, 0, 0}};
  ordered_json fits = ordered_json::array();
  for (size_t a = 0; a < pairs.size(); ++a) {
    std::vector<GreenSample> col;
    for (const auto& row : samples) col.push_back(row[a]);
    const ExpansionFit fit = fit_expansion(col, basis);
    const CoefficientCheck c =
        rep.kernel_dimension > 0
            ? check_leading_projector(p, rep, pairs[a], fit, Convention::function,
                                      cfg.tolerances.count("projector") ? cfg.tolerances.at("projector") : 1e-3)
            : check_vanishing("no kernel: k^-2 vanishes", fit, {-2, 0, 0}, std::abs(fit.coefficient({0, 0, 0})));
    r.pass = r.pass && c.pass;
    fits.push_back({{"pair", {pairs[a].r, pairs[a].r_p, pairs[a].costheta}},
                    {"fit", fit_json(fit)},
                    {"check", check_json(c)},
                    {"verdict", rep.kernel_dimension > 0 ? "kernel" : "no kernel"}});
  }
  r.json["zero_modes"] = report_json(rep);
  r.json["fits"] = fits;
  return r;
}

Report run_riesz_sweep(const RunConfig& cfg) {
  Report r;
  const RadialProblem p = need_problem(cfg);
  const ZeroModeReport rep = detect_kernel(p, 4);
  const ThresholdPrediction pred = threshold_range(p.n, rep.m_prime);
  const auto probes = lp_threshold_sweep(p, pred, cfg.p_list, cfg.R_grid);
  ordered_json out = ordered_json::array();
  for (const auto& pr : probes) {
    r.pass = r.pass && pr.consistent && !pr.inconclusive;
    out.push_back({{"family", family_name(pr.family)},
                   {"j", pr.j},
                   {"p", pr.p},
                   {"R", pr.R_grid},
                   {"norm_ratios", pr.norm_ratios},
                   {"slope", pr.fitted_slope},
                   {"stderr", pr.slope_stderr},
                   {"predicted_slope", pr.predicted_slope},
                   {"inconclusive", pr.inconclusive},
                   {"consistent", pr.consistent}});
  }
  r.json["thresholds"] = {pred.p_lo, pred.p_hi};
  r.json["m_prime"] = rep.m_prime;
  r.json["probes"] = out;
  return r;
}

Report run_verify(const RunConfig& cfg) {
  Report r;
  std::vector<int> ids;
  if (cfg.all)
    for (int i = 1; i <= kCriteria; ++i) ids.push_back(i);
  for (const auto& s : cfg.suites) {
    const auto id = suite_id(s);
    if (!id) throw DomainError("unknown suite '" + s + "'");
    if (std::find(ids.begin(), ids.end(), *id) == ids.end()) ids.push_back(*id);
  }
  if (ids.empty()) throw PreconditionError("verify needs --all or --suite");
  VerifyOptions opt;
  opt.seed = cfg.seed;
  opt.tolerances = cfg.tolerances;
  ordered_json suites = ordered_json::array();
  for (int id : ids) {
    const SuiteResult s = run_criterion(id, opt);
    std::cerr << "criterion " << id << " (" << suite_names()[id - 1] << "): " << (s.pass ? "PASS" : "FAIL") << " in "
              << s.seconds << " s\n";
    ordered_json checks = ordered_json::array();
    for (const auto& c : s.checks) checks.push_back(check_json(c));
    suites.push_back({{"criterion", id},
                      {"suite", suite_names()[id - 1]},
                      {"title", s.title},
                      {"pass", s.pass},
                      {"checks", checks},
                      {"notes", s.notes}});
    r.pass = r.pass && s.pass;
  }
  r.json["suites"] = suites;
  return r;
}

}  // namespace

const char* command_name(Command c) {
  for (const auto& [k, s] : kCommands)
    if (k == c) return s;
  return "?";
}

std::optional<Command> parse_command(const std::string& s) {
  for (const auto& [k, name] : kCommands)
    if (s == name) return k;
  return std::nullopt;
}

RunConfig parse_config(const std::string& text) {
  const YAML::Node root = load_yaml(text);
  RunConfig c;
  for (const auto& kv : root) {
    const std::string key = kv.first.as<std::string>();
    const YAML::Node& v = kv.second;
    if (key == "command") {
      const auto cmd = parse_command(get<std::string>(v, key));
      if (!cmd) fail_at(v, "unknown command '" + v.as<std::string>() + "'");
      c.command = *cmd;
    } else if (key == "problem") {
      c.problem_path = get<std::string>(v, key);
    } else if (key == "output_dir") {
      c.output_dir = get<std::string>(v, key);
    } else if (key == "seed") {
      const long s = get<long>(v, key);
      if (s < 0) fail_at(v, "seed must be a natural number");
      c.seed = static_cast<unsigned>(s);
    } else if (key == "tolerances") {
      if (!v.IsMap()) fail_at(v, "'tolerances' must be a mapping");
      const auto& known = tolerance_keys();
      for (const auto& t : v) {
        const std::string name = t.first.as<std::string>();
        if (std::find(known.begin(), known.end(), name) == known.end())
          fail_at(t.first, "unknown tolerance key '" + name + "'");
        const double x = get<double>(t.second, name);
        if (!(x > 0 && x < 1)) {
          std::ostringstream os;
          os << "line " << line_of(t.second) << ": tolerance '" << name << "' = " << x << " outside (0, 1)";
          throw RangeError(os.str());
        }
        c.tolerances[name] = x;
      }
    } else if (key == "suites") {
      if (!v.IsSequence()) fail_at(v, "'suites' must be a list");
      for (const auto& s : v) {
        const std::string name = get<std::string>(s, key);
        if (!suite_id(name)) fail_at(s, "unknown suite '" + name + "'");
        c.suites.push_back(name);
      }
    } else if (key == "all") {
      c.all = get<bool>(v, key);
    } else if (key == "nu") {
      c.nu = get_list(v, key);
    } else if (key == "z") {
      c.z = get_list(v, key);
    } else if (key == "truncation") {
      c.truncation = get<double>(v, key);
    } else if (key == "n") {
      c.n = get<int>(v, key);
    } else if (key == "j_max") {
      c.j_max = get<int>(v, key);
    } else if (key == "kappa") {
      c.kappa = get<double>(v, key);
    } else if (key == "kappa_p") {
      c.kappa_p = get<double>(v, key);
    } else if (key == "costheta") {
      c.costheta = get<double>(v, key);
    } else if (key == "k_min") {
      c.k_min = get<double>(v, key);
    } else if (key == "k_max") {
      c.k_max = get<double>(v, key);
    } else if (key == "per_decade") {
      c.per_decade = get<int>(v, key);
    } else if (key == "pairs") {
      if (!v.IsSequence()) fail_at(v, "'pairs' must be a list of [r, r', cos theta]");
      c.pairs.clear();
      for (const auto& p : v) {
        auto x = get_list(p, key);
        if (x.size() != 3) fail_at(p, "each pair is [r, r', cos theta]");
        c.pairs.push_back(x);
      }
    } else if (key == "p_list") {
      c.p_list = get_list(v, key);
    } else if (key == "R_grid") {
      c.R_grid = get_list(v, key);
    } else {
      fail_at(kv.first, "unknown key '" + key + "'");
    }
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  RunConfig c = parse_config(read_file(path));
  if (!c.problem_path.empty() && std::filesystem::path(c.problem_path).is_relative())
    c.problem_path = (std::filesystem::path(path).parent_path() / c.problem_path).string();
  return c;
}

RadialProblem parse_problem(const std::string& text, const std::string& base_dir) {
  const YAML::Node root = load_yaml(text);
  static const std::set<std::string> known = {"n",       "link",    "c",     "potential", "mode",
                                              "profile", "table",   "preset", "r_min",    "r_max",
                                              "steps_per_unit"};
  for (const auto& kv : root)
    if (!known.count(kv.first.as<std::string>()))
      fail_at(kv.first, "unknown key '" + kv.first.as<std::string>() + "'");

  RadialProblem p;
  if (root["preset"]) {
    const YAML::Node pre = root["preset"];
    for (const char* k : {"n", "link", "c", "potential", "mode", "profile", "table"})
      if (root[k]) fail_at(root[k], std::string("'") + k + "' cannot be combined with a preset");
    std::istringstream is(get<std::string>(pre, "preset"));
    std::string name;
    is >> name;
    double a = 0, b = 0;
    if (name == "planted" && is >> a >> b) {
      p = planted_problem(static_cast<int>(a), static_cast<int>(b));
    } else if (name == "n5-m0") {
      p = n5_m0_problem();
    } else if (name == "resonance" && is >> a) {
      p = resonance_problem(static_cast<int>(a));
    } else if (name == "n3-combined") {
      p = n3_combined_problem();
    } else if (name == "conic" && is >> a) {
      p = conic_problem(a);
    } else if (name == "free" && is >> a) {
      p = free_problem(ConeGeometry::round(static_cast<int>(a)));
    } else {
      fail_at(pre, "unknown preset '" + pre.as<std::string>() +
                       "' (planted N L, n5-m0, resonance N, n3-combined, conic NU, free N)");
    }
  } else {
    if (!root["n"]) throw ParseError("missing key 'n'", line_of(root));
    const int n = get<int>(root["n"], "n");
    if (n < 2) fail_at(root["n"], "n must be at least 2");
    ConeGeometry g = ConeGeometry::round(n);
    if (root["link"]) {
      const std::string link = get<std::string>(root["link"], "link");
      if (link == "scaled") {
        if (!root["c"]) fail_at(root["link"], "a scaled link needs 'c'");
        g = ConeGeometry::scaled(n, get<double>(root["c"], "c"));
      } else if (link != "round") {
        fail_at(root["link"], "link must be 'round' or 'scaled'");
      }
    }
    const std::string pot = root["potential"] ? get<std::string>(root["potential"], "potential") : "zero";
    if (pot == "zero") {
      p = free_problem(g);
    } else if (pot == "mode") {
      if (!root["mode"] || !root["profile"]) fail_at(root["potential"], "a planted mode needs 'mode' and 'profile'");
      const YAML::Node pr = root["profile"];
      if (!pr.IsMap() || !pr["a"] || !pr["factors"]) fail_at(pr, "profile is {a: .., factors: [[R, q, b], ..]}");
      ProductProfile f;
      f.a = get<double>(pr["a"], "a");
      for (const auto& fa : pr["factors"]) {
        const auto x = get_list(fa, "factors");
        if (x.size() != 3) fail_at(fa, "each factor is [R, q, b]");
        f.factors.push_back({x[0], x[1], x[2]});
      }
      p = potential_from_mode(g, get<int>(root["mode"], "mode"), f);
    } else if (pot == "table") {
      if (!root["table"]) fail_at(root["potential"], "a tabulated potential needs 'table'");
      const std::filesystem::path path = std::filesystem::path(base_dir) / get<std::string>(root["table"], "table");
      std::istringstream in(read_file(path.string()));
      std::vector<double> rs, vs;
      std::string line;
      int ln = 0;
      while (std::getline(in, line)) {
        ++ln;
        if (line.empty() || line[0] == '#' || std::isalpha(static_cast<unsigned char>(line[0]))) continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        double r = 0, v = 0;
        if (!(ls >> r >> v)) throw ParseError(path.string() + ": expected r,V", ln);
        rs.push_back(r), vs.push_back(v);
      }
      p = free_problem(g);
      p.potential = tabulated_potential(rs, vs);
    } else {
      fail_at(root["potential"], "potential must be 'zero', 'mode' or 'table'");
    }
  }
  if (root["r_min"]) p.r_min = get<double>(root["r_min"], "r_min");
  if (root["r_max"]) p.r_max = get<double>(root["r_max"], "r_max");
  if (root["steps_per_unit"]) p.steps_per_unit = get<int>(root["steps_per_unit"], "steps_per_unit");
  return p;
}

RadialProblem load_problem(const std::string& path) {
  return parse_problem(read_file(path), std::filesystem::path(path).parent_path().string());
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> s = {"lemma-comp",   "bessel",        "free-space",  "green-constants",
                                             "projector",    "n5-anomalous",  "n3-resonance", "n4-resonance",
                                             "conic-orders", "rb0-profile",   "index-audit", "riesz-thresholds",
                                             "rayleigh"};
  return s;
}

std::optional<int> suite_id(const std::string& name) {
  const auto& s = suite_names();
  const auto it = std::find(s.begin(), s.end(), name);
  if (it != s.end()) return static_cast<int>(it - s.begin()) + 1;
  return std::nullopt;
}

Report run(const RunConfig& cfg) {
  Report r;
  switch (cfg.command) {
    case Command::specfun: r = run_specfun(cfg); break;
    case Command::cone_kernel: r = run_cone_kernel(cfg); break;
    case Command::solve: r = run_solve(cfg); break;
    case Command::zero_modes: r = run_zero_modes(cfg); break;
    case Command::expand: r = run_expand(cfg); break;
    case Command::riesz_sweep: r = run_riesz_sweep(cfg); break;
    case Command::verify: r = run_verify(cfg); break;
  }
  ordered_json head = {{"command", command_name(cfg.command)}, {"seed", cfg.seed}};
  if (!cfg.problem_path.empty()) head["problem"] = std::filesystem::path(cfg.problem_path).filename().string();
  head["tolerance_overrides"] = cfg.tolerances;
  head["pass"] = r.pass;
  head.update(r.json);
  r.json = std::move(head);
  return r;
}

int emit(const RunConfig& cfg, const Report& r) {
  const std::string text = r.json.dump(2) + "\n";
  if (cfg.output_dir.empty()) {
    std::cout << text;
    for (const auto& [name, body] : r.csv) std::cout << "# " << name << "\n" << body;
  } else {
    const std::filesystem::path dir(cfg.output_dir);
    std::filesystem::create_directories(dir);
    std::ofstream(dir / (std::string(command_name(cfg.command)) + ".json")) << text;
    for (const auto& [name, body] : r.csv) std::ofstream(dir / name) << body;
  }
  return r.pass ? 0 : 1;
}

}  // namespace rlab::cli
