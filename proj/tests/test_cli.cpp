#include <doctest.h>

#include "cli.hpp"
#include "rlab/errors.hpp"

using namespace rlab;
using namespace rlab::cli;

TEST_CASE("minimal configuration takes defaults") {
  const RunConfig c = parse_config("command: zero-modes\n");
  CHECK(c.command == Command::zero_modes);
  CHECK(c.seed == 20240531);
  CHECK(c.tolerances.empty());
  CHECK(c.output_dir.empty());
  CHECK(parse_config("").command == Command::verify);
}

TEST_CASE("unknown keys are rejected with their line") {
  try {
    parse_config("command: expand\nseed: 3\nfoo: 1\n");
    FAIL("no error");
  } catch (const ParseError& e) {
    CHECK(e.line == 3);
    CHECK(std::string(e.what()).find("foo") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config("tolerances:\n  nonsense: 0.1\n"), ParseError);
  CHECK_THROWS_AS(parse_config("command: [\n"), ParseError);
}

TEST_CASE("tolerance overrides must lie in (0, 1)") {
  CHECK(parse_config("tolerances:\n  projector: 0.01\n").tolerances.at("projector") == 0.01);
  CHECK_THROWS_AS(parse_config("tolerances:\n  projector: 1.5\n"), RangeError);
  CHECK_THROWS_AS(parse_config("tolerances:\n  projector: 0\n"), RangeError);
}

TEST_CASE("problem files") {
  const RadialProblem p = parse_problem("n: 5\npotential: mode\nmode: 1\nprofile: {a: 1, factors: [[1, 2, 1.25]]}\n");
  CHECK(p.n == 5);
  CHECK(detect_kernel(p, 2).kernel_dimension == 5);
  CHECK(parse_problem("preset: conic 0.75\n").geom.link == LinkKind::scaled_sphere);
  CHECK_THROWS_AS(parse_problem("n: 3\nlink: oval\n"), ParseError);
  CHECK_THROWS_AS(parse_problem("preset: free 3\nn: 3\n"), ParseError);
}

TEST_CASE("reports are deterministic and carry the overrides") {
  RunConfig c = parse_config("command: verify\nsuites: [bessel]\ntolerances:\n  wronskian: 1e-11\n");
  const Report a = run(c), b = run(c);
  CHECK(a.json.dump() == b.json.dump());
  CHECK(a.pass);
  CHECK(a.json["tolerance_overrides"]["wronskian"] == 1e-11);
  CHECK(a.json["suites"][0]["checks"][0]["tolerance"] == 1e-11);
  c.suites = {"lemma-comp"};
  CHECK_FALSE(run(c).pass);
}

TEST_CASE("expand on the free problem reports no kernel") {
  RunConfig c;
  c.command = Command::expand;
  c.problem_path = "";
  CHECK_THROWS_AS(run(c), PreconditionError);
}
