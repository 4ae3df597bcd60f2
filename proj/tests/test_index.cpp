#include <doctest.h>

#include "rlab/errors.hpp"
#include "rlab/index_algebra.hpp"

using namespace rlab;

TEST_CASE("index set text round trip") {
  const std::string text = "{(-2,0),(-1,0),(0,1)}+trunc(2)";
  const IndexSet s = IndexSet::parse(text);
  CHECK(s.to_string() == text);
  CHECK(s.entries().size() == 3);
  CHECK(s.truncation() == 2);
  CHECK(s.log_bearing());
  CHECK_THROWS_AS(IndexSet::parse("{(-2,0"), ParseError);
}

TEST_CASE("shift, union, admits") {
  const IndexSet a = IndexSet::parse("{(-2,0)}+trunc(0)");
  const IndexSet b = IndexSet::parse("{(-1,0),(0,1)}");
  const IndexSet s = shift(a, 1);
  CHECK(s.entries()[0].order == -1);
  CHECK(s.truncation() == 1);
  const IndexSet u = set_union(a, b);
  CHECK(u.truncation() == 0);
  CHECK(u.admits(-1, 0));
  CHECK_FALSE(u.admits(-0.5, 0));
  CHECK(u.admits(3.5, 2));  // above the truncation marker
  CHECK(min_order(u)->order == -2);
}

TEST_CASE("theorem families") {
  const IndexFamily f = theorem_index_family(Theorem::euclidean_nullspace, 5, 1);
  CHECK(f.count(Face::zf) == 1);
  CHECK(f.at(Face::zf).admits(-2, 0));
  CHECK_THROWS_AS(theorem_index_family(Theorem::dim3_full, 4, 2), PreconditionError);
  CHECK_THROWS_AS(theorem_index_family(Theorem::euclidean_nullspace, 5, 2.5), PreconditionError);
  const IndexFamily r = fractional_index_family(3, 0.75, true);
  CHECK(r.at(Face::zf).admits(-1.5, 0));
  CHECK_THROWS_AS(fractional_index_family(3, 1.25, true), PreconditionError);
}
