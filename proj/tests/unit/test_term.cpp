#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oocalc/ast.hpp"
#include "oocalc/term.hpp"

using namespace oocalc;

TEST_CASE("normalize is idempotent and rendering is stable") {
  const char* samples[] = {
      "previous.integral(right)",
      "rev(previous.integral(right)) ++ next.integral(right)",
      "<<next>> ++ previous.integral(right)",
      "first.integral(right) = rev(old(first.integral(right)))",
      "next.depth(right)",
      "next = Void",
      "x.y.x",
  };
  for (auto* s : samples) {
    TermPtr t = normalize(parse_term_string(s));
    CHECK(to_string(t) == s);
    CHECK(to_string(normalize(t)) == s);
  }
}

TEST_CASE("current prefix collapses under normalization") {
  TermPtr t = normalize(dot(current(), attr("x")));
  CHECK(to_string(t) == "x");
}

TEST_CASE("substitute replaces variables, not attributes") {
  TermPtr t = parse_term_string("v ++ x.integral(right)");
  TermPtr r = normalize(substitute(t, {"v", "x"}, {void_(), var("w")}));
  // x here parses as an attribute path head only if no local named x exists;
  // parse_term_string treats bare names as variables, so both move.
  CHECK(to_string(r) == to_string(normalize(
      parse_term_string("Void ++ w.integral(right)"))));
}

TEST_CASE("fold and unfold integral are inverse on chain heads") {
  TermPtr t = parse_term_string("<<p>> ++ p.right.integral(right)");
  TermPtr folded = fold_integral(t);
  CHECK(to_string(normalize(folded)) == "p.integral(right)");
  TermPtr unfolded = unfold_integral(normalize(folded));
  CHECK(to_string(normalize(unfolded)) ==
        to_string(normalize(t)));
}

TEST_CASE("concat_elements flattens nested concatenations") {
  TermPtr t = concat(concat(singleton(var("a")), singleton(var("b"))),
                     singleton(var("c")));
  auto elems = concat_elements(normalize(t));
  REQUIRE(elems.size() == 3);
  CHECK(to_string(elems[0]) == "<<a>>");
  CHECK(to_string(elems[2]) == "<<c>>");
}

TEST_CASE("as_path decomposes attribute chains") {
  auto pv = as_path(normalize(dot(var("p"), dot(attr("right"), attr("right")))));
  REQUIRE(pv.has_value());
  CHECK(to_string(pv->root) == "p");
  REQUIRE(pv->attrs.size() == 2);
  CHECK(pv->attrs[0] == "right");
}

TEST_CASE("contains_old spots old anywhere") {
  CHECK(contains_old(parse_term_string("x = old(y)")));
  CHECK_FALSE(contains_old(parse_term_string("x = y")));
}
