#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oocalc/ast.hpp"

#include <fstream>
#include <sstream>

using namespace oocalc;

namespace {
std::string slurp(const std::string& path) {
  std::ifstream f(path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}
} // namespace

TEST_CASE("reverse fixture parses with the expected structure") {
  auto unit = parse(slurp(std::string(FIXTURES_DIR) + "/reverse.oo"));
  REQUIRE(unit.classes.size() == 2);
  const RoutineDef* rev = unit.find_routine("LIST", "reverse");
  REQUIRE(rev != nullptr);
  CHECK(rev->precondition.size() == 1);
  CHECK(rev->postcondition.size() == 1);
  CHECK(rev->locals.size() == 3);

  const Instr* loop = nullptr;
  for (auto& i : rev->body)
    if (i->kind == InstrKind::Loop) loop = i.get();
  REQUIRE(loop != nullptr);
  CHECK(loop->init.size() == 2);
  CHECK(loop->body.size() == 4);
  CHECK(loop->invariants.size() == 1);
  CHECK(loop->variant != nullptr);
  // body instruction labels i1..i4
  CHECK(loop->body[0]->label == "i1");
  CHECK(loop->body[3]->label == "i4");
}

TEST_CASE("setter classification marks set_right a nonprodigal simple setter") {
  auto unit =
      classify_setters(parse(slurp(std::string(FIXTURES_DIR) + "/reverse.oo")));
  const RoutineDef* s = unit.find_routine("LINKABLE", "set_right");
  REQUIRE(s != nullptr);
  CHECK(s->setter_class == SetterClass::SimpleSetterFor);
  CHECK(s->setter_attr == "right");
  CHECK(s->nonprodigal);
}

TEST_CASE("affects analysis covers direct and indirect writes") {
  const char* src = R"(
class A feature
  x : detachable A

  set_x (v : detachable A)
    do
      x := v
    ensure
      x = v
    end

  touch (v : detachable A)
    do
      set_x (v)
    end
end
)";
  auto unit = classify_setters(parse(src));
  const RoutineDef* t = unit.find_routine("touch");
  REQUIRE(t != nullptr);
  bool covers = false;
  for (auto& a : t->direct_affects)
    if (a == "x") covers = true;
  for (auto& a : t->indirect_affects)
    if (a == "x") covers = true;
  CHECK((covers || t->affects_unknown));
}

TEST_CASE("parse errors carry positions") {
  CHECK_THROWS_AS(parse("class feature end"), ParseError);
  CHECK_THROWS_AS(parse_term_string("x ++"), ParseError);
}

TEST_CASE("round trip through to_string preserves the unit") {
  auto unit = parse(slurp(std::string(FIXTURES_DIR) + "/reverse.oo"));
  auto again = parse(to_string(unit));
  CHECK(equal(unit, again));
}
