#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oocalc/alias.hpp"
#include "oocalc/ast.hpp"

#include <fstream>
#include <sstream>

using namespace oocalc;

namespace {
SourceUnit load_reverse() {
  std::ifstream f(std::string(FIXTURES_DIR) + "/reverse.oo");
  std::stringstream ss;
  ss << f.rdbuf();
  return classify_setters(parse(ss.str()));
}
} // namespace

TEST_CASE("reverse analysis proves the key facts without cuts") {
  auto unit = load_reverse();
  const RoutineDef* rd = unit.find_routine("reverse");
  FactBase fb = analyze_routine(unit, *rd);

  // previous and next never alias inside the loop body.
  CHECK(fb.never_alias(parse_term_string("previous"),
                       parse_term_string("next"), "i4"));
  // the chain stays acyclic throughout.
  CHECK(fb.acyclic_at(parse_term_string("next"), "right", "i1"));
  CHECK(fb.acyclic_at(parse_term_string("previous"), "right", "i1"));
  // previous is off next's chain (the ICY frame guard).
  CHECK(fb.not_in_chain(parse_term_string("previous"),
                        parse_term_string("next"), "right", "i4"));
}

TEST_CASE("queries are conservative: unknown pairs may alias") {
  auto unit = load_reverse();
  const RoutineDef* rd = unit.find_routine("reverse");
  FactBase fb = analyze_routine(unit, *rd);
  // e ~ e trivially may alias.
  CHECK_FALSE(fb.never_alias(parse_term_string("next"),
                             parse_term_string("next"), "i1"));
  // nothing links temp and first.right.right apart.
  CHECK_FALSE(fb.never_alias(parse_term_string("temp"),
                             parse_term_string("first.right.right"), "i1"));
}

TEST_CASE("assumed facts stem from the precondition only") {
  auto unit = load_reverse();
  const RoutineDef* rd = unit.find_routine("reverse");
  FactBase fb = analyze_routine(unit, *rd);
  for (auto& a : fb.assumed_facts())
    CHECK(a.find("acyclic") != std::string::npos);
}

TEST_CASE("transfer kills facts about the written variable") {
  auto unit = load_reverse();
  AliasState s;
  s.void_vars.insert("p");
  auto i = std::make_shared<Instr>();
  i->kind = InstrKind::Assign;
  i->target = "p";
  i->source = parse_term_string("q");
  AliasState s2 = transfer(i, s, unit, {});
  CHECK(s2.void_vars.count("p") == 0);
}

TEST_CASE("join keeps only facts common to both branches") {
  AliasState a, b;
  a.void_vars.insert("p");
  a.void_vars.insert("q");
  b.void_vars.insert("q");
  AliasState j = join(a, b);
  CHECK(j.void_vars.count("q") == 1);
  CHECK(j.void_vars.count("p") == 0);
}

TEST_CASE("access paths order and render") {
  AccessPath p{"p", {"right"}};
  AccessPath q{"q", {}};
  CHECK(p.str() == "p.right");
  CHECK((p < q || q < p));
  CHECK(to_access_path(parse_term_string("p.right")).has_value());
  CHECK_FALSE(to_access_path(parse_term_string("p ++ q")).has_value());
}
