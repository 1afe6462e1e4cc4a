#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oocalc/driver.hpp"

#include <fstream>
#include <sstream>

using namespace oocalc;

namespace {
std::string slurp(const std::string& name) {
  std::ifstream f(std::string(FIXTURES_DIR) + "/" + name);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}
SourceUnit load(const std::string& name) {
  return classify_setters(parse(slurp(name)));
}
} // namespace

TEST_CASE("prove: reverse is PROVED with no assumptions beyond the require") {
  auto unit = load("reverse.oo");
  Verdict v = prove(unit, "reverse");
  CHECK(v.status == Verdict::Status::Proved);
  CHECK(v.exit_code() == 0);
  CHECK(v.obligations.empty());
  CHECK(v.render().find("VERDICT: PROVED") != std::string::npos);
  for (auto& a : v.assumptions_used)
    CHECK(a.find("acyclic") != std::string::npos);
}

TEST_CASE("prove: the swapped mutant fails at preservation") {
  auto unit = load("reverse_swapped.oo");
  Verdict v = prove(unit, "reverse");
  CHECK(v.status == Verdict::Status::Failed);
  CHECK(v.exit_code() == 1);
  CHECK(v.reason.find("preservation") != std::string::npos);
  CHECK(v.render().find("VERDICT: FAILED") != std::string::npos);
}

TEST_CASE("prove: trivial loop invariant is PROVED") {
  auto unit = load("trivial.oo");
  Verdict v = prove(unit, "noop");
  CHECK(v.status == Verdict::Status::Proved);
}

TEST_CASE("prove: unknown routine is a usage error") {
  auto unit = load("reverse.oo");
  CHECK_THROWS_AS(prove(unit, "missing"), DriverError);
}

TEST_CASE("run: 5-cell list reverses with all assertions holding") {
  auto unit = load("reverse.oo");
  RunReport rep = run_routine(unit, "reverse", slurp("list5.heap"));
  CHECK(rep.ok);
  CHECK(rep.messages.empty());
  // chain now runs 6 -> 5 -> 4 -> 3 -> 2 -> Void
  CHECK(rep.final_heap.at(1).refs.at("first") == 6);
  CHECK(rep.final_heap.at(6).refs.at("right") == 5);
  CHECK(rep.final_heap.at(2).refs.at("right") == kVoid);
}

TEST_CASE("run: cyclic heap violates the precondition before the body runs") {
  auto unit = load("reverse.oo");
  RunReport rep = run_routine(unit, "reverse", slurp("list_cyclic.heap"));
  CHECK_FALSE(rep.ok);
  REQUIRE(!rep.messages.empty());
  CHECK(rep.messages[0].find("precondition") != std::string::npos);
  // untouched heap: the cycle is still there
  CHECK(rep.final_heap.at(3).refs.at("right") == 2);
}

TEST_CASE("run: empty list is a trivial pass") {
  auto unit = load("reverse.oo");
  RunReport rep = run_routine(unit, "reverse", slurp("list_empty.heap"));
  CHECK(rep.ok);
  CHECK(rep.final_heap.at(1).refs.at("first") == kVoid);
}

TEST_CASE("run: mutant breaks the invariant on three cells") {
  auto unit = load("reverse_swapped.oo");
  std::string heap3 =
      "object 1 : LIST { first -> 2 }\n"
      "object 2 : LINKABLE { right -> 3 ; item = 1 }\n"
      "object 3 : LINKABLE { right -> 4 ; item = 2 }\n"
      "object 4 : LINKABLE { right -> Void ; item = 3 }\n"
      "current = 1\n";
  RunReport rep = run_routine(unit, "reverse", heap3);
  CHECK_FALSE(rep.ok);
  bool inv = false;
  for (auto& m : rep.messages)
    if (m.find("invariant violated at iteration") != std::string::npos)
      inv = true;
  CHECK(inv);
}

TEST_CASE("alias_query answers all four verdict forms") {
  auto unit = load("reverse.oo");
  CHECK(alias_query(unit, "reverse", "i4", "previous ~ next") == "NEVER");
  CHECK(alias_query(unit, "reverse", "i4", "next ~ next") == "MAY");
  CHECK(alias_query(unit, "reverse", "i1", "acyclic(next, right)") == "YES");
  CHECK(alias_query(unit, "reverse", "i1", "acyclic(temp, item)") == "UNKNOWN");
  CHECK_THROWS_AS(alias_query(unit, "reverse", "nowhere", "a ~ b"),
                  DriverError);
  CHECK_THROWS_AS(alias_query(unit, "reverse", "i1", "gibberish"),
                  DriverError);
}
