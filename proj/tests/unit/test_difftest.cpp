#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oocalc/difftest.hpp"

using namespace oocalc;

TEST_CASE("small runs are clean and deterministic") {
  DiffOptions opt;
  opt.seed = 5;
  opt.cases = 1600;
  opt.max_objects = 6;
  DiffReport a = run_difftest(opt);
  DiffReport b = run_difftest(opt);
  CHECK(a.total_failed == 0);
  CHECK(a.total_cases == 1600);
  CHECK(a.render() == b.render());
  // every rule got instances
  for (RuleId r : all_rules()) CHECK(a.stats[r].cases > 0);
}

TEST_CASE("different seeds explore different cases") {
  DiffOptions a, b;
  a.seed = 1;
  b.seed = 2;
  a.cases = b.cases = 320;
  CHECK(run_difftest(a).render() != run_difftest(b).render());
}

TEST_CASE("zero cases give an empty summary") {
  DiffOptions opt;
  opt.cases = 0;
  DiffReport rep = run_difftest(opt);
  CHECK(rep.total_cases == 0);
  CHECK(rep.failures.empty());
}

TEST_CASE("rule filter restricts the run") {
  DiffOptions opt;
  opt.rules = {RuleId::AX, RuleId::AY};
  opt.cases = 100;
  DiffReport rep = run_difftest(opt);
  CHECK(rep.stats[RuleId::AX].cases + rep.stats[RuleId::AY].cases == 100);
  CHECK(rep.stats[RuleId::PAX].cases == 0);
}

TEST_CASE("guard demos show the conditions are load-bearing") {
  GuardDemo pax = pax_guard_demo();
  CHECK_FALSE(pax.condition_holds);
  CHECK(pax.rewritten_pre != pax.original_post);

  GuardDemo ia = ia_guard_demo();
  CHECK_FALSE(ia.condition_holds);
  REQUIRE(ia.original_post.type == Value::Seq);
  REQUIRE(ia.rewritten_pre.type == Value::Seq);
  CHECK(ia.original_post.seq.size() == 2);
  CHECK(ia.rewritten_pre.seq.size() == 4);
}
