#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oocalc/alias.hpp"
#include "oocalc/rewrite.hpp"

#include <fstream>
#include <sstream>

using namespace oocalc;

namespace {

SourceUnit load(const std::string& name) {
  std::ifstream f(std::string(FIXTURES_DIR) + "/" + name);
  std::stringstream ss;
  ss << f.rdbuf();
  return classify_setters(parse(ss.str()));
}

InstrPtr assign(const std::string& target, const std::string& source) {
  auto i = std::make_shared<Instr>();
  i->kind = InstrKind::Assign;
  i->target = target;
  i->source = parse_term_string(source);
  return i;
}

struct Setup {
  SourceUnit unit = load("reverse.oo");
  const RoutineDef* rd = unit.find_routine("reverse");
  FactBase fb = analyze_routine(unit, *rd);
  Engine eng{unit, *rd, &fb};
};

} // namespace

TEST_CASE("rule names round-trip") {
  for (RuleId r : all_rules()) {
    auto back = rule_from_name(rule_name(r));
    REQUIRE(back.has_value());
    CHECK(*back == r);
  }
  CHECK_FALSE(rule_from_name("NOPE").has_value());
}

TEST_CASE("assignment axioms on variables") {
  Setup s;
  TermPtr e = parse_term_string("next");
  CHECK(to_string(s.eng.apply(assign("next", "next.right"), e, nullptr)) ==
        "next.right");
  CHECK(to_string(s.eng.apply(assign("previous", "next"), e, nullptr)) ==
        "next");
}

TEST_CASE("constants and Current are invariant under any instruction") {
  Setup s;
  for (auto* txt : {"Current", "3", "Void", "<<>>"}) {
    TermPtr e = parse_term_string(txt);
    CHECK(to_string(s.eng.apply(assign("next", "previous"), e, nullptr)) ==
          to_string(normalize(e)));
  }
}

TEST_CASE("DIST distributes over the binary operators") {
  Setup s;
  auto i = assign("previous", "next");
  for (auto* txt : {"previous ++ temp.integral(right)", "previous = temp",
                    "previous.depth(right) + 1"}) {
    TermPtr e = parse_term_string(txt);
    TermPtr whole = s.eng.apply(i, e, nullptr);
    TermPtr left = s.eng.apply(i, normalize(e)->a, nullptr);
    TermPtr right = s.eng.apply(i, normalize(e)->b, nullptr);
    TermPtr glued = std::make_shared<Term>(*normalize(e));
    {
      auto g = std::make_shared<Term>(*normalize(e));
      g->a = left;
      g->b = right;
      CHECK(to_string(whole) == to_string(normalize(g)));
    }
  }
}

TEST_CASE("traces replay to the recorded result") {
  Setup s;
  const Instr* loop = nullptr;
  for (auto& i : s.rd->body)
    if (i->kind == InstrKind::Loop) loop = i.get();
  std::map<std::string, TermPtr> bindings;
  TermPtr inv = s.eng.freeze_old(loop->invariants[0], bindings);
  ProofTrace tr;
  TermPtr out = s.eng.seq_apply(loop->body, inv, &tr);
  REQUIRE(!tr.steps.empty());
  CHECK(to_string(tr.steps.back().after) == to_string(out));
  for (size_t k = 1; k < tr.steps.size(); ++k)
    CHECK(to_string(tr.steps[k - 1].after) == to_string(tr.steps[k].before));
}

TEST_CASE("qualified setter call rewrites the receiver's integral") {
  Setup s;
  auto call = std::make_shared<Instr>();
  call->kind = InstrKind::QualifiedCall;
  call->label = "i4";
  call->call_target = parse_term_string("previous");
  call->routine = "set_right";
  call->actuals = {parse_term_string("temp")};
  TermPtr e = parse_term_string("previous.integral(right)");
  ProofTrace tr;
  TermPtr out = s.eng.apply(call, e, &tr);
  CHECK(to_string(out) == "<<previous>> ++ temp.integral(right)");
  REQUIRE(tr.steps.size() == 1);
  CHECK(tr.steps[0].rule == RuleId::ICX);
  bool has_alias_side = false;
  for (auto& d : tr.steps[0].sides)
    if (d.evidence == "alias-engine") has_alias_side = true;
  CHECK(has_alias_side);
}

TEST_CASE("undischargeable side conditions raise NoRuleApplies") {
  auto unit = load("reverse_swapped.oo");
  const RoutineDef* rd = unit.find_routine("reverse");
  FactBase fb = analyze_routine(unit, *rd);
  Engine eng(unit, *rd, &fb);
  const Instr* loop = nullptr;
  for (auto& i : rd->body)
    if (i->kind == InstrKind::Loop) loop = i.get();
  std::map<std::string, TermPtr> bindings;
  TermPtr inv = eng.freeze_old(loop->invariants[0], bindings);
  CHECK_THROWS_AS(eng.seq_apply(loop->body, inv, nullptr), NoRuleApplies);
}

TEST_CASE("freeze_old and unfreeze are inverse") {
  Setup s;
  TermPtr e = parse_term_string("first.integral(right) = old(first.integral(right))");
  std::map<std::string, TermPtr> bindings;
  TermPtr frozen = s.eng.freeze_old(e, bindings);
  CHECK_FALSE(contains_old(frozen));
  CHECK_FALSE(bindings.empty());
  TermPtr back = Engine::unfreeze(frozen, bindings);
  CHECK(to_string(back) ==
        "first.integral(right) = first.integral(right)");
}

TEST_CASE("check_invariant accepts reverse and rejects the mutant") {
  {
    Setup s;
    const Instr* loop = nullptr;
    std::vector<InstrPtr> prefix;
    for (auto& i : s.rd->body) {
      if (i->kind == InstrKind::Loop) { loop = i.get(); break; }
      prefix.push_back(i);
    }
    auto rep = check_invariant(s.eng, prefix, *loop);
    REQUIRE(rep.clauses.size() == 1);
    CHECK(rep.clauses[0].established);
    CHECK(rep.clauses[0].preserved);
    CHECK(rep.all_preserved);
  }
  {
    auto unit = load("reverse_swapped.oo");
    const RoutineDef* rd = unit.find_routine("reverse");
    FactBase fb = analyze_routine(unit, *rd);
    Engine eng(unit, *rd, &fb);
    const Instr* loop = nullptr;
    for (auto& i : rd->body)
      if (i->kind == InstrKind::Loop) loop = i.get();
    auto rep = check_invariant(eng, {}, *loop);
    REQUIRE(rep.clauses.size() == 1);
    CHECK_FALSE(rep.clauses[0].preserved);
    CHECK(rep.clauses[0].failure.find("i3") != std::string::npos);
  }
}

TEST_CASE("check_variant accepts next.depth(right)") {
  Setup s;
  const Instr* loop = nullptr;
  for (auto& i : s.rd->body)
    if (i->kind == InstrKind::Loop) loop = i.get();
  auto vr = check_variant(s.eng, *loop);
  CHECK(vr.status == VariantReport::Status::Ok);
}

TEST_CASE("wp matches the named examples") {
  const char* src = R"(
class CALC feature
  go
    local
      item, g : INTEGER
    do
    end
end
)";
  auto unit = classify_setters(parse(src));
  const RoutineDef* rd = unit.find_routine("go");
  FactBase fb = analyze_routine(unit, *rd);
  Engine eng(unit, *rd, &fb);
  TermPtr q = parse_term_string("item = g + 1");
  TermPtr pre = wp(eng, {assign("item", "item + 1")}, q, nullptr);
  CHECK(to_string(pre) == "item + 1 = g + 1");
  CHECK(to_string(wp(eng, {assign("item", "g")},
                     parse_term_string("Current"), nullptr)) == "Current");
}

TEST_CASE("trivial_consequence handles the built-in closure rules") {
  TermPtr refl = parse_term_string("next = next");
  CHECK(trivial_consequence(refl, {}));
  TermPtr goal = parse_term_string("p.integral(right) = rev(old(p.integral(right)))");
  TermPtr fact = parse_term_string("rev(p.integral(right)) = old(p.integral(right))");
  CHECK(trivial_consequence(normalize(goal), {normalize(fact)}));
  CHECK_FALSE(trivial_consequence(parse_term_string("p = q"),
                                  {parse_term_string("q = r")}));
}
