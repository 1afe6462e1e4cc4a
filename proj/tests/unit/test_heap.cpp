#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oocalc/heap.hpp"

#include <fstream>
#include <sstream>

using namespace oocalc;

namespace {
std::string slurp(const std::string& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}
} // namespace

TEST_CASE("heap files round-trip byte for byte") {
  std::string text = slurp(std::string(FIXTURES_DIR) + "/list5.heap");
  auto [h, env] = parse_heap(text);
  CHECK(to_string(h, env) == text);
}

TEST_CASE("path evaluation stops at void links") {
  auto [h, env] = chain_heap(3, "right", "p");
  Env e = env;
  e.current = e.vars.at("p").num;
  // three hops on a 3-cell chain: third hop is void, value stays at the last
  // object reached.
  ObjId far = eval_path({"right", "right", "right", "right"}, h, e);
  CHECK(h.live(far));
  CHECK(h.at(far).refs.at("right") == kVoid);
}

TEST_CASE("integral and depth follow the void conventions") {
  auto [h, env] = chain_heap(4, "right", "p");
  Value integ = eval_term(parse_term_string("p.integral(right)"), h, env);
  REQUIRE(integ.type == Value::Seq);
  CHECK(integ.seq.size() == 4);
  Value dep = eval_term(parse_term_string("p.depth(right)"), h, env);
  CHECK(dep.num == 3);

  Env e2 = env;
  e2.vars["p"] = Value::ref(kVoid);
  CHECK(eval_term(parse_term_string("p.integral(right)"), h, e2).seq.empty());
  CHECK(eval_term(parse_term_string("p.depth(right)"), h, e2).num == -1);
}

TEST_CASE("integral stops before a repetition on cyclic chains") {
  auto [h, env] = parse_heap(
      "object 1 : NODE { right -> 2 }\n"
      "object 2 : NODE { right -> 1 }\n"
      "current = 1\n"
      "var p = 1\n");
  Value v = eval_term(parse_term_string("p.integral(right)"), h, env);
  REQUIRE(v.type == Value::Seq);
  CHECK(v.seq == std::vector<ObjId>{1, 2});
  CHECK_FALSE(
      eval_term(parse_term_string("p.acyclic(right)"), h, env).truthy());
}

TEST_CASE("exec binds formals by value at call entry") {
  const char* src = R"(
class NODE feature
  x : detachable NODE
  y : detachable NODE

  init2 (v : detachable NODE, w : detachable NODE)
    do
      x := v
      y := w
    end
end
)";
  auto unit = classify_setters(parse(src));
  auto [h, env] = parse_heap(
      "object 1 : NODE { x -> 2, y -> Void }\n"
      "object 2 : NODE { x -> Void, y -> Void }\n"
      "current = 1\n");
  auto call = std::make_shared<Instr>();
  call->kind = InstrKind::UnqualifiedCall;
  call->routine = "init2";
  // second actual reads the x field the body's first assignment overwrites
  call->actuals = {void_(), attr("x")};
  auto [h2, env2] = exec(InstrPtr(call), h, env, {&unit, -1, nullptr});
  CHECK(h2.at(1).refs.at("x") == kVoid);
  CHECK(h2.at(1).refs.at("y") == 2); // bound before the body ran
}

TEST_CASE("loop cap turns silent nontermination into an error") {
  const char* src = R"(
class NODE feature
  x : detachable NODE

  spin
    do
      from
      until x = x.x
      invariant Current = Current
      loop
      end
    end
end
)";
  auto unit = classify_setters(parse(src));
  auto [h, env] = parse_heap(
      "object 1 : NODE { x -> 2 }\n"
      "object 2 : NODE { x -> 1 }\n"
      "current = 1\n");
  const RoutineDef* rd = unit.find_routine("spin");
  CHECK_THROWS_AS(exec(rd->body, h, env, {&unit, 5, nullptr}), ExecError);
}

TEST_CASE("depth decrease probe distinguishes chains from cycles") {
  auto [h, env] = chain_heap(3, "right", "p");
  CHECK(depth_decrease_probe(h, env, "p", "right") == ProbeResult::Pass);
  auto [hc, envc] = parse_heap(
      "object 1 : NODE { right -> 1 }\n"
      "current = 1\n"
      "var p = 1\n");
  CHECK(depth_decrease_probe(hc, envc, "p", "right") != ProbeResult::Fail);
}

TEST_CASE("random heaps are deterministic in the seed") {
  std::vector<ClassShape> shapes = {{"NODE", {"x"}, {"n"}}};
  auto [h1, e1] = random_heap(42, 6, shapes);
  auto [h2, e2] = random_heap(42, 6, shapes);
  CHECK(to_string(h1, e1) == to_string(h2, e2));
}
