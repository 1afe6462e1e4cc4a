#include "oocalc/difftest.hpp"

#include "oocalc/alias.hpp"

#include <random>
#include <sstream>

namespace oocalc {

namespace {

// Shared class universe for generated cases. set_x / set_y / set_n are
// simple setters; relink, init2 and bump force body expansion.
const char* kUniverse = R"(
class NODE feature
  x : detachable NODE
  y : detachable NODE
  n : INTEGER

  set_x (v : detachable NODE)
    do
      x := v
    ensure
      x = v
    end

  set_y (v : detachable NODE)
    do
      y := v
    ensure
      y = v
    end

  set_n (k : INTEGER)
    do
      n := k
    ensure
      n = k
    end

  relink
    do
      x := y
    end

  init2 (v : detachable NODE, w : detachable NODE)
    do
      x := v
      y := w
    end

  bump (k : INTEGER)
    do
      n := n + k
    end
end
)";

struct CaseSpec {
  std::vector<InstrPtr> instrs; // empty for same-state laws
  TermPtr e;
  TermPtr raw, cooked; // same-state laws: raw must evaluate like cooked
  bool same_state = false;
  // Applicability of the law itself; any of these evaluating false (or
  // failing to evaluate) makes the case vacuous.
  std::vector<TermPtr> side_checks;
};

using Rng = std::mt19937_64;

int pick(Rng& rng, int n) { return static_cast<int>(rng() % n); }

std::string pick_var(Rng& rng) {
  static const char* names[] = {"u", "v", "w"};
  return names[pick(rng, 3)];
}

std::string pick_attr(Rng& rng) { return pick(rng, 2) ? "x" : "y"; }

// Small reference-valued term: a variable, Current, an attribute, or a
// short path.
TermPtr ref_term(Rng& rng, int depth = 2) {
  switch (pick(rng, 5)) {
  case 0: return var(pick_var(rng));
  case 1: return current();
  case 2: return void_();
  case 3: return attr(pick_attr(rng));
  default:
    if (depth <= 0) return var(pick_var(rng));
    return dot(ref_term(rng, depth - 1), attr(pick_attr(rng)));
  }
}

TermPtr ref_path(Rng& rng, int hops) {
  TermPtr t = pick(rng, 2) ? var(pick_var(rng)) : TermPtr(attr(pick_attr(rng)));
  for (int i = 0; i < hops; ++i) t = dot(t, attr(pick_attr(rng)));
  return t;
}

InstrPtr mk_assign_var(const std::string& v, TermPtr src) {
  auto i = std::make_shared<Instr>();
  i->kind = InstrKind::Assign;
  i->label = "d1";
  i->target = v;
  i->source = std::move(src);
  return i;
}

InstrPtr mk_assign_attr(const std::string& a, TermPtr src) {
  auto i = std::make_shared<Instr>();
  i->kind = InstrKind::Assign;
  i->label = "d1";
  i->target = a;
  i->target_is_attr = true;
  i->source = std::move(src);
  return i;
}

InstrPtr mk_qcall(TermPtr target, const std::string& r,
                  std::vector<TermPtr> actuals) {
  auto i = std::make_shared<Instr>();
  i->kind = InstrKind::QualifiedCall;
  i->label = "d1";
  i->call_target = std::move(target);
  i->routine = r;
  i->actuals = std::move(actuals);
  return i;
}

InstrPtr mk_ucall(const std::string& r, std::vector<TermPtr> actuals) {
  auto i = std::make_shared<Instr>();
  i->kind = InstrKind::UnqualifiedCall;
  i->label = "d1";
  i->routine = r;
  i->actuals = std::move(actuals);
  return i;
}

InstrPtr rand_instr(Rng& rng) {
  switch (pick(rng, 4)) {
  case 0: return mk_assign_var(pick_var(rng), ref_term(rng));
  case 1: return mk_assign_attr(pick_attr(rng), ref_term(rng));
  case 2: return mk_qcall(var(pick_var(rng)),
                          pick(rng, 2) ? "set_x" : "set_y", {ref_term(rng)});
  default: return mk_ucall(pick(rng, 2) ? "set_x" : "set_y", {ref_term(rng)});
  }
}

// One instance per rule. The generated shape targets the rule; the engine
// is still free to report a different principal rule on degenerate draws.
CaseSpec generate(RuleId rule, Rng& rng) {
  CaseSpec c;
  std::string a = pick_attr(rng);
  std::string b = a == "x" ? "y" : "x";
  std::string p = pick_var(rng);
  std::string q = pick_var(rng);
  switch (rule) {
  case RuleId::CONST:
    c.instrs = {rand_instr(rng)};
    c.e = pick(rng, 2) ? int_const(pick(rng, 10)) : TermPtr(empty_seq());
    break;
  case RuleId::CUR:
    c.instrs = {rand_instr(rng)};
    c.e = current();
    break;
  case RuleId::AX:
    c.instrs = {mk_assign_var(p, ref_term(rng))};
    c.e = var(p);
    break;
  case RuleId::AY:
    c.instrs = {mk_assign_var(p, ref_term(rng))};
    c.e = var(p == "u" ? "v" : "u");
    break;
  case RuleId::DIST:
    c.instrs = {mk_assign_var(p, ref_term(rng))};
    c.e = pick(rng, 2)
              ? TermPtr(eq(ref_path(rng, 1), ref_term(rng)))
              : TermPtr(concat(singleton(ref_path(rng, 1)),
                               singleton(ref_term(rng))));
    break;
  case RuleId::ASSOC: {
    auto i2 = std::make_shared<Instr>(*rand_instr(rng));
    i2->label = "d2";
    c.instrs = {rand_instr(rng), i2};
    c.e = pick(rng, 2) ? ref_path(rng, 1 + pick(rng, 2))
                       : TermPtr(integral(ref_path(rng, 1), a));
    break;
  }
  case RuleId::OLD:
    c.instrs = {rand_instr(rng)};
    c.e = ghost("h1", normalize(ref_path(rng, 1)));
    break;
  case RuleId::UC:
    c.instrs = {mk_ucall("relink", {})};
    c.e = pick(rng, 2) ? TermPtr(attr("x")) : TermPtr(dot(var(p), attr("x")));
    if (pick(rng, 3) == 0) {
      c.instrs = {mk_ucall("bump", {int_const(1 + pick(rng, 5))})};
      c.e = attr("n");
    }
    break;
  case RuleId::US:
    c.instrs = {mk_ucall("set_" + a, {ref_term(rng)})};
    c.e = attr(a);
    break;
  case RuleId::QC:
    c.instrs = {mk_qcall(var(p), "relink", {})};
    c.e = dot(var(p), attr("x"));
    break;
  case RuleId::QCp:
    c.instrs = {mk_qcall(var(p), "init2", {ref_term(rng), ref_term(rng)})};
    c.e = dot(var(p), attr(pick(rng, 2) ? "x" : "y"));
    break;
  case RuleId::QS:
    c.instrs = {mk_qcall(var(p), "set_" + a, {ref_term(rng)})};
    c.e = dot(ghost("h1", var(q)), attr(a));
    break;
  case RuleId::QSN:
    c.instrs = {mk_qcall(var(p), "set_" + a, {ref_term(rng)})};
    c.e = dot(var(p), attr(a));
    break;
  case RuleId::NEG1:
    c.same_state = true;
    c.raw = dot(var(p), neg_var(p));
    c.cooked = normalize(c.raw);
    c.side_checks = {neq(var(p), void_())}; // attached receiver
    break;
  case RuleId::NEG2:
    c.same_state = true;
    c.raw = dot(var(p), dot(neg_var(p), old_of(var(p))));
    c.cooked = normalize(c.raw);
    c.side_checks = {neq(var(p), void_())};
    break;
  case RuleId::CUR1:
    c.same_state = true;
    c.raw = dot(current(), ref_path(rng, 1));
    c.cooked = normalize(c.raw);
    break;
  case RuleId::CUR2:
    c.same_state = true;
    c.raw = dot(ref_path(rng, 1), current());
    c.cooked = normalize(c.raw);
    break;
  case RuleId::NP:
    c.instrs = {mk_qcall(var(p), "set_" + a, {ref_term(rng)})};
    c.e = var(p);
    break;
  case RuleId::BL:
    c.instrs = {rand_instr(rng)};
    c.e = neg_var(p);
    break;
  case RuleId::SIE:
    c.same_state = true;
    c.raw = concat(singleton(current()), integral(attr(a), a));
    c.cooked = fold_integral(normalize(c.raw));
    c.side_checks = {acyclic(current(), a)};
    break;
  case RuleId::NIE:
    c.same_state = true;
    c.raw = concat(singleton(var(p)), integral(dot(var(p), attr(a)), a));
    c.cooked = normalize(integral(var(p), a));
    c.side_checks = {neq(var(p), void_()), acyclic(var(p), a)};
    break;
  case RuleId::NORM: {
    c.same_state = true;
    auto s1 = singleton(ref_term(rng));
    auto s2 = integral(ref_path(rng, 1), a);
    auto s3 = singleton(ref_term(rng));
    c.raw = rev(concat(s1, concat(rev(s2), s3)));
    c.cooked = normalize(c.raw);
    break;
  }
  case RuleId::PAX:
    c.instrs = {mk_assign_attr(a, ref_term(rng))};
    c.e = dot(attr(a), pick(rng, 2) ? TermPtr(attr(b))
                                    : TermPtr(dot(attr(b), attr(a))));
    break;
  case RuleId::PAY:
    c.instrs = {mk_assign_attr(a, ref_term(rng))};
    c.e = dot(var(p), pick(rng, 2) ? TermPtr(attr(a)) : TermPtr(attr(b)));
    break;
  case RuleId::IAX:
    c.instrs = {mk_assign_attr(a, ref_term(rng))};
    c.e = integral(dot(attr(a), attr(b)), b);
    break;
  case RuleId::IAY:
    c.instrs = {mk_assign_attr(a, ref_term(rng))};
    c.e = integral(pick(rng, 2) ? TermPtr(var(p)) : TermPtr(attr(b)), b);
    break;
  case RuleId::IA:
    c.instrs = {mk_assign_attr(a, ref_term(rng))};
    c.e = integral(current(), a);
    break;
  case RuleId::IAP:
    c.instrs = {mk_assign_attr(a, ref_term(rng))};
    c.e = integral(attr(a), a);
    break;
  case RuleId::PCX:
    c.instrs = {mk_qcall(var(p), "set_" + a, {ref_term(rng)})};
    c.e = dot(var(p), dot(attr(a), attr(pick(rng, 2) ? b : a)));
    break;
  case RuleId::ICX:
    c.instrs = {mk_qcall(var(p), "set_" + a, {ref_term(rng)})};
    c.e = integral(var(p), a);
    break;
  case RuleId::PCY:
    c.instrs = {mk_qcall(var(p), "set_" + a, {ref_term(rng)})};
    c.e = dot(var(p == "u" ? "v" : "u"), attr(pick(rng, 2) ? a : b));
    break;
  case RuleId::ICY:
    c.instrs = {mk_qcall(var(p), "set_" + a, {ref_term(rng)})};
    c.e = integral(var(p == "u" ? "v" : "u"), a);
    break;
  }
  return c;
}

// Concrete evaluation of a recorded side condition in the pre-state.
// NeverAlias against a sequence value means chain non-membership.
bool condition_holds(const SideCondition& c, const Heap& h, const Env& env) {
  if (c.kind == SideCondition::Kind::Acyclic)
    return eval_term(acyclic(c.lhs, c.attr), h, env).truthy();
  if (c.kind != SideCondition::Kind::NeverAlias) return true;
  Value l = eval_term(c.lhs, h, env);
  Value r = eval_term(c.rhs, h, env);
  if (l.type != Value::Ref) return false;
  if (r.type == Value::Seq) {
    for (ObjId id : r.seq)
      if (id == l.num) return false;
    return true;
  }
  if (r.type != Value::Ref) return false;
  return l.num != r.num;
}

std::pair<Heap, Env> make_state(Rng& rng, int max_objects) {
  std::vector<ClassShape> shapes = {{"NODE", {"x", "y"}, {"n"}}};
  auto [h, env] = random_heap(rng(), max_objects, shapes);
  int n = static_cast<int>(h.objects.size());
  auto rand_ref = [&]() -> Value {
    return Value::ref(pick(rng, 10) < 3 ? kVoid : 1 + pick(rng, n));
  };
  env.vars["u"] = rand_ref();
  env.vars["v"] = rand_ref();
  env.vars["w"] = rand_ref();
  env.vars["k"] = Value::integer(pick(rng, 10));
  env.client = 1 + pick(rng, n);
  Env base = env;
  env.entry = std::make_shared<std::pair<Heap, Env>>(h, base);
  return {h, env};
}

enum class Outcome { Pass, Vacuous, Inapplicable, Fail };

struct RunResult {
  Outcome outcome;
  TermPtr rewritten;
  Value pre{}, post{};
};

RunResult run_case(const SourceUnit& unit, const RoutineDef& probe,
                   const CaseSpec& c, const Heap& h, const Env& env) {
  RunResult r{Outcome::Vacuous, nullptr};
  try {
    for (auto& s : c.side_checks)
      if (!eval_term(s, h, env).truthy()) return r; // vacuous
  } catch (const EvalError&) {
    return r;
  }
  if (c.same_state) {
    try {
      r.pre = eval_term(c.raw, h, env);
      r.post = eval_term(c.cooked, h, env);
    } catch (const EvalError&) {
      return r;
    }
    r.outcome = r.pre == r.post ? Outcome::Pass : Outcome::Fail;
    return r;
  }

  // Transport right to left, keeping each instruction's side conditions so
  // they can be evaluated in the state where that instruction runs.
  Engine eng(unit, probe, nullptr, {true, 8});
  size_t n = c.instrs.size();
  std::vector<std::vector<Discharge>> per(n);
  TermPtr cur = c.e;
  size_t mark = 0;
  try {
    for (size_t k = n; k-- > 0;) {
      cur = eng.apply(c.instrs[k], cur, nullptr);
      per[k].assign(eng.recorded_sides().begin() + mark,
                    eng.recorded_sides().end());
      mark = eng.recorded_sides().size();
    }
  } catch (const NoRuleApplies&) {
    r.outcome = Outcome::Inapplicable;
    return r;
  }
  r.rewritten = cur;

  bool all_hold = true;
  try {
    Heap hh = h;
    Env ee = env;
    for (size_t k = 0; k < n; ++k) {
      for (auto& d : per[k])
        if (!condition_holds(d.cond, hh, ee)) all_hold = false;
      std::tie(hh, ee) = exec(c.instrs[k], std::move(hh), std::move(ee),
                              {&unit, -1, nullptr});
    }
    r.pre = eval_term(r.rewritten, h, env);
    r.post = eval_term(c.e, hh, ee);
  } catch (const EvalError&) {
    return r;
  } catch (const ExecError&) {
    return r;
  }
  if (!all_hold) return r; // vacuous; a guard failed concretely
  r.outcome = r.pre == r.post ? Outcome::Pass : Outcome::Fail;
  return r;
}

// Greedy heap minimization: drop objects while the case still fails.
std::pair<Heap, Env> shrink(const SourceUnit& unit, const RoutineDef& probe,
                            const CaseSpec& c, Heap h, Env env) {
  auto still_fails = [&](const Heap& h2, const Env& e2) {
    return run_case(unit, probe, c, h2, e2).outcome == Outcome::Fail;
  };
  bool improved = true;
  while (improved) {
    improved = false;
    std::vector<ObjId> ids;
    for (auto& [id, o] : h.objects) ids.push_back(id);
    for (ObjId id : ids) {
      if (id == env.current) continue;
      Heap h2 = h;
      h2.objects.erase(id);
      for (auto& [oid, o] : h2.objects)
        for (auto& [attr, ref] : o.refs)
          if (ref == id) ref = kVoid;
      Env e2 = env;
      for (auto& [name, val] : e2.vars)
        if (val.type == Value::Ref && val.num == id) val = Value::ref(kVoid);
      if (e2.client && *e2.client == id) e2.client = e2.current;
      Env base = e2;
      base.entry = nullptr;
      e2.entry = std::make_shared<std::pair<Heap, Env>>(h2, base);
      if (still_fails(h2, e2)) {
        h = std::move(h2);
        env = std::move(e2);
        improved = true;
        break;
      }
    }
  }
  return {h, env};
}

std::string describe(const std::vector<InstrPtr>& instrs) {
  std::string s;
  for (auto& i : instrs) {
    if (!s.empty()) s += "; ";
    std::string one = to_string(i, 0);
    while (!one.empty() && (one.back() == '\n' || one.back() == ' '))
      one.pop_back();
    s += one;
  }
  return s;
}

} // namespace

DiffReport run_difftest(const DiffOptions& opt) {
  static const SourceUnit unit = classify_setters(parse(kUniverse));
  RoutineDef probe;
  probe.name = "probe";
  probe.locals = {{"u", "NODE"}, {"v", "NODE"}, {"w", "NODE"},
                  {"k", "INTEGER"}};

  std::vector<RuleId> rules = opt.rules.empty() ? all_rules() : opt.rules;
  DiffReport rep;
  for (int k = 0; k < opt.cases; ++k) {
    RuleId rule = rules[k % rules.size()];
    std::uint64_t case_seed =
        opt.seed * 0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(k);
    Rng rng(case_seed);
    CaseSpec c = generate(rule, rng);
    auto [h, env] = make_state(rng, opt.max_objects);
    auto res = run_case(unit, probe, c, h, env);

    auto& st = rep.stats[rule];
    ++st.cases;
    ++rep.total_cases;
    switch (res.outcome) {
    case Outcome::Pass:
      ++st.checked;
      ++rep.total_checked;
      break;
    case Outcome::Vacuous:
      ++st.vacuous;
      ++rep.total_vacuous;
      break;
    case Outcome::Inapplicable:
      ++st.inapplicable;
      ++rep.total_inapplicable;
      break;
    case Outcome::Fail: {
      ++st.checked;
      ++rep.total_checked;
      ++st.failed;
      ++rep.total_failed;
      auto [h2, env2] = shrink(unit, probe, c, h, env);
      auto res2 = run_case(unit, probe, c, h2, env2);
      DiffFailure f;
      f.rule = rule;
      f.case_seed = case_seed;
      f.instruction = c.same_state ? "(none)" : describe(c.instrs);
      f.term = to_string(c.same_state ? c.raw : c.e);
      f.rewritten = to_string(c.same_state ? c.cooked : res.rewritten);
      f.pre_value = to_string(res2.pre);
      f.post_value = to_string(res2.post);
      f.heap = to_string(h2, env2);
      rep.failures.push_back(std::move(f));
      break;
    }
    }
  }
  return rep;
}

std::string DiffReport::render() const {
  std::ostringstream os;
  for (auto& [rule, st] : stats) {
    os << rule_name(rule) << ": cases=" << st.cases
       << " checked=" << st.checked << " vacuous=" << st.vacuous
       << " inapplicable=" << st.inapplicable << " failed=" << st.failed
       << "\n";
  }
  os << "TOTAL: cases=" << total_cases << " checked=" << total_checked
     << " vacuous=" << total_vacuous << " inapplicable=" << total_inapplicable
     << " failed=" << total_failed << "\n";
  for (auto& f : failures) {
    os << "FAILURE " << rule_name(f.rule) << " seed=" << f.case_seed << "\n"
       << "  instruction: " << f.instruction << "\n"
       << "  term: " << f.term << "\n  rewritten: " << f.rewritten << "\n"
       << "  pre=" << f.pre_value << " post=" << f.post_value << "\n"
       << "  heap:\n" << f.heap;
  }
  return os.str();
}

GuardDemo pax_guard_demo() {
  // Current's x cell is rewritten to c while c.z (here c.y) aliases Current:
  // the guard fails and the unguarded rewrite disagrees with execution.
  // Object 1 is Current with x initially on object 3; object 2's y points
  // back at Current. After x := c, x.y.x lands on object 2; before it,
  // c.y.x was object 3.
  Heap h;
  h.objects[1] = {"NODE", {{"x", 3}, {"y", kVoid}}, {{"n", 0}}};
  h.objects[2] = {"NODE", {{"x", kVoid}, {"y", 1}}, {{"n", 0}}};
  h.objects[3] = {"NODE", {{"x", kVoid}, {"y", kVoid}}, {{"n", 0}}};
  Env env;
  env.current = 1;
  env.vars["c"] = Value::ref(2);
  Env base = env;
  env.entry = std::make_shared<std::pair<Heap, Env>>(h, base);

  static const SourceUnit unit = classify_setters(parse(kUniverse));
  RoutineDef probe;
  probe.name = "probe";
  probe.locals = {{"c", "NODE"}};
  Engine eng(unit, probe, nullptr, {true, 8});

  auto i = mk_assign_attr("x", var("c"));
  auto e = dot(attr("x"), dot(attr("y"), attr("x"))); // x.y.x
  GuardDemo d;
  auto rewritten = eng.apply(i, e, nullptr); // c.y.x under an assumed guard
  d.condition_holds = true;
  for (auto& s : eng.recorded_sides())
    if (!condition_holds(s.cond, h, env)) d.condition_holds = false;
  d.rewritten_pre = eval_term(rewritten, h, env);
  auto [h2, env2] = exec(i, h, env, {&unit, -1, nullptr});
  d.original_post = eval_term(e, h2, env2);
  d.description = "(x := c); x.y.x with c.y = Current: guard "
                  "NeverAlias(c.y, Current) fails and " +
                  to_string(rewritten) + " disagrees";
  return d;
}

GuardDemo ia_guard_demo() {
  // Current lies on c's x chain: integral(x) after the write is shorter
  // than <<Current>> ++ c.integral(x) evaluated before it.
  Heap h;
  h.objects[1] = {"NODE", {{"x", 2}, {"y", kVoid}}, {{"n", 0}}};
  h.objects[2] = {"NODE", {{"x", kVoid}, {"y", kVoid}}, {{"n", 0}}};
  h.objects[3] = {"NODE", {{"x", 1}, {"y", kVoid}}, {{"n", 0}}};
  Env env;
  env.current = 1;
  env.vars["c"] = Value::ref(3);
  Env base = env;
  env.entry = std::make_shared<std::pair<Heap, Env>>(h, base);

  static const SourceUnit unit = classify_setters(parse(kUniverse));
  RoutineDef probe;
  probe.name = "probe";
  probe.locals = {{"c", "NODE"}};
  Engine eng(unit, probe, nullptr, {true, 8});

  auto i = mk_assign_attr("x", var("c"));
  auto e = normalize(integral(current(), "x"));
  GuardDemo d;
  auto rewritten = eng.apply(i, e, nullptr); // <<Current>> ++ c.integral(x)
  d.condition_holds = true;
  for (auto& s : eng.recorded_sides())
    if (!condition_holds(s.cond, h, env)) d.condition_holds = false;
  d.rewritten_pre = eval_term(rewritten, h, env);
  auto [h2, env2] = exec(i, h, env, {&unit, -1, nullptr});
  d.original_post = eval_term(e, h2, env2);
  d.description = "(x := c); integral(x) with Current on c's chain: guard "
                  "fails and " + to_string(rewritten) + " disagrees";
  return d;
}

} // namespace oocalc
