#include "oocalc/driver.hpp"

#include "oocalc/alias.hpp"
#include "oocalc/term.hpp"

#include <algorithm>
#include <sstream>

namespace oocalc {

namespace {

const RoutineDef* require_routine(const SourceUnit& unit,
                                  const std::string& name) {
  const RoutineDef* rd = unit.find_routine(name);
  if (!rd) throw DriverError("no routine named '" + name + "'");
  return rd;
}

// Recognizes an exit condition of the form `v = Void` (either side).
bool exit_voids_var(const TermPtr& exit, std::string& var_name) {
  auto t = normalize(exit);
  if (!t || t->kind != Kind::Eq) return false;
  auto pick = [&](const TermPtr& a, const TermPtr& b) {
    if (a && a->kind == Kind::Var && b && b->kind == Kind::Void) {
      var_name = a->name;
      return true;
    }
    return false;
  };
  return pick(t->a, t->b) || pick(t->b, t->a);
}

TermPtr at_exit(const TermPtr& t, bool has_subst, const std::string& var_name) {
  if (!has_subst) return normalize(t);
  return normalize(substitute(t, {var_name}, {void_()}));
}

} // namespace

std::string Verdict::render() const {
  std::ostringstream out;
  out << trace.render();
  switch (status) {
  case Status::Proved:
    out << "VERDICT: PROVED\n";
    break;
  case Status::Failed:
    out << "VERDICT: FAILED " << reason << "\n";
    break;
  case Status::Residual:
    out << "VERDICT: RESIDUAL " << obligations.size() << " obligations\n";
    break;
  }
  return out.str();
}

int Verdict::exit_code() const {
  switch (status) {
  case Status::Proved: return 0;
  case Status::Failed: return 1;
  case Status::Residual: return 2;
  }
  return 2;
}

Verdict prove(const SourceUnit& unit, const std::string& routine,
              EngineOptions opt) {
  const RoutineDef* rd = require_routine(unit, routine);
  FactBase fb = analyze_routine(unit, *rd);
  Engine eng(unit, *rd, &fb, opt);

  Verdict v;
  v.routine = routine;
  v.assumptions_used = fb.assumed_facts();

  std::vector<InstrPtr> prefix, suffix;
  const Instr* loop = nullptr;
  for (auto& i : rd->body) {
    if (i->kind == InstrKind::Loop) {
      if (loop) throw DriverError("more than one top-level loop in '" +
                                  routine + "'");
      loop = i.get();
      continue;
    }
    (loop ? suffix : prefix).push_back(i);
  }
  if (loop && loop->invariants.empty())
    throw DriverError("loop in '" + routine + "' has no invariant");

  bool failed = false;
  if (loop) {
    InvariantReport rep = check_invariant(eng, prefix, *loop);
    v.trace = rep.trace;
    for (auto& c : rep.clauses) {
      if (!c.preserved) {
        failed = true;
        v.reason = "preservation of " + to_string(c.clause) +
                   (c.failure.empty() ? "" : ": " + c.failure);
        break;
      }
      if (!c.established)
        v.obligations.push_back("establishment of " + to_string(c.clause));
    }
    for (auto& g : rep.residual_establishment)
      v.obligations.push_back("entry goal " + to_string(g));

    if (!failed && loop->variant) {
      VariantReport vr = check_variant(eng, *loop);
      if (vr.status != VariantReport::Status::Ok)
        v.obligations.push_back("variant " + to_string(loop->variant) +
                                (vr.detail.empty() ? "" : ": " + vr.detail));
    }
  }

  if (!failed) {
    // Exit-implies-post: transport each ensure clause back to the loop exit
    // (or to routine entry when there is no loop), then discharge against
    // the invariant with the exit equality substituted in.
    std::map<std::string, TermPtr> bindings;
    std::string exit_var;
    bool subst =
        loop && loop->exit && exit_voids_var(loop->exit, exit_var);
    std::vector<TermPtr> facts;
    if (loop) {
      for (auto& inv : loop->invariants)
        facts.push_back(
            at_exit(eng.freeze_old(inv, bindings), subst, exit_var));
      facts.push_back(at_exit(loop->exit, subst, exit_var));
    }
    for (auto& p : rd->precondition)
      facts.push_back(at_exit(p, subst, exit_var));

    const std::vector<InstrPtr>& tail = loop ? suffix : rd->body;
    for (auto& post : rd->postcondition) {
      TermPtr goal;
      try {
        goal = eng.seq_apply(tail, eng.freeze_old(post, bindings), &v.trace);
      } catch (const NoRuleApplies& e) {
        failed = true;
        v.reason = "transport of " + to_string(post) +
                   (e.label.empty() ? "" : " at " + e.label) + ": " + e.what();
        break;
      }
      goal = at_exit(goal, subst, exit_var);
      if (!loop) {
        // At routine entry every ghost denotes its own frozen term.
        goal = normalize(Engine::unfreeze(goal, bindings));
      }
      if (!trivial_consequence(goal, facts))
        v.obligations.push_back("postcondition " + to_string(post) +
                                " from exit state (" + to_string(goal) + ")");
    }
  }

  v.status = failed ? Verdict::Status::Failed
             : v.obligations.empty() ? Verdict::Status::Proved
                                     : Verdict::Status::Residual;
  return v;
}

std::string RunReport::render() const {
  std::ostringstream out;
  for (auto& m : messages) out << m << "\n";
  out << (ok ? "RUN: PASS\n" : "RUN: FAIL\n");
  out << to_string(final_heap, final_env);
  return out.str();
}

RunReport run_routine(const SourceUnit& unit, const std::string& routine,
                      const std::string& heap_text) {
  const RoutineDef* rd = require_routine(unit, routine);
  auto [h, env] = parse_heap(heap_text);
  for (auto& [n, ty] : rd->formals)
    env.vars.emplace(n, Value::ref(kVoid));
  for (auto& [n, ty] : rd->locals)
    env.vars.emplace(n, Value::ref(kVoid));
  env.entry = std::make_shared<std::pair<Heap, Env>>(h, env);

  RunReport rep;
  auto complain = [&](const std::string& msg) {
    rep.ok = false;
    rep.messages.push_back(msg);
  };

  ExecOptions opt;
  opt.unit = &unit;
  try {
    for (auto& pre : rd->precondition)
      if (!eval_term(pre, h, env).truthy())
        complain("precondition violated: " + to_string(pre));
    if (!rep.ok) {
      rep.final_heap = std::move(h);
      rep.final_env = std::move(env);
      return rep;
    }
    for (auto& i : rd->body) {
      if (i->kind == InstrKind::Loop) {
        ExecOptions lopt = opt;
        lopt.on_iteration = [&](int iter, const Heap& hh, const Env& ee) {
          for (auto& inv : i->invariants)
            if (!eval_term(inv, hh, ee).truthy())
              complain("invariant violated at iteration " +
                       std::to_string(iter) + ": " + to_string(inv));
        };
        std::tie(h, env) = exec(i, std::move(h), std::move(env), lopt);
      } else {
        std::tie(h, env) = exec(i, std::move(h), std::move(env), opt);
      }
    }
    for (auto& post : rd->postcondition)
      if (!eval_term(post, h, env).truthy())
        complain("postcondition violated: " + to_string(post));
  } catch (const ExecError& e) {
    complain(std::string("execution error: ") + e.what());
  } catch (const EvalError& e) {
    complain(std::string("evaluation error: ") + e.what());
  }

  rep.final_heap = std::move(h);
  rep.final_env = std::move(env);
  return rep;
}

std::string alias_query(const SourceUnit& unit, const std::string& routine,
                        const std::string& label, const std::string& query) {
  const RoutineDef* rd = require_routine(unit, routine);
  FactBase fb = analyze_routine(unit, *rd);
  if (!fb.has_label(label))
    throw DriverError("no program point labeled '" + label + "' in '" +
                      routine + "'");

  auto trim = [](std::string s) {
    size_t b = s.find_first_not_of(" \t");
    size_t e = s.find_last_not_of(" \t");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };

  std::string q = trim(query);
  if (q.rfind("acyclic(", 0) == 0 && q.back() == ')') {
    std::string inner = q.substr(8, q.size() - 9);
    size_t comma = inner.rfind(',');
    if (comma == std::string::npos)
      throw DriverError("acyclic query needs 'acyclic(p, a)'");
    TermPtr p = parse_term_string(trim(inner.substr(0, comma)));
    std::string attr = trim(inner.substr(comma + 1));
    return fb.acyclic_at(p, attr, label) ? "YES" : "UNKNOWN";
  }
  size_t tilde = q.find('~');
  if (tilde == std::string::npos)
    throw DriverError("query must be 'e ~ f' or 'acyclic(p, a)'");
  TermPtr e = parse_term_string(trim(q.substr(0, tilde)));
  TermPtr f = parse_term_string(trim(q.substr(tilde + 1)));
  return fb.never_alias(e, f, label) ? "NEVER" : "MAY";
}

} // namespace oocalc
