#include "oocalc/rewrite.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <sstream>

namespace oocalc {

namespace {

const std::pair<RuleId, const char*> kRuleNames[] = {
    {RuleId::CONST, "CONST"}, {RuleId::CUR, "CUR"},   {RuleId::AX, "AX"},
    {RuleId::AY, "AY"},       {RuleId::DIST, "DIST"}, {RuleId::ASSOC, "ASSOC"},
    {RuleId::OLD, "OLD"},     {RuleId::UC, "UC"},     {RuleId::US, "US"},
    {RuleId::QC, "QC"},       {RuleId::QCp, "QCp"},   {RuleId::QS, "QS"},
    {RuleId::QSN, "QSN"},     {RuleId::NEG1, "NEG1"}, {RuleId::NEG2, "NEG2"},
    {RuleId::CUR1, "CUR1"},   {RuleId::CUR2, "CUR2"}, {RuleId::NP, "NP"},
    {RuleId::BL, "BL"},       {RuleId::SIE, "SIE"},   {RuleId::NIE, "NIE"},
    {RuleId::PAX, "PAX"},     {RuleId::PAY, "PAY"},   {RuleId::IAX, "IAX"},
    {RuleId::IAY, "IAY"},     {RuleId::IA, "IA"},     {RuleId::IAP, "IAP"},
    {RuleId::PCX, "PCX"},     {RuleId::ICX, "ICX"},   {RuleId::PCY, "PCY"},
    {RuleId::ICY, "ICY"},     {RuleId::NORM, "NORM"},
};

// Priority of an unchanged leaf when picking the step's principal rule;
// frame rules with real side conditions outrank bookkeeping rules.
int unchanged_priority(RuleId r) {
  switch (r) {
  case RuleId::ICY: return 10;
  case RuleId::PCY: return 9;
  case RuleId::IAY: return 8;
  case RuleId::PAY: return 7;
  case RuleId::AY: return 6;
  case RuleId::NP: return 5;
  case RuleId::US: return 5;
  case RuleId::BL: return 4;
  case RuleId::CUR: return 3;
  case RuleId::OLD: return 1;
  default: return 0;
  }
}

TermPtr path_term(const TermPtr& root, const std::vector<std::string>& attrs,
                  size_t from, size_t to) {
  TermPtr t = root;
  for (size_t i = from; i < to && i < attrs.size(); ++i)
    t = dot(t, attr(attrs[i]));
  return t;
}

TermPtr rebuild(const TermPtr& root, const std::vector<std::string>& attrs,
                size_t from, const std::optional<Kind>& tail,
                const std::string& tail_attr) {
  TermPtr t = path_term(root, attrs, from, attrs.size());
  if (!tail) return t;
  switch (*tail) {
  case Kind::Integral: return integral(t, tail_attr);
  case Kind::Depth: return depth(t, tail_attr);
  case Kind::Acyclic: return acyclic(t, tail_attr);
  default: return t;
  }
}

struct Leaf {
  RuleId rule;
  bool changed;
};

} // namespace

const char* rule_name(RuleId r) {
  for (auto& [id, n] : kRuleNames)
    if (id == r) return n;
  return "?";
}

std::optional<RuleId> rule_from_name(const std::string& name) {
  for (auto& [id, n] : kRuleNames)
    if (name == n) return id;
  return std::nullopt;
}

const std::vector<RuleId>& all_rules() {
  static const std::vector<RuleId> v = [] {
    std::vector<RuleId> out;
    for (auto& [id, n] : kRuleNames) out.push_back(id);
    return out;
  }();
  return v;
}

std::string SideCondition::render() const {
  switch (kind) {
  case Kind::NeverAlias:
    return "NeverAlias(" + to_string(lhs) + ", " + to_string(rhs) + ")";
  case Kind::Acyclic:
    return "Acyclic(" + to_string(lhs) + ", " + attr + ")";
  case Kind::SetterFor:
    return "SetterFor(" + routine + ", " + attr + ")";
  case Kind::NoIndirectAffect:
    return "NoIndirectAffect(" + routine + ", " + attr + ")";
  case Kind::Nonprodigal:
    return "Nonprodigal(" + routine + ")";
  }
  return "?";
}

std::string ProofTrace::render() const {
  std::ostringstream os;
  int n = 1;
  for (auto& s : steps) {
    os << "STEP " << n++ << ": " << rule_name(s.rule) << " : "
       << to_string(s.before) << " ==> " << to_string(s.after);
    if (!s.sides.empty()) {
      os << " [side: ";
      for (size_t k = 0; k < s.sides.size(); ++k) {
        if (k) os << "; ";
        os << s.sides[k].cond.render() << " BY " << s.sides[k].evidence;
      }
      os << "]";
    }
    os << "\n";
  }
  return os.str();
}

// One apply() invocation: dispatches over the shape of e, collecting leaf
// rule applications and discharged side conditions along the way.
struct ApplyCtx {
  Engine& eng;
  const InstrPtr& instr;
  std::vector<Discharge> sides;
  std::vector<Leaf> leaves;

  const std::string& label() const { return instr->label; }

  void leaf(RuleId r, bool changed) { leaves.push_back({r, changed}); }

  void record(const SideCondition& c, bool proven, const char* proven_by) {
    if (proven) {
      sides.push_back({c, proven_by});
      return;
    }
    if (eng.options().assume_all) {
      sides.push_back({c, "assumed-fact"});
      return;
    }
    throw NoRuleApplies(label(), "at " + label() +
                            ": side condition not discharged: " + c.render(),
                        c);
  }

  void require_never(const TermPtr& a, const TermPtr& b) {
    SideCondition c{SideCondition::Kind::NeverAlias, normalize(a),
                    normalize(b), "", ""};
    bool ok = false;
    // Current is an object, Void is not.
    if ((c.lhs->kind == Kind::Void) != (c.rhs->kind == Kind::Void) &&
        (c.lhs->kind == Kind::Void || c.lhs->kind == Kind::Current) &&
        (c.rhs->kind == Kind::Void || c.rhs->kind == Kind::Current)) {
      record(c, true, "trivial");
      return;
    }
    if (eng.facts() && eng.facts()->has_label(label()))
      ok = eng.facts()->never_alias(c.lhs, c.rhs, label());
    record(c, ok, "alias-engine");
  }

  // u never lies on the a-chain headed by w.
  void require_not_in(const TermPtr& u, const TermPtr& w,
                      const std::string& a) {
    SideCondition c{SideCondition::Kind::NeverAlias, normalize(u),
                    normalize(integral(w, a)), "", ""};
    bool ok = false;
    if (eng.facts() && eng.facts()->has_label(label()))
      ok = eng.facts()->not_in_chain(c.lhs, normalize(w), a, label());
    record(c, ok, "alias-engine");
  }

  void require_class(SideCondition::Kind kind, const std::string& routine,
                     const std::string& attr, bool holds) {
    SideCondition c{kind, nullptr, nullptr, routine, attr};
    record(c, holds, "setter-classification");
  }

  TermPtr go(const TermPtr& e);
  TermPtr go_path(const TermPtr& e);
  TermPtr go_assign_var(const PathView& pv);
  TermPtr go_assign_attr(const PathView& pv);
  TermPtr go_call(const PathView& pv, const TermPtr& e, bool qualified);
  TermPtr go_setter(const PathView& pv, const TermPtr& x_t,
                    const RoutineDef& rd, const TermPtr& c, bool qualified);
  TermPtr expand_call(const TermPtr& e, bool qualified);
};

TermPtr ApplyCtx::go(const TermPtr& e) {
  switch (e->kind) {
  case Kind::Int:
  case Kind::Bool:
  case Kind::EmptySeq:
  case Kind::Void:
    leaf(RuleId::CONST, false);
    return e;
  case Kind::Current:
    leaf(RuleId::CUR, false);
    return e;
  case Kind::Ghost:
    leaf(RuleId::OLD, false);
    return e;
  case Kind::NegVar:
    leaf(RuleId::BL, false);
    return e;
  case Kind::Old:
    throw NoRuleApplies(label(), "old must be frozen before rewriting");
  case Kind::Var:
  case Kind::Attr:
  case Kind::Dot:
  case Kind::Integral:
  case Kind::Depth:
  case Kind::Acyclic:
    return go_path(e);
  case Kind::Singleton: return singleton(go(e->a));
  case Kind::Rev: return rev(go(e->a));
  case Kind::Not: return not_of(go(e->a));
  case Kind::Concat: return concat(go(e->a), go(e->b));
  case Kind::Eq: return eq(go(e->a), go(e->b));
  case Kind::Neq: return neq(go(e->a), go(e->b));
  case Kind::And: return and_of(go(e->a), go(e->b));
  case Kind::Or: return or_of(go(e->a), go(e->b));
  case Kind::Add: return add(go(e->a), go(e->b));
  case Kind::Sub: return sub(go(e->a), go(e->b));
  }
  throw NoRuleApplies(label(), "unhandled term shape");
}

TermPtr ApplyCtx::go_path(const TermPtr& e) {
  auto pv = as_path(normalize(e));
  if (!pv)
    throw NoRuleApplies(label(), "term is not an access path: " + to_string(e));
  switch (instr->kind) {
  case InstrKind::Assign:
    return instr->target_is_attr ? go_assign_attr(*pv) : go_assign_var(*pv);
  case InstrKind::QualifiedCall:
    return go_call(*pv, e, true);
  case InstrKind::UnqualifiedCall:
    return go_call(*pv, e, false);
  case InstrKind::Cut:
  case InstrKind::Check:
    leaf(RuleId::CONST, false);
    return e;
  case InstrKind::Loop:
    throw NoRuleApplies(label(), "loop composition requires an invariant");
  }
  throw NoRuleApplies(label(), "unhandled instruction");
}

// x := s, x a variable: pure substitution, no heap effect.
TermPtr ApplyCtx::go_assign_var(const PathView& pv) {
  auto s = normalize(instr->source);
  bool tail = pv.tail.has_value();
  if (pv.root->kind == Kind::Var && pv.root->name == instr->target) {
    leaf(tail ? RuleId::IAX : (pv.attrs.empty() ? RuleId::AX : RuleId::PAX),
         true);
    return rebuild(s, pv.attrs, 0, pv.tail, pv.tail_attr);
  }
  RuleId r = tail ? RuleId::IAY
                  : (pv.attrs.empty()
                         ? (pv.root->kind == Kind::Ghost ? RuleId::OLD
                                                         : RuleId::AY)
                         : RuleId::PAY);
  if (pv.root->kind == Kind::NegVar && pv.attrs.empty() && !tail)
    r = RuleId::BL;
  leaf(r, false);
  return rebuild(pv.root, pv.attrs, 0, pv.tail, pv.tail_attr);
}

// f := c, f an attribute: the heap cell X.f changes, where X is Current
// unless the instruction carries an expansion write base. Every later
// f hop needs its base provably distinct from X; an f chain tail
// additionally must never pass through X.
TermPtr ApplyCtx::go_assign_attr(const PathView& pv) {
  const std::string& f = instr->target;
  auto c = normalize(instr->source);
  TermPtr X = instr->write_base ? normalize(instr->write_base) : current();
  bool tail = pv.tail.has_value();
  bool chain_on_f = tail && pv.tail_attr == f;
  bool rooted_here = equal(pv.root, X);

  // integral(f) at X itself: prepend X, chase from c.
  if (rooted_here && pv.attrs.empty() && chain_on_f &&
      *pv.tail == Kind::Integral) {
    require_not_in(X, c, f);
    leaf(RuleId::IA, true);
    return concat(singleton(X), integral(c, f));
  }

  if (rooted_here && !pv.attrs.empty() && pv.attrs[0] == f) {
    // First hop reads the freshly written cell: splice in c.
    for (size_t j = 1; j < pv.attrs.size(); ++j)
      if (pv.attrs[j] == f) require_never(path_term(c, pv.attrs, 1, j), X);
    if (chain_on_f) {
      auto head = path_term(c, pv.attrs, 1, pv.attrs.size());
      require_not_in(X, head, f);
      if (pv.attrs.size() == 1 && *pv.tail == Kind::Integral) {
        leaf(RuleId::IAP, true);
        return integral(c, f);
      }
    }
    leaf(tail ? RuleId::IAX : RuleId::PAX, true);
    return rebuild(c, pv.attrs, 1, pv.tail, pv.tail_attr);
  }

  // Untouched spine: guard any f hop and any f chain against X.
  for (size_t j = 0; j < pv.attrs.size(); ++j)
    if (pv.attrs[j] == f)
      require_never(path_term(pv.root, pv.attrs, 0, j), X);
  if (chain_on_f)
    require_not_in(X, path_term(pv.root, pv.attrs, 0, pv.attrs.size()), f);
  RuleId r = tail ? RuleId::IAY
                  : (pv.attrs.empty()
                         ? (pv.root->kind == Kind::Ghost ? RuleId::OLD
                                                         : RuleId::AY)
                         : RuleId::PAY);
  leaf(r, false);
  return rebuild(pv.root, pv.attrs, 0, pv.tail, pv.tail_attr);
}

TermPtr ApplyCtx::go_call(const PathView& pv, const TermPtr& e,
                          bool qualified) {
  const RoutineDef* rd = eng.unit().find_routine(instr->routine);
  if (!rd)
    throw NoRuleApplies(label(), "unknown routine " + instr->routine);
  TermPtr x_t = qualified ? normalize(instr->call_target) : current();

  // Variables are frame storage; no call can rebind them.
  if (!pv.tail && pv.attrs.empty() &&
      (pv.root->kind == Kind::Var || pv.root->kind == Kind::Ghost ||
       pv.root->kind == Kind::NegVar)) {
    if (equal(pv.root, x_t)) {
      leaf(RuleId::NP, false);
    } else {
      leaf(pv.root->kind == Kind::Ghost ? RuleId::OLD : RuleId::CONST, false);
    }
    return e;
  }

  if (rd->setter_class == SetterClass::SimpleSetterFor &&
      static_cast<size_t>(rd->setter_arg) <= instr->actuals.size()) {
    auto c = normalize(instr->actuals[rd->setter_arg - 1]);
    return go_setter(pv, x_t, *rd, c, qualified);
  }

  // Non-setter frame: safe whenever the path touches no affected attribute.
  if (!rd->affects_unknown) {
    std::set<std::string> writes(rd->direct_affects.begin(),
                                 rd->direct_affects.end());
    writes.insert(rd->indirect_affects.begin(), rd->indirect_affects.end());
    std::set<std::string> used(pv.attrs.begin(), pv.attrs.end());
    if (pv.tail) used.insert(pv.tail_attr);
    bool touched = false;
    for (auto& u : used)
      if (writes.count(u)) touched = true;
    if (!touched) {
      for (auto& u : used)
        require_class(SideCondition::Kind::NoIndirectAffect, rd->name, u,
                      true);
      leaf(pv.tail ? RuleId::ICY : RuleId::PCY, false);
      return e;
    }
  }
  auto out = expand_call(e, qualified);
  leaf(qualified ? (rd->formals.empty() ? RuleId::QC : RuleId::QCp)
                 : RuleId::UC,
       !equal(normalize(out), normalize(e)));
  return out;
}

// call x.r(c) with r a simple setter for a: exactly the cell x.a changes.
TermPtr ApplyCtx::go_setter(const PathView& pv, const TermPtr& x_t,
                            const RoutineDef& rd, const TermPtr& c,
                            bool qualified) {
  const std::string& a = rd.setter_attr;
  bool tail = pv.tail.has_value();
  bool chain_on_a = tail && pv.tail_attr == a;
  bool plain = equal(pv.root, x_t);
  bool mentions_a = chain_on_a ||
                    std::find(pv.attrs.begin(), pv.attrs.end(), a) !=
                        pv.attrs.end();

  if (!mentions_a) {
    // Only x.a changed; a path without a hops cannot observe it.
    require_class(SideCondition::Kind::SetterFor, rd.name, a, true);
    require_class(SideCondition::Kind::NoIndirectAffect, rd.name, a, true);
    leaf(tail ? RuleId::ICY : (pv.attrs.empty() ? RuleId::NP : RuleId::PCY),
         false);
    return rebuild(pv.root, pv.attrs, 0, pv.tail, pv.tail_attr);
  }

  require_class(SideCondition::Kind::SetterFor, rd.name, a, true);
  require_class(SideCondition::Kind::NoIndirectAffect, rd.name, a, true);

  if (plain && !pv.attrs.empty() && pv.attrs[0] == a) {
    // The first hop reads the written cell.
    if (qualified)
      require_class(SideCondition::Kind::Nonprodigal, rd.name, "",
                    rd.nonprodigal);
    for (size_t j = 1; j < pv.attrs.size(); ++j)
      if (pv.attrs[j] == a) require_never(path_term(c, pv.attrs, 1, j), x_t);
    if (chain_on_a)
      require_not_in(x_t, path_term(c, pv.attrs, 1, pv.attrs.size()), a);
    if (pv.attrs.size() == 1 && !tail) {
      leaf(qualified ? RuleId::QSN : RuleId::US, true);
      return c;
    }
    leaf(tail ? RuleId::ICX : RuleId::PCX, true);
    return rebuild(c, pv.attrs, 1, pv.tail, pv.tail_attr);
  }

  if (plain && pv.attrs.empty() && chain_on_a && *pv.tail == Kind::Integral) {
    // x.integral(a) = <<x>> ++ c.integral(a), provided the chain from c
    // never returns to x.
    if (qualified)
      require_class(SideCondition::Kind::Nonprodigal, rd.name, "",
                    rd.nonprodigal);
    require_not_in(x_t, c, a);
    leaf(RuleId::ICX, true);
    return concat(singleton(x_t), integral(c, a));
  }

  // Frame: the spine does not start at x.a; guard every a hop and a-chain
  // tail against the receiver.
  for (size_t j = 0; j < pv.attrs.size(); ++j)
    if (pv.attrs[j] == a)
      require_never(path_term(pv.root, pv.attrs, 0, j), x_t);
  if (chain_on_a)
    require_not_in(x_t, path_term(pv.root, pv.attrs, 0, pv.attrs.size()), a);
  leaf(pv.root->kind == Kind::Ghost ? RuleId::QS
                                    : (tail ? RuleId::ICY : RuleId::PCY),
       false);
  return rebuild(pv.root, pv.attrs, 0, pv.tail, pv.tail_attr);
}

// Body expansion: rewrites each callee body instruction into the caller's
// frame (Current becomes the receiver, attribute writes carry the receiver
// as their write base, callee locals are renamed apart) and transports e
// through the result.
TermPtr ApplyCtx::expand_call(const TermPtr& e, bool qualified) {
  const RoutineDef* rd = eng.unit().find_routine(instr->routine);
  if (!rd || eng.expand_left() <= 0)
    throw NoRuleApplies(label(), "cannot expand call to " + instr->routine);
  TermPtr x_t = qualified ? normalize(instr->call_target) : current();
  if (x_t->kind != Kind::Var && x_t->kind != Kind::Current)
    throw NoRuleApplies(label(), "expansion needs a variable receiver");

  std::vector<std::string> formals;
  for (auto& [n, ty] : rd->formals) formals.push_back(n);
  if (formals.size() != instr->actuals.size())
    throw NoRuleApplies(label(), "arity mismatch calling " + instr->routine);

  // Formals bind their actuals at call entry: substitute fresh names and
  // prepend (in transport order: append) the binding assignments, so the
  // actuals are read before the body's own writes. Callee locals are
  // renamed away from anything the caller can mention.
  std::string suffix = "#" + std::to_string(eng.expand_left());
  std::vector<std::string> names;
  std::vector<TermPtr> repl;
  std::vector<InstrPtr> bindings;
  for (size_t k = 0; k < formals.size(); ++k) {
    std::string fresh = formals[k] + suffix;
    names.push_back(formals[k]);
    repl.push_back(var(fresh));
    auto bi = std::make_shared<Instr>();
    bi->kind = InstrKind::Assign;
    bi->target = fresh;
    bi->source = normalize(instr->actuals[k]);
    bindings.push_back(bi);
  }
  std::map<std::string, std::string> renamed;
  for (auto& [n, ty] : rd->locals) {
    renamed[n] = n + suffix;
    names.push_back(n);
    repl.push_back(var(renamed[n]));
  }

  // Callee-frame term viewed from the caller.
  std::function<TermPtr(const TermPtr&)> view =
      [&](const TermPtr& t) -> TermPtr {
    if (!t) return t;
    switch (t->kind) {
    case Kind::Current: return x_t;
    case Kind::NegVar:
      throw NoRuleApplies(label(), "negative variable in expanded body");
    case Kind::Attr:
      return x_t->kind == Kind::Current ? t : dot(x_t, t);
    case Kind::Old:
    case Kind::Ghost:
      throw NoRuleApplies(label(), "old inside expanded call body");
    default: break;
    }
    auto n = std::make_shared<Term>(*t);
    n->a = view(t->a);
    n->b = view(t->b);
    return n;
  };
  auto conv = [&](const TermPtr& t) -> TermPtr {
    return t ? normalize(substitute(view(t), names, repl)) : t;
  };

  std::function<InstrPtr(const InstrPtr&)> lift =
      [&](const InstrPtr& i) -> InstrPtr {
    if (i->kind == InstrKind::Loop)
      throw NoRuleApplies(label(), "loop inside expanded call body");
    if (i->kind == InstrKind::Assign && !i->target_is_attr &&
        std::find(formals.begin(), formals.end(), i->target) != formals.end())
      throw NoRuleApplies(label(), "assignment to formal in callee body");
    auto n = std::make_shared<Instr>(*i);
    n->label = ""; // callee labels have no facts in the caller's base
    if (n->kind == InstrKind::Assign) {
      n->source = conv(n->source);
      if (n->target_is_attr) {
        if (x_t->kind != Kind::Current) n->write_base = x_t;
      } else if (renamed.count(n->target)) {
        n->target = renamed.at(n->target);
      }
    }
    if (n->kind == InstrKind::UnqualifiedCall && x_t->kind != Kind::Current) {
      n->kind = InstrKind::QualifiedCall;
      n->call_target = x_t;
    }
    if (n->call_target) n->call_target = conv(n->call_target);
    for (auto& t : n->actuals) t = conv(t);
    if (n->cond_e) n->cond_e = conv(n->cond_e);
    if (n->cond_f) n->cond_f = conv(n->cond_f);
    return n;
  };

  TermPtr cur = normalize(e);
  eng.enter_expand();
  try {
    for (auto it = rd->body.rbegin(); it != rd->body.rend(); ++it) {
      auto inner = lift(*it);
      ApplyCtx sub_ctx{eng, inner, {}, {}};
      cur = normalize(sub_ctx.go(normalize(cur)));
      for (auto& d : sub_ctx.sides) sides.push_back(d);
    }
    for (auto it = bindings.rbegin(); it != bindings.rend(); ++it) {
      ApplyCtx sub_ctx{eng, *it, {}, {}};
      cur = normalize(sub_ctx.go(normalize(cur)));
      for (auto& d : sub_ctx.sides) sides.push_back(d);
    }
  } catch (const NoRuleApplies&) {
    eng.leave_expand();
    throw;
  }
  eng.leave_expand();
  // A leftover renamed local denotes its value at callee entry: Void.
  if (!renamed.empty()) {
    std::vector<std::string> rn;
    std::vector<TermPtr> voids;
    for (auto& [n, r] : renamed) {
      rn.push_back(r);
      voids.push_back(void_());
    }
    cur = normalize(substitute(cur, rn, voids));
  }
  return cur;
}

Engine::Engine(const SourceUnit& unit, const RoutineDef& routine,
               const FactBase* facts, EngineOptions opt)
    : unit_(unit), routine_(routine), facts_(facts), opt_(opt),
      expand_left_(opt.expand_depth) {}

TermPtr Engine::apply(const InstrPtr& i, const TermPtr& e, ProofTrace* tr) {
  auto before = normalize(e);
  ApplyCtx ctx{*this, i, {}, {}};
  auto after = normalize(ctx.go(before));

  RuleId principal = RuleId::CONST;
  bool have = false;
  for (auto& l : ctx.leaves)
    if (l.changed) {
      principal = l.rule;
      have = true;
      break;
    }
  if (!have) {
    int best = -1;
    for (auto& l : ctx.leaves) {
      int p = unchanged_priority(l.rule);
      if (p > best) {
        best = p;
        principal = l.rule;
      }
    }
  }

  for (auto& d : ctx.sides) sides_.push_back(d);
  bool bookkeeping = !have && (principal == RuleId::CONST ||
                               principal == RuleId::OLD ||
                               principal == RuleId::CUR);
  if (tr && !bookkeeping)
    tr->steps.push_back({principal, i->label, before, after, ctx.sides});
  return after;
}

TermPtr Engine::seq_apply(const std::vector<InstrPtr>& instrs, const TermPtr& e,
                          ProofTrace* tr) {
  TermPtr cur = normalize(e);
  for (auto it = instrs.rbegin(); it != instrs.rend(); ++it)
    cur = apply(*it, cur, tr);
  return cur;
}

TermPtr Engine::freeze_old(const TermPtr& e,
                           std::map<std::string, TermPtr>& bindings) {
  std::function<TermPtr(const TermPtr&)> walk =
      [&](const TermPtr& t) -> TermPtr {
    if (!t) return t;
    if (t->kind == Kind::Old) {
      if (contains_old(t->a))
        throw NoRuleApplies("", "nested old is not supported");
      auto frozen = normalize(t->a);
      for (auto& [id, b] : bindings)
        if (equal(b, frozen)) return ghost(id, frozen);
      std::string id = "h" + std::to_string(++ghost_counter_);
      bindings[id] = frozen;
      return ghost(id, frozen);
    }
    auto n = std::make_shared<Term>(*t);
    n->a = walk(t->a);
    n->b = walk(t->b);
    return n;
  };
  return walk(e);
}

TermPtr Engine::unfreeze(const TermPtr& e,
                         const std::map<std::string, TermPtr>& bindings) {
  std::function<TermPtr(const TermPtr&)> walk =
      [&](const TermPtr& t) -> TermPtr {
    if (!t) return t;
    if (t->kind == Kind::Ghost) {
      auto it = bindings.find(t->name);
      return it == bindings.end() ? t : it->second;
    }
    auto n = std::make_shared<Term>(*t);
    n->a = walk(t->a);
    n->b = walk(t->b);
    return n;
  };
  return walk(e);
}

namespace {

// Transports one side of an invariant equation through the loop body,
// operand by operand, then reassembles and folds chain equations.
TermPtr transport_side(Engine& eng, const Instr& loop, const TermPtr& side,
                       ProofTrace* tr) {
  auto elems = concat_elements(normalize(side));
  std::vector<TermPtr> out;
  for (auto& el : elems) {
    if (el->kind == Kind::Rev) {
      out.push_back(rev(eng.seq_apply(loop.body, el->a, tr)));
    } else {
      out.push_back(eng.seq_apply(loop.body, el, tr));
    }
  }
  TermPtr raw = concat_of(out);
  TermPtr nrm = normalize(raw);
  if (tr && !equal(raw, nrm))
    tr->steps.push_back({RuleId::NORM, "", raw, nrm, {}});

  // Fold <<p>> ++ p.a.integral(a) back into p.integral(a). The non-Void
  // side condition comes from the implicit not-exit fact at the body head.
  std::string fold_label = loop.body.empty() ? "" : loop.body.front()->label;
  bool changed = true;
  while (changed) {
    changed = false;
    auto parts = concat_elements(nrm);
    for (size_t i = 0; i + 1 < parts.size(); ++i) {
      if (parts[i]->kind != Kind::Singleton) continue;
      auto p = parts[i]->a;
      auto pv = as_path(parts[i + 1]);
      if (!pv || !pv->tail || *pv->tail != Kind::Integral) continue;
      auto ppv = as_path(normalize(p));
      if (!ppv) continue;
      auto want = ppv->attrs;
      want.push_back(pv->tail_attr);
      if (!(equal(pv->root, ppv->root) && pv->attrs == want)) continue;
      // The chain from p must terminate without revisiting p.
      std::vector<Discharge> sides;
      bool have_facts = eng.facts() && !fold_label.empty() &&
                        eng.facts()->has_label(fold_label);
      SideCondition ac{SideCondition::Kind::Acyclic, normalize(p), nullptr, "",
                       pv->tail_attr};
      bool ac_ok = have_facts &&
                   eng.facts()->acyclic_at(ac.lhs, pv->tail_attr, fold_label);
      if (!ac_ok && !eng.options().assume_all) continue;
      sides.push_back({ac, ac_ok ? "alias-engine" : "assumed-fact"});
      RuleId rule = RuleId::SIE;
      if (p->kind != Kind::Current) {
        rule = RuleId::NIE;
        SideCondition c{SideCondition::Kind::NeverAlias, normalize(p), void_(),
                        "", ""};
        bool ok = have_facts && eng.facts()->never_alias(c.lhs, c.rhs,
                                                         fold_label);
        if (!ok && !eng.options().assume_all) continue;
        sides.push_back({c, ok ? "alias-engine" : "assumed-fact"});
      }
      std::vector<TermPtr> next(parts.begin(), parts.begin() + i);
      next.push_back(normalize(integral(
          path_term(ppv->root, ppv->attrs, 0, ppv->attrs.size()),
          pv->tail_attr)));
      next.insert(next.end(), parts.begin() + i + 2, parts.end());
      auto folded = normalize(concat_of(next));
      if (tr) tr->steps.push_back({rule, fold_label, nrm, folded, sides});
      nrm = folded;
      changed = true;
      break;
    }
  }
  return nrm;
}

} // namespace

InvariantReport check_invariant(Engine& eng, const std::vector<InstrPtr>& prefix,
                                const Instr& loop) {
  InvariantReport rep;
  std::map<std::string, TermPtr> bindings;
  for (auto& inv : loop.invariants) {
    ClauseReport cr;
    cr.clause = eng.freeze_old(inv, bindings);

    // Preservation under the loop body.
    try {
      auto c = normalize(cr.clause);
      if (c->kind == Kind::Eq) {
        auto l2 = transport_side(eng, loop, c->a, &rep.trace);
        auto r2 = transport_side(eng, loop, c->b, &rep.trace);
        cr.preserved = equal(l2, normalize(c->a)) && equal(r2, normalize(c->b));
        if (!cr.preserved)
          cr.failure = "transported invariant differs: " + to_string(l2) +
                       " = " + to_string(r2);
      } else {
        auto w = eng.seq_apply(loop.body, c, &rep.trace);
        cr.preserved = equal(w, c) || (w->kind == Kind::Bool && w->bval);
        if (!cr.preserved)
          cr.failure = "transported invariant differs: " + to_string(w);
      }
    } catch (const NoRuleApplies& e) {
      cr.preserved = false;
      cr.failure = e.what();
    }
    if (!cr.preserved) rep.all_preserved = false;

    // Establishment through the loop prefix and initialization.
    std::vector<InstrPtr> pre = prefix;
    pre.insert(pre.end(), loop.init.begin(), loop.init.end());
    try {
      auto at_entry = eng.seq_apply(pre, cr.clause, &rep.trace);
      auto goal = normalize(Engine::unfreeze(at_entry, bindings));
      std::vector<TermPtr> facts;
      for (auto& p : eng.routine().precondition) facts.push_back(p);
      cr.established = trivial_consequence(goal, facts);
      if (!cr.established) rep.residual_establishment.push_back(goal);
    } catch (const NoRuleApplies&) {
      cr.established = false;
      rep.residual_establishment.push_back(cr.clause);
    }
    rep.clauses.push_back(cr);
  }
  return rep;
}

VariantReport check_variant(Engine& eng, const Instr& loop) {
  VariantReport rep;
  if (!loop.variant) {
    rep.detail = "no variant clause";
    return rep;
  }
  auto pv = as_path(normalize(loop.variant));
  if (!pv || !pv->tail || *pv->tail != Kind::Depth ||
      pv->root->kind != Kind::Var || !pv->attrs.empty()) {
    rep.detail = "variant is not a plain depth(p, a) measure";
    return rep;
  }
  const TermPtr p = pv->root;
  const std::string a = pv->tail_attr;
  std::string head = loop.body.empty() ? "" : loop.body.front()->label;
  auto facts = eng.facts();
  bool assume = eng.options().assume_all;

  if (!assume && !(facts && !head.empty() && facts->has_label(head) &&
                   facts->acyclic_at(p, a, head))) {
    rep.detail = "acyclicity of " + to_string(p) + " on " + a + " not provable";
    return rep;
  }

  int advances = 0;
  for (auto& i : loop.body) {
    switch (i->kind) {
    case InstrKind::Assign:
      if (!i->target_is_attr) {
        if (i->target == p->name) {
          auto want = normalize(dot(p, attr(a)));
          if (equal(normalize(i->source), want)) {
            ++advances;
          } else {
            rep.detail = "measure head reassigned off the chain at " + i->label;
            rep.status = VariantReport::Status::Rejected;
            return rep;
          }
        }
      } else if (i->target == a) {
        // Writing Current.a breaks the chain unless Current is off it.
        if (!assume && !(facts && facts->has_label(i->label) &&
                         facts->not_in_chain(current(), p, a, i->label))) {
          rep.detail = "chain write at " + i->label + " not provably off " +
                       to_string(p) + ".integral(" + a + ")";
          return rep;
        }
      }
      break;
    case InstrKind::QualifiedCall:
    case InstrKind::UnqualifiedCall: {
      const RoutineDef* rd = eng.unit().find_routine(i->routine);
      if (!rd) {
        rep.detail = "unknown routine " + i->routine;
        return rep;
      }
      std::set<std::string> writes(rd->direct_affects.begin(),
                                   rd->direct_affects.end());
      writes.insert(rd->indirect_affects.begin(), rd->indirect_affects.end());
      if (rd->affects_unknown) {
        rep.detail = "call at " + i->label + " has unknown effects";
        return rep;
      }
      if (!writes.count(a)) break;
      TermPtr writer = i->kind == InstrKind::QualifiedCall
                           ? normalize(i->call_target)
                           : current();
      if (rd->setter_class == SetterClass::SimpleSetterFor &&
          rd->setter_attr == a) {
        if (!assume && !(facts && facts->has_label(i->label) &&
                         facts->not_in_chain(writer, p, a, i->label))) {
          rep.detail = "setter at " + i->label + " not provably off " +
                       to_string(p) + ".integral(" + a + ")";
          return rep;
        }
      } else {
        rep.detail = "call at " + i->label + " may write " + a +
                     " at unknown objects";
        return rep;
      }
      break;
    }
    case InstrKind::Cut:
    case InstrKind::Check:
      break;
    case InstrKind::Loop:
      rep.detail = "nested loop";
      return rep;
    }
  }
  if (advances != 1) {
    rep.detail = advances == 0 ? "no strict advance of the measure head"
                               : "measure head advanced more than once";
    rep.status = advances == 0 ? VariantReport::Status::Rejected
                               : VariantReport::Status::Residual;
    return rep;
  }
  rep.status = VariantReport::Status::Ok;
  rep.detail = "depth(" + to_string(p) + ", " + a +
               ") decreases by one each iteration";
  return rep;
}

bool trivial_consequence(const TermPtr& goal,
                         const std::vector<TermPtr>& facts) {
  auto g = normalize(goal);
  if (g->kind == Kind::Bool) return g->bval;
  if (g->kind == Kind::And)
    return trivial_consequence(g->a, facts) &&
           trivial_consequence(g->b, facts);
  for (auto& f0 : facts) {
    auto f = normalize(f0);
    if (equal(g, f)) return true;
    if (f->kind == Kind::Eq) {
      auto a = f->a, b = f->b;
      std::vector<TermPtr> variants = {
          normalize(eq(b, a)),
          normalize(eq(rev(a), rev(b))),
          normalize(eq(rev(b), rev(a))),
      };
      for (auto& v : variants)
        if (equal(g, v)) return true;
    }
  }
  return false;
}

TermPtr wp(Engine& eng, const std::vector<InstrPtr>& instrs,
           const TermPtr& post, ProofTrace* tr) {
  return eng.seq_apply(instrs, post, tr);
}

} // namespace oocalc
