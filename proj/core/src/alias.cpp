#include "oocalc/alias.hpp"

#include <algorithm>

namespace oocalc {

namespace {

// Special roots. "" is Current; kVoidRoot stands for the Void literal in
// assumed non-alias facts (e.g. the negated exit condition v /= Void).
const std::string kVoidRoot = "%Void";

AccessPath ap_current() { return {"", {}}; }
AccessPath ap_var(const std::string& v) { return {v, {}}; }
AccessPath ap_void() { return {kVoidRoot, {}}; }

bool is_plain_var(const AccessPath& p) {
  return !p.root.empty() && p.root != kVoidRoot && p.attrs.empty();
}

bool mentions_attr(const AccessPath& p, const std::string& a) {
  return std::find(p.attrs.begin(), p.attrs.end(), a) != p.attrs.end();
}

AliasState::Pair make_pair_ord(AccessPath a, AccessPath b) {
  if (b < a) std::swap(a, b);
  return {std::move(a), std::move(b)};
}

// All ways of writing the same object: expand or contract variable roots
// through the definition facts. Small bounded closure.
std::vector<AccessPath> equivalents(const AliasState& s, const AccessPath& p) {
  std::vector<AccessPath> out{p};
  auto push = [&](const AccessPath& q) {
    if (std::find(out.begin(), out.end(), q) == out.end()) out.push_back(q);
  };
  for (size_t i = 0; i < out.size() && out.size() < 16; ++i) {
    AccessPath cur = out[i];
    // expand: root v with v ≐ d becomes d ++ attrs
    auto it = s.defs.find(cur.root);
    if (it != s.defs.end()) {
      AccessPath q = it->second;
      q.attrs.insert(q.attrs.end(), cur.attrs.begin(), cur.attrs.end());
      if (q.attrs.size() <= 8) push(q);
    }
    // contract: t ≐ d and cur = d ++ suffix becomes t ++ suffix
    for (auto& [t, d] : s.defs) {
      if (d.root != cur.root || d.attrs.size() > cur.attrs.size()) continue;
      if (!std::equal(d.attrs.begin(), d.attrs.end(), cur.attrs.begin()))
        continue;
      AccessPath q = ap_var(t);
      q.attrs.assign(cur.attrs.begin() + d.attrs.size(), cur.attrs.end());
      push(q);
    }
  }
  return out;
}

bool is_void_ap(const AliasState& s, const AccessPath& p) {
  if (p.root == kVoidRoot) return true;
  return p.attrs.empty() && s.void_vars.count(p.root) != 0;
}

// q is p followed by n >= 1 hops of attribute a.
bool a_extension_of(const AccessPath& p, const AccessPath& q,
                    const std::string& a) {
  if (p.root != q.root || q.attrs.size() <= p.attrs.size()) return false;
  if (!std::equal(p.attrs.begin(), p.attrs.end(), q.attrs.begin()))
    return false;
  for (size_t i = p.attrs.size(); i < q.attrs.size(); ++i)
    if (q.attrs[i] != a) return false;
  return true;
}

bool query_chain_disj(const AliasState& s, const AccessPath& u,
                      const AccessPath& w, const std::string& a) {
  if (is_void_ap(s, u) || is_void_ap(s, w)) return true;
  for (auto& u2 : equivalents(s, u))
    for (auto& w2 : equivalents(s, w))
      if (s.chain_disj.count({make_pair_ord(u2, w2), a})) return true;
  return false;
}

} // namespace

std::string AccessPath::str() const {
  std::string out = root.empty() ? "Current" : root == kVoidRoot ? "Void" : root;
  for (auto& a : attrs) out += "." + a;
  return out;
}

std::optional<AccessPath> to_access_path(const TermPtr& t) {
  if (!t) return std::nullopt;
  if (t->kind == Kind::Void) return ap_void();
  auto pv = as_path(normalize(t));
  if (!pv || pv->tail) return std::nullopt;
  AccessPath ap;
  switch (pv->root->kind) {
  case Kind::Current: ap.root = ""; break;
  case Kind::Var: ap.root = pv->root->name; break;
  case Kind::NegVar: ap.root = pv->root->name + "'"; break;
  default: return std::nullopt;
  }
  ap.attrs = pv->attrs;
  return ap;
}

bool query_acyc(const AliasState& s, const AccessPath& p,
                const std::string& a) {
  if (is_void_ap(s, p)) return true;
  for (auto& p2 : equivalents(s, p)) {
    if (s.acyc.count({p2, a})) return true;
    // a suffix of an acyclic chain is acyclic
    for (auto& [base, attr] : s.acyc)
      if (attr == a && (base == p2 || a_extension_of(base, p2, a))) return true;
  }
  return false;
}

bool query_never(const AliasState& s, const AccessPath& u,
                 const AccessPath& v) {
  if (u == v) return false;
  if (is_void_ap(s, u) || is_void_ap(s, v)) return true;
  for (auto& u2 : equivalents(s, u)) {
    for (auto& v2 : equivalents(s, v)) {
      if (u2 == v2) continue;
      if (s.never.count(make_pair_ord(u2, v2))) return true;
      // distinct positions on one acyclic chain
      for (auto& [base, a] : s.acyc) {
        bool ue = u2 == base || a_extension_of(base, u2, a);
        bool ve = v2 == base || a_extension_of(base, v2, a);
        if (ue && ve && u2.attrs.size() != v2.attrs.size() &&
            (a_extension_of(u2, v2, a) || a_extension_of(v2, u2, a)))
          return true;
      }
    }
  }
  return false;
}

bool query_not_in(const AliasState& s, const AccessPath& u,
                  const AccessPath& w, const std::string& a) {
  if (is_void_ap(s, u) || is_void_ap(s, w)) return true;
  if (query_chain_disj(s, u, w, a)) return true;
  for (auto& u2 : equivalents(s, u)) {
    for (auto& w2 : equivalents(s, w)) {
      // not_in is directional: pair.first ∉ chain(pair.second)
      if (s.not_in.count({{u2, w2}, a})) return true;
      // head of an acyclic chain is not in the chain of its own tail
      if (a_extension_of(u2, w2, a) && query_acyc(s, u2, a)) return true;
    }
  }
  return false;
}

AliasState join(const AliasState& a, const AliasState& b) {
  AliasState out;
  for (auto& v : a.void_vars)
    if (b.void_vars.count(v)) out.void_vars.insert(v);
  for (auto& [t, d] : a.defs) {
    auto it = b.defs.find(t);
    if (it != b.defs.end() && it->second == d) out.defs[t] = d;
  }
  auto both_never = [&](const AliasState::Pair& p) {
    return query_never(a, p.first, p.second) &&
           query_never(b, p.first, p.second);
  };
  for (auto& p : a.never)
    if (both_never(p)) out.never.insert(p);
  for (auto& p : b.never)
    if (both_never(p)) out.never.insert(p);
  auto both_acyc = [&](const AliasState::Chain& c) {
    return query_acyc(a, c.first, c.second) && query_acyc(b, c.first, c.second);
  };
  for (auto& c : a.acyc)
    if (both_acyc(c)) out.acyc.insert(c);
  for (auto& c : b.acyc)
    if (both_acyc(c)) out.acyc.insert(c);
  auto both_not_in = [&](const std::pair<AliasState::Pair, std::string>& n) {
    return query_not_in(a, n.first.first, n.first.second, n.second) &&
           query_not_in(b, n.first.first, n.first.second, n.second);
  };
  for (auto& n : a.not_in)
    if (both_not_in(n)) out.not_in.insert(n);
  for (auto& n : b.not_in)
    if (both_not_in(n)) out.not_in.insert(n);
  auto both_disj = [&](const std::pair<AliasState::Pair, std::string>& n) {
    return query_chain_disj(a, n.first.first, n.first.second, n.second) &&
           query_chain_disj(b, n.first.first, n.first.second, n.second);
  };
  for (auto& n : a.chain_disj)
    if (both_disj(n)) out.chain_disj.insert(n);
  for (auto& n : b.chain_disj)
    if (both_disj(n)) out.chain_disj.insert(n);
  return out;
}

namespace {

// Every access path named anywhere in the state, plus Current.
std::vector<AccessPath> known_paths(const AliasState& s) {
  std::vector<AccessPath> out{ap_current()};
  auto push = [&](const AccessPath& p) {
    if (p.root != kVoidRoot &&
        std::find(out.begin(), out.end(), p) == out.end())
      out.push_back(p);
  };
  for (auto& v : s.void_vars) push(ap_var(v));
  for (auto& [t, d] : s.defs) {
    push(ap_var(t));
    push(d);
  }
  for (auto& p : s.never) {
    push(p.first);
    push(p.second);
  }
  for (auto& c : s.acyc) push(c.first);
  for (auto& n : s.not_in) {
    push(n.first.first);
    push(n.first.second);
  }
  for (auto& n : s.chain_disj) {
    push(n.first.first);
    push(n.first.second);
  }
  return out;
}

// Removes every fact that names x as a root, materializing first whatever
// can be re-expressed through other definitions.
void kill_var(AliasState& s, const std::string& x) {
  // materialize: t ≐ d with d rooted at x lets x-rooted paths survive as t
  std::vector<std::pair<std::string, AccessPath>> subs;
  for (auto& [t, d] : s.defs)
    if (d.root == x && t != x) subs.emplace_back(t, d);
  auto rewrite = [&](const AccessPath& p) -> std::vector<AccessPath> {
    std::vector<AccessPath> out;
    if (p.root != x) {
      out.push_back(p);
      return out;
    }
    for (auto& [t, d] : subs) {
      if (d.attrs.size() > p.attrs.size()) continue;
      if (!std::equal(d.attrs.begin(), d.attrs.end(), p.attrs.begin()))
        continue;
      AccessPath q = ap_var(t);
      q.attrs.assign(p.attrs.begin() + d.attrs.size(), p.attrs.end());
      out.push_back(q);
    }
    return out;
  };
  AliasState n;
  n.void_vars = s.void_vars;
  n.void_vars.erase(x);
  for (auto& [t, d] : s.defs)
    if (t != x && d.root != x) n.defs[t] = d;
  for (auto& p : s.never)
    for (auto& u : rewrite(p.first))
      for (auto& v : rewrite(p.second))
        if (!(u == v)) n.never.insert(make_pair_ord(u, v));
  for (auto& c : s.acyc)
    for (auto& p : rewrite(c.first)) n.acyc.insert({p, c.second});
  for (auto& m : s.not_in)
    for (auto& u : rewrite(m.first.first))
      for (auto& w : rewrite(m.first.second)) n.not_in.insert({{u, w}, m.second});
  for (auto& m : s.chain_disj)
    for (auto& u : rewrite(m.first.first))
      for (auto& w : rewrite(m.first.second))
        if (!(u == w)) n.chain_disj.insert({make_pair_ord(u, w), m.second});
  s = std::move(n);
}

void add_never(AliasState& s, const AccessPath& u, const AccessPath& v) {
  if (!(u == v)) s.never.insert(make_pair_ord(u, v));
}

// x := r where r is an access path: x aliases r, inheriting its facts; if
// r ends in an attribute hop, chain reasoning adds distinctness facts.
void assign_path(AliasState& s, const std::string& x, const AccessPath& r,
                 const AnalysisConfig& cfg) {
  AliasState pre = s; // query against the pre-assignment state
  kill_var(s, x);
  AccessPath xa = ap_var(x);
  if (r.root == kVoidRoot) {
    s.void_vars.insert(x);
    return;
  }
  AccessPath rr = r;
  if (rr.root == x) {
    // x := x.a: re-express the rhs through a definition of the old x
    bool found = false;
    for (auto& q : equivalents(pre, rr)) {
      if (q.root == x) continue;
      rr = q;
      found = true;
      break;
    }
    if (!found) return; // old value inexpressible: x is unconstrained
  }
  if (static_cast<int>(rr.attrs.size()) <= cfg.k) s.defs[x] = rr;
  // copy facts that name r (or an equivalent) verbatim for x
  auto eqs = equivalents(pre, rr);
  auto matches = [&](const AccessPath& p) {
    return std::find(eqs.begin(), eqs.end(), p) != eqs.end();
  };
  for (auto& p : pre.never) {
    if (matches(p.first) && p.second.root != x) add_never(s, xa, p.second);
    if (matches(p.second) && p.first.root != x) add_never(s, xa, p.first);
  }
  for (auto& c : pre.acyc)
    if (matches(c.first)) s.acyc.insert({xa, c.second});
  for (auto& m : pre.not_in) {
    if (matches(m.first.first) && m.first.second.root != x)
      s.not_in.insert({{xa, m.first.second}, m.second});
    if (matches(m.first.second) && m.first.first.root != x)
      s.not_in.insert({{m.first.first, xa}, m.second});
  }
  for (auto& m : pre.chain_disj) {
    if (matches(m.first.first) && m.first.second.root != x)
      s.chain_disj.insert({make_pair_ord(xa, m.first.second), m.second});
    if (matches(m.first.second) && m.first.first.root != x)
      s.chain_disj.insert({make_pair_ord(xa, m.first.first), m.second});
  }
  if (is_void_ap(pre, rr)) {
    s.void_vars.insert(x);
    return;
  }
  if (rr.attrs.empty()) return;
  // r = w.a: x is one a-hop into w's chain
  AccessPath w = rr;
  std::string a = w.attrs.back();
  w.attrs.pop_back();
  if (query_acyc(pre, w, a)) {
    s.acyc.insert({xa, a});
    for (auto& z : equivalents(pre, w)) {
      if (z.root == x) continue;
      add_never(s, xa, z);
      s.not_in.insert({{z, xa}, a}); // head of acyclic chain avoids its tail
    }
  }
  for (auto& u : known_paths(pre)) {
    if (u.root == x) continue;
    if (query_not_in(pre, u, w, a)) {
      add_never(s, xa, u); // u outside w's chain, x inside it
      s.not_in.insert({{u, xa}, a});
    }
    if (query_chain_disj(pre, w, u, a)) {
      s.not_in.insert({{xa, u}, a});
      s.chain_disj.insert({make_pair_ord(xa, u), a});
    }
  }
}

// Heap write X.a := c (setter call or local attribute assignment).
void field_write(AliasState& s, const AccessPath& X, const std::string& a,
                 const std::optional<AccessPath>& c) {
  AliasState pre = s;
  AliasState n;
  n.void_vars = pre.void_vars;
  auto a_free = [&](const AccessPath& p) { return !mentions_attr(p, a); };
  for (auto& [t, d] : pre.defs)
    if (a_free(d)) n.defs[t] = d;
  for (auto& p : pre.never)
    if (a_free(p.first) && a_free(p.second)) n.never.insert(p);
  // a-chain from w is untouched iff X is provably outside it
  auto unaffected = [&](const AccessPath& w) {
    return a_free(w) && query_not_in(pre, X, w, a);
  };
  for (auto& ch : pre.acyc) {
    if (ch.second != a) {
      if (a_free(ch.first)) n.acyc.insert(ch);
    } else if (unaffected(ch.first)) {
      n.acyc.insert(ch);
    }
  }
  for (auto& m : pre.not_in) {
    if (m.second != a) {
      if (a_free(m.first.first) && a_free(m.first.second)) n.not_in.insert(m);
    } else if (a_free(m.first.first) && unaffected(m.first.second)) {
      n.not_in.insert(m);
    }
  }
  for (auto& m : pre.chain_disj) {
    if (m.second != a) {
      if (a_free(m.first.first) && a_free(m.first.second))
        n.chain_disj.insert(m);
    } else if (unaffected(m.first.first) && unaffected(m.first.second)) {
      n.chain_disj.insert(m);
    }
  }
  // re-derive facts about X's new chain ⟨X⟩ + chain(c)
  if (c && a_free(X) && a_free(*c) && query_not_in(pre, X, *c, a)) {
    if (query_acyc(pre, *c, a)) n.acyc.insert({X, a});
    for (auto& u : known_paths(pre)) {
      if (!a_free(u)) continue;
      if (query_never(pre, u, X) && query_not_in(pre, u, *c, a))
        n.not_in.insert({{u, X}, a});
      if (query_not_in(pre, X, u, a) && query_chain_disj(pre, *c, u, a) &&
          !(u == X))
        n.chain_disj.insert({make_pair_ord(X, u), a});
    }
  }
  s = std::move(n);
}

// Unknown call: only variable bindings are certainly preserved. `affected`
// lists attributes the callee may write; nullptr means all of them.
void havoc(AliasState& s, const std::set<std::string>* affected) {
  AliasState pre = s;
  AliasState n;
  n.void_vars = pre.void_vars;
  auto clean = [&](const AccessPath& p) {
    if (!affected) return p.attrs.empty();
    for (auto& at : p.attrs)
      if (affected->count(at)) return false;
    return true;
  };
  auto chain_clean = [&](const std::string& a) {
    return affected && !affected->count(a);
  };
  for (auto& [t, d] : pre.defs)
    if (clean(d)) n.defs[t] = d;
  for (auto& p : pre.never)
    if (clean(p.first) && clean(p.second)) n.never.insert(p);
  for (auto& ch : pre.acyc)
    if (clean(ch.first) && chain_clean(ch.second)) n.acyc.insert(ch);
  for (auto& m : pre.not_in)
    if (clean(m.first.first) && clean(m.first.second) && chain_clean(m.second))
      n.not_in.insert(m);
  for (auto& m : pre.chain_disj)
    if (clean(m.first.first) && clean(m.first.second) && chain_clean(m.second))
      n.chain_disj.insert(m);
  s = std::move(n);
}

void inject_fact(AliasState& s, const TermPtr& clause) {
  TermPtr t = normalize(clause);
  if (!t) return;
  if (t->kind == Kind::And) {
    inject_fact(s, t->a);
    inject_fact(s, t->b);
    return;
  }
  if (t->kind == Kind::Acyclic) {
    auto p = to_access_path(t->a ? t->a : current());
    if (p) s.acyc.insert({*p, t->attr});
    return;
  }
  if (t->kind == Kind::Neq) {
    auto u = to_access_path(t->a);
    auto v = to_access_path(t->b);
    if (u && v) add_never(s, *u, *v);
    return;
  }
}

const RoutineDef* lookup_routine(const SourceUnit& unit, const InstrPtr& i) {
  return unit.find_routine(i->routine);
}

AliasState transfer_list(const std::vector<InstrPtr>& instrs,
                         const AliasState& s, const SourceUnit& unit,
                         const AnalysisConfig& cfg) {
  AliasState cur = s;
  for (auto& i : instrs) cur = transfer(i, cur, unit, cfg);
  return cur;
}

void with_not_exit(AliasState& s, const TermPtr& exit) {
  TermPtr e = normalize(exit);
  if (e && e->kind == Kind::Eq) {
    auto u = to_access_path(e->a);
    auto v = to_access_path(e->b);
    // exit `v = Void` fails inside the body: v ≇ Void
    if (u && v && v->root == kVoidRoot && u->attrs.empty())
      add_never(s, *u, *v);
    if (u && v && u->root == kVoidRoot && v->attrs.empty())
      add_never(s, *v, *u);
  }
}

void apply_exit(AliasState& s, const TermPtr& exit) {
  TermPtr e = normalize(exit);
  if (e && e->kind == Kind::Eq) {
    auto u = to_access_path(e->a);
    auto v = to_access_path(e->b);
    if (u && v && v->root == kVoidRoot && is_plain_var(*u)) {
      kill_var(s, u->root);
      s.void_vars.insert(u->root);
    }
  }
}

} // namespace

AliasState transfer(const InstrPtr& i, const AliasState& s,
                    const SourceUnit& unit, const AnalysisConfig& cfg) {
  AliasState out = s;
  switch (i->kind) {
  case InstrKind::Assign: {
    if (i->target_is_attr) {
      // local field write Current.f := e
      auto c = to_access_path(i->source);
      field_write(out, ap_current(), i->target, c);
      // conservative only when the source survives as a path
      return out;
    }
    auto r = to_access_path(i->source);
    if (r) {
      assign_path(out, i->target, *r, cfg);
    } else {
      kill_var(out, i->target); // integer or sequence value: no alias facts
    }
    return out;
  }
  case InstrKind::QualifiedCall:
  case InstrKind::UnqualifiedCall: {
    const RoutineDef* r = lookup_routine(unit, i);
    std::optional<AccessPath> X =
        i->kind == InstrKind::QualifiedCall ? to_access_path(i->call_target)
                                            : std::optional(ap_current());
    if (r && X && r->setter_class == SetterClass::SimpleSetterFor &&
        r->setter_arg >= 1 &&
        static_cast<size_t>(r->setter_arg) <= i->actuals.size()) {
      auto c = to_access_path(i->actuals[r->setter_arg - 1]);
      field_write(out, *X, r->setter_attr, c);
      return out;
    }
    if (r && !r->affects_unknown) {
      std::set<std::string> affected(r->direct_affects.begin(),
                                     r->direct_affects.end());
      affected.insert(r->indirect_affects.begin(), r->indirect_affects.end());
      havoc(out, &affected);
    } else {
      havoc(out, nullptr);
    }
    return out;
  }
  case InstrKind::Loop: {
    AliasState head = transfer_list(i->init, out, unit, cfg);
    for (int round = 0; round < 64; ++round) {
      AliasState body_in = head;
      with_not_exit(body_in, i->exit);
      AliasState next = join(head, transfer_list(i->body, body_in, unit, cfg));
      if (next == head) break;
      head = std::move(next);
    }
    apply_exit(head, i->exit);
    return head;
  }
  case InstrKind::Cut: {
    auto u = to_access_path(i->cond_e);
    auto v = to_access_path(i->cond_f);
    if (u && v) add_never(out, *u, *v);
    return out;
  }
  case InstrKind::Check:
    inject_fact(out, i->cond_e);
    return out;
  }
  return out;
}

namespace {

// Records the state before every labeled instruction.
void record_labels(const std::vector<InstrPtr>& instrs, AliasState s,
                   const SourceUnit& unit, const AnalysisConfig& cfg,
                   std::map<std::string, AliasState>& at) {
  for (auto& i : instrs) {
    at[i->label] = s;
    if (i->kind == InstrKind::Loop) {
      // fixpoint state at the loop head, then per-body-instruction states
      AliasState head = transfer_list(i->init, s, unit, cfg);
      for (int round = 0; round < 64; ++round) {
        AliasState body_in = head;
        with_not_exit(body_in, i->exit);
        AliasState next =
            join(head, transfer_list(i->body, body_in, unit, cfg));
        if (next == head) break;
        head = std::move(next);
      }
      record_labels(i->init, s, unit, cfg, at);
      AliasState body_in = head;
      with_not_exit(body_in, i->exit);
      record_labels(i->body, body_in, unit, cfg, at);
    }
    s = transfer(i, s, unit, cfg);
  }
}

void collect_assumed(const std::vector<InstrPtr>& instrs,
                     std::vector<std::string>& out) {
  for (auto& i : instrs) {
    if (i->kind == InstrKind::Cut)
      out.push_back("cut " + to_string(i->cond_e) + ", " +
                    to_string(i->cond_f) + " at " + i->label);
    if (i->kind == InstrKind::Check)
      out.push_back("check " + to_string(i->cond_e) + " at " + i->label);
    if (i->kind == InstrKind::Loop) {
      collect_assumed(i->init, out);
      collect_assumed(i->body, out);
    }
  }
}

} // namespace

FactBase analyze_routine(const SourceUnit& unit, const RoutineDef& routine,
                         AnalysisConfig cfg) {
  FactBase fb(&unit, cfg);
  AliasState entry;
  for (auto& [n, ty] : routine.locals) entry.void_vars.insert(n);
  for (auto& pre : routine.precondition) inject_fact(entry, pre);
  fb.entry_ = entry;
  record_labels(routine.body, entry, unit, cfg, fb.at_label_);
  fb.at_label_["%exit"] =
      transfer_list(routine.body, entry, unit, cfg);
  collect_assumed(routine.body, fb.assumed_);
  return fb;
}

const AliasState& FactBase::at(const std::string& label) const {
  auto it = at_label_.find(label);
  if (it == at_label_.end())
    throw std::out_of_range("no alias state at label " + label);
  return it->second;
}

bool FactBase::never_alias(const TermPtr& e, const TermPtr& f,
                           const std::string& label) const {
  auto u = to_access_path(e);
  auto v = to_access_path(f);
  if (!u || !v) return false;
  if (static_cast<int>(u->attrs.size()) > cfg_.k ||
      static_cast<int>(v->attrs.size()) > cfg_.k)
    return false; // widened
  return query_never(at(label), *u, *v);
}

bool FactBase::acyclic_at(const TermPtr& p, const std::string& attr,
                          const std::string& label) const {
  auto ap = to_access_path(p ? p : current());
  if (!ap) return false;
  return query_acyc(at(label), *ap, attr);
}

bool FactBase::not_in_chain(const TermPtr& u, const TermPtr& w,
                            const std::string& attr,
                            const std::string& label) const {
  auto ua = to_access_path(u);
  auto wa = to_access_path(w ? w : current());
  if (!ua || !wa) return false;
  return query_not_in(at(label), *ua, *wa, attr);
}

bool FactBase::cycle_free(const std::string& x, const TermPtr& e,
                          const std::vector<std::string>& p,
                          const std::string& label) const {
  auto base = to_access_path(e);
  for (size_t i = 0; i < p.size(); ++i) {
    if (p[i] != x) continue;
    // prefix q = p[0..i): e.q must never alias Current
    if (!base) return false;
    AccessPath q = *base;
    q.attrs.insert(q.attrs.end(), p.begin(), p.begin() + i);
    if (static_cast<int>(q.attrs.size()) > cfg_.k) return false;
    if (!query_never(at(label), q, ap_current())) return false;
  }
  return true;
}

} // namespace oocalc
