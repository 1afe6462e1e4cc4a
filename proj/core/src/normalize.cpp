#include "oocalc/term.hpp"

#include <stdexcept>

namespace oocalc {

namespace {

// "old x" either literally or frozen into a ghost.
bool is_old_of(const TermPtr& t, const std::string& name) {
  const TermPtr inner = t->kind == Kind::Old    ? t->a
                        : t->kind == Kind::Ghost ? t->a
                                                 : nullptr;
  return inner && inner->kind == Kind::Var && inner->name == name;
}

TermPtr norm(const TermPtr& t);

// Normalizes a Dot spine: flatten, drop Current, apply NEG1/NEG2, absorb a
// trailing integral-ish node's prefix, rebuild right-nested.
TermPtr norm_spine(const TermPtr& t) {
  std::vector<TermPtr> comps;
  TermPtr cur = t;
  while (cur->kind == Kind::Dot) {
    comps.push_back(cur->a);
    cur = cur->b;
  }
  comps.push_back(cur);

  // A trailing Integral/Depth/Acyclic absorbs everything before it as its
  // prefix; its own prefix joins the spine first.
  TermPtr tail;
  auto& last = comps.back();
  if (last->kind == Kind::Integral || last->kind == Kind::Depth ||
      last->kind == Kind::Acyclic) {
    tail = last;
    comps.pop_back();
    if (tail->a) {
      TermPtr p = tail->a;
      std::vector<TermPtr> pre;
      while (p->kind == Kind::Dot) {
        pre.push_back(p->a);
        p = p->b;
      }
      pre.push_back(p);
      comps.insert(comps.end(), pre.begin(), pre.end());
    }
  }

  // Elimination passes over adjacent components.
  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<TermPtr> out;
    for (size_t i = 0; i < comps.size(); ++i) {
      const auto& c = comps[i];
      if (c->kind == Kind::Current) { // CUR1/CUR2
        changed = true;
        continue;
      }
      if (i + 1 < comps.size()) {
        const auto& n = comps[i + 1];
        // NEG1: x.x' = Current
        if (c->kind == Kind::Var && n->kind == Kind::NegVar &&
            c->name == n->name) {
          ++i;
          changed = true;
          continue;
        }
        // NEG2: x'.old x = Current
        if (c->kind == Kind::NegVar && is_old_of(n, c->name)) {
          ++i;
          changed = true;
          continue;
        }
      }
      out.push_back(c);
    }
    comps = std::move(out);
  }

  if (tail) {
    auto node = std::make_shared<Term>(*tail);
    if (comps.empty()) {
      node->a = nullptr;
    } else if (comps.size() == 1 && comps[0]->kind == Kind::Void) {
      // Void-headed integrals evaluate to the empty sequence.
      if (node->kind == Kind::Integral) return empty_seq();
      node->a = comps[0];
    } else {
      TermPtr p = comps.back();
      for (auto it = comps.rbegin() + 1; it != comps.rend(); ++it)
        p = dot(*it, p);
      node->a = p;
    }
    return node;
  }
  if (comps.empty()) return current();
  TermPtr acc = comps.back();
  for (auto it = comps.rbegin() + 1; it != comps.rend(); ++it)
    acc = dot(*it, acc);
  return acc;
}

TermPtr norm(const TermPtr& t) {
  if (!t) return t;
  switch (t->kind) {
  case Kind::Current:
  case Kind::Void:
  case Kind::Int:
  case Kind::Bool:
  case Kind::EmptySeq:
  case Kind::Var:
  case Kind::Attr:
  case Kind::NegVar:
  case Kind::Ghost: // frozen term stays as written
    return t;
  case Kind::Old: {
    auto inner = norm(t->a);
    return inner == t->a ? t : old_of(inner);
  }
  case Kind::Dot: {
    auto a = norm(t->a);
    auto b = norm(t->b);
    return norm_spine(dot(a, b));
  }
  case Kind::Integral:
  case Kind::Depth:
  case Kind::Acyclic: {
    auto p = t->a ? norm(t->a) : nullptr;
    if (p && p->kind == Kind::Current) p = nullptr;
    if (p && p->kind == Kind::Void && t->kind == Kind::Integral)
      return empty_seq();
    if (p == t->a) return t;
    auto node = std::make_shared<Term>(*t);
    node->a = p;
    return node;
  }
  case Kind::Singleton: {
    auto inner = norm(t->a);
    return inner == t->a ? t : singleton(inner);
  }
  case Kind::Rev: {
    auto inner = norm(t->a);
    if (inner->kind == Kind::Rev) return inner->a;          // rev(rev s) = s
    if (inner->kind == Kind::Singleton) return inner;       // rev(<<a>>) = <<a>>
    if (inner->kind == Kind::EmptySeq) return inner;
    if (inner->kind == Kind::Concat) {
      // rev(s1 ++ s2) = rev(s2) ++ rev(s1)
      auto elems = concat_elements(inner);
      std::vector<TermPtr> out;
      for (auto it = elems.rbegin(); it != elems.rend(); ++it)
        out.push_back(norm(rev(*it)));
      return norm(concat_of(out));
    }
    return rev(inner);
  }
  case Kind::Concat: {
    auto elems = concat_elements(t);
    std::vector<TermPtr> out;
    for (auto& e : elems) {
      auto ne = norm(e);
      if (ne->kind == Kind::EmptySeq) continue;
      if (ne->kind == Kind::Concat) {
        for (auto& sub : concat_elements(ne)) out.push_back(sub);
      } else {
        out.push_back(ne);
      }
    }
    return concat_of(out);
  }
  case Kind::Eq:
  case Kind::Neq: {
    auto a = norm(t->a);
    auto b = norm(t->b);
    bool want = t->kind == Kind::Eq;
    if (equal(a, b)) return bool_const(want);
    if (a->kind == Kind::Int && b->kind == Kind::Int)
      return bool_const((a->ival == b->ival) == want);
    if (a->kind == Kind::Bool && b->kind == Kind::Bool)
      return bool_const((a->bval == b->bval) == want);
    if (a == t->a && b == t->b) return t;
    return t->kind == Kind::Eq ? eq(a, b) : neq(a, b);
  }
  case Kind::Not: {
    auto a = norm(t->a);
    if (a->kind == Kind::Bool) return bool_const(!a->bval);
    if (a->kind == Kind::Not) return a->a;
    if (a->kind == Kind::Eq) return norm(neq(a->a, a->b));
    if (a->kind == Kind::Neq) return norm(eq(a->a, a->b));
    return a == t->a ? t : not_of(a);
  }
  case Kind::And:
  case Kind::Or: {
    auto a = norm(t->a);
    auto b = norm(t->b);
    bool is_and = t->kind == Kind::And;
    if (a->kind == Kind::Bool) return a->bval == is_and ? b : a;
    if (b->kind == Kind::Bool) return b->bval == is_and ? a : b;
    if (a == t->a && b == t->b) return t;
    return is_and ? and_of(a, b) : or_of(a, b);
  }
  case Kind::Add:
  case Kind::Sub: {
    auto a = norm(t->a);
    auto b = norm(t->b);
    if (a->kind == Kind::Int && b->kind == Kind::Int)
      return int_const(t->kind == Kind::Add ? a->ival + b->ival
                                            : a->ival - b->ival);
    if (a == t->a && b == t->b) return t;
    return t->kind == Kind::Add ? add(a, b) : sub(a, b);
  }
  }
  return t;
}

} // namespace

TermPtr normalize(const TermPtr& t) {
  // Single bottom-up pass repeated to a fixpoint; the local rules are
  // terminating (each strictly shrinks or re-associates rightward).
  TermPtr cur = t;
  for (int i = 0; i < 64; ++i) {
    TermPtr next = norm(cur);
    if (equal(next, cur)) return next;
    cur = next;
  }
  throw std::logic_error("normalize: fixpoint not reached");
}

namespace {

// True when `q` is exactly `p.a` (after normalization).
bool extends_by(const TermPtr& q, const TermPtr& p, const std::string& a) {
  return equal(normalize(q), normalize(p ? dot(p, attr(a)) : TermPtr(attr(a))));
}

} // namespace

TermPtr fold_integral(const TermPtr& t0) {
  auto t = normalize(t0);
  if (!t) return t;
  if (t->kind == Kind::Concat) {
    auto elems = concat_elements(t);
    for (size_t i = 0; i + 1 < elems.size(); ++i) {
      const auto& s = elems[i];
      const auto& n = elems[i + 1];
      if (s->kind != Kind::Singleton || n->kind != Kind::Integral) continue;
      const auto& head = s->a;
      if (head->kind == Kind::Current) {
        // SIE: <<Current>> ++ a.integral(a) = integral(a)
        if (n->a && n->a->kind == Kind::Attr && n->a->name == n->attr) {
          elems[i] = integral(nullptr, n->attr);
          elems.erase(elems.begin() + i + 1);
          return fold_integral(concat_of(elems));
        }
      } else if (n->a && extends_by(n->a, head, n->attr)) {
        // NIE: <<p>> ++ p.a.integral(a) = p.integral(a)
        elems[i] = integral(head, n->attr);
        elems.erase(elems.begin() + i + 1);
        return fold_integral(concat_of(elems));
      }
    }
  }
  // Recurse into children.
  if (t->a || t->b) {
    auto copy = std::make_shared<Term>(*t);
    bool changed = false;
    if (t->a && t->kind != Kind::Ghost) {
      auto fa = fold_integral(t->a);
      if (!equal(fa, t->a)) { copy->a = fa; changed = true; }
    }
    if (t->b) {
      auto fb = fold_integral(t->b);
      if (!equal(fb, t->b)) { copy->b = fb; changed = true; }
    }
    if (changed) return normalize(copy);
  }
  return t;
}

TermPtr unfold_integral(const TermPtr& t0) {
  auto t = normalize(t0);
  if (t->kind != Kind::Integral) return t;
  if (!t->a) // SIE: integral(a) = <<Current>> ++ a.integral(a)
    return normalize(
        concat(singleton(current()), integral(attr(t->attr), t->attr)));
  // NIE: p.integral(a) = <<p>> ++ p.a.integral(a)
  return normalize(concat(singleton(t->a),
                          integral(dot(t->a, attr(t->attr)), t->attr)));
}

} // namespace oocalc
