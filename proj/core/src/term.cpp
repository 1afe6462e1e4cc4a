#include "oocalc/term.hpp"

#include <sstream>
#include <stdexcept>

namespace oocalc {

namespace {
TermPtr mk(Kind k) {
  auto t = std::make_shared<Term>();
  t->kind = k;
  return t;
}
} // namespace

TermPtr current() {
  static TermPtr c = mk(Kind::Current);
  return c;
}
TermPtr void_() {
  static TermPtr v = mk(Kind::Void);
  return v;
}
TermPtr empty_seq() {
  static TermPtr e = mk(Kind::EmptySeq);
  return e;
}
TermPtr int_const(long long n) {
  auto t = std::make_shared<Term>();
  t->kind = Kind::Int;
  t->ival = n;
  return t;
}
TermPtr bool_const(bool b) {
  auto t = std::make_shared<Term>();
  t->kind = Kind::Bool;
  t->bval = b;
  return t;
}
TermPtr var(std::string name) {
  auto t = std::make_shared<Term>();
  t->kind = Kind::Var;
  t->name = std::move(name);
  return t;
}
TermPtr attr(std::string name) {
  auto t = std::make_shared<Term>();
  t->kind = Kind::Attr;
  t->name = std::move(name);
  return t;
}
TermPtr neg_var(std::string name) {
  auto t = std::make_shared<Term>();
  t->kind = Kind::NegVar;
  t->name = std::move(name);
  return t;
}
TermPtr ghost(std::string id, TermPtr frozen) {
  auto t = std::make_shared<Term>();
  t->kind = Kind::Ghost;
  t->name = std::move(id);
  t->a = std::move(frozen);
  return t;
}
TermPtr dot(TermPtr receiver, TermPtr rest) {
  auto t = std::make_shared<Term>();
  t->kind = Kind::Dot;
  t->a = std::move(receiver);
  t->b = std::move(rest);
  return t;
}

namespace {
TermPtr unary(Kind k, TermPtr inner) {
  auto t = std::make_shared<Term>();
  t->kind = k;
  t->a = std::move(inner);
  return t;
}
TermPtr binary(Kind k, TermPtr l, TermPtr r) {
  auto t = std::make_shared<Term>();
  t->kind = k;
  t->a = std::move(l);
  t->b = std::move(r);
  return t;
}
TermPtr chain(Kind k, TermPtr prefix, std::string a) {
  auto t = std::make_shared<Term>();
  t->kind = k;
  t->a = std::move(prefix);
  t->attr = std::move(a);
  return t;
}
} // namespace

TermPtr old_of(TermPtr inner) { return unary(Kind::Old, std::move(inner)); }
TermPtr singleton(TermPtr e) { return unary(Kind::Singleton, std::move(e)); }
TermPtr rev(TermPtr s) { return unary(Kind::Rev, std::move(s)); }
TermPtr not_of(TermPtr t) { return unary(Kind::Not, std::move(t)); }
TermPtr concat(TermPtr l, TermPtr r) { return binary(Kind::Concat, std::move(l), std::move(r)); }
TermPtr eq(TermPtr l, TermPtr r) { return binary(Kind::Eq, std::move(l), std::move(r)); }
TermPtr neq(TermPtr l, TermPtr r) { return binary(Kind::Neq, std::move(l), std::move(r)); }
TermPtr and_of(TermPtr l, TermPtr r) { return binary(Kind::And, std::move(l), std::move(r)); }
TermPtr or_of(TermPtr l, TermPtr r) { return binary(Kind::Or, std::move(l), std::move(r)); }
TermPtr add(TermPtr l, TermPtr r) { return binary(Kind::Add, std::move(l), std::move(r)); }
TermPtr sub(TermPtr l, TermPtr r) { return binary(Kind::Sub, std::move(l), std::move(r)); }
TermPtr integral(TermPtr prefix, std::string a) { return chain(Kind::Integral, std::move(prefix), std::move(a)); }
TermPtr depth(TermPtr prefix, std::string a) { return chain(Kind::Depth, std::move(prefix), std::move(a)); }
TermPtr acyclic(TermPtr prefix, std::string a) { return chain(Kind::Acyclic, std::move(prefix), std::move(a)); }

bool equal(const TermPtr& l, const TermPtr& r) {
  if (l == r) return true;
  if (!l || !r) return false;
  if (l->kind != r->kind) return false;
  if (l->name != r->name || l->ival != r->ival || l->bval != r->bval ||
      l->attr != r->attr)
    return false;
  return equal(l->a, r->a) && equal(l->b, r->b);
}

bool contains_kind(const TermPtr& t, Kind k) {
  if (!t) return false;
  if (t->kind == k) return true;
  if (t->kind == Kind::Ghost) return false; // frozen terms are opaque
  return contains_kind(t->a, k) || contains_kind(t->b, k);
}

bool contains_old(const TermPtr& t) { return contains_kind(t, Kind::Old); }

namespace {

// Precedence levels for printing; higher binds tighter.
int prec(Kind k) {
  switch (k) {
  case Kind::Or: return 1;
  case Kind::And: return 2;
  case Kind::Not: return 3;
  case Kind::Eq:
  case Kind::Neq: return 4;
  case Kind::Concat: return 5;
  case Kind::Add:
  case Kind::Sub: return 6;
  case Kind::Dot: return 9;
  default: return 10;
  }
}

void print(const TermPtr& t, std::ostream& os);

void print_child(const TermPtr& t, std::ostream& os, int parent) {
  bool paren = prec(t->kind) < parent;
  if (paren) os << '(';
  print(t, os);
  if (paren) os << ')';
}

void print_prefixed(const TermPtr& prefix, const char* op,
                    const std::string& a, std::ostream& os) {
  if (prefix) {
    print_child(prefix, os, 9);
    os << '.';
  }
  os << op << '(' << a << ')';
}

void print(const TermPtr& t, std::ostream& os) {
  switch (t->kind) {
  case Kind::Current: os << "Current"; break;
  case Kind::Void: os << "Void"; break;
  case Kind::Int: os << t->ival; break;
  case Kind::Bool: os << (t->bval ? "True" : "False"); break;
  case Kind::EmptySeq: os << "<<>>"; break;
  case Kind::Var:
  case Kind::Attr: os << t->name; break;
  case Kind::NegVar: os << t->name << '\''; break;
  case Kind::Ghost:
    os << "old(";
    print(t->a, os);
    os << ')';
    break;
  case Kind::Old:
    os << "old(";
    print(t->a, os);
    os << ')';
    break;
  case Kind::Dot:
    print_child(t->a, os, 9);
    os << '.';
    print_child(t->b, os, 9);
    break;
  case Kind::Singleton:
    os << "<<";
    print(t->a, os);
    os << ">>";
    break;
  case Kind::Rev:
    os << "rev(";
    print(t->a, os);
    os << ')';
    break;
  case Kind::Integral: print_prefixed(t->a, "integral", t->attr, os); break;
  case Kind::Depth: print_prefixed(t->a, "depth", t->attr, os); break;
  case Kind::Acyclic: print_prefixed(t->a, "acyclic", t->attr, os); break;
  case Kind::Not:
    os << "not ";
    print_child(t->a, os, 3);
    break;
  case Kind::Eq:
  case Kind::Neq:
  case Kind::And:
  case Kind::Or:
  case Kind::Concat:
  case Kind::Add:
  case Kind::Sub: {
    const char* op = t->kind == Kind::Eq    ? " = "
                     : t->kind == Kind::Neq ? " /= "
                     : t->kind == Kind::And ? " and "
                     : t->kind == Kind::Or  ? " or "
                     : t->kind == Kind::Concat ? " ++ "
                     : t->kind == Kind::Add    ? " + "
                                                : " - ";
    int p = prec(t->kind);
    print_child(t->a, os, p + 1);
    os << op;
    // Concat prints flattened (associative); others associate left.
    print_child(t->b, os, t->kind == Kind::Concat ? p : p + 1);
    break;
  }
  }
}

} // namespace

std::string to_string(const TermPtr& t) {
  std::ostringstream os;
  print(t, os);
  return os.str();
}

std::vector<TermPtr> concat_elements(const TermPtr& t) {
  std::vector<TermPtr> out;
  TermPtr cur = t;
  while (cur && cur->kind == Kind::Concat) {
    auto left = concat_elements(cur->a);
    out.insert(out.end(), left.begin(), left.end());
    cur = cur->b;
  }
  if (cur) out.push_back(cur);
  return out;
}

TermPtr concat_of(const std::vector<TermPtr>& elems) {
  if (elems.empty()) return empty_seq();
  TermPtr acc = elems.back();
  for (auto it = elems.rbegin() + 1; it != elems.rend(); ++it)
    acc = concat(*it, acc);
  return acc;
}

TermPtr substitute(const TermPtr& t, const std::vector<std::string>& formals,
                   const std::vector<TermPtr>& actuals) {
  if (formals.size() != actuals.size())
    throw std::invalid_argument("substitute: arity mismatch");
  if (!t) return t;
  if (t->kind == Kind::Var) {
    for (size_t i = 0; i < formals.size(); ++i)
      if (t->name == formals[i]) return actuals[i];
    return t;
  }
  if (t->kind == Kind::Ghost) return t; // frozen snapshot, opaque
  auto na = substitute(t->a, formals, actuals);
  auto nb = substitute(t->b, formals, actuals);
  if (na == t->a && nb == t->b) return t;
  auto copy = std::make_shared<Term>(*t);
  copy->a = na;
  copy->b = nb;
  return copy;
}

TermPtr prefix_dot(const TermPtr& x, const TermPtr& e) {
  switch (e->kind) {
  case Kind::Int:
  case Kind::Bool:
  case Kind::Void:
  case Kind::EmptySeq:
  case Kind::Ghost:
    return e; // constants do not depend on the current object
  case Kind::Current:
    return x; // e.Current = e
  case Kind::Var:
  case Kind::Attr:
  case Kind::NegVar:
  case Kind::Dot:
    return dot(x, e);
  case Kind::Integral:
  case Kind::Depth:
  case Kind::Acyclic: {
    auto copy = std::make_shared<Term>(*e);
    copy->a = e->a ? dot(x, e->a) : x;
    return copy;
  }
  case Kind::Old:
    return old_of(prefix_dot(x, e->a));
  default: { // operators: distribute over children
    auto copy = std::make_shared<Term>(*e);
    if (e->a) copy->a = prefix_dot(x, e->a);
    if (e->b) copy->b = prefix_dot(x, e->b);
    return copy;
  }
  }
}

std::vector<TermPtr> distribute_dot(const TermPtr& x,
                                    const std::vector<TermPtr>& items) {
  std::vector<TermPtr> out;
  out.reserve(items.size());
  for (auto& it : items) out.push_back(normalize(prefix_dot(x, it)));
  return out;
}

std::optional<PathView> as_path(const TermPtr& t) {
  PathView pv;
  auto take_root = [&](const TermPtr& r) -> bool {
    switch (r->kind) {
    case Kind::Current:
    case Kind::Void:
    case Kind::Var:
    case Kind::NegVar:
    case Kind::Ghost:
    case Kind::Old:
      pv.root = r;
      return true;
    case Kind::Attr:
      pv.root = current();
      pv.attrs.push_back(r->name);
      return true;
    default:
      return false;
    }
  };
  std::vector<TermPtr> comps;
  TermPtr cur = t;
  while (cur && cur->kind == Kind::Dot) {
    comps.push_back(cur->a);
    cur = cur->b;
  }
  if (cur) comps.push_back(cur);
  if (comps.empty()) return std::nullopt;
  // Components must be path-shaped: leading root, then attributes, with an
  // optional integral-ish last component.
  for (size_t i = 0; i < comps.size(); ++i) {
    const auto& c = comps[i];
    if (i == 0) {
      if (c->kind == Kind::Attr) {
        pv.root = current();
        pv.attrs.push_back(c->name);
      } else if (c->kind == Kind::Integral || c->kind == Kind::Depth ||
                 c->kind == Kind::Acyclic) {
        if (comps.size() != 1) return std::nullopt;
        pv.root = current();
        pv.tail = c->kind;
        pv.tail_attr = c->attr;
        if (c->a) { // absorb the node's own prefix
          auto inner = as_path(c->a);
          if (!inner || inner->tail) return std::nullopt;
          pv.root = inner->root;
          pv.attrs = inner->attrs;
        }
      } else if (!take_root(c)) {
        return std::nullopt;
      }
      continue;
    }
    if (c->kind == Kind::Attr) {
      pv.attrs.push_back(c->name);
    } else if ((c->kind == Kind::Integral || c->kind == Kind::Depth ||
                c->kind == Kind::Acyclic) &&
               i + 1 == comps.size() && !c->a) {
      pv.tail = c->kind;
      pv.tail_attr = c->attr;
    } else {
      return std::nullopt;
    }
  }
  if (!pv.root) return std::nullopt;
  return pv;
}

} // namespace oocalc
