#include "oocalc/heap.hpp"

#include <algorithm>
#include <random>
#include <sstream>

namespace oocalc {

std::string to_string(const Value& v) {
  switch (v.type) {
  case Value::Ref: return v.num == kVoid ? "Void" : "#" + std::to_string(v.num);
  case Value::Int: return std::to_string(v.num);
  case Value::Bool: return v.num ? "True" : "False";
  case Value::Seq: {
    std::string out = "<<";
    for (size_t i = 0; i < v.seq.size(); ++i) {
      if (i) out += ", ";
      out += v.seq[i] == kVoid ? "Void" : "#" + std::to_string(v.seq[i]);
    }
    return out + ">>";
  }
  }
  return "?";
}

ObjId eval_path(const std::vector<std::string>& attrs, const Heap& h,
                const Env& env) {
  ObjId cur = env.current;
  for (auto& a : attrs) {
    if (!h.live(cur)) break;
    auto& refs = h.at(cur).refs;
    auto it = refs.find(a);
    ObjId next = it == refs.end() ? kVoid : it->second;
    if (next == kVoid) break; // stop-at-void convention
    cur = next;
  }
  return cur;
}

namespace {

ObjId field_ref(const Heap& h, ObjId id, const std::string& a) {
  if (!h.live(id)) return kVoid;
  auto& refs = h.at(id).refs;
  auto it = refs.find(a);
  return it == refs.end() ? kVoid : it->second;
}

// Follows a-links from head until the next link is void or repeats an id.
std::vector<ObjId> walk_chain(const Heap& h, ObjId head, const std::string& a) {
  std::vector<ObjId> seq;
  if (head == kVoid) return seq;
  ObjId cur = head;
  for (;;) {
    seq.push_back(cur);
    ObjId next = field_ref(h, cur, a);
    if (next == kVoid) break;
    if (std::find(seq.begin(), seq.end(), next) != seq.end()) break;
    cur = next;
  }
  return seq;
}

bool chain_acyclic(const Heap& h, ObjId head, const std::string& a) {
  if (head == kVoid) return true;
  std::vector<ObjId> seen;
  ObjId cur = head;
  for (;;) {
    seen.push_back(cur);
    ObjId next = field_ref(h, cur, a);
    if (next == kVoid) return true;
    if (std::find(seen.begin(), seen.end(), next) != seen.end()) return false;
    cur = next;
  }
}

ObjId head_of(const TermPtr& prefix, const Heap& h, const Env& env) {
  if (!prefix) return env.current;
  Value v = eval_term(prefix, h, env);
  if (v.type != Value::Ref)
    throw EvalError("chain head is not a reference");
  return static_cast<ObjId>(v.num);
}

long long as_int(const Value& v) {
  if (v.type != Value::Int) throw EvalError("expected an integer");
  return v.num;
}

bool as_bool(const Value& v) {
  if (v.type != Value::Bool) throw EvalError("expected a boolean");
  return v.num != 0;
}

std::vector<ObjId> as_seq(const Value& v) {
  if (v.type == Value::Seq) return v.seq;
  throw EvalError("expected a sequence");
}

} // namespace

Value eval_term(const TermPtr& t, const Heap& h, const Env& env) {
  if (!t) throw EvalError("null term");
  switch (t->kind) {
  case Kind::Current: return Value::ref(env.current);
  case Kind::Void: return Value::ref(kVoid);
  case Kind::Int: return Value::integer(t->ival);
  case Kind::Bool: return Value::boolean(t->bval);
  case Kind::EmptySeq: return Value::sequence({});
  case Kind::Var: {
    auto it = env.vars.find(t->name);
    if (it == env.vars.end()) throw EvalError("unbound variable " + t->name);
    return it->second;
  }
  case Kind::Attr: {
    if (!h.live(env.current)) throw EvalError("no current object");
    const Object& o = h.at(env.current);
    if (auto it = o.refs.find(t->name); it != o.refs.end())
      return Value::ref(it->second);
    if (auto it = o.ints.find(t->name); it != o.ints.end())
      return Value::integer(it->second);
    throw EvalError("object has no attribute " + t->name);
  }
  case Kind::NegVar: {
    if (!env.client) throw EvalError("no client context for " + t->name + "'");
    return Value::ref(*env.client);
  }
  case Kind::Ghost:
  case Kind::Old: {
    if (!env.entry) throw EvalError("no entry snapshot for old");
    return eval_term(t->a, env.entry->first, env.entry->second);
  }
  case Kind::Dot: {
    Value recv = eval_term(t->a, h, env);
    if (recv.type != Value::Ref) throw EvalError("dot on a non-reference");
    if (recv.num == kVoid) {
      // strict: a void receiver voids the whole access
      const Term* rest = t->b.get();
      while (rest->kind == Kind::Dot) rest = rest->b.get();
      if (rest->kind == Kind::Integral) return Value::sequence({});
      if (rest->kind == Kind::Depth) return Value::integer(-1);
      if (rest->kind == Kind::Acyclic) return Value::boolean(true);
      return Value::ref(kVoid);
    }
    Env inner = env;
    inner.client = env.current; // x.x' = Current
    inner.current = static_cast<ObjId>(recv.num);
    return eval_term(t->b, h, inner);
  }
  case Kind::Singleton: {
    Value e = eval_term(t->a, h, env);
    if (e.type != Value::Ref) throw EvalError("singleton of a non-reference");
    return Value::sequence({static_cast<ObjId>(e.num)});
  }
  case Kind::Concat: {
    auto l = as_seq(eval_term(t->a, h, env));
    auto r = as_seq(eval_term(t->b, h, env));
    l.insert(l.end(), r.begin(), r.end());
    return Value::sequence(std::move(l));
  }
  case Kind::Rev: {
    auto s = as_seq(eval_term(t->a, h, env));
    std::reverse(s.begin(), s.end());
    return Value::sequence(std::move(s));
  }
  case Kind::Integral:
    return Value::sequence(walk_chain(h, head_of(t->a, h, env), t->attr));
  case Kind::Depth: {
    // |integral| - 1; a void head yields -1
    auto s = walk_chain(h, head_of(t->a, h, env), t->attr);
    return Value::integer(static_cast<long long>(s.size()) - 1);
  }
  case Kind::Acyclic:
    return Value::boolean(chain_acyclic(h, head_of(t->a, h, env), t->attr));
  case Kind::Eq:
  case Kind::Neq: {
    Value l = eval_term(t->a, h, env);
    Value r = eval_term(t->b, h, env);
    bool same = l == r;
    return Value::boolean(t->kind == Kind::Eq ? same : !same);
  }
  case Kind::Not: return Value::boolean(!as_bool(eval_term(t->a, h, env)));
  case Kind::And:
    return Value::boolean(as_bool(eval_term(t->a, h, env)) &&
                          as_bool(eval_term(t->b, h, env)));
  case Kind::Or:
    return Value::boolean(as_bool(eval_term(t->a, h, env)) ||
                          as_bool(eval_term(t->b, h, env)));
  case Kind::Add:
    return Value::integer(as_int(eval_term(t->a, h, env)) +
                          as_int(eval_term(t->b, h, env)));
  case Kind::Sub:
    return Value::integer(as_int(eval_term(t->a, h, env)) -
                          as_int(eval_term(t->b, h, env)));
  }
  throw EvalError("unhandled term kind");
}

namespace {

const RoutineDef* resolve_call(const SourceUnit& unit, const Heap& h, ObjId tgt,
                               const std::string& name) {
  if (h.live(tgt)) {
    if (auto* r = unit.find_routine(h.at(tgt).class_name, name)) return r;
  }
  return unit.find_routine(name);
}

long long loop_cap(const Heap& h, const ExecOptions& opt) {
  if (opt.loop_cap >= 0) return opt.loop_cap;
  return 10 * static_cast<long long>(h.objects.size()) + 100;
}

} // namespace

std::pair<Heap, Env> exec(const InstrPtr& i, Heap h, Env env,
                          const ExecOptions& opt) {
  switch (i->kind) {
  case InstrKind::Assign: {
    Value v = eval_term(i->source, h, env);
    if (i->target_is_attr) {
      if (!h.live(env.current)) throw ExecError("no current object");
      Object& o = h.objects[env.current];
      if (v.type == Value::Int)
        o.ints[i->target] = v.num;
      else if (v.type == Value::Ref)
        o.refs[i->target] = static_cast<ObjId>(v.num);
      else
        throw ExecError("cannot store a " +
                        std::string(v.type == Value::Seq ? "sequence" : "boolean") +
                        " in a field");
    } else {
      env.vars[i->target] = v;
    }
    return {std::move(h), std::move(env)};
  }
  case InstrKind::QualifiedCall:
  case InstrKind::UnqualifiedCall: {
    if (!opt.unit) throw ExecError("no unit to resolve call " + i->routine);
    ObjId tgt = env.current;
    if (i->kind == InstrKind::QualifiedCall) {
      Value v = eval_term(i->call_target, h, env);
      if (v.type != Value::Ref || v.num == kVoid)
        throw ExecError("call on void target: " + i->routine);
      tgt = static_cast<ObjId>(v.num);
    }
    const RoutineDef* r = resolve_call(*opt.unit, h, tgt, i->routine);
    if (!r) throw ExecError("unknown routine " + i->routine);
    if (r->formals.size() != i->actuals.size())
      throw ExecError("wrong argument count for " + i->routine);
    Env callee;
    callee.current = tgt;
    callee.client = i->kind == InstrKind::QualifiedCall
                        ? std::optional<ObjId>(env.current)
                        : env.client;
    for (size_t k = 0; k < r->formals.size(); ++k)
      callee.vars[r->formals[k].first] = eval_term(i->actuals[k], h, env);
    for (auto& [n, ty] : r->locals)
      callee.vars[n] = ty == "INTEGER" ? Value::integer(0) : Value::ref(kVoid);
    callee.entry = std::make_shared<std::pair<Heap, Env>>(h, callee);
    auto [h2, env2] = exec(r->body, std::move(h), std::move(callee), opt);
    (void)env2; // callee frame pops; the caller's env is untouched
    return {std::move(h2), std::move(env)};
  }
  case InstrKind::Loop: {
    std::tie(h, env) = exec(i->init, std::move(h), std::move(env), opt);
    long long cap = loop_cap(h, opt);
    long long n = 0;
    while (!eval_term(i->exit, h, env).truthy()) {
      if (++n > cap)
        throw ExecError("loop iteration cap exceeded (suspected nontermination)");
      std::tie(h, env) = exec(i->body, std::move(h), std::move(env), opt);
      if (opt.on_iteration) opt.on_iteration(static_cast<int>(n), h, env);
    }
    return {std::move(h), std::move(env)};
  }
  case InstrKind::Cut: {
    Value l = eval_term(i->cond_e, h, env);
    Value r = eval_term(i->cond_f, h, env);
    if (l.type == Value::Ref && l == r && l.num != kVoid)
      throw ExecError("cut violated at " + i->label);
    return {std::move(h), std::move(env)};
  }
  case InstrKind::Check: {
    if (!eval_term(i->cond_e, h, env).truthy())
      throw ExecError("check violated at " + i->label);
    return {std::move(h), std::move(env)};
  }
  }
  throw ExecError("unhandled instruction");
}

std::pair<Heap, Env> exec(const std::vector<InstrPtr>& instrs, Heap h, Env env,
                          const ExecOptions& opt) {
  for (auto& i : instrs)
    std::tie(h, env) = exec(i, std::move(h), std::move(env), opt);
  return {std::move(h), std::move(env)};
}

std::pair<Heap, Env> random_heap(std::uint64_t seed, int max_objects,
                                 const std::vector<ClassShape>& shapes) {
  std::mt19937_64 rng(seed);
  if (shapes.empty() || max_objects < 1)
    throw std::invalid_argument("random_heap needs shapes and >= 1 object");
  int n = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(max_objects));
  Heap h;
  for (int id = 1; id <= n; ++id) {
    const ClassShape& s = shapes[rng() % shapes.size()];
    Object o;
    o.class_name = s.class_name;
    // cyclic and shared shapes arise from unconstrained targets
    for (auto& a : s.ref_attrs) {
      std::uint64_t roll = rng() % 10;
      o.refs[a] = roll < 3 ? kVoid : 1 + static_cast<ObjId>(rng() % n);
    }
    for (auto& a : s.int_attrs)
      o.ints[a] = static_cast<long long>(rng() % 100);
    h.objects[id] = std::move(o);
  }
  Env env;
  env.current = 1 + static_cast<ObjId>(rng() % n);
  return {std::move(h), std::move(env)};
}

std::pair<Heap, Env> chain_heap(int n, const std::string& attr,
                                const std::string& head_var,
                                const std::string& class_name) {
  Heap h;
  for (int id = 1; id <= n; ++id) {
    Object o;
    o.class_name = class_name;
    o.refs[attr] = id < n ? id + 1 : kVoid;
    o.ints["item"] = id;
    h.objects[id] = std::move(o);
  }
  Env env;
  env.current = n >= 1 ? 1 : kVoid;
  env.vars[head_var] = Value::ref(n >= 1 ? 1 : kVoid);
  return {std::move(h), std::move(env)};
}

namespace {

struct LineParser {
  const std::string& s;
  size_t pos = 0;
  int line_no;

  void skip_ws() {
    while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
  }
  bool accept(const std::string& tok) {
    skip_ws();
    if (s.compare(pos, tok.size(), tok) == 0) {
      pos += tok.size();
      return true;
    }
    return false;
  }
  void expect(const std::string& tok) {
    if (!accept(tok))
      throw ParseError(line_no, static_cast<int>(pos) + 1,
                       "expected '" + tok + "' in heap file");
  }
  std::string name() {
    skip_ws();
    size_t start = pos;
    while (pos < s.size() &&
           (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_'))
      ++pos;
    if (start == pos)
      throw ParseError(line_no, static_cast<int>(pos) + 1,
                       "expected a name in heap file");
    return s.substr(start, pos - start);
  }
  long long number() {
    skip_ws();
    size_t start = pos;
    if (pos < s.size() && s[pos] == '-') ++pos;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos])))
      ++pos;
    if (start == pos)
      throw ParseError(line_no, static_cast<int>(pos) + 1,
                       "expected a number in heap file");
    return std::stoll(s.substr(start, pos - start));
  }
  ObjId id_or_void() {
    skip_ws();
    if (accept("Void")) return kVoid;
    return static_cast<ObjId>(number());
  }
  bool done() {
    skip_ws();
    return pos >= s.size();
  }
};

} // namespace

std::pair<Heap, Env> parse_heap(const std::string& text) {
  Heap h;
  Env env;
  bool have_current = false;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto c = line.find("--"); c != std::string::npos) line.resize(c);
    LineParser p{line, 0, line_no};
    if (p.done()) continue;
    if (p.accept("object")) {
      ObjId id = static_cast<ObjId>(p.number());
      if (id <= 0 || h.objects.count(id))
        throw ParseError(line_no, 1, "bad or duplicate object id");
      p.expect(":");
      Object o;
      o.class_name = p.name();
      p.expect("{");
      // "attr -> id" entries come before the ';', "attr = int" after;
      // either section may be empty
      bool in_ints = p.accept(";");
      while (!p.accept("}")) {
        if (!in_ints && p.accept(";")) {
          in_ints = true;
          continue;
        }
        std::string a = p.name();
        if (in_ints) {
          p.expect("=");
          o.ints[a] = p.number();
        } else {
          p.expect("->");
          o.refs[a] = p.id_or_void();
        }
        p.accept(",");
      }
      h.objects[id] = std::move(o);
    } else if (p.accept("current")) {
      p.expect("=");
      env.current = static_cast<ObjId>(p.number());
      have_current = true;
    } else if (p.accept("var")) {
      std::string n = p.name();
      p.expect("=");
      env.vars[n] = Value::ref(p.id_or_void());
    } else {
      throw ParseError(line_no, 1, "unrecognized heap file line");
    }
  }
  for (auto& [id, o] : h.objects)
    for (auto& [a, tgt] : o.refs)
      if (tgt != kVoid && !h.objects.count(tgt))
        throw ParseError(0, 0, "dangling reference to object " +
                                   std::to_string(tgt));
  if (!have_current || !h.live(env.current))
    throw ParseError(0, 0, "heap file needs 'current = <live id>'");
  return {std::move(h), std::move(env)};
}

std::string to_string(const Heap& h, const Env& env) {
  std::ostringstream os;
  for (auto& [id, o] : h.objects) {
    os << "object " << id << " : " << o.class_name << " { ";
    bool first = true;
    for (auto& [a, tgt] : o.refs) {
      if (!first) os << ", ";
      first = false;
      os << a << " -> ";
      if (tgt == kVoid)
        os << "Void";
      else
        os << tgt;
    }
    if (!o.ints.empty()) {
      os << " ; ";
      first = true;
      for (auto& [a, v] : o.ints) {
        if (!first) os << ", ";
        first = false;
        os << a << " = " << v;
      }
    }
    os << " }\n";
  }
  os << "current = " << env.current << "\n";
  for (auto& [n, v] : env.vars) {
    if (v.type != Value::Ref) continue;
    os << "var " << n << " = ";
    if (v.num == kVoid)
      os << "Void";
    else
      os << v.num;
    os << "\n";
  }
  return os.str();
}

ProbeResult depth_decrease_probe(const Heap& h, const Env& env,
                                 const std::string& p, const std::string& a) {
  auto it = env.vars.find(p);
  if (it == env.vars.end() || it->second.type != Value::Ref ||
      it->second.num == kVoid)
    return ProbeResult::Vacuous;
  ObjId head = static_cast<ObjId>(it->second.num);
  auto chain = walk_chain(h, head, a);
  if (!chain.empty() && field_ref(h, chain.back(), a) != kVoid)
    return ProbeResult::Vacuous; // cyclic chain: depth is not a measure
  long long before = static_cast<long long>(chain.size()) - 1;
  ObjId next = field_ref(h, head, a);
  long long after = static_cast<long long>(walk_chain(h, next, a).size()) - 1;
  return after == before - 1 ? ProbeResult::Pass : ProbeResult::Fail;
}

} // namespace oocalc
