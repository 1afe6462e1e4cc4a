#include "oocalc/ast.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <set>
#include <sstream>

namespace oocalc {

const ClassDef* SourceUnit::find_class(const std::string& name) const {
  for (auto& c : classes)
    if (c.name == name) return &c;
  return nullptr;
}

const RoutineDef* SourceUnit::find_routine(const std::string& name) const {
  for (auto& c : classes)
    for (auto& r : c.routines)
      if (r.name == name) return &r;
  return nullptr;
}

const RoutineDef* SourceUnit::find_routine(const std::string& cls,
                                           const std::string& name) const {
  auto* c = find_class(cls);
  if (!c) return nullptr;
  for (auto& r : c->routines)
    if (r.name == name) return &r;
  return nullptr;
}

namespace {

struct Token {
  enum Type { Name, Int, Sym, End } type = End;
  std::string text;
  long long value = 0;
  int line = 1, col = 1;
};

class Lexer {
public:
  explicit Lexer(const std::string& src) : src_(src) { advance(); }

  const Token& peek() const { return tok_; }

  Token next() {
    Token t = tok_;
    advance();
    return t;
  }

private:
  void advance() {
    skip_ws();
    tok_ = Token{};
    tok_.line = line_;
    tok_.col = col_;
    if (pos_ >= src_.size()) {
      tok_.type = Token::End;
      return;
    }
    char c = src_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t start = pos_;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) ||
              src_[pos_] == '_'))
        bump();
      tok_.type = Token::Name;
      tok_.text = src_.substr(start, pos_ - start);
      if (pos_ < src_.size() && src_[pos_] == '\'') { // negated variable
        bump();
        tok_.text += '\'';
      }
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t start = pos_;
      while (pos_ < src_.size() &&
             std::isdigit(static_cast<unsigned char>(src_[pos_])))
        bump();
      tok_.type = Token::Int;
      tok_.text = src_.substr(start, pos_ - start);
      tok_.value = std::stoll(tok_.text);
      return;
    }
    static const char* two[] = {":=", "<<", ">>", "++", "/="};
    for (auto* s : two) {
      if (src_.compare(pos_, 2, s) == 0) {
        tok_.type = Token::Sym;
        tok_.text = s;
        bump();
        bump();
        return;
      }
    }
    tok_.type = Token::Sym;
    tok_.text = std::string(1, c);
    bump();
  }

  void skip_ws() {
    for (;;) {
      while (pos_ < src_.size() &&
             std::isspace(static_cast<unsigned char>(src_[pos_])))
        bump();
      if (src_.compare(pos_, 2, "--") == 0) { // comment to end of line
        while (pos_ < src_.size() && src_[pos_] != '\n') bump();
        continue;
      }
      break;
    }
  }

  void bump() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  const std::string& src_;
  size_t pos_ = 0;
  int line_ = 1, col_ = 1;
  Token tok_;
};

const std::set<std::string> kKeywords = {
    "class", "feature", "end",     "require", "local",   "do",     "ensure",
    "from",  "until",   "invariant", "variant", "loop",  "cut",    "check",
    "call",  "note",    "nonprodigal", "detachable"};

class Parser {
public:
  explicit Parser(const std::string& src) : lex_(src) {}

  SourceUnit parse_unit() {
    SourceUnit unit;
    while (lex_.peek().type != Token::End) unit.classes.push_back(parse_class());
    validate(unit);
    return unit;
  }

  // Entry point for parsing a standalone term (used by CLI queries).
  TermPtr parse_single_term() {
    auto t = parse_term();
    if (lex_.peek().type != Token::End) fail("trailing input after term");
    return t;
  }

private:
  [[noreturn]] void fail(const std::string& msg) {
    const auto& t = lex_.peek();
    throw ParseError(t.line, t.col, msg);
  }

  void expect_sym(const std::string& s) {
    if (lex_.peek().type != Token::Sym || lex_.peek().text != s)
      fail("expected '" + s + "'");
    lex_.next();
  }

  void expect_kw(const std::string& s) {
    if (!at_kw(s)) fail("expected '" + s + "'");
    lex_.next();
  }

  bool at_kw(const std::string& s) const {
    return lex_.peek().type == Token::Name && lex_.peek().text == s;
  }

  bool at_sym(const std::string& s) const {
    return lex_.peek().type == Token::Sym && lex_.peek().text == s;
  }

  bool accept_sym(const std::string& s) {
    if (!at_sym(s)) return false;
    lex_.next();
    return true;
  }

  std::string expect_name() {
    if (lex_.peek().type != Token::Name || kKeywords.count(lex_.peek().text))
      fail("expected identifier");
    return lex_.next().text;
  }

  ClassDef parse_class() {
    expect_kw("class");
    ClassDef cd;
    cd.name = expect_name();
    expect_kw("feature");
    while (!at_kw("end")) {
      if (lex_.peek().type == Token::End) fail("unterminated class");
      std::string name = expect_name();
      if (at_sym(":")) {
        lex_.next();
        AttributeDef ad;
        ad.name = name;
        if (at_kw("detachable")) {
          lex_.next();
          ad.detachable = true;
        }
        ad.type = expect_name();
        cd.attributes.push_back(ad);
      } else {
        cd.routines.push_back(parse_routine(name));
      }
    }
    expect_kw("end");
    return cd;
  }

  RoutineDef parse_routine(std::string name) {
    RoutineDef rd;
    rd.name = std::move(name);
    loop_instr_count_ = 0;
    plain_instr_count_ = 0;
    if (accept_sym("(")) {
      while (!at_sym(")")) {
        std::string fn = expect_name();
        expect_sym(":");
        if (at_kw("detachable")) lex_.next();
        rd.formals.emplace_back(fn, expect_name());
        if (!accept_sym(",") && !accept_sym(";")) break;
      }
      expect_sym(")");
    }
    if (at_kw("note")) {
      lex_.next();
      expect_kw("nonprodigal");
      rd.note_nonprodigal = true;
    }
    if (at_kw("require")) {
      lex_.next();
      rd.precondition = parse_term_list();
    }
    if (at_kw("local")) {
      lex_.next();
      while (lex_.peek().type == Token::Name && !kKeywords.count(lex_.peek().text)) {
        std::vector<std::string> names{expect_name()};
        while (accept_sym(",")) names.push_back(expect_name());
        expect_sym(":");
        if (at_kw("detachable")) lex_.next();
        std::string ty = expect_name();
        for (auto& n : names) rd.locals.emplace_back(n, ty);
      }
    }
    if (at_kw("do")) {
      lex_.next();
      rd.body = parse_instr_list({"ensure", "end"});
    }
    if (at_kw("ensure")) {
      lex_.next();
      rd.postcondition = parse_term_list();
    }
    expect_kw("end");
    return rd;
  }

  std::vector<InstrPtr> parse_instr_list(std::vector<std::string> stop) {
    std::vector<InstrPtr> out;
    for (;;) {
      accept_sym(";");
      bool stopped = lex_.peek().type == Token::End;
      for (auto& s : stop) stopped = stopped || at_kw(s);
      if (stopped) return out;
      out.push_back(parse_instr());
    }
  }

  InstrPtr parse_instr() {
    auto ins = std::make_shared<Instr>();
    if (at_kw("from")) {
      lex_.next();
      ins->kind = InstrKind::Loop;
      ins->label = "L" + std::to_string(++loop_count_);
      ins->init = parse_instr_list({"until"});
      expect_kw("until");
      ins->exit = parse_term();
      expect_kw("invariant");
      ins->invariants = parse_term_list();
      if (at_kw("variant")) {
        lex_.next();
        ins->variant = parse_term();
      }
      expect_kw("loop");
      ins->body = parse_loop_body();
      expect_kw("end");
      return ins;
    }
    if (at_kw("cut")) {
      lex_.next();
      ins->kind = InstrKind::Cut;
      ins->label = fresh_plain_label();
      ins->cond_e = parse_term();
      expect_sym(",");
      ins->cond_f = parse_term();
      return ins;
    }
    if (at_kw("check")) {
      lex_.next();
      ins->kind = InstrKind::Check;
      ins->label = fresh_plain_label();
      ins->cond_e = parse_term();
      return ins;
    }
    bool explicit_call = at_kw("call");
    if (explicit_call) lex_.next();
    std::string first = expect_name();
    if (!explicit_call && at_sym(":=")) {
      lex_.next();
      ins->kind = InstrKind::Assign;
      ins->label = fresh_plain_label();
      ins->target = first;
      ins->source = parse_term();
      return ins;
    }
    // A (possibly qualified) call: NAME(.NAME)*  "(" args ")".
    ins->label = fresh_plain_label();
    std::vector<std::string> path{first};
    while (accept_sym(".")) path.push_back(expect_name());
    expect_sym("(");
    if (!at_sym(")")) {
      ins->actuals.push_back(parse_term());
      while (accept_sym(",")) ins->actuals.push_back(parse_term());
    }
    expect_sym(")");
    ins->routine = path.back();
    path.pop_back();
    if (path.empty()) {
      ins->kind = InstrKind::UnqualifiedCall;
    } else {
      ins->kind = InstrKind::QualifiedCall;
      TermPtr tgt = name_term(path[0]);
      for (size_t i = 1; i < path.size(); ++i) tgt = dot(tgt, attr(path[i]));
      ins->call_target = tgt;
    }
    return ins;
  }

  // Instructions in a loop body are labeled i1, i2, ... (continuing across
  // loops in the same routine); everything else is s1, s2, ...
  std::vector<InstrPtr> parse_loop_body() {
    std::vector<InstrPtr> out;
    for (;;) {
      accept_sym(";");
      if (at_kw("end") || lex_.peek().type == Token::End) return out;
      in_loop_body_ = true;
      out.push_back(parse_instr());
      in_loop_body_ = false;
    }
  }

  std::string fresh_plain_label() {
    if (in_loop_body_) return "i" + std::to_string(++loop_instr_count_);
    return "s" + std::to_string(++plain_instr_count_);
  }

  std::vector<TermPtr> parse_term_list() {
    std::vector<TermPtr> out{parse_term()};
    while (starts_term()) out.push_back(parse_term());
    return out;
  }

  bool starts_term() const {
    const auto& t = lex_.peek();
    if (t.type == Token::Int) return true;
    if (t.type == Token::Sym) return t.text == "(" || t.text == "<<";
    if (t.type != Token::Name) return false;
    if (!kKeywords.count(t.text)) return true;
    return false;
  }

  TermPtr parse_term() { return parse_or(); }

  TermPtr parse_or() {
    auto l = parse_and();
    while (at_kw("or")) {
      lex_.next();
      l = or_of(l, parse_and());
    }
    return l;
  }

  TermPtr parse_and() {
    auto l = parse_not();
    while (at_kw("and")) {
      lex_.next();
      l = and_of(l, parse_not());
    }
    return l;
  }

  TermPtr parse_not() {
    if (at_kw("not")) {
      lex_.next();
      return not_of(parse_not());
    }
    return parse_cmp();
  }

  TermPtr parse_cmp() {
    auto l = parse_concat();
    if (at_sym("=")) {
      lex_.next();
      return eq(l, parse_concat());
    }
    if (at_sym("/=")) {
      lex_.next();
      return neq(l, parse_concat());
    }
    return l;
  }

  TermPtr parse_concat() {
    auto l = parse_add();
    while (at_sym("++")) {
      lex_.next();
      l = concat(l, parse_add());
    }
    return l;
  }

  TermPtr parse_add() {
    auto l = parse_postfix();
    for (;;) {
      if (at_sym("+")) {
        lex_.next();
        l = add(l, parse_postfix());
      } else if (at_sym("-")) {
        lex_.next();
        l = sub(l, parse_postfix());
      } else {
        return l;
      }
    }
  }

  TermPtr parse_postfix() {
    auto l = parse_primary();
    while (at_sym(".")) {
      lex_.next();
      if (at_kw("integral") || at_kw("depth") || at_kw("acyclic")) {
        std::string op = lex_.next().text;
        expect_sym("(");
        std::string a = expect_name();
        expect_sym(")");
        l = op == "integral" ? integral(l, a)
            : op == "depth"  ? depth(l, a)
                             : acyclic(l, a);
      } else {
        l = dot(l, attr(expect_name()));
      }
    }
    return l;
  }

  TermPtr name_term(const std::string& n) {
    if (!n.empty() && n.back() == '\'')
      return neg_var(n.substr(0, n.size() - 1));
    return var(n); // resolved to Attr per context later
  }

  TermPtr parse_primary() {
    const auto& t = lex_.peek();
    if (t.type == Token::Int) return int_const(lex_.next().value);
    if (t.type == Token::Sym) {
      if (accept_sym("(")) {
        auto e = parse_term();
        expect_sym(")");
        return e;
      }
      if (accept_sym("<<")) {
        if (accept_sym(">>")) return empty_seq();
        auto e = parse_term();
        expect_sym(">>");
        return singleton(e);
      }
      fail("expected term");
    }
    if (t.type != Token::Name) fail("expected term");
    std::string name = lex_.next().text;
    if (name == "Current") return current();
    if (name == "Void") return void_();
    if (name == "True") return bool_const(true);
    if (name == "False") return bool_const(false);
    if (name == "old") {
      expect_sym("(");
      auto e = parse_term();
      expect_sym(")");
      return old_of(e);
    }
    if (name == "rev") {
      expect_sym("(");
      auto e = parse_term();
      expect_sym(")");
      return rev(e);
    }
    if (name == "integral" || name == "depth" || name == "acyclic") {
      expect_sym("(");
      std::string a = expect_name();
      expect_sym(")");
      return name == "integral" ? integral(nullptr, a)
             : name == "depth"  ? depth(nullptr, a)
                                : acyclic(nullptr, a);
    }
    if (kKeywords.count(name)) fail("unexpected keyword '" + name + "'");
    return name_term(name);
  }

  void validate(SourceUnit& unit) {
    std::set<std::string> class_names;
    for (auto& c : unit.classes) {
      if (!class_names.insert(c.name).second)
        fail("duplicate class '" + c.name + "'");
      std::set<std::string> members;
      for (auto& a : c.attributes) {
        if (!members.insert(a.name).second)
          fail("duplicate declaration '" + a.name + "' in " + c.name);
        unit.attr_index[a.name].push_back(c.name);
      }
      for (auto& r : c.routines)
        if (!members.insert(r.name).second)
          fail("duplicate declaration '" + r.name + "' in " + c.name);
    }
    // Attribute names must be unambiguous across the unit; CLASS_attr
    // spellings count as explicit qualification.
    for (auto& [name, classes] : unit.attr_index) {
      if (classes.size() > 1) {
        bool qualified = name.find('_') != std::string::npos &&
                         class_names.count(name.substr(0, name.find('_')));
        if (!qualified)
          fail("attribute '" + name + "' is ambiguous between classes");
      }
    }
    for (auto& c : unit.classes)
      for (auto& r : c.routines) resolve_routine(unit, c, r);
  }

  // Rewrites Var leaves that actually denote attributes, and checks that
  // every name is declared.
  void resolve_routine(SourceUnit& unit, const ClassDef& cls, RoutineDef& r) {
    std::set<std::string> vars;
    std::set<std::string> labels;
    for (auto& [n, _] : r.formals)
      if (!vars.insert(n).second) fail("duplicate formal '" + n + "'");
    for (auto& [n, _] : r.locals)
      if (!vars.insert(n).second) fail("duplicate local '" + n + "'");

    auto resolve_term = [&](const TermPtr& t, auto&& self) -> TermPtr {
      if (!t) return t;
      if (t->kind == Kind::Var) {
        if (vars.count(t->name)) return t;
        if (unit.attr_index.count(t->name)) return attr(t->name);
        fail("unknown identifier '" + t->name + "' in " + cls.name + "." +
             r.name);
      }
      auto na = self(t->a, self);
      auto nb = self(t->b, self);
      if (na == t->a && nb == t->b) return t;
      auto copy = std::make_shared<Term>(*t);
      copy->a = na;
      copy->b = nb;
      return TermPtr(copy);
    };
    auto fix = [&](TermPtr& t) { t = resolve_term(t, resolve_term); };

    std::function<void(std::vector<InstrPtr>&)> fix_instrs =
        [&](std::vector<InstrPtr>& instrs) {
          for (auto& ip : instrs) {
            auto ins = std::make_shared<Instr>(*ip);
            if (!labels.insert(ins->label).second)
              fail("duplicate label " + ins->label);
            switch (ins->kind) {
            case InstrKind::Assign:
              if (!vars.count(ins->target)) {
                if (unit.attr_index.count(ins->target))
                  ins->target_is_attr = true;
                else
                  fail("unknown assignment target '" + ins->target + "'");
              }
              fix(ins->source);
              break;
            case InstrKind::QualifiedCall:
              fix(ins->call_target);
              [[fallthrough]];
            case InstrKind::UnqualifiedCall:
              for (auto& a : ins->actuals) fix(a);
              break;
            case InstrKind::Loop:
              fix_instrs(ins->init);
              fix(ins->exit);
              for (auto& iv : ins->invariants) fix(iv);
              if (ins->variant) fix(ins->variant);
              fix_instrs(ins->body);
              break;
            case InstrKind::Cut:
              fix(ins->cond_e);
              fix(ins->cond_f);
              break;
            case InstrKind::Check:
              fix(ins->cond_e);
              break;
            }
            ip = ins;
          }
        };
    for (auto& t : r.precondition) fix(t);
    for (auto& t : r.postcondition) fix(t);
    fix_instrs(r.body);
  }

  Lexer lex_;
  int loop_count_ = 0;
  int loop_instr_count_ = 0;
  int plain_instr_count_ = 0;
  bool in_loop_body_ = false;
};

} // namespace

SourceUnit parse(const std::string& source_text) {
  Parser p(source_text);
  return classify_setters(p.parse_unit());
}

TermPtr parse_term_string(const std::string& text) {
  Parser p(text);
  return p.parse_single_term();
}

namespace {

// Attributes a body of instructions assigns directly.
void collect_direct(const std::vector<InstrPtr>& instrs,
                    std::set<std::string>& out) {
  for (auto& i : instrs) {
    if (i->kind == InstrKind::Assign && i->target_is_attr)
      out.insert(i->target);
    if (i->kind == InstrKind::Loop) {
      collect_direct(i->init, out);
      collect_direct(i->body, out);
    }
  }
}

void collect_callees(const std::vector<InstrPtr>& instrs,
                     std::set<std::string>& out) {
  for (auto& i : instrs) {
    if (i->kind == InstrKind::QualifiedCall ||
        i->kind == InstrKind::UnqualifiedCall)
      out.insert(i->routine);
    if (i->kind == InstrKind::Loop) {
      collect_callees(i->init, out);
      collect_callees(i->body, out);
    }
  }
}

bool is_attr_from_formal(const InstrPtr& i, const RoutineDef& r) {
  if (i->kind != InstrKind::Assign || !i->target_is_attr) return false;
  if (!i->source || i->source->kind != Kind::Var) return false;
  for (auto& [n, _] : r.formals)
    if (n == i->source->name) return true;
  return false;
}

} // namespace

SourceUnit classify_setters(SourceUnit unit) {
  for (auto& c : unit.classes) {
    for (auto& r : c.routines) {
      r.setter_class = SetterClass::NotASetter;
      r.setter_attr.clear();
      r.setter_arg = -1;
      // Setter for a: postcondition has a clause `a = f`, f a formal.
      for (auto& post : r.postcondition) {
        if (post->kind != Kind::Eq) continue;
        const TermPtr* lhs = &post->a;
        const TermPtr* rhs = &post->b;
        if ((*lhs)->kind == Kind::Var && (*rhs)->kind == Kind::Attr)
          std::swap(lhs, rhs);
        if ((*lhs)->kind != Kind::Attr || (*rhs)->kind != Kind::Var) continue;
        for (size_t k = 0; k < r.formals.size(); ++k) {
          if (r.formals[k].first == (*rhs)->name) {
            r.setter_class = SetterClass::SetterFor;
            r.setter_attr = (*lhs)->name;
            r.setter_arg = static_cast<int>(k) + 1;
            break;
          }
        }
        if (r.setter_class == SetterClass::SetterFor) break;
      }
      // Simple setter: the body consists solely of attribute-from-formal
      // assignments.
      if (r.setter_class == SetterClass::SetterFor && !r.body.empty()) {
        bool simple = true;
        for (auto& i : r.body) simple = simple && is_attr_from_formal(i, r);
        if (simple) r.setter_class = SetterClass::SimpleSetterFor;
      }
      r.nonprodigal = r.setter_class == SetterClass::SimpleSetterFor ||
                      r.note_nonprodigal;

      std::set<std::string> direct;
      collect_direct(r.body, direct);
      if (!r.setter_attr.empty()) direct.insert(r.setter_attr);
      r.direct_affects.assign(direct.begin(), direct.end());
    }
  }
  // Indirect effects: attributes affected by routines this one calls.
  for (auto& c : unit.classes) {
    for (auto& r : c.routines) {
      std::set<std::string> indirect;
      bool unknown = false;
      std::set<std::string> seen;
      std::function<void(const RoutineDef&, int)> walk = [&](const RoutineDef& rd,
                                                             int depth) {
        if (depth > 8) {
          unknown = true;
          return;
        }
        std::set<std::string> callees;
        collect_callees(rd.body, callees);
        for (auto& callee : callees) {
          const RoutineDef* target = unit.find_routine(callee);
          if (!target) {
            unknown = true;
            continue;
          }
          for (auto& a : target->direct_affects) indirect.insert(a);
          if (!seen.insert(callee).second) continue;
          walk(*target, depth + 1);
        }
      };
      walk(r, 0);
      r.indirect_affects.assign(indirect.begin(), indirect.end());
      r.affects_unknown = unknown;
    }
  }
  return unit;
}

std::string resolve_attribute(const std::string& name, const SourceUnit& unit) {
  auto it = unit.attr_index.find(name);
  if (it == unit.attr_index.end()) {
    // Maybe already qualified as CLASS_attr.
    auto us = name.find('_');
    if (us != std::string::npos) {
      const ClassDef* c = unit.find_class(name.substr(0, us));
      if (c) {
        std::string bare = name.substr(us + 1);
        for (auto& a : c->attributes)
          if (a.name == bare) return name;
      }
    }
    throw ParseError(0, 0, "unknown attribute '" + name + "'");
  }
  if (it->second.size() > 1) {
    std::string msg = "attribute '" + name + "' is ambiguous; candidates:";
    for (auto& c : it->second) msg += " " + c;
    throw ParseError(0, 0, msg);
  }
  return it->second.front() + "_" + name;
}

namespace {
void print_instrs(const std::vector<InstrPtr>& instrs, std::ostringstream& os,
                  int indent);

void print_instr(const InstrPtr& i, std::ostringstream& os, int indent) {
  std::string pad(indent, ' ');
  switch (i->kind) {
  case InstrKind::Assign:
    os << pad << i->target << " := " << to_string(i->source) << "\n";
    break;
  case InstrKind::QualifiedCall: {
    os << pad << "call " << to_string(i->call_target) << "." << i->routine
       << " (";
    for (size_t k = 0; k < i->actuals.size(); ++k)
      os << (k ? ", " : "") << to_string(i->actuals[k]);
    os << ")\n";
    break;
  }
  case InstrKind::UnqualifiedCall: {
    os << pad << "call " << i->routine << " (";
    for (size_t k = 0; k < i->actuals.size(); ++k)
      os << (k ? ", " : "") << to_string(i->actuals[k]);
    os << ")\n";
    break;
  }
  case InstrKind::Loop:
    os << pad << "from\n";
    print_instrs(i->init, os, indent + 2);
    os << pad << "until " << to_string(i->exit) << "\n";
    os << pad << "invariant\n";
    for (auto& iv : i->invariants)
      os << pad << "  " << to_string(iv) << "\n";
    if (i->variant) os << pad << "variant " << to_string(i->variant) << "\n";
    os << pad << "loop\n";
    print_instrs(i->body, os, indent + 2);
    os << pad << "end\n";
    break;
  case InstrKind::Cut:
    os << pad << "cut " << to_string(i->cond_e) << ", " << to_string(i->cond_f)
       << "\n";
    break;
  case InstrKind::Check:
    os << pad << "check " << to_string(i->cond_e) << "\n";
    break;
  }
}

void print_instrs(const std::vector<InstrPtr>& instrs, std::ostringstream& os,
                  int indent) {
  for (auto& i : instrs) print_instr(i, os, indent);
}
} // namespace

std::string to_string(const InstrPtr& i, int indent) {
  std::ostringstream os;
  print_instr(i, os, indent);
  return os.str();
}

std::string to_string(const SourceUnit& unit) {
  std::ostringstream os;
  for (auto& c : unit.classes) {
    os << "class " << c.name << " feature\n";
    for (auto& a : c.attributes)
      os << "  " << a.name << " : " << (a.detachable ? "detachable " : "")
         << a.type << "\n";
    for (auto& r : c.routines) {
      os << "  " << r.name;
      if (!r.formals.empty()) {
        os << " (";
        for (size_t k = 0; k < r.formals.size(); ++k)
          os << (k ? "; " : "") << r.formals[k].first << " : "
             << r.formals[k].second;
        os << ")";
      }
      os << "\n";
      if (r.note_nonprodigal) os << "    note nonprodigal\n";
      if (!r.precondition.empty()) {
        os << "    require\n";
        for (auto& t : r.precondition) os << "      " << to_string(t) << "\n";
      }
      if (!r.locals.empty()) {
        os << "    local\n";
        for (auto& [n, ty] : r.locals)
          os << "      " << n << " : " << ty << "\n";
      }
      os << "    do\n";
      print_instrs(r.body, os, 6);
      if (!r.postcondition.empty()) {
        os << "    ensure\n";
        for (auto& t : r.postcondition) os << "      " << to_string(t) << "\n";
      }
      os << "    end\n";
    }
    os << "end\n";
  }
  return os.str();
}

namespace {
bool instr_equal(const InstrPtr& a, const InstrPtr& b);

bool instrs_equal(const std::vector<InstrPtr>& a,
                  const std::vector<InstrPtr>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i)
    if (!instr_equal(a[i], b[i])) return false;
  return true;
}

bool terms_equal(const std::vector<TermPtr>& a, const std::vector<TermPtr>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i)
    if (!equal(a[i], b[i])) return false;
  return true;
}

bool instr_equal(const InstrPtr& a, const InstrPtr& b) {
  if (a->kind != b->kind) return false;
  switch (a->kind) {
  case InstrKind::Assign:
    return a->target == b->target && equal(a->source, b->source);
  case InstrKind::QualifiedCall:
    return equal(a->call_target, b->call_target) && a->routine == b->routine &&
           terms_equal(a->actuals, b->actuals);
  case InstrKind::UnqualifiedCall:
    return a->routine == b->routine && terms_equal(a->actuals, b->actuals);
  case InstrKind::Loop:
    return instrs_equal(a->init, b->init) && equal(a->exit, b->exit) &&
           terms_equal(a->invariants, b->invariants) &&
           equal(a->variant, b->variant) && instrs_equal(a->body, b->body);
  case InstrKind::Cut:
    return equal(a->cond_e, b->cond_e) && equal(a->cond_f, b->cond_f);
  case InstrKind::Check:
    return equal(a->cond_e, b->cond_e);
  }
  return false;
}
} // namespace

bool equal(const SourceUnit& a, const SourceUnit& b) {
  if (a.classes.size() != b.classes.size()) return false;
  for (size_t c = 0; c < a.classes.size(); ++c) {
    const auto& ca = a.classes[c];
    const auto& cb = b.classes[c];
    if (ca.name != cb.name) return false;
    if (ca.attributes.size() != cb.attributes.size()) return false;
    for (size_t i = 0; i < ca.attributes.size(); ++i) {
      if (ca.attributes[i].name != cb.attributes[i].name ||
          ca.attributes[i].type != cb.attributes[i].type)
        return false;
    }
    if (ca.routines.size() != cb.routines.size()) return false;
    for (size_t i = 0; i < ca.routines.size(); ++i) {
      const auto& ra = ca.routines[i];
      const auto& rb = cb.routines[i];
      if (ra.name != rb.name || ra.formals != rb.formals ||
          ra.locals != rb.locals)
        return false;
      if (!terms_equal(ra.precondition, rb.precondition) ||
          !terms_equal(ra.postcondition, rb.postcondition) ||
          !instrs_equal(ra.body, rb.body))
        return false;
    }
  }
  return true;
}

} // namespace oocalc
