#pragma once

#include "oocalc/term.hpp"

#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace oocalc {

struct Instr;
using InstrPtr = std::shared_ptr<const Instr>;

enum class InstrKind { Assign, QualifiedCall, UnqualifiedCall, Loop, Cut, Check };

struct Instr {
  InstrKind kind;
  std::string label; // program location pl, unique within a routine

  // Assign
  std::string target; // variable or attribute name
  bool target_is_attr = false;
  TermPtr source;
  // Engine-internal: object whose attribute an expanded callee body writes
  // (null = Current). Never produced by the parser.
  TermPtr write_base;

  // Calls
  TermPtr call_target; // null for unqualified calls
  std::string routine;
  std::vector<TermPtr> actuals;

  // Loop
  std::vector<InstrPtr> init;
  TermPtr exit;
  std::vector<TermPtr> invariants;
  TermPtr variant; // may be null
  std::vector<InstrPtr> body;

  // Cut / Check
  TermPtr cond_e, cond_f; // Cut operands; Check uses cond_e only
};

enum class SetterClass { NotASetter, SetterFor, SimpleSetterFor };

struct RoutineDef {
  std::string name;
  std::vector<std::pair<std::string, std::string>> formals; // (name, type)
  std::vector<std::pair<std::string, std::string>> locals;
  std::vector<TermPtr> precondition;
  std::vector<InstrPtr> body;
  std::vector<TermPtr> postcondition;
  bool note_nonprodigal = false;

  SetterClass setter_class = SetterClass::NotASetter;
  std::string setter_attr;
  int setter_arg = -1; // 1-based formal position
  bool nonprodigal = false;

  // Attributes this routine may write, directly or through calls it makes.
  std::vector<std::string> direct_affects;
  std::vector<std::string> indirect_affects;
  bool affects_unknown = false; // analysis gave up (recursion / unknown callee)
};

struct AttributeDef {
  std::string name;
  std::string type;
  bool detachable = false;
};

struct ClassDef {
  std::string name;
  std::vector<AttributeDef> attributes;
  std::vector<RoutineDef> routines;
};

struct SourceUnit {
  std::vector<ClassDef> classes;
  // attribute name -> classes declaring it
  std::map<std::string, std::vector<std::string>> attr_index;

  const ClassDef* find_class(const std::string& name) const;
  const RoutineDef* find_routine(const std::string& name) const; // any class
  const RoutineDef* find_routine(const std::string& cls,
                                 const std::string& name) const;
};

struct ParseError : std::runtime_error {
  int line, column;
  ParseError(int l, int c, const std::string& msg)
      : std::runtime_error("line " + std::to_string(l) + ", column " +
                           std::to_string(c) + ": " + msg),
        line(l), column(c) {}
};

SourceUnit parse(const std::string& source_text);

/// Parses a standalone term (for CLI queries).
TermPtr parse_term_string(const std::string& text);

/// Fills setter_class / nonprodigal / affects on every routine. Idempotent.
SourceUnit classify_setters(SourceUnit unit);

/// Returns the CLASS_attr qualified id; throws ParseError on ambiguity.
std::string resolve_attribute(const std::string& name, const SourceUnit& unit);

std::string to_string(const SourceUnit& unit);
std::string to_string(const InstrPtr& i, int indent = 0);

bool equal(const SourceUnit& a, const SourceUnit& b);

} // namespace oocalc
