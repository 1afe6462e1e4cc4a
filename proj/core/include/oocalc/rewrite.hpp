#pragma once

#include "oocalc/alias.hpp"
#include "oocalc/ast.hpp"
#include "oocalc/term.hpp"

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace oocalc {

/// Every rewrite rule the engine can report in a trace step. NORM is the
/// sequence-algebra housekeeping step (flattening, rev pushed inward);
/// the others are the instruction-composition rules proper.
enum class RuleId {
  CONST, CUR, AX, AY, DIST, ASSOC, OLD,
  UC, US, QC, QCp, QS, QSN,
  NEG1, NEG2, CUR1, CUR2, NP, BL,
  SIE, NIE,
  PAX, PAY, IAX, IAY, IA, IAP,
  PCX, ICX, PCY, ICY,
  NORM,
};

const char* rule_name(RuleId r);
std::optional<RuleId> rule_from_name(const std::string& name);
const std::vector<RuleId>& all_rules();

/// A side condition attached to a rewrite step.
struct SideCondition {
  enum class Kind { NeverAlias, Acyclic, SetterFor, NoIndirectAffect,
                    Nonprodigal };
  Kind kind;
  TermPtr lhs, rhs;         // NeverAlias operands; Acyclic head in lhs
  std::string routine;      // classification conditions
  std::string attr;         // Acyclic / classification attribute

  std::string render() const;
};

/// A discharged side condition: the condition plus what established it.
/// Evidence is one of "alias-engine", "assumed-fact", "setter-classification",
/// "trivial".
struct Discharge {
  SideCondition cond;
  std::string evidence;
};

struct ProofStep {
  RuleId rule;
  std::string label;   // instruction label the step consumed, if any
  TermPtr before, after;
  std::vector<Discharge> sides;
};

struct ProofTrace {
  std::vector<ProofStep> steps;
  std::string render() const; // "STEP n: Rule : before ==> after [side: ...]"
};

/// Raised when no rule matches or a side condition cannot be discharged.
struct NoRuleApplies : std::runtime_error {
  std::string label;                     // offending instruction label
  std::optional<SideCondition> failed;   // unprovable condition, if that broke
  NoRuleApplies(std::string lbl, const std::string& msg,
                std::optional<SideCondition> f = std::nullopt)
      : std::runtime_error(msg), label(std::move(lbl)), failed(std::move(f)) {}
};

struct EngineOptions {
  bool assume_all = false; // record conditions but treat them as discharged
  int expand_depth = 8;    // call-body expansion recursion bound
};

/// Rewrites `i ; e` by structural dispatch on e. One apply() records one
/// principal trace step even when several leaf rules fire underneath.
class Engine {
public:
  Engine(const SourceUnit& unit, const RoutineDef& routine,
         const FactBase* facts, EngineOptions opt = {});

  /// i ; e. Appends one step to tr (if given); throws NoRuleApplies.
  TermPtr apply(const InstrPtr& i, const TermPtr& e, ProofTrace* tr);

  /// (i1; ...; in) ; e, applied from the last instruction inward.
  TermPtr seq_apply(const std::vector<InstrPtr>& instrs, const TermPtr& e,
                    ProofTrace* tr);

  /// Replaces every `old t` with a fresh ghost; bindings maps ghost name
  /// to the frozen term. Rejects nested old.
  TermPtr freeze_old(const TermPtr& e,
                     std::map<std::string, TermPtr>& bindings);
  static TermPtr unfreeze(const TermPtr& e,
                          const std::map<std::string, TermPtr>& bindings);

  const SourceUnit& unit() const { return unit_; }
  const RoutineDef& routine() const { return routine_; }
  const FactBase* facts() const { return facts_; }
  const EngineOptions& options() const { return opt_; }

  // Expansion depth bookkeeping, used by the call-inlining path.
  int expand_left() const { return expand_left_; }
  void enter_expand() { --expand_left_; }
  void leave_expand() { ++expand_left_; }

  /// All conditions recorded so far (assume_all mode keeps failing ones too).
  const std::vector<Discharge>& recorded_sides() const { return sides_; }

private:
  friend struct ApplyCtx;
  const SourceUnit& unit_;
  const RoutineDef& routine_;
  const FactBase* facts_;
  EngineOptions opt_;
  std::vector<Discharge> sides_;
  int ghost_counter_ = 0;
  int expand_left_ = 8;
};

/// Outcome of one invariant clause check around a loop.
struct ClauseReport {
  TermPtr clause;            // frozen form
  bool established = false;  // discharged trivially or from the precondition
  bool preserved = false;
  std::string failure;       // set when preservation failed
};

struct InvariantReport {
  std::vector<ClauseReport> clauses;
  std::vector<TermPtr> residual_establishment; // undischarged entry goals
  bool all_preserved = true;
  ProofTrace trace;
};

/// Checks establishment (prefix + init against the precondition) and
/// preservation (body under not-exit) of every invariant clause.
InvariantReport check_invariant(Engine& eng, const std::vector<InstrPtr>& prefix,
                                const Instr& loop);

struct VariantReport {
  enum class Status { Ok, Residual, Rejected };
  Status status = Status::Residual;
  std::string detail;
};

/// Accepts `p.depth(a)` variants: acyclicity of p on a at loop entry, one
/// `p := p.a` advance in the body, every other write off the chain.
VariantReport check_variant(Engine& eng, const Instr& loop);

/// True when goal follows from one of the facts by reflexivity, symmetry,
/// or reversing both sides of an equation.
bool trivial_consequence(const TermPtr& goal, const std::vector<TermPtr>& facts);

/// Weakest-precondition transport: (i1..in) ; post.
TermPtr wp(Engine& eng, const std::vector<InstrPtr>& instrs,
           const TermPtr& post, ProofTrace* tr);

} // namespace oocalc
