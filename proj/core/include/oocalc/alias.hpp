#pragma once

#include "oocalc/ast.hpp"

#include <map>
#include <set>
#include <string>
#include <vector>

namespace oocalc {

/// Root + attribute hops, bounded by AnalysisConfig::k. Root "" is Current;
/// negative variables keep their quote ("x'").
struct AccessPath {
  std::string root;
  std::vector<std::string> attrs;

  bool operator<(const AccessPath& o) const {
    return root != o.root ? root < o.root : attrs < o.attrs;
  }
  bool operator==(const AccessPath& o) const {
    return root == o.root && attrs == o.attrs;
  }
  std::string str() const;
};

/// Converts a reference term to an AccessPath when it has that shape.
std::optional<AccessPath> to_access_path(const TermPtr& t);

struct AnalysisConfig {
  int k = 3; // path length bound; longer paths widen to "may alias anything"
};

/// Distinctness facts holding at one program point. The complement
/// representation of the may-alias relation: an absent pair may alias.
struct AliasState {
  using Pair = std::pair<AccessPath, AccessPath>; // ordered min/max
  using Chain = std::pair<AccessPath, std::string>;

  std::set<std::string> void_vars;           // variables known Void
  std::map<std::string, AccessPath> defs;    // v ≐ path (definition fact)
  std::set<Pair> never;                      // e ≇ f
  std::set<Chain> acyc;                      // p.⊠a (unbounded-tail marker)
  std::set<std::pair<Pair, std::string>> not_in;     // (u,w,a): u ∉ a-chain(w)
  std::set<std::pair<Pair, std::string>> chain_disj; // a-chains disjoint

  bool operator==(const AliasState& o) const = default;
};

/// Per-label alias states plus assumed facts, produced by analyze_routine.
class FactBase {
public:
  FactBase() = default;
  FactBase(const SourceUnit* unit, AnalysisConfig cfg)
      : unit_(unit), cfg_(cfg) {}

  const AliasState& at(const std::string& label) const;
  bool has_label(const std::string& label) const {
    return at_label_.count(label) != 0;
  }
  const AliasState& entry_state() const { return entry_; }

  // Queries (true = proven; false = inconclusive, i.e. conservative).
  bool never_alias(const TermPtr& e, const TermPtr& f,
                   const std::string& label) const;
  bool acyclic_at(const TermPtr& p, const std::string& attr,
                  const std::string& label) const;
  /// u is never an element of the a-chain headed by w.
  bool not_in_chain(const TermPtr& u, const TermPtr& w, const std::string& attr,
                    const std::string& label) const;
  /// Cycle-freeness of attribute x for e before path p: no prefix q of p
  /// ends in an x hop whose base e.q' may alias Current.
  bool cycle_free(const std::string& x, const TermPtr& e,
                  const std::vector<std::string>& p,
                  const std::string& label) const;

  const std::vector<std::string>& assumed_facts() const { return assumed_; }
  const AnalysisConfig& config() const { return cfg_; }

  // Populated by analyze_routine.
  std::map<std::string, AliasState> at_label_;
  AliasState entry_;
  std::vector<std::string> assumed_;

private:
  const SourceUnit* unit_ = nullptr;
  AnalysisConfig cfg_;
};

/// Runs the flow-sensitive analysis over one routine: precondition
/// injection, straight-line transfer, loop fixpoint with entry join.
FactBase analyze_routine(const SourceUnit& unit, const RoutineDef& routine,
                         AnalysisConfig cfg = {});

/// One transfer step (exposed for property tests).
AliasState transfer(const InstrPtr& i, const AliasState& s,
                    const SourceUnit& unit, const AnalysisConfig& cfg);

/// Intersection join (branch union of the may relation).
AliasState join(const AliasState& a, const AliasState& b);

// State-level query helpers (label-independent core of FactBase queries).
bool query_never(const AliasState& s, const AccessPath& u, const AccessPath& v);
bool query_acyc(const AliasState& s, const AccessPath& p,
                const std::string& a);
bool query_not_in(const AliasState& s, const AccessPath& u,
                  const AccessPath& w, const std::string& a);

} // namespace oocalc
