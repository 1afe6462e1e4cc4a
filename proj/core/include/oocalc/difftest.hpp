#pragma once

#include "oocalc/heap.hpp"
#include "oocalc/rewrite.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace oocalc {

struct DiffOptions {
  std::vector<RuleId> rules; // empty = every rule with a generator
  std::uint64_t seed = 0;
  int cases = 1000;
  int max_objects = 6;
};

struct RuleStats {
  int cases = 0;        // instances generated
  int checked = 0;      // side conditions held, oracle compared
  int vacuous = 0;      // a side condition failed concretely (or eval hit void)
  int inapplicable = 0; // the engine had no rule for the instance
  int failed = 0;       // oracle disagreed under satisfied conditions
};

struct DiffFailure {
  RuleId rule;
  std::uint64_t case_seed;
  std::string instruction;
  std::string term, rewritten;
  std::string pre_value, post_value;
  std::string heap; // minimized pre-state, heap-file syntax
};

struct DiffReport {
  std::map<RuleId, RuleStats> stats;
  std::vector<DiffFailure> failures;
  int total_cases = 0, total_checked = 0, total_vacuous = 0,
      total_inapplicable = 0, total_failed = 0;

  std::string render() const;
};

/// Differential validation: every generated rewrite is replayed against the
/// concrete-heap oracle. A case passes when evaluating the rewritten term in
/// the pre-state equals evaluating the original term in the post-state.
DiffReport run_difftest(const DiffOptions& opt);

/// Fixed demonstrations that the path/integral guards are load-bearing:
/// the guard fails concretely, and the unguarded rewrite visibly disagrees
/// with execution.
struct GuardDemo {
  bool condition_holds;      // concretely evaluated recorded guard
  Value rewritten_pre;       // rewritten term in the pre-state
  Value original_post;       // original term in the post-state
  std::string description;
};

GuardDemo pax_guard_demo(); // (x := c); x.z.x with c.z aliasing Current
GuardDemo ia_guard_demo();  // (x := c); integral(x) with Current on c's chain

} // namespace oocalc
