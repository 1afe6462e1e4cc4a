#pragma once

#include "oocalc/heap.hpp"
#include "oocalc/rewrite.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace oocalc {

/// Usage-level error (unknown routine, bad label, malformed query).
/// Distinguished from ParseError so the CLI can map both to exit code 3.
struct DriverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Outcome of prove(): PROVED needs every obligation closed; RESIDUAL means
/// every step succeeded but some goal was left for the reader.
struct Verdict {
  enum class Status { Proved, Failed, Residual };

  std::string routine;
  Status status = Status::Residual;
  std::string reason;                    // FAILED explanation
  std::vector<std::string> obligations;  // open goals (RESIDUAL)
  ProofTrace trace;
  std::vector<std::string> assumptions_used;

  /// Trace lines followed by the final
  /// "VERDICT: PROVED | FAILED <reason> | RESIDUAL <k> obligations" line.
  std::string render() const;
  int exit_code() const; // 0 proved, 1 failed, 2 residual
};

/// Full verification of one routine: alias analysis, invariant
/// establishment and preservation, variant, exit-implies-post.
Verdict prove(const SourceUnit& unit, const std::string& routine,
              EngineOptions opt = {});

/// Outcome of run(): concrete execution with runtime contract checks.
struct RunReport {
  bool ok = true;
  std::vector<std::string> messages; // assertion violations, with iteration
  Heap final_heap;
  Env final_env;

  std::string render() const; // messages, then the final heap
};

/// Executes the routine body on the given heap-file state, evaluating
/// require before, invariants after each iteration, and ensure after.
RunReport run_routine(const SourceUnit& unit, const std::string& routine,
                      const std::string& heap_text);

/// Query forms: "e ~ f" answers MAY or NEVER; "acyclic(p, a)" answers
/// YES or UNKNOWN. Answers are conservative: NEVER and YES are proven.
std::string alias_query(const SourceUnit& unit, const std::string& routine,
                        const std::string& label, const std::string& query);

} // namespace oocalc
