#pragma once

#include "oocalc/ast.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace oocalc {

/// Object ids are positive; 0 denotes Void.
using ObjId = int;
constexpr ObjId kVoid = 0;

struct Object {
  std::string class_name;
  std::map<std::string, ObjId> refs;       // attr -> id or kVoid
  std::map<std::string, long long> ints;   // attr -> integer
};

struct Heap {
  std::map<ObjId, Object> objects;

  bool live(ObjId id) const { return id != kVoid && objects.count(id); }
  const Object& at(ObjId id) const { return objects.at(id); }
};

/// Evaluation result: a reference, an integer, a boolean, or a sequence of
/// object ids. Sequences compare element-wise.
struct Value {
  enum Type { Ref, Int, Bool, Seq } type = Ref;
  long long num = kVoid; // Ref: id (0 = void); Int: value; Bool: 0/1
  std::vector<ObjId> seq;

  static Value ref(ObjId id) { return {Ref, id, {}}; }
  static Value integer(long long n) { return {Int, n, {}}; }
  static Value boolean(bool b) { return {Bool, b ? 1 : 0, {}}; }
  static Value sequence(std::vector<ObjId> s) { return {Seq, 0, std::move(s)}; }

  bool operator==(const Value& o) const {
    return type == o.type && num == o.num && seq == o.seq;
  }
  bool operator!=(const Value& o) const { return !(*this == o); }
  bool truthy() const { return type == Bool && num != 0; }
};

std::string to_string(const Value& v);

struct Env;
using Snapshot = std::shared_ptr<const std::pair<Heap, Env>>;

struct Env {
  ObjId current = kVoid;
  std::optional<ObjId> client;        // houses x' during a call
  std::map<std::string, Value> vars;  // locals and formals
  Snapshot entry;                     // houses old(...)
};

struct EvalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Path evaluation with the stop-at-void convention: a void link
/// leaves the value at the object reached so far. Total.
ObjId eval_path(const std::vector<std::string>& attrs, const Heap& h,
                const Env& env);

/// Full term evaluation. Unlike eval_path, attribute access through a void
/// reference propagates void; an integral over a void head is the empty
/// sequence and its depth is -1 (so |integral| = depth + 1 holds throughout).
Value eval_term(const TermPtr& t, const Heap& h, const Env& env);

/// Observer invoked after each loop iteration (for invariant probing).
using IterObserver =
    std::function<void(int iteration, const Heap&, const Env&)>;

struct ExecOptions {
  const SourceUnit* unit = nullptr;  // needed to resolve calls
  long long loop_cap = -1;           // -1: 10*|objects|+100
  IterObserver on_iteration;
};

struct ExecError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Executes one instruction; returns the new state. env.current never
/// changes within a frame and env.client is immutable.
std::pair<Heap, Env> exec(const InstrPtr& i, Heap h, Env env,
                          const ExecOptions& opt);
std::pair<Heap, Env> exec(const std::vector<InstrPtr>& instrs, Heap h, Env env,
                          const ExecOptions& opt);

/// Deterministic random heap over one reference attribute per class shape.
/// Mixes acyclic chains with cyclic and shared shapes.
struct ClassShape {
  std::string class_name;
  std::vector<std::string> ref_attrs;
  std::vector<std::string> int_attrs;
};

std::pair<Heap, Env> random_heap(std::uint64_t seed, int max_objects,
                                 const std::vector<ClassShape>& shapes);

/// Builds an acyclic a-chain of n cells headed by var `head`.
std::pair<Heap, Env> chain_heap(int n, const std::string& attr,
                                const std::string& head_var,
                                const std::string& class_name = "LINKABLE");

/// Heap file I/O. Format, one item per line:
///   object <ID> : <CLASS> { a -> <ID|Void>, ... ; n = <int>, ... }
///   current = <ID>
///   var <name> = <ID|Void>
std::pair<Heap, Env> parse_heap(const std::string& text);
std::string to_string(const Heap& h, const Env& env);

/// Asserts that executing `p := p.a` strictly decreases eval(p.depth(a)).
/// Returns pass when it does, fail when not, vacuous (nullopt-style pass
/// skipped) when p is void or the chain is not concretely acyclic.
enum class ProbeResult { Pass, Fail, Vacuous };
ProbeResult depth_decrease_probe(const Heap& h, const Env& env,
                                 const std::string& p, const std::string& a);

} // namespace oocalc
