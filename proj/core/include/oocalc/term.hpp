#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace oocalc {

/// Symbolic expression trees. Terms are immutable values shared through
/// `TermPtr`; every operation that "modifies" a term builds a new one.
enum class Kind {
  Current,
  Void,
  Int,
  Bool,
  EmptySeq, // internal: result of an integral over a void head
  Var,      // local or formal
  Attr,     // attribute of the current object
  NegVar,   // back-link to the client object during a call on this name
  Ghost,    // entry-snapshot constant introduced when freezing `old`
  Dot,
  Old,
  Singleton,
  Concat,
  Rev,
  Integral,
  Depth,
  Acyclic,
  Eq,
  Neq,
  Not,
  And,
  Or,
  Add,
  Sub,
};

struct Term;
using TermPtr = std::shared_ptr<const Term>;

struct Term {
  Kind kind;
  std::string name;  // Var/Attr/NegVar name, Ghost id
  long long ival = 0;
  bool bval = false;
  TermPtr a;         // Dot receiver, unary child, binary lhs, Ghost frozen term,
                     // Integral/Depth/Acyclic prefix (null = current object)
  TermPtr b;         // Dot rest, binary rhs
  std::string attr;  // Integral/Depth/Acyclic attribute
};

// Constructors.
TermPtr current();
TermPtr void_();
TermPtr int_const(long long n);
TermPtr bool_const(bool b);
TermPtr empty_seq();
TermPtr var(std::string name);
TermPtr attr(std::string name);
TermPtr neg_var(std::string name);
TermPtr ghost(std::string id, TermPtr frozen);
TermPtr dot(TermPtr receiver, TermPtr rest);
TermPtr old_of(TermPtr inner);
TermPtr singleton(TermPtr e);
TermPtr concat(TermPtr l, TermPtr r);
TermPtr rev(TermPtr s);
TermPtr integral(TermPtr prefix, std::string attr); // prefix may be null
TermPtr depth(TermPtr prefix, std::string attr);
TermPtr acyclic(TermPtr prefix, std::string attr);
TermPtr eq(TermPtr l, TermPtr r);
TermPtr neq(TermPtr l, TermPtr r);
TermPtr not_of(TermPtr t);
TermPtr and_of(TermPtr l, TermPtr r);
TermPtr or_of(TermPtr l, TermPtr r);
TermPtr add(TermPtr l, TermPtr r);
TermPtr sub(TermPtr l, TermPtr r);

bool equal(const TermPtr& l, const TermPtr& r);

/// Canonical surface-syntax rendering; normalized terms print byte-stably.
std::string to_string(const TermPtr& t);

/// Fixpoint normalizer: Dot re-association and Current/negative-variable
/// elimination, sequence algebra (rev pushed innermost, ++ right-nested),
/// and constant folding on booleans and integers.
TermPtr normalize(const TermPtr& t);

/// Folds `<<Current>> ++ a.integral(a)` into `integral(a)` and
/// `<<p>> ++ p.a.integral(a)` into `p.integral(a)`, anywhere in the term.
TermPtr fold_integral(const TermPtr& t);

/// Unfold direction of the same equations, one step at the root.
TermPtr unfold_integral(const TermPtr& t);

/// Simultaneous capture-free substitution of variables by terms, f[v:l].
/// Throws std::invalid_argument on arity mismatch.
TermPtr substitute(const TermPtr& t, const std::vector<std::string>& formals,
                   const std::vector<TermPtr>& actuals);

/// Dot distributed over a list of terms, element by element.
std::vector<TermPtr> distribute_dot(const TermPtr& x,
                                    const std::vector<TermPtr>& items);

/// Prefixes a single term with `x.`, distributing over operators and
/// leaving constants untouched. Result is not normalized.
TermPtr prefix_dot(const TermPtr& x, const TermPtr& e);

bool contains_old(const TermPtr& t);
bool contains_kind(const TermPtr& t, Kind k);

/// Flattens a right-nested Concat spine into its elements.
std::vector<TermPtr> concat_elements(const TermPtr& t);
TermPtr concat_of(const std::vector<TermPtr>& elems);

/// Decomposition of a normalized reference term into a rooted access path:
/// root (Var/Attr/NegVar/Current/Ghost/Old) followed by attribute names.
/// `tail` carries a trailing Integral/Depth/Acyclic if one ends the spine.
struct PathView {
  TermPtr root;                    // never null; Current for attr-rooted paths
  std::vector<std::string> attrs;  // attribute hops after the root
  std::optional<Kind> tail;        // Integral/Depth/Acyclic
  std::string tail_attr;
};

/// Views a normalized term as root + attribute path (+ integral-ish tail).
std::optional<PathView> as_path(const TermPtr& t);

} // namespace oocalc
