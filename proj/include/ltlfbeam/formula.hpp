#pragma once

// LTLf abstract syntax.
//
// A Formula is an immutable tree node shared through a shared_ptr, so
// copies are cheap and values may be used from any thread. The core
// grammar is {True, Atom, Not, And, Next, Until}; Or, WeakNext, Release,
// Eventually and Always are sugar that `desugar` eliminates.

#include <compare>
#include <functional>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace ltlfbeam {

enum class Op : std::uint8_t {
  True,
  Atom,
  Not,
  And,
  Or,
  Next,
  WeakNext,
  Until,
  Release,
  Eventually,
  Always,
};

std::string_view op_name(Op op);
/// Number of children an operator takes.
int op_arity(Op op);

class Formula {
 public:
  static Formula top();
  static Formula bottom();  // !true
  static Formula atom(std::string name);
  static Formula negation(Formula f);
  static Formula conjunction(Formula lhs, Formula rhs);
  static Formula disjunction(Formula lhs, Formula rhs);
  static Formula implication(Formula lhs, Formula rhs);  // !lhs | rhs
  static Formula next(Formula f);
  static Formula weak_next(Formula f);
  static Formula until(Formula lhs, Formula rhs);
  static Formula release(Formula lhs, Formula rhs);
  static Formula eventually(Formula f);
  static Formula always(Formula f);

  /// Left-nested conjunction of a non-empty list.
  static Formula conjunction(const std::vector<Formula>& parts);
  static Formula disjunction(const std::vector<Formula>& parts);

  Op op() const noexcept;
  /// Atom name; empty for other operators.
  const std::string& name() const noexcept;
  std::size_t arity() const noexcept;
  const Formula& child(std::size_t i) const;
  const Formula& lhs() const { return child(0); }
  const Formula& rhs() const { return child(1); }

  /// Number of nested operators on the deepest path (atoms and true are 0).
  int depth() const;
  std::set<std::string> atoms() const;
  std::size_t hash() const noexcept;

  friend bool operator==(const Formula& a, const Formula& b);
  friend std::strong_ordering operator<=>(const Formula& a, const Formula& b);

 private:
  struct Node;
  explicit Formula(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  static Formula make(Op op, std::string name, std::vector<Formula> children);

  std::shared_ptr<const Node> node_;
};

/// Fully parenthesized text that `parse_formula` reads back to an equal tree.
std::string to_string(const Formula& f);

/// Rewrite into the core grammar {True, Atom, Not, And, Next, Until}.
Formula desugar(const Formula& f);

}  // namespace ltlfbeam

template <>
struct std::hash<ltlfbeam::Formula> {
  std::size_t operator()(const ltlfbeam::Formula& f) const noexcept { return f.hash(); }
};
