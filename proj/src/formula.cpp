#include "ltlfbeam/formula.hpp"

#include <algorithm>
#include <stdexcept>

namespace ltlfbeam {

struct Formula::Node {
  Op op;
  std::string name;
  std::vector<Formula> children;
  std::size_t hash;
};

std::string_view op_name(Op op) {
  switch (op) {
    case Op::True: return "True";
    case Op::Atom: return "Atom";
    case Op::Not: return "Not";
    case Op::And: return "And";
    case Op::Or: return "Or";
    case Op::Next: return "Next";
    case Op::WeakNext: return "WeakNext";
    case Op::Until: return "Until";
    case Op::Release: return "Release";
    case Op::Eventually: return "Eventually";
    case Op::Always: return "Always";
  }
  return "?";
}

int op_arity(Op op) {
  switch (op) {
    case Op::True:
    case Op::Atom:
      return 0;
    case Op::And:
    case Op::Or:
    case Op::Until:
    case Op::Release:
      return 2;
    default:
      return 1;
  }
}

Formula Formula::make(Op op, std::string name, std::vector<Formula> children) {
  std::size_t h = std::hash<std::string>{}(name) ^ (static_cast<std::size_t>(op) * 0x9e3779b97f4a7c15ULL);
  for (const auto& c : children) h = (h * 1099511628211ULL) ^ c.hash();
  return Formula(std::make_shared<const Node>(Node{op, std::move(name), std::move(children), h}));
}

Formula Formula::top() { return make(Op::True, {}, {}); }
Formula Formula::bottom() { return negation(top()); }
Formula Formula::atom(std::string name) {
  if (name.empty()) throw std::invalid_argument("atom name must be non-empty");
  return make(Op::Atom, std::move(name), {});
}
Formula Formula::negation(Formula f) { return make(Op::Not, {}, {std::move(f)}); }
Formula Formula::conjunction(Formula lhs, Formula rhs) {
  return make(Op::And, {}, {std::move(lhs), std::move(rhs)});
}
Formula Formula::disjunction(Formula lhs, Formula rhs) {
  return make(Op::Or, {}, {std::move(lhs), std::move(rhs)});
}
Formula Formula::implication(Formula lhs, Formula rhs) {
  return disjunction(negation(std::move(lhs)), std::move(rhs));
}
Formula Formula::next(Formula f) { return make(Op::Next, {}, {std::move(f)}); }
Formula Formula::weak_next(Formula f) { return make(Op::WeakNext, {}, {std::move(f)}); }
Formula Formula::until(Formula lhs, Formula rhs) {
  return make(Op::Until, {}, {std::move(lhs), std::move(rhs)});
}
Formula Formula::release(Formula lhs, Formula rhs) {
  return make(Op::Release, {}, {std::move(lhs), std::move(rhs)});
}
Formula Formula::eventually(Formula f) { return make(Op::Eventually, {}, {std::move(f)}); }
Formula Formula::always(Formula f) { return make(Op::Always, {}, {std::move(f)}); }

Formula Formula::conjunction(const std::vector<Formula>& parts) {
  if (parts.empty()) throw std::invalid_argument("empty conjunction");
  Formula acc = parts.front();
  for (std::size_t i = 1; i < parts.size(); ++i) acc = conjunction(acc, parts[i]);
  return acc;
}

Formula Formula::disjunction(const std::vector<Formula>& parts) {
  if (parts.empty()) throw std::invalid_argument("empty disjunction");
  Formula acc = parts.front();
  for (std::size_t i = 1; i < parts.size(); ++i) acc = disjunction(acc, parts[i]);
  return acc;
}

Op Formula::op() const noexcept { return node_->op; }
const std::string& Formula::name() const noexcept { return node_->name; }
std::size_t Formula::arity() const noexcept { return node_->children.size(); }
const Formula& Formula::child(std::size_t i) const { return node_->children.at(i); }
std::size_t Formula::hash() const noexcept { return node_->hash; }

int Formula::depth() const {
  int d = -1;
  for (const auto& c : node_->children) d = std::max(d, c.depth());
  return d + 1;
}

namespace {

void collect_atoms(const Formula& f, std::set<std::string>& out) {
  if (f.op() == Op::Atom) out.insert(f.name());
  for (std::size_t i = 0; i < f.arity(); ++i) collect_atoms(f.child(i), out);
}

}  // namespace

std::set<std::string> Formula::atoms() const {
  std::set<std::string> out;
  collect_atoms(*this, out);
  return out;
}

bool operator==(const Formula& a, const Formula& b) {
  if (a.node_ == b.node_) return true;
  if (a.hash() != b.hash()) return false;
  return (a <=> b) == std::strong_ordering::equal;
}

std::strong_ordering operator<=>(const Formula& a, const Formula& b) {
  if (a.node_ == b.node_) return std::strong_ordering::equal;
  if (auto c = a.op() <=> b.op(); c != 0) return c;
  if (auto c = a.name() <=> b.name(); c != 0) return c;
  if (auto c = a.arity() <=> b.arity(); c != 0) return c;
  for (std::size_t i = 0; i < a.arity(); ++i) {
    if (auto c = a.child(i) <=> b.child(i); c != 0) return c;
  }
  return std::strong_ordering::equal;
}

namespace {

void print(const Formula& f, std::string& out);

void print_operand(const Formula& f, std::string& out) {
  if (op_arity(f.op()) == 2) {
    out += '(';
    print(f, out);
    out += ')';
  } else {
    print(f, out);
  }
}

void print(const Formula& f, std::string& out) {
  switch (f.op()) {
    case Op::True: out += "true"; return;
    case Op::Atom: out += f.name(); return;
    case Op::Not:
      out += '!';
      print_operand(f.child(0), out);
      return;
    case Op::Next:
    case Op::WeakNext:
    case Op::Eventually:
    case Op::Always: {
      out += f.op() == Op::Next ? "X(" : f.op() == Op::WeakNext ? "WX(" : f.op() == Op::Eventually ? "F(" : "G(";
      print(f.child(0), out);
      out += ')';
      return;
    }
    case Op::And:
    case Op::Or:
    case Op::Until:
    case Op::Release: {
      const char* sep = f.op() == Op::And ? " & " : f.op() == Op::Or ? " | " : f.op() == Op::Until ? " U " : " R ";
      print_operand(f.child(0), out);
      out += sep;
      print_operand(f.child(1), out);
      return;
    }
  }
}

}  // namespace

std::string to_string(const Formula& f) {
  std::string out;
  print(f, out);
  return out;
}

Formula desugar(const Formula& f) {
  using F = Formula;
  switch (f.op()) {
    case Op::True:
    case Op::Atom:
      return f;
    case Op::Not: return F::negation(desugar(f.child(0)));
    case Op::And: return F::conjunction(desugar(f.lhs()), desugar(f.rhs()));
    case Op::Or:
      return F::negation(F::conjunction(F::negation(desugar(f.lhs())), F::negation(desugar(f.rhs()))));
    case Op::Next: return F::next(desugar(f.child(0)));
    case Op::WeakNext: return F::negation(F::next(F::negation(desugar(f.child(0)))));
    case Op::Until: return F::until(desugar(f.lhs()), desugar(f.rhs()));
    case Op::Release:
      return F::negation(F::until(F::negation(desugar(f.lhs())), F::negation(desugar(f.rhs()))));
    case Op::Eventually: return F::until(F::top(), desugar(f.child(0)));
    case Op::Always: return F::negation(F::until(F::top(), F::negation(desugar(f.child(0)))));
  }
  return f;
}

}  // namespace ltlfbeam
