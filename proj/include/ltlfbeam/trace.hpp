#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "ltlfbeam/formula.hpp"

namespace ltlfbeam {

/// A finite word over sets of atoms. Each position stores its atoms as a
/// sorted, duplicate-free list.
class Trace {
 public:
  using Symbol = std::vector<std::string>;

  Trace() = default;
  explicit Trace(std::vector<Symbol> symbols);

  /// One-hot trace: position i holds exactly {names[i]}.
  static Trace one_hot(const std::vector<std::string>& names);

  std::size_t length() const noexcept { return symbols_.size(); }
  bool empty() const noexcept { return symbols_.empty(); }
  const Symbol& at(std::size_t t) const { return symbols_.at(t); }
  bool holds(std::string_view atom, std::size_t t) const;
  const std::vector<Symbol>& symbols() const noexcept { return symbols_; }

  friend bool operator==(const Trace&, const Trace&) = default;

 private:
  std::vector<Symbol> symbols_;
};

/// Direct finite-trace semantics of w,t |= f. Returns false whenever
/// t >= length(w); in particular the empty trace satisfies nothing.
bool eval_trace(const Formula& f, const Trace& w, std::size_t t = 0);

/// One line of a trace file: `[["cat"],["noMatch"],["eos"]]`.
Trace parse_trace_line(std::string_view line);
std::string format_trace_line(const Trace& w);

}  // namespace ltlfbeam
