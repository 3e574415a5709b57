#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace ltlfbeam {

using StateId = std::uint32_t;
using SymbolId = std::uint32_t;
/// Edge weights and distances, counted in model outputs.
using Cost = std::int64_t;

inline constexpr Cost kInfinity = std::numeric_limits<Cost>::max();
inline constexpr std::string_view kNoMatch = "noMatch";

/// Saturating addition on costs.
constexpr Cost add_cost(Cost a, Cost b) {
  if (a == kInfinity || b == kInfinity) return kInfinity;
  return a + b;
}

/// Complete DFA over a one-hot alphabet of named symbols (the concepts
/// plus `noMatch`). Each symbol carries an edge cost. After `annotate`
/// every state also knows its shortest weighted distance to acceptance
/// and the set of states it can reach.
class Dfa {
 public:
  Dfa() = default;
  /// `delta` is row-major: delta[q * symbols.size() + s]. `cost` may hold
  /// kInfinity for symbols that can never be produced.
  Dfa(std::vector<std::string> symbols, StateId initial, std::vector<bool> accepting,
      std::vector<StateId> delta, std::vector<Cost> cost);

  std::size_t num_states() const noexcept { return accepting_.size(); }
  std::size_t num_symbols() const noexcept { return symbols_.size(); }
  const std::vector<std::string>& symbols() const noexcept { return symbols_; }
  const std::string& symbol(SymbolId s) const { return symbols_.at(s); }
  std::optional<SymbolId> symbol_index(std::string_view name) const;
  SymbolId no_match() const;

  StateId initial() const noexcept { return initial_; }
  bool accepting(StateId q) const { return accepting_.at(q); }
  StateId next(StateId q, SymbolId s) const { return delta_[q * symbols_.size() + s]; }
  Cost cost(SymbolId s) const { return cost_.at(s); }
  const std::vector<Cost>& costs() const noexcept { return cost_; }
  const std::vector<StateId>& delta() const noexcept { return delta_; }

  bool annotated() const noexcept { return !distance_.empty() || accepting_.empty(); }
  Cost distance(StateId q) const { return distance_.at(q); }
  /// Sorted ids of states reachable from q, q included.
  const std::vector<StateId>& reachable(StateId q) const { return reachable_.at(q); }
  bool is_deadlock(StateId q) const { return distance(q) == kInfinity; }

  /// Same automaton with new costs; annotation is recomputed.
  Dfa with_costs(std::vector<Cost> cost) const;

  friend Dfa annotate(Dfa dfa);

 private:
  std::vector<std::string> symbols_;
  StateId initial_ = 0;
  std::vector<bool> accepting_;
  std::vector<StateId> delta_;
  std::vector<Cost> cost_;
  std::vector<Cost> distance_;
  std::vector<std::vector<StateId>> reachable_;
};

/// Dijkstra distances to the accepting set and per-state reachability.
Dfa annotate(Dfa dfa);

/// Language-preserving minimization (Hopcroft partition refinement).
/// States are renumbered breadth-first from the initial state.
Dfa minimize(const Dfa& dfa);

/// Breadth-first renumbering from the initial state, dropping
/// unreachable states.
Dfa canonical_order(const Dfa& dfa);

/// Run on a sequence of symbol names. Throws UnknownConceptError.
bool accepts(const Dfa& dfa, const std::vector<std::string>& trace);
bool accepts(const Dfa& dfa, std::span<const SymbolId> trace);

struct MatrixCell {
  Cost cost;
  StateId next;
  friend bool operator==(const MatrixCell&, const MatrixCell&) = default;
};

/// Tabular view: one row per state, one column per symbol.
struct TransitionMatrixExport {
  std::vector<std::string> columns;
  std::vector<std::vector<MatrixCell>> rows;
  const MatrixCell& cell(StateId q, SymbolId s) const { return rows.at(q).at(s); }
};

TransitionMatrixExport export_matrix(const Dfa& dfa);

/// Graphviz text. Accepting states are double circles, deadlocks red.
std::string export_dot(const Dfa& dfa);

/// `{"states","initial","accepting","concepts","cost","delta","distance"}`
/// in that order; infinite costs and distances are written as null.
nlohmann::ordered_json dfa_to_json(const Dfa& dfa);
/// Inverse of dfa_to_json. The result is annotated.
Dfa dfa_from_json(const nlohmann::json& j);

}  // namespace ltlfbeam
