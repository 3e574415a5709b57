#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "ltlfbeam/concept_table.hpp"
#include "ltlfbeam/dfa.hpp"

namespace ltlfbeam {

/// A DFA state paired with the pending output span.
struct Config {
  StateId state = 0;
  MatchState match;
  friend bool operator==(const Config&, const Config&) = default;
};

/// Exact-length reachability of accepting configurations.
/// `ok(r, c)`: some continuation of exactly r outputs from c ends in a
/// terminal configuration.
class FeasibilityTable {
 public:
  FeasibilityTable() = default;
  FeasibilityTable(std::size_t horizon, std::size_t num_configs)
      : horizon_(horizon), num_configs_(num_configs), bits_((horizon + 1) * num_configs) {}
  bool ok(std::size_t remaining, std::size_t config) const { return bits_[remaining * num_configs_ + config]; }
  void set(std::size_t remaining, std::size_t config) { bits_[remaining * num_configs_ + config] = true; }
  std::size_t horizon() const noexcept { return horizon_; }

 private:
  std::size_t horizon_ = 0;
  std::size_t num_configs_ = 0;
  std::vector<bool> bits_;
};

/// Steps a DFA with raw model outputs through a concept table.
///
/// The DFA is re-costed from the table, so distances count outputs.
/// When a stop output is set, emitting it ends the sequence: it is only
/// legal when the resulting configuration is terminal, and it is never
/// used as an ordinary continuation in the length analysis.
class Guide {
 public:
  Guide(const Dfa& dfa, const ConceptTable& table, std::optional<OutputId> stop = std::nullopt);

  const Dfa& dfa() const noexcept { return dfa_; }
  const ConceptTable& table() const noexcept { return table_; }
  std::optional<OutputId> stop() const noexcept { return stop_; }
  std::size_t vocab_size() const noexcept { return table_.vocab_size(); }

  Config initial() const { return {dfa_.initial(), {}}; }

  /// One output. Closed concepts step the DFA, a strict prefix only
  /// extends the pending span. Throws UnknownConceptError on ids outside
  /// the vocabulary.
  Config next_state(Config c, OutputId x) const;
  /// Run a whole output sequence from `c`.
  Config run(Config c, std::span<const OutputId> outputs) const;

  /// The state reached by finishing the cheapest concept that pending + x
  /// can still become, or none if no concept is compatible.
  std::optional<StateId> best_quasi_next_state(Config c, OutputId x) const;

  /// The DFA state after closing a trailing pending span.
  StateId finalize(Config c) const;
  bool terminal(Config c) const { return dfa_.accepting(finalize(c)); }

  /// Fewest further outputs that lead to a terminal configuration, or
  /// kInfinity.
  Cost min_outputs(Config c) const { return min_outputs_[index(c)]; }

  FeasibilityTable feasibility(std::size_t horizon) const;
  bool feasible(const FeasibilityTable& table, std::size_t remaining, Config c) const {
    return remaining <= table.horizon() && table.ok(remaining, index(c));
  }

  std::size_t num_configs() const noexcept { return dfa_.num_states() * table_.num_nodes(); }
  std::size_t index(Config c) const { return static_cast<std::size_t>(c.state) * table_.num_nodes() + c.match.node; }
  Config config(std::size_t i) const {
    return {static_cast<StateId>(i / table_.num_nodes()), {static_cast<NodeId>(i % table_.num_nodes())}};
  }

  /// DFA symbol stepped for concept c of the table (noMatch if the DFA
  /// does not know c).
  SymbolId symbol_for(std::size_t c) const { return symbol_of_concept_[c]; }

  /// Outputs that cover every distinct behaviour from trie node n (the
  /// stop output excluded).
  const std::vector<OutputId>& representatives(NodeId n) const { return reps_.at(n); }

 private:
  StateId apply(StateId q, const Segmentation& s) const;

  Dfa dfa_;
  ConceptTable table_;
  std::optional<OutputId> stop_;
  SymbolId no_match_;
  std::vector<SymbolId> symbol_of_concept_;
  std::vector<std::vector<OutputId>> reps_;
  std::vector<char> terminal_;
  std::vector<Cost> min_outputs_;
  // successor lists per configuration over representative outputs
  std::vector<std::vector<std::size_t>> succ_;
  std::vector<char> stop_terminal_;
};

}  // namespace ltlfbeam
