#include "ltlfbeam/guide.hpp"

#include <deque>

#include "ltlfbeam/errors.hpp"

namespace ltlfbeam {

Guide::Guide(const Dfa& dfa, const ConceptTable& table, std::optional<OutputId> stop)
    : dfa_(dfa.with_costs(table.costs_for(dfa.symbols()))), table_(table), stop_(stop), no_match_(dfa.no_match()) {
  if (table_.vocab_size() == 0) throw InvalidInputError("concept table has an empty vocabulary");
  if (stop_ && *stop_ >= table_.vocab_size()) throw InvalidInputError("stop output outside the vocabulary");
  for (std::size_t c = 0; c < table_.num_concepts(); ++c) {
    symbol_of_concept_.push_back(dfa_.symbol_index(table_.concept_name(c)).value_or(no_match_));
  }

  const auto& root_kids = table_.children(ConceptTable::kRoot);
  for (NodeId n = 0; n < table_.num_nodes(); ++n) {
    std::vector<OutputId> reps;
    for (const auto& [x, _] : table_.children(n)) {
      if (x != stop_) reps.push_back(x);
    }
    for (const auto& [x, _] : root_kids) {
      if (x != stop_ && !table_.child(n, x)) reps.push_back(x);
    }
    for (OutputId x = 0; x < table_.vocab_size(); ++x) {
      if (x != stop_ && !root_kids.count(x) && !table_.child(n, x)) {
        reps.push_back(x);
        break;
      }
    }
    reps_.push_back(std::move(reps));
  }

  const std::size_t n = num_configs();
  terminal_.resize(n);
  stop_terminal_.resize(n);
  succ_.resize(n);
  std::vector<std::vector<std::size_t>> pred(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Config c = config(i);
    terminal_[i] = dfa_.accepting(finalize(c));
    if (stop_) stop_terminal_[i] = terminal(next_state(c, *stop_));
    for (OutputId x : reps_[c.match.node]) {
      const std::size_t j = index(next_state(c, x));
      succ_[i].push_back(j);
      pred[j].push_back(i);
    }
  }

  // BFS over reversed edges; queue levels stay sorted because the stop
  // sources (level 1) are enqueued after all level-0 sources.
  min_outputs_.assign(n, kInfinity);
  std::deque<std::size_t> queue;
  for (std::size_t i = 0; i < n; ++i) {
    if (terminal_[i]) {
      min_outputs_[i] = 0;
      queue.push_back(i);
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (stop_terminal_[i] && !terminal_[i]) {
      min_outputs_[i] = 1;
      queue.push_back(i);
    }
  }
  while (!queue.empty()) {
    const std::size_t j = queue.front();
    queue.pop_front();
    for (std::size_t i : pred[j]) {
      if (min_outputs_[i] == kInfinity) {
        min_outputs_[i] = min_outputs_[j] + 1;
        queue.push_back(i);
      }
    }
  }
}

StateId Guide::apply(StateId q, const Segmentation& s) const {
  for (std::uint8_t i = 0; i < s.count; ++i) {
    const auto e = s.events[i];
    q = dfa_.next(q, e == Segmentation::kNoMatchEvent ? no_match_ : symbol_of_concept_[e]);
  }
  return q;
}

Config Guide::next_state(Config c, OutputId x) const {
  if (x >= table_.vocab_size()) throw UnknownConceptError("output id " + std::to_string(x) + " outside the vocabulary");
  const Segmentation s = table_.feed(c.match, x);
  return {apply(c.state, s), s.next};
}

Config Guide::run(Config c, std::span<const OutputId> outputs) const {
  for (OutputId x : outputs) c = next_state(c, x);
  return c;
}

std::optional<StateId> Guide::best_quasi_next_state(Config c, OutputId x) const {
  StateId from = c.state;
  auto node = table_.child(c.match.node, x);
  if (!node && !c.match.empty()) {
    from = dfa_.next(c.state, no_match_);
    node = table_.child(ConceptTable::kRoot, x);
  }
  if (!node) return std::nullopt;
  std::optional<StateId> best;
  for (std::size_t concept_id : table_.concepts_below(*node)) {
    const StateId q = dfa_.next(from, symbol_of_concept_[concept_id]);
    if (!best || dfa_.distance(q) < dfa_.distance(*best)) best = q;
  }
  return best;
}

StateId Guide::finalize(Config c) const { return c.match.empty() ? c.state : dfa_.next(c.state, no_match_); }

FeasibilityTable Guide::feasibility(std::size_t horizon) const {
  const std::size_t n = num_configs();
  FeasibilityTable table(horizon, n);
  for (std::size_t i = 0; i < n; ++i) {
    if (terminal_[i]) table.set(0, i);
  }
  for (std::size_t r = 1; r <= horizon; ++r) {
    for (std::size_t i = 0; i < n; ++i) {
      bool ok = stop_terminal_[i];
      for (std::size_t j : succ_[i]) {
        if (ok) break;
        ok = table.ok(r - 1, j);
      }
      if (ok) table.set(r, i);
    }
  }
  return table;
}

}  // namespace ltlfbeam
