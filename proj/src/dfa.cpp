#include "ltlfbeam/dfa.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <queue>
#include <set>
#include <sstream>

#include "ltlfbeam/errors.hpp"

namespace ltlfbeam {

Dfa::Dfa(std::vector<std::string> symbols, StateId initial, std::vector<bool> accepting,
         std::vector<StateId> delta, std::vector<Cost> cost)
    : symbols_(std::move(symbols)),
      initial_(initial),
      accepting_(std::move(accepting)),
      delta_(std::move(delta)),
      cost_(std::move(cost)) {
  const std::size_t n = accepting_.size();
  const std::size_t m = symbols_.size();
  if (m == 0) throw InvalidInputError("DFA alphabet is empty");
  if (n == 0) throw InvalidInputError("DFA has no states");
  if (initial_ >= n) throw InvalidInputError("initial state out of range");
  if (delta_.size() != n * m) throw InvalidInputError("transition table is not total");
  if (cost_.size() != m) throw InvalidInputError("cost vector does not match alphabet");
  for (StateId q : delta_) {
    if (q >= n) throw InvalidInputError("transition target out of range");
  }
  for (Cost c : cost_) {
    if (c < 1) throw InvalidInputError("symbol costs must be >= 1");
  }
  std::set<std::string_view> seen;
  for (const auto& s : symbols_) {
    if (!seen.insert(s).second) throw InvalidInputError("duplicate symbol '" + s + "'");
  }
}

std::optional<SymbolId> Dfa::symbol_index(std::string_view name) const {
  for (SymbolId s = 0; s < symbols_.size(); ++s) {
    if (symbols_[s] == name) return s;
  }
  return std::nullopt;
}

SymbolId Dfa::no_match() const {
  if (auto s = symbol_index(kNoMatch)) return *s;
  throw UnknownConceptError("DFA alphabet has no noMatch symbol");
}

Dfa Dfa::with_costs(std::vector<Cost> cost) const {
  return annotate(Dfa(symbols_, initial_, accepting_, delta_, std::move(cost)));
}

Dfa annotate(Dfa dfa) {
  const std::size_t n = dfa.num_states();
  const std::size_t m = dfa.num_symbols();

  std::vector<std::vector<std::pair<StateId, Cost>>> incoming(n);
  for (StateId q = 0; q < n; ++q) {
    for (SymbolId s = 0; s < m; ++s) {
      if (dfa.cost(s) != kInfinity) incoming[dfa.next(q, s)].emplace_back(q, dfa.cost(s));
    }
  }

  std::vector<Cost> dist(n, kInfinity);
  using Item = std::pair<Cost, StateId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  for (StateId q = 0; q < n; ++q) {
    if (dfa.accepting(q)) {
      dist[q] = 0;
      heap.emplace(0, q);
    }
  }
  while (!heap.empty()) {
    auto [d, q] = heap.top();
    heap.pop();
    if (d != dist[q]) continue;
    for (auto [p, w] : incoming[q]) {
      const Cost nd = add_cost(d, w);
      if (nd < dist[p]) {
        dist[p] = nd;
        heap.emplace(nd, p);
      }
    }
  }

  std::vector<std::vector<StateId>> reach(n);
  std::vector<char> mark(n);
  std::vector<StateId> stack;
  for (StateId root = 0; root < n; ++root) {
    std::fill(mark.begin(), mark.end(), 0);
    stack.assign(1, root);
    mark[root] = 1;
    while (!stack.empty()) {
      const StateId q = stack.back();
      stack.pop_back();
      for (SymbolId s = 0; s < m; ++s) {
        const StateId r = dfa.next(q, s);
        if (!mark[r]) {
          mark[r] = 1;
          stack.push_back(r);
        }
      }
    }
    for (StateId q = 0; q < n; ++q) {
      if (mark[q]) reach[root].push_back(q);
    }
  }

  dfa.distance_ = std::move(dist);
  dfa.reachable_ = std::move(reach);
  return dfa;
}

Dfa canonical_order(const Dfa& dfa) {
  const std::size_t n = dfa.num_states();
  const std::size_t m = dfa.num_symbols();
  constexpr StateId kUnseen = std::numeric_limits<StateId>::max();
  std::vector<StateId> renumber(n, kUnseen);
  std::vector<StateId> order;
  std::deque<StateId> queue{dfa.initial()};
  renumber[dfa.initial()] = 0;
  order.push_back(dfa.initial());
  while (!queue.empty()) {
    const StateId q = queue.front();
    queue.pop_front();
    for (SymbolId s = 0; s < m; ++s) {
      const StateId r = dfa.next(q, s);
      if (renumber[r] == kUnseen) {
        renumber[r] = static_cast<StateId>(order.size());
        order.push_back(r);
        queue.push_back(r);
      }
    }
  }
  std::vector<bool> accepting(order.size());
  std::vector<StateId> delta(order.size() * m);
  for (StateId i = 0; i < order.size(); ++i) {
    accepting[i] = dfa.accepting(order[i]);
    for (SymbolId s = 0; s < m; ++s) delta[i * m + s] = renumber[dfa.next(order[i], s)];
  }
  Dfa out(dfa.symbols(), 0, std::move(accepting), std::move(delta), dfa.costs());
  return dfa.annotated() ? annotate(std::move(out)) : out;
}

Dfa minimize(const Dfa& dfa) {
  const Dfa reachable = canonical_order(dfa);
  const std::size_t n = reachable.num_states();
  const std::size_t m = reachable.num_symbols();

  // inverse[s][q] = predecessors of q on s
  std::vector<std::vector<std::vector<StateId>>> inverse(m, std::vector<std::vector<StateId>>(n));
  for (StateId q = 0; q < n; ++q) {
    for (SymbolId s = 0; s < m; ++s) inverse[s][reachable.next(q, s)].push_back(q);
  }

  std::vector<std::vector<StateId>> blocks;
  std::vector<std::size_t> block_of(n);
  {
    std::vector<StateId> acc, rej;
    for (StateId q = 0; q < n; ++q) (reachable.accepting(q) ? acc : rej).push_back(q);
    for (auto* b : {&acc, &rej}) {
      if (b->empty()) continue;
      for (StateId q : *b) block_of[q] = blocks.size();
      blocks.push_back(std::move(*b));
    }
  }

  std::set<std::pair<std::size_t, SymbolId>> pending;
  std::deque<std::pair<std::size_t, SymbolId>> work;
  auto push = [&](std::size_t b, SymbolId s) {
    if (pending.emplace(b, s).second) work.emplace_back(b, s);
  };
  if (blocks.size() == 2) {
    const std::size_t smaller = blocks[0].size() <= blocks[1].size() ? 0 : 1;
    for (SymbolId s = 0; s < m; ++s) push(smaller, s);
  }

  std::vector<char> in_x(n);
  std::vector<std::size_t> touched_count;
  while (!work.empty()) {
    const auto [splitter, sym] = work.front();
    work.pop_front();
    pending.erase({splitter, sym});

    std::vector<StateId> x;
    for (StateId q : blocks[splitter]) {
      for (StateId p : inverse[sym][q]) {
        if (!in_x[p]) {
          in_x[p] = 1;
          x.push_back(p);
        }
      }
    }

    std::vector<std::size_t> touched;
    touched_count.assign(blocks.size(), 0);
    for (StateId p : x) {
      if (touched_count[block_of[p]]++ == 0) touched.push_back(block_of[p]);
    }
    for (std::size_t b : touched) {
      if (touched_count[b] == blocks[b].size()) continue;
      std::vector<StateId> inside, outside;
      for (StateId q : blocks[b]) (in_x[q] ? inside : outside).push_back(q);
      const std::size_t fresh = blocks.size();
      blocks[b] = std::move(inside);
      blocks.push_back(std::move(outside));
      for (StateId q : blocks[fresh]) block_of[q] = fresh;
      for (SymbolId s = 0; s < m; ++s) {
        if (pending.count({b, s})) {
          push(fresh, s);
        } else {
          push(blocks[b].size() <= blocks[fresh].size() ? b : fresh, s);
        }
      }
    }
    for (StateId p : x) in_x[p] = 0;
  }

  std::vector<bool> accepting(blocks.size());
  std::vector<StateId> delta(blocks.size() * m);
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const StateId rep = blocks[b].front();
    accepting[b] = reachable.accepting(rep);
    for (SymbolId s = 0; s < m; ++s) delta[b * m + s] = static_cast<StateId>(block_of[reachable.next(rep, s)]);
  }
  Dfa quotient(reachable.symbols(), static_cast<StateId>(block_of[reachable.initial()]), std::move(accepting),
               std::move(delta), reachable.costs());
  Dfa out = canonical_order(quotient);
  return dfa.annotated() ? annotate(std::move(out)) : out;
}

bool accepts(const Dfa& dfa, std::span<const SymbolId> trace) {
  StateId q = dfa.initial();
  for (SymbolId s : trace) {
    if (s >= dfa.num_symbols()) throw UnknownConceptError("symbol id out of range");
    q = dfa.next(q, s);
  }
  return dfa.accepting(q);
}

bool accepts(const Dfa& dfa, const std::vector<std::string>& trace) {
  std::vector<SymbolId> ids;
  ids.reserve(trace.size());
  for (const auto& name : trace) {
    auto s = dfa.symbol_index(name);
    if (!s) throw UnknownConceptError("unknown concept '" + name + "'");
    ids.push_back(*s);
  }
  return accepts(dfa, ids);
}

TransitionMatrixExport export_matrix(const Dfa& dfa) {
  TransitionMatrixExport out;
  out.columns = dfa.symbols();
  out.rows.resize(dfa.num_states());
  for (StateId q = 0; q < dfa.num_states(); ++q) {
    for (SymbolId s = 0; s < dfa.num_symbols(); ++s) out.rows[q].push_back({dfa.cost(s), dfa.next(q, s)});
  }
  return out;
}

namespace {

std::string cost_text(Cost c) { return c == kInfinity ? "inf" : std::to_string(c); }

nlohmann::ordered_json cost_json(Cost c) {
  return c == kInfinity ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(c);
}

Cost cost_from_json(const nlohmann::json& j) {
  if (j.is_null()) return kInfinity;
  if (!j.is_number_integer()) throw InvalidInputError("cost must be an integer or null");
  return j.get<Cost>();
}

}  // namespace

std::string export_dot(const Dfa& dfa) {
  std::ostringstream os;
  os << "digraph dfa {\n  rankdir=LR;\n  __start [shape=point];\n";
  for (StateId q = 0; q < dfa.num_states(); ++q) {
    os << "  s" << q << " [shape=" << (dfa.accepting(q) ? "doublecircle" : "circle");
    if (dfa.annotated()) {
      os << ", label=\"s" << q << "\\nd=" << cost_text(dfa.distance(q)) << "\"";
      if (dfa.is_deadlock(q)) os << ", color=red, fontcolor=red";
      if (dfa.accepting(q)) os << ", color=darkgreen";
    }
    os << "];\n";
  }
  os << "  __start -> s" << dfa.initial() << ";\n";
  for (StateId q = 0; q < dfa.num_states(); ++q) {
    // one edge per target, labels merged
    std::vector<std::pair<StateId, std::string>> edges;
    for (SymbolId s = 0; s < dfa.num_symbols(); ++s) {
      const StateId r = dfa.next(q, s);
      auto it = std::find_if(edges.begin(), edges.end(), [r](const auto& e) { return e.first == r; });
      const std::string label = dfa.symbol(s) + "/" + cost_text(dfa.cost(s));
      if (it == edges.end()) {
        edges.emplace_back(r, label);
      } else {
        it->second += ", " + label;
      }
    }
    for (const auto& [r, label] : edges) os << "  s" << q << " -> s" << r << " [label=\"" << label << "\"];\n";
  }
  os << "}\n";
  return os.str();
}

nlohmann::ordered_json dfa_to_json(const Dfa& dfa) {
  nlohmann::ordered_json j;
  j["states"] = nlohmann::ordered_json::array();
  for (StateId q = 0; q < dfa.num_states(); ++q) j["states"].push_back(q);
  j["initial"] = dfa.initial();
  j["accepting"] = nlohmann::ordered_json::array();
  for (StateId q = 0; q < dfa.num_states(); ++q) {
    if (dfa.accepting(q)) j["accepting"].push_back(q);
  }
  j["concepts"] = dfa.symbols();
  j["cost"] = nlohmann::ordered_json::object();
  for (SymbolId s = 0; s < dfa.num_symbols(); ++s) j["cost"][dfa.symbol(s)] = cost_json(dfa.cost(s));
  j["delta"] = nlohmann::ordered_json::array();
  for (StateId q = 0; q < dfa.num_states(); ++q) {
    auto row = nlohmann::ordered_json::array();
    for (SymbolId s = 0; s < dfa.num_symbols(); ++s) row.push_back(dfa.next(q, s));
    j["delta"].push_back(std::move(row));
  }
  j["distance"] = nlohmann::ordered_json::array();
  if (dfa.annotated()) {
    for (StateId q = 0; q < dfa.num_states(); ++q) j["distance"].push_back(cost_json(dfa.distance(q)));
  }
  return j;
}

Dfa dfa_from_json(const nlohmann::json& j) {
  try {
    const auto states = j.at("states");
    const std::size_t n = states.size();
    for (std::size_t i = 0; i < n; ++i) {
      if (states[i].get<std::size_t>() != i) throw InvalidInputError("state ids must be dense and ordered");
    }
    auto symbols = j.at("concepts").get<std::vector<std::string>>();
    std::vector<bool> accepting(n);
    for (const auto& q : j.at("accepting")) accepting.at(q.get<std::size_t>()) = true;
    std::vector<Cost> cost;
    for (const auto& s : symbols) cost.push_back(cost_from_json(j.at("cost").at(s)));
    std::vector<StateId> delta;
    const auto& rows = j.at("delta");
    if (rows.size() != n) throw InvalidInputError("delta must have one row per state");
    for (const auto& row : rows) {
      if (row.size() != symbols.size()) throw InvalidInputError("delta row width mismatch");
      for (const auto& r : row) delta.push_back(r.get<StateId>());
    }
    return annotate(Dfa(std::move(symbols), j.at("initial").get<StateId>(), std::move(accepting), std::move(delta),
                        std::move(cost)));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInputError(std::string("malformed DFA JSON: ") + e.what());
  } catch (const std::out_of_range&) {
    throw InvalidInputError("malformed DFA JSON: state id out of range");
  }
}

}  // namespace ltlfbeam
