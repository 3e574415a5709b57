#include "ltlfbeam/concept_table.hpp"

#include <algorithm>

#include "ltlfbeam/errors.hpp"
#include "ltlfbeam/parser.hpp"

namespace ltlfbeam {

void ConceptTable::add(const std::string& name, const std::vector<OutputId>& mu) {
  if (!is_valid_atom_name(name)) throw InvalidInputError("invalid concept name '" + name + "'");
  if (name == kNoMatch) throw InvalidInputError("noMatch is reserved and cannot have a canonical output sequence");
  if (mu.empty()) throw InvalidInputError("concept '" + name + "' has an empty output sequence");
  if (concept_index(name)) throw InvalidInputError("duplicate concept '" + name + "'");
  const std::size_t c = names_.size();
  NodeId n = kRoot;
  for (OutputId x : mu) {
    if (nodes_[n].concept_id) {
      throw InvalidInputError("output sequence of '" + names_[*nodes_[n].concept_id] + "' is a prefix of '" + name +
                              "'");
    }
    nodes_[n].below.push_back(c);
    auto it = nodes_[n].children.find(x);
    if (it == nodes_[n].children.end()) {
      const auto fresh = static_cast<NodeId>(nodes_.size());
      nodes_[n].children.emplace(x, fresh);
      Node node;
      node.parent = n;
      node.label = x;
      nodes_.push_back(std::move(node));
      n = fresh;
    } else {
      n = it->second;
    }
  }
  if (nodes_[n].concept_id) {
    throw InvalidInputError("concepts '" + names_[*nodes_[n].concept_id] + "' and '" + name +
                            "' share an output sequence");
  }
  if (!nodes_[n].children.empty()) {
    throw InvalidInputError("output sequence of '" + name + "' is a prefix of another concept");
  }
  nodes_[n].concept_id = c;
  nodes_[n].below.push_back(c);
  names_.push_back(name);
  mu_.push_back(mu);
}

void ConceptTable::finish(std::size_t vocab_size) {
  OutputId top = 0;
  for (const auto& m : mu_) top = std::max(top, *std::max_element(m.begin(), m.end()) + 1);
  if (vocab_size == 0) vocab_size = top;
  if (top > vocab_size) throw InvalidInputError("concept table uses output ids beyond the vocabulary");
  vocab_size_ = vocab_size;
}

ConceptTable::ConceptTable(const std::map<std::string, std::vector<OutputId>>& mu, std::size_t vocab_size) {
  for (const auto& [name, seq] : mu) add(name, seq);
  finish(vocab_size);
}

ConceptTable ConceptTable::identity(const std::vector<std::string>& concepts) {
  ConceptTable t;
  for (std::size_t i = 0; i < concepts.size(); ++i) t.add(concepts[i], {static_cast<OutputId>(i)});
  t.finish(concepts.size());
  return t;
}

ConceptTable ConceptTable::from_json(const nlohmann::json& j, std::size_t vocab_size) {
  if (!j.is_object()) throw InvalidInputError("concept table must be a JSON object");
  std::map<std::string, std::vector<OutputId>> mu;
  for (const auto& [key, value] : j.items()) {
    if (key == "noMatch_policy") {
      if (value != "flush-one") throw InvalidInputError("unsupported noMatch_policy; only \"flush-one\" is implemented");
      continue;
    }
    if (!value.is_array()) throw InvalidInputError("concept '" + key + "' must map to an array of output ids");
    std::vector<OutputId> seq;
    for (const auto& x : value) {
      if (!x.is_number_integer() || x.get<std::int64_t>() < 0) {
        throw InvalidInputError("concept '" + key + "' has a non-integer or negative output id");
      }
      seq.push_back(x.get<OutputId>());
    }
    mu.emplace(key, std::move(seq));
  }
  return ConceptTable(mu, vocab_size);
}

nlohmann::ordered_json ConceptTable::to_json() const {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (std::size_t c = 0; c < names_.size(); ++c) j[names_[c]] = mu_[c];
  j["noMatch_policy"] = "flush-one";
  return j;
}

std::optional<std::size_t> ConceptTable::concept_index(std::string_view name) const {
  for (std::size_t c = 0; c < names_.size(); ++c) {
    if (names_[c] == name) return c;
  }
  return std::nullopt;
}

std::optional<NodeId> ConceptTable::child(NodeId n, OutputId x) const {
  const auto& kids = nodes_.at(n).children;
  auto it = kids.find(x);
  if (it == kids.end()) return std::nullopt;
  return it->second;
}

bool ConceptTable::compatible(std::span<const OutputId> pending, OutputId next, std::size_t c) const {
  const auto& m = mu_.at(c);
  if (pending.size() + 1 > m.size()) return false;
  return std::equal(pending.begin(), pending.end(), m.begin()) && m[pending.size()] == next;
}

Segmentation ConceptTable::feed(MatchState m, OutputId x) const {
  Segmentation out;
  auto start = [&](NodeId from) -> bool {
    auto n = child(from, x);
    if (!n) return false;
    if (auto c = concept_at(*n)) {
      out.emit(static_cast<std::int32_t>(*c));
      out.next = MatchState{kRoot};
    } else {
      out.next = MatchState{*n};
    }
    return true;
  };
  if (start(m.node)) return out;
  out.emit(Segmentation::kNoMatchEvent);
  out.next = MatchState{kRoot};
  if (!m.empty()) start(kRoot);
  return out;
}

std::vector<OutputId> ConceptTable::pending(MatchState m) const {
  std::vector<OutputId> out;
  for (NodeId n = m.node; n != kRoot; n = nodes_.at(n).parent) out.push_back(nodes_[n].label);
  std::reverse(out.begin(), out.end());
  return out;
}

std::vector<std::string> ConceptTable::nu(std::span<const OutputId> outputs) const {
  std::vector<std::string> out;
  MatchState m;
  for (OutputId x : outputs) {
    const Segmentation s = feed(m, x);
    for (std::uint8_t i = 0; i < s.count; ++i) {
      out.push_back(s.events[i] == Segmentation::kNoMatchEvent ? std::string(kNoMatch) : names_[s.events[i]]);
    }
    m = s.next;
  }
  if (flushes(m)) out.emplace_back(kNoMatch);
  return out;
}

std::vector<Cost> ConceptTable::costs_for(const std::vector<std::string>& symbols) const {
  bool no_match_reachable = false;
  for (const auto& m : mu_) no_match_reachable |= m.size() >= 2;
  no_match_reachable |= nodes_[kRoot].children.size() < vocab_size_;
  for (const auto& name : names_) {
    no_match_reachable |= std::find(symbols.begin(), symbols.end(), name) == symbols.end();
  }
  std::vector<Cost> cost;
  cost.reserve(symbols.size());
  for (const auto& s : symbols) {
    if (s == kNoMatch) {
      cost.push_back(no_match_reachable ? 1 : kInfinity);
    } else if (auto c = concept_index(s)) {
      cost.push_back(static_cast<Cost>(mu_[*c].size()));
    } else {
      cost.push_back(kInfinity);
    }
  }
  return cost;
}

}  // namespace ltlfbeam
