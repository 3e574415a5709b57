#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ltlfbeam/dfa.hpp"

namespace ltlfbeam {

using OutputId = std::uint32_t;
using NodeId = std::uint32_t;

/// Position inside the output trie: the outputs seen since the last
/// concept boundary. The root means nothing is pending.
struct MatchState {
  NodeId node = 0;
  bool empty() const noexcept { return node == 0; }
  friend bool operator==(const MatchState&, const MatchState&) = default;
};

/// Outcome of feeding one output: the concept-level events it closes (at
/// most two: a flushed noMatch span followed by a completed concept) and
/// the new match state.
struct Segmentation {
  static constexpr std::int32_t kNoMatchEvent = -1;
  std::int32_t events[2] = {0, 0};  // concept index or kNoMatchEvent
  std::uint8_t count = 0;
  MatchState next;
  void emit(std::int32_t e) { events[count++] = e; }
};

/// The mapping between model outputs and concepts. μ(c) is the canonical
/// output sequence of concept c; ν cuts an output stream into concepts.
///
/// A concept is recognized at the output that completes its μ sequence.
/// The μ sequences must be prefix-free, so that moment is unambiguous.
/// A pending span that stops being a prefix of any μ(c) is closed as a
/// single noMatch; the offending output then starts a new span, or is
/// absorbed into the same noMatch if it cannot start one either.
class ConceptTable {
 public:
  ConceptTable() = default;
  /// `vocab_size` 0 means one past the largest output id in the table.
  explicit ConceptTable(const std::map<std::string, std::vector<OutputId>>& mu, std::size_t vocab_size = 0);

  /// Classification setting: output i is concept i, ν is the identity.
  static ConceptTable identity(const std::vector<std::string>& concepts);
  /// `{"concept":[ids...], ..., "noMatch_policy":"flush-one"}`.
  static ConceptTable from_json(const nlohmann::json& j, std::size_t vocab_size = 0);
  nlohmann::ordered_json to_json() const;

  std::size_t vocab_size() const noexcept { return vocab_size_; }
  std::size_t num_concepts() const noexcept { return names_.size(); }
  const std::string& concept_name(std::size_t c) const { return names_.at(c); }
  std::optional<std::size_t> concept_index(std::string_view name) const;
  const std::vector<OutputId>& mu(std::size_t c) const { return mu_.at(c); }
  const std::vector<std::string>& concepts() const noexcept { return names_; }

  /// pending + next is a prefix (possibly all) of μ(c).
  bool compatible(std::span<const OutputId> pending, OutputId next, std::size_t c) const;

  Segmentation feed(MatchState m, OutputId x) const;
  /// Closes a trailing incomplete span; true if that emits a noMatch.
  bool flushes(MatchState m) const noexcept { return !m.empty(); }
  /// Pending outputs of a match state, oldest first.
  std::vector<OutputId> pending(MatchState m) const;

  /// Batch segmentation; a trailing incomplete span becomes noMatch.
  std::vector<std::string> nu(std::span<const OutputId> outputs) const;

  /// Edge costs for a DFA alphabet: |μ(c)| for table concepts, infinity
  /// for concepts the table cannot produce, and for noMatch 1 or infinity
  /// depending on whether some output stream can produce it.
  std::vector<Cost> costs_for(const std::vector<std::string>& symbols) const;

  // Trie access.
  static constexpr NodeId kRoot = 0;
  std::size_t num_nodes() const noexcept { return nodes_.size(); }
  std::optional<NodeId> child(NodeId n, OutputId x) const;
  const std::map<OutputId, NodeId>& children(NodeId n) const { return nodes_.at(n).children; }
  std::optional<std::size_t> concept_at(NodeId n) const { return nodes_.at(n).concept_id; }
  /// Concepts whose μ passes through node n.
  const std::vector<std::size_t>& concepts_below(NodeId n) const { return nodes_.at(n).below; }
  NodeId parent(NodeId n) const { return nodes_.at(n).parent; }
  OutputId label(NodeId n) const { return nodes_.at(n).label; }

 private:
  void add(const std::string& name, const std::vector<OutputId>& mu);
  void finish(std::size_t vocab_size);

  struct Node {
    std::map<OutputId, NodeId> children;
    std::optional<std::size_t> concept_id;
    std::vector<std::size_t> below;
    NodeId parent = 0;
    OutputId label = 0;
  };

  std::vector<std::string> names_;
  std::vector<std::vector<OutputId>> mu_;
  std::vector<Node> nodes_{Node{}};
  std::size_t vocab_size_ = 0;
};

}  // namespace ltlfbeam
