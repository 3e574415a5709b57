#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include <json.hpp>

#include "ltlfbeam/guide.hpp"
#include "ltlfbeam/scorer.hpp"

namespace ltlfbeam {

struct DecodeConfig {
  std::size_t beams = 64;
  /// Exact number of outputs to generate. Must be set.
  std::size_t horizon = 0;
  double alpha_min = 0.5;
  double gamma = 1.0;
  double epsilon = 0.1;
  std::uint64_t seed = 0;
  /// Break exact score ties with seeded noise instead of (beam, output).
  bool tie_jitter = false;
  /// Outputs of the prompt step the automaton before decoding starts.
  bool prompt_advances_dfa = false;

  /// Throws InvalidInputError on out-of-range parameters.
  void validate() const;
  nlohmann::ordered_json to_json() const;
};

struct Beam {
  std::vector<OutputId> outputs;
  /// Accumulated boosted score.
  double score = 0;
  /// Accumulated raw log-likelihood of `outputs`.
  double natural_loglik = 0;
  Config config;
  /// Emitted the stop output into a terminal configuration. A finished
  /// beam is carried through the remaining steps unchanged, as if padding
  /// at log-prob 0.
  bool finished = false;
  /// Set on padding copies. Copies are not expanded further.
  std::optional<std::size_t> copy_of;
};

struct DecodeStats {
  std::size_t steps = 0;
  std::size_t scorer_calls = 0;
  std::size_t candidates = 0;
  std::size_t pruned = 0;
  std::size_t boosted_complete = 0;
  std::size_t boosted_quasi = 0;
  std::size_t padded = 0;
  /// Largest min_outputs(config) - remaining seen after any step (<= 0).
  std::int64_t worst_slack = std::numeric_limits<std::int64_t>::min();
};

struct DecodeResult {
  Beam best;
  /// Final beams, best natural log-likelihood first.
  std::vector<Beam> beams;
  std::vector<std::string> concepts;
  bool satisfied = false;
  std::size_t steps = 0;
};

/// α = α_min + (1 - α_min) · min(1, (d / remaining)^γ); 1 when nothing
/// remains or d is infinite.
double ramp_push_up(double alpha_min, Cost d, std::size_t remaining, double gamma);

enum class Push : std::uint8_t { Pruned, None, Quasi, Complete };

/// One row of the push-up step. Pruned entries become -inf. Finite
/// entries marked Complete or Quasi move to
///   α·max + (1 - α + 2αε)·z   or   α·max + (1 - α + αε)·z
/// where max is taken over the entries that are not pruned. Infinite
/// entries are left as they are.
std::vector<double> push_up_row(const std::vector<double>& row, const std::vector<Push>& kinds, double alpha,
                                double epsilon);

/// Beam search over exactly `cfg.horizon` outputs whose concept sequence
/// satisfies the guide's automaton. Throws InfeasibleError when no such
/// sequence exists.
DecodeResult decode(Scorer& scorer, const Guide& guide, const std::vector<OutputId>& prompt, const DecodeConfig& cfg,
                    DecodeStats* stats = nullptr);

/// Same as decode for every prompt, with one scorer call per step shared
/// by all prompts.
std::vector<DecodeResult> decode_batch(Scorer& scorer, const Guide& guide, const std::vector<std::vector<OutputId>>& prompts,
                                       const DecodeConfig& cfg, DecodeStats* stats = nullptr);

/// `{"outputs":[...],"concepts":[...],"natural_loglik":x,"satisfied":b,"steps":T}`.
nlohmann::ordered_json result_to_json(const DecodeResult& r);

}  // namespace ltlfbeam
