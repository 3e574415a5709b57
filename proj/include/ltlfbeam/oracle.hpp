#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "ltlfbeam/formula.hpp"
#include "ltlfbeam/guide.hpp"
#include "ltlfbeam/scorer.hpp"

namespace ltlfbeam {

struct OracleResult {
  /// Lexicographically first sequence of minimum negative log-likelihood
  /// among the accepted ones.
  std::optional<std::vector<OutputId>> best;
  double best_nll = std::numeric_limits<double>::infinity();
  std::size_t feasible_count = 0;
  std::size_t enumerated = 0;
};

struct OracleOptions {
  std::size_t cap = 1'000'000;
  /// When set, every verdict is re-checked by evaluating this formula on
  /// ν(sequence); a disagreement raises InternalError.
  std::optional<Formula> formula;
  std::vector<OutputId> prompt;
};

/// Exhaustive constrained MAP over all output sequences of exactly
/// `horizon` outputs (the stop output gets no special treatment). Throws
/// BudgetExceededError if |X|^horizon exceeds the cap.
OracleResult brute_force_map(Scorer& scorer, const Guide& guide, std::size_t horizon, const OracleOptions& options = {});

/// Necessary condition for a solution within `horizon` outputs:
/// distance(initial) <= horizon.
bool feasible(const Dfa& dfa, std::size_t horizon);

/// Exact: some sequence of exactly `horizon` outputs is accepted.
bool feasible_exact(const Guide& guide, std::size_t horizon);

}  // namespace ltlfbeam
