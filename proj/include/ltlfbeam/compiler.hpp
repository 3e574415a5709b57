#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "ltlfbeam/dfa.hpp"
#include "ltlfbeam/formula.hpp"

namespace ltlfbeam {

struct CompileOptions {
  /// Upper bound on explored states before BudgetExceededError.
  std::size_t state_cap = 1'000'000;
  bool minimize = true;
};

/// Compile `phi` into an annotated DFA over the one-hot alphabet
/// `concepts` + `noMatch` (appended unless already listed).
///
/// States are residual obligations in disjunctive normal form obtained by
/// progression. A run accepts a non-empty trace exactly when the trace
/// satisfies `phi`; the initial state is accepting iff `phi` holds
/// vacuously at the end of a trace (for example `true` or `G a`).
///
/// Symbols missing from `costs` get cost 1. Throws UndeclaredAtomError if
/// `phi` uses an atom outside the alphabet, InvalidInputError for bad
/// concept names or costs, and BudgetExceededError past the state cap.
Dfa compile(const Formula& phi, const std::vector<std::string>& concepts,
            const std::map<std::string, Cost>& costs = {}, const CompileOptions& options = {});

}  // namespace ltlfbeam
