#include "ltlfbeam/oracle.hpp"

#include <cmath>

#include "ltlfbeam/errors.hpp"
#include "ltlfbeam/trace.hpp"

namespace ltlfbeam {

namespace {

struct Search {
  Scorer& scorer;
  const Guide& guide;
  const OracleOptions& options;
  std::size_t horizon;
  OracleResult result;
  std::vector<OutputId> seq;

  void verify(bool accepted) {
    if (!options.formula) return;
    std::vector<std::string> names;
    const Dfa& dfa = guide.dfa();
    for (const auto& c : guide.table().nu(seq)) names.push_back(dfa.symbol_index(c) ? c : std::string(kNoMatch));
    if (names.empty()) return;
    if (eval_trace(*options.formula, Trace::one_hot(names)) != accepted) {
      throw InternalError("automaton and formula disagree on an enumerated sequence");
    }
  }

  void run(Config c, double nll) {
    if (seq.size() == horizon) {
      ++result.enumerated;
      const bool accepted = guide.terminal(c);
      verify(accepted);
      if (!accepted) return;
      ++result.feasible_count;
      if (!result.best || nll < result.best_nll) {
        result.best = seq;
        result.best_nll = nll;
      }
      return;
    }
    std::vector<OutputId> prefix = options.prompt;
    prefix.insert(prefix.end(), seq.begin(), seq.end());
    const auto rows = scorer.score({prefix});
    if (rows.size() != 1 || rows[0].size() != guide.vocab_size()) throw ScorerError("scorer returned a malformed row");
    const auto row = rows[0];
    for (OutputId x = 0; x < guide.vocab_size(); ++x) {
      seq.push_back(x);
      run(guide.next_state(c, x), nll - row[x]);
      seq.pop_back();
    }
  }
};

}  // namespace

OracleResult brute_force_map(Scorer& scorer, const Guide& guide, std::size_t horizon, const OracleOptions& options) {
  if (scorer.vocab_size() != guide.vocab_size()) throw InvalidInputError("scorer and concept table vocabularies differ");
  double total = 1;
  for (std::size_t t = 0; t < horizon; ++t) total *= static_cast<double>(guide.vocab_size());
  if (total > static_cast<double>(options.cap)) {
    throw BudgetExceededError(std::to_string(guide.vocab_size()) + "^" + std::to_string(horizon) +
                              " sequences exceed the cap of " + std::to_string(options.cap));
  }
  Search s{scorer, guide, options, horizon, {}, {}};
  s.run(guide.initial(), 0.0);
  return s.result;
}

bool feasible(const Dfa& dfa, std::size_t horizon) {
  const Cost d = dfa.distance(dfa.initial());
  return d != kInfinity && d <= static_cast<Cost>(horizon);
}

bool feasible_exact(const Guide& guide, std::size_t horizon) {
  return guide.feasible(guide.feasibility(horizon), horizon, guide.initial());
}

}  // namespace ltlfbeam
