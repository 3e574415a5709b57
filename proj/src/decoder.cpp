#include "ltlfbeam/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "ltlfbeam/errors.hpp"

namespace ltlfbeam {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct Candidate {
  double score;
  double natural;
  std::uint32_t beam;
  OutputId output;  // unused for finished beams
  Config next;
  bool finished;
  std::uint64_t jitter;
};

struct Group {
  std::vector<OutputId> prompt;
  std::vector<Beam> beams;
};

void check_invariant(const Guide& guide, const Beam& b, std::size_t remaining, DecodeStats* stats) {
  if (b.finished) return;
  const Cost need = guide.min_outputs(b.config);
  if (need == kInfinity || need > static_cast<Cost>(remaining)) {
    throw InternalError("beam needs " + (need == kInfinity ? std::string("infinitely many") : std::to_string(need)) +
                        " outputs with " + std::to_string(remaining) + " left");
  }
  if (b.config.match.empty() && guide.dfa().distance(b.config.state) > static_cast<Cost>(remaining)) {
    throw InternalError("beam state distance exceeds the remaining horizon");
  }
  if (stats) stats->worst_slack = std::max<std::int64_t>(stats->worst_slack, need - static_cast<Cost>(remaining));
}

}  // namespace

void DecodeConfig::validate() const {
  if (beams == 0) throw InvalidInputError("beam count must be positive");
  if (horizon == 0) throw InvalidInputError("horizon must be positive");
  if (!(alpha_min >= 0 && alpha_min <= 1)) throw InvalidInputError("alpha_min must lie in [0, 1]");
  if (!(gamma > 0)) throw InvalidInputError("gamma must be positive");
  if (!(epsilon >= 0 && epsilon < 0.5)) throw InvalidInputError("epsilon must lie in [0, 0.5)");
}

nlohmann::ordered_json DecodeConfig::to_json() const {
  nlohmann::ordered_json j;
  j["beams"] = beams;
  j["horizon"] = horizon;
  j["alpha_min"] = alpha_min;
  j["gamma"] = gamma;
  j["epsilon"] = epsilon;
  j["seed"] = seed;
  j["tie_jitter"] = tie_jitter;
  j["prompt_advances_dfa"] = prompt_advances_dfa;
  return j;
}

double ramp_push_up(double alpha_min, Cost d, std::size_t remaining, double gamma) {
  if (remaining == 0 || d == kInfinity) return 1.0;
  const double ratio = static_cast<double>(d) / static_cast<double>(remaining);
  return alpha_min + (1.0 - alpha_min) * std::min(1.0, std::pow(ratio, gamma));
}

std::vector<double> push_up_row(const std::vector<double>& row, const std::vector<Push>& kinds, double alpha,
                                double epsilon) {
  double top = kNegInf;
  for (std::size_t x = 0; x < row.size(); ++x) {
    if (kinds[x] != Push::Pruned) top = std::max(top, row[x]);
  }
  const double slope_complete = 1.0 - alpha + 2.0 * alpha * epsilon;
  const double slope_quasi = 1.0 - alpha + alpha * epsilon;
  std::vector<double> out(row.size());
  for (std::size_t x = 0; x < row.size(); ++x) {
    const double z = row[x];
    switch (kinds[x]) {
      case Push::Pruned: out[x] = kNegInf; break;
      case Push::None: out[x] = z; break;
      // 0 * -inf must not turn a hard zero into NaN
      case Push::Quasi: out[x] = std::isfinite(z) ? alpha * top + slope_quasi * z : z; break;
      case Push::Complete: out[x] = std::isfinite(z) ? alpha * top + slope_complete * z : z; break;
    }
  }
  return out;
}

std::vector<DecodeResult> decode_batch(Scorer& scorer, const Guide& guide, const std::vector<std::vector<OutputId>>& prompts,
                                       const DecodeConfig& cfg, DecodeStats* stats) {
  cfg.validate();
  if (scorer.vocab_size() != guide.vocab_size()) {
    throw InvalidInputError("scorer vocabulary (" + std::to_string(scorer.vocab_size()) +
                            ") differs from the concept table vocabulary (" + std::to_string(guide.vocab_size()) + ")");
  }
  const std::size_t T = cfg.horizon;
  const std::size_t V = guide.vocab_size();
  const Dfa& dfa = guide.dfa();
  const FeasibilityTable feas = guide.feasibility(T);
  std::mt19937_64 rng(cfg.seed);

  std::vector<Group> groups;
  for (const auto& prompt : prompts) {
    Beam start;
    start.config = cfg.prompt_advances_dfa ? guide.run(guide.initial(), prompt) : guide.initial();
    if (!guide.feasible(feas, T, start.config)) {
      const Cost d0 = guide.min_outputs(start.config);
      throw InfeasibleError("no satisfying sequence of exactly " + std::to_string(T) + " outputs (shortest needs " +
                            (d0 == kInfinity ? std::string("infinity") : std::to_string(d0)) + ")");
    }
    groups.push_back({prompt, {std::move(start)}});
  }

  std::vector<Prefix> prefixes;
  std::vector<Config> next(V);
  std::vector<Push> kinds(V);
  const bool jitter = cfg.tie_jitter;
  std::vector<Candidate> cands;
  std::vector<std::size_t> order;

  for (std::size_t t = 0; t < T; ++t) {
    const std::size_t remaining = T - t;
    prefixes.clear();
    for (std::size_t g = 0; g < groups.size(); ++g) {
      for (std::size_t i = 0; i < groups[g].beams.size(); ++i) {
        const Beam& b = groups[g].beams[i];
        if (b.copy_of || b.finished) continue;
        Prefix p = groups[g].prompt;
        p.insert(p.end(), b.outputs.begin(), b.outputs.end());
        prefixes.push_back(std::move(p));
      }
    }
    LogProbMatrix rows;
    if (!prefixes.empty()) {
      if (scorer.exclusive()) {
        std::lock_guard lock(scorer.call_mutex());
        rows = scorer.score(prefixes);
      } else {
        rows = scorer.score(prefixes);
      }
      if (stats) ++stats->scorer_calls;
      if (rows.size() != prefixes.size()) throw ScorerError("scorer returned the wrong number of rows");
    }

    std::size_t row_index = 0;
    for (std::size_t g = 0; g < groups.size(); ++g) {
      auto& beams = groups[g].beams;
      cands.clear();
      for (std::size_t i = 0; i < beams.size(); ++i) {
        const Beam& b = beams[i];
        if (b.copy_of) continue;
        const auto bi = static_cast<std::uint32_t>(i);
        if (b.finished) {
          cands.push_back({b.score, b.natural_loglik, bi, 0, b.config, true, jitter ? rng() : 0});
          continue;
        }
        const auto& row = rows[row_index];
        ++row_index;
        if (row.size() != V) throw ScorerError("scorer row width differs from the vocabulary");

        const Cost d_i = dfa.distance(b.config.state);
        const double alpha = ramp_push_up(cfg.alpha_min, d_i, remaining, cfg.gamma);
        for (OutputId x = 0; x < V; ++x) {
          next[x] = guide.next_state(b.config, x);
          const bool ok = (guide.stop() && x == *guide.stop()) ? guide.terminal(next[x])
                                                               : feas.ok(remaining - 1, guide.index(next[x]));
          if (!ok) {
            kinds[x] = Push::Pruned;
          } else if (dfa.distance(next[x].state) < d_i) {
            kinds[x] = Push::Complete;
          } else if (auto q = guide.best_quasi_next_state(b.config, x); q && dfa.distance(*q) < d_i) {
            kinds[x] = Push::Quasi;
          } else {
            kinds[x] = Push::None;
          }
        }
        const std::vector<double> z = push_up_row(row, kinds, alpha, cfg.epsilon);
        for (OutputId x = 0; x < V; ++x) {
          if (stats) {
            stats->pruned += kinds[x] == Push::Pruned;
            stats->boosted_complete += kinds[x] == Push::Complete && std::isfinite(row[x]);
            stats->boosted_quasi += kinds[x] == Push::Quasi && std::isfinite(row[x]);
          }
          if (kinds[x] == Push::Pruned) continue;
          const bool done = guide.stop() && x == *guide.stop();
          cands.push_back({b.score + z[x], b.natural_loglik + row[x], bi, x, next[x], done, jitter ? rng() : 0});
        }
      }
      if (stats) stats->candidates += cands.size();
      if (cands.empty()) throw InternalError("every continuation was pruned at step " + std::to_string(t));

      const std::size_t k = std::min(cfg.beams, cands.size());
      order.resize(cands.size());
      std::iota(order.begin(), order.end(), 0);
      std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                        [&](std::size_t a, std::size_t b) {
                          const Candidate& x = cands[a];
                          const Candidate& y = cands[b];
                          if (x.score != y.score) return x.score > y.score;
                          if (jitter && x.jitter != y.jitter) return x.jitter < y.jitter;
                          if (x.beam != y.beam) return x.beam < y.beam;
                          return x.output < y.output;
                        });

      std::vector<Beam> fresh;
      fresh.reserve(cfg.beams);
      for (std::size_t r = 0; r < k; ++r) {
        const Candidate& c = cands[order[r]];
        const Beam& parent = beams[c.beam];
        Beam nb;
        nb.outputs = parent.outputs;
        nb.score = c.score;
        nb.natural_loglik = c.natural;
        nb.config = c.next;
        if (parent.finished) {
          nb.finished = true;
        } else {
          nb.outputs.push_back(c.output);
          nb.finished = c.finished;
        }
        check_invariant(guide, nb, remaining - 1, stats);
        fresh.push_back(std::move(nb));
      }
      for (std::size_t j = 0; fresh.size() < cfg.beams; ++j) {
        Beam copy = fresh[j % k];
        copy.copy_of = j % k;
        fresh.push_back(std::move(copy));
        if (stats) ++stats->padded;
      }
      beams = std::move(fresh);
    }
    if (stats) ++stats->steps;
  }

  std::vector<DecodeResult> results;
  for (auto& group : groups) {
    DecodeResult r;
    for (auto& b : group.beams) {
      if (!b.copy_of) r.beams.push_back(std::move(b));
    }
    std::stable_sort(r.beams.begin(), r.beams.end(),
                     [](const Beam& a, const Beam& b) { return a.natural_loglik > b.natural_loglik; });
    r.best = r.beams.front();
    std::vector<OutputId> seen = cfg.prompt_advances_dfa ? group.prompt : std::vector<OutputId>{};
    seen.insert(seen.end(), r.best.outputs.begin(), r.best.outputs.end());
    r.concepts = guide.table().nu(seen);
    std::vector<SymbolId> symbols;
    for (const auto& c : r.concepts) symbols.push_back(dfa.symbol_index(c).value_or(dfa.no_match()));
    r.satisfied = accepts(dfa, symbols);
    r.steps = T;
    results.push_back(std::move(r));
  }
  return results;
}

DecodeResult decode(Scorer& scorer, const Guide& guide, const std::vector<OutputId>& prompt, const DecodeConfig& cfg,
                    DecodeStats* stats) {
  return std::move(decode_batch(scorer, guide, {prompt}, cfg, stats).front());
}

nlohmann::ordered_json result_to_json(const DecodeResult& r) {
  nlohmann::ordered_json j;
  j["outputs"] = r.best.outputs;
  j["concepts"] = r.concepts;
  j["natural_loglik"] = std::isfinite(r.best.natural_loglik) ? nlohmann::ordered_json(r.best.natural_loglik)
                                                             : nlohmann::ordered_json(nullptr);
  j["satisfied"] = r.satisfied;
  j["steps"] = r.steps;
  return j;
}

}  // namespace ltlfbeam
