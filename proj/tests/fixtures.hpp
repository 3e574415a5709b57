#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ltlfbeam/compiler.hpp"
#include "ltlfbeam/concept_table.hpp"
#include "ltlfbeam/dfa.hpp"
#include "ltlfbeam/parser.hpp"
#include "ltlfbeam/scorer.hpp"

namespace fixtures {

using namespace ltlfbeam;

inline const char* kWordFormula =
    "(!eos U cat) & F(cat) & (!eos U politician) & F(politician) & F(eos)";
inline const std::vector<std::string> kWordConcepts{"cat", "politician", "eos"};

// Output ids of the word-level example.
enum Vocab : OutputId { kCat = 0, kPolit = 1, kIci = 2, kAn = 3, kEos = 4, kDog = 5 };

inline ConceptTable word_table() {
  return ConceptTable({{"cat", {kCat}}, {"politician", {kPolit, kIci, kAn}}, {"eos", {kEos}}}, 6);
}

inline Dfa word_dfa() {
  return compile(parse_formula(kWordFormula, {"cat", "politician", "eos", "noMatch"}), kWordConcepts,
                 {{"cat", 1}, {"politician", 3}, {"eos", 1}, {"noMatch", 1}});
}

/// Names s1..s6 of the usual drawing mapped to compiled ids by following edges
/// from the initial state: s1 -cat-> s3, s1 -politician-> s2,
/// s1 -eos-> s4, s3 -politician-> s5, s5 -eos-> s6.
struct WordStates {
  StateId s1, s2, s3, s4, s5, s6;
};

inline WordStates word_states(const Dfa& d) {
  const SymbolId cat = *d.symbol_index("cat");
  const SymbolId pol = *d.symbol_index("politician");
  const SymbolId eos = *d.symbol_index("eos");
  WordStates s{};
  s.s1 = d.initial();
  s.s3 = d.next(s.s1, cat);
  s.s2 = d.next(s.s1, pol);
  s.s4 = d.next(s.s1, eos);
  s.s5 = d.next(s.s3, pol);
  s.s6 = d.next(s.s5, eos);
  return s;
}

inline std::vector<double> normalize(std::vector<double> p) {
  double sum = 0;
  for (double v : p) sum += v;
  for (double& v : p) v /= sum;
  return p;
}

inline MarkovScorer uniform_markov(std::size_t vocab) {
  std::vector<double> row(vocab, 1.0 / static_cast<double>(vocab));
  return MarkovScorer(row, std::vector<std::vector<double>>(vocab, row));
}

/// Dense random chain with entries drawn from (0.05, 1].
inline MarkovScorer random_markov(std::size_t vocab, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  auto row = [&] {
    std::vector<double> r(vocab);
    for (double& v : r) v = u(rng);
    return normalize(r);
  };
  std::vector<std::vector<double>> t;
  const auto init = row();
  for (std::size_t i = 0; i < vocab; ++i) t.push_back(row());
  return MarkovScorer(init, t);
}

/// All words of length n over `alphabet`, lexicographic.
template <class T>
std::vector<std::vector<T>> all_words(const std::vector<T>& alphabet, std::size_t n) {
  std::vector<std::vector<T>> out{{}};
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::vector<T>> next;
    for (const auto& w : out) {
      for (const auto& a : alphabet) {
        auto v = w;
        v.push_back(a);
        next.push_back(std::move(v));
      }
    }
    out = std::move(next);
  }
  return out;
}

}  // namespace fixtures
