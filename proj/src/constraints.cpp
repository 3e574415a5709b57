#include "ltlfbeam/constraints.hpp"

#include "ltlfbeam/errors.hpp"
#include "ltlfbeam/parser.hpp"

namespace ltlfbeam {

namespace {

void check_words(const std::vector<std::string>& words) {
  if (words.empty()) throw InvalidInputError("at least one concept is required");
  for (const auto& w : words) {
    if (!is_valid_atom_name(w)) throw InvalidInputError("invalid concept name '" + w + "'");
  }
}

}  // namespace

std::vector<Formula> ordered_conjuncts(const std::vector<std::string>& words) {
  check_words(words);
  using F = Formula;
  const F dot = F::atom("dot");
  const F eos = F::atom("eos");
  std::vector<F> out;
  for (std::size_t i = 0; i + 1 < words.size(); ++i) {
    const F later = F::atom(words[i + 1]);
    out.push_back(F::conjunction(F::until(F::negation(F::disjunction(later, dot)), F::atom(words[i])),
                                 F::eventually(later)));
  }
  out.push_back(F::conjunction(F::until(F::negation(F::disjunction(eos, dot)), F::atom(words.back())),
                               F::eventually(eos)));
  out.push_back(F::always(F::implication(dot, F::next(eos))));
  std::vector<F> allowed;
  for (const auto& w : words) allowed.push_back(F::atom(w));
  allowed.push_back(dot);
  allowed.push_back(eos);
  allowed.push_back(F::atom("noMatch"));
  out.push_back(F::always(F::disjunction(allowed)));
  return out;
}

Formula ordered_constraint(const std::vector<std::string>& words) {
  return Formula::conjunction(ordered_conjuncts(words));
}

std::vector<Formula> unordered_conjuncts(const std::vector<std::string>& concepts) {
  check_words(concepts);
  using F = Formula;
  const F eos = F::atom("eos");
  std::vector<F> out;
  for (const auto& c : concepts) {
    out.push_back(F::conjunction(F::until(F::negation(eos), F::atom(c)), F::eventually(F::atom(c))));
  }
  out.push_back(F::eventually(eos));
  return out;
}

Formula unordered_constraint(const std::vector<std::string>& concepts) {
  return Formula::conjunction(unordered_conjuncts(concepts));
}

std::vector<std::string> read_formula_lines(std::istream& in) {
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    out.push_back(line.substr(first));
  }
  return out;
}

}  // namespace ltlfbeam
