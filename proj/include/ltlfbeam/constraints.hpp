#pragma once

#include <istream>
#include <string>
#include <vector>

#include "ltlfbeam/formula.hpp"

namespace ltlfbeam {

/// Keywords must appear in the given order, the sentence ends with `dot`
/// followed by `eos`, and every position is a keyword, `dot`, `eos` or
/// `noMatch`. For [w1..wn] the conjuncts are
///   ((!(w_{i+1} | dot) U w_i) & F(w_{i+1}))   for i < n
///   ((!(eos | dot) U w_n) & F(eos))
///   G(dot -> X(eos))
///   G(w1 | ... | wn | dot | eos | noMatch)
/// Throws InvalidInputError on an empty list.
std::vector<Formula> ordered_conjuncts(const std::vector<std::string>& words);
Formula ordered_constraint(const std::vector<std::string>& words);

/// Every concept occurs before `eos`, and `eos` occurs:
///   ((!eos U c) & F(c)) for each c, then F(eos).
std::vector<Formula> unordered_conjuncts(const std::vector<std::string>& concepts);
Formula unordered_constraint(const std::vector<std::string>& concepts);

/// Non-empty lines of a formula file, without `#` comment lines.
std::vector<std::string> read_formula_lines(std::istream& in);

}  // namespace ltlfbeam
