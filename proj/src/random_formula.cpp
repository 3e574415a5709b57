#include "ltlfbeam/random_formula.hpp"

#include <random>
#include <stdexcept>

namespace ltlfbeam {

namespace {

// Raw engine output only: std distributions differ between standard libraries.
class Draw {
 public:
  explicit Draw(std::uint64_t seed) : rng_(seed) {}
  std::uint64_t below(std::uint64_t n) { return rng_() % n; }

 private:
  std::mt19937_64 rng_;
};

Formula leaf(Draw& draw, const std::vector<std::string>& alphabet) {
  const auto pick = draw.below(alphabet.size() * 8 + 1);
  if (pick == 0 || alphabet.empty()) return Formula::top();
  return Formula::atom(alphabet[(pick - 1) % alphabet.size()]);
}

Formula grow(int depth, Draw& draw, const std::vector<std::string>& alphabet) {
  if (depth <= 0 || draw.below(5) == 0) return leaf(draw, alphabet);
  static constexpr Op kOps[] = {Op::Not,     Op::And,   Op::Or,         Op::Next,  Op::WeakNext,
                                Op::Until,   Op::Release, Op::Eventually, Op::Always};
  const Op op = kOps[draw.below(std::size(kOps))];
  auto sub = [&] { return grow(depth - 1, draw, alphabet); };
  switch (op) {
    case Op::Not: return Formula::negation(sub());
    case Op::Next: return Formula::next(sub());
    case Op::WeakNext: return Formula::weak_next(sub());
    case Op::Eventually: return Formula::eventually(sub());
    case Op::Always: return Formula::always(sub());
    default: break;
  }
  Formula lhs = sub();
  Formula rhs = sub();
  switch (op) {
    case Op::And: return Formula::conjunction(lhs, rhs);
    case Op::Or: return Formula::disjunction(lhs, rhs);
    case Op::Until: return Formula::until(lhs, rhs);
    default: return Formula::release(lhs, rhs);
  }
}

}  // namespace

Formula random_formula(int depth, const std::vector<std::string>& alphabet, std::uint64_t seed) {
  if (depth < 0) throw std::invalid_argument("depth must be non-negative");
  Draw draw(seed);
  return grow(depth, draw, alphabet);
}

}  // namespace ltlfbeam
