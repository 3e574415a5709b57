#include "ltlfbeam/compiler.hpp"

#include <algorithm>
#include <deque>
#include <optional>
#include <set>
#include <tuple>
#include <unordered_map>

#include "ltlfbeam/errors.hpp"
#include "ltlfbeam/parser.hpp"

namespace ltlfbeam {

namespace {

using TermId = std::uint32_t;
using Cube = std::vector<TermId>;
using Dnf = std::vector<Cube>;

// Negation normal form over one-hot symbols. Alive and End are auxiliary
// leaves meaning "the remaining suffix is non-empty" and "... is empty".
enum class Kind : std::uint8_t { True, False, Lit, NegLit, Next, WeakNext, Until, Release, And, Or, Alive, End };

struct Term {
  Kind kind;
  std::uint32_t atom;
  std::vector<TermId> kids;
  bool nullable;
};

// A state's residual is read against the rest of the trace u. A term
// leaf holds on u if u is non-empty and satisfies it, or if u is empty and
// the term is nullable.
class Progression {
 public:
  explicit Progression(std::size_t num_symbols) : num_symbols_(num_symbols) {
    true_ = intern(Kind::True, 0, {});
    false_ = intern(Kind::False, 0, {});
    alive_ = intern(Kind::Alive, 0, {});
    end_ = intern(Kind::End, 0, {});
  }

  TermId nnf(const Formula& f, bool neg, const std::vector<std::string>& symbols) {
    auto sub = [&](std::size_t i, bool n) { return nnf(f.child(i), n, symbols); };
    switch (f.op()) {
      case Op::True: return neg ? false_ : true_;
      case Op::Atom: {
        const auto it = std::find(symbols.begin(), symbols.end(), f.name());
        const auto idx = static_cast<std::uint32_t>(it - symbols.begin());
        return intern(neg ? Kind::NegLit : Kind::Lit, idx, {});
      }
      case Op::Not: return sub(0, !neg);
      case Op::And: return neg ? disj({sub(0, true), sub(1, true)}) : conj({sub(0, false), sub(1, false)});
      case Op::Or: return neg ? conj({sub(0, true), sub(1, true)}) : disj({sub(0, false), sub(1, false)});
      case Op::Next: return intern(neg ? Kind::WeakNext : Kind::Next, 0, {sub(0, neg)});
      case Op::WeakNext: return intern(neg ? Kind::Next : Kind::WeakNext, 0, {sub(0, neg)});
      case Op::Until: return intern(neg ? Kind::Release : Kind::Until, 0, {sub(0, neg), sub(1, neg)});
      case Op::Release: return intern(neg ? Kind::Until : Kind::Release, 0, {sub(0, neg), sub(1, neg)});
      case Op::Eventually:
        return neg ? intern(Kind::Release, 0, {false_, sub(0, true)}) : intern(Kind::Until, 0, {true_, sub(0, false)});
      case Op::Always:
        return neg ? intern(Kind::Until, 0, {true_, sub(0, true)}) : intern(Kind::Release, 0, {false_, sub(0, false)});
    }
    throw InternalError("unhandled operator");
  }

  Dnf to_dnf(TermId t) {
    const Term& term = terms_[t];
    switch (term.kind) {
      case Kind::True: return {{}};
      case Kind::False: return {};
      case Kind::And: {
        Dnf acc{{}};
        const auto kids = term.kids;
        for (TermId k : kids) acc = product(acc, to_dnf(k));
        return acc;
      }
      case Kind::Or: {
        Dnf acc;
        const auto kids = term.kids;
        for (TermId k : kids) acc = unite(acc, to_dnf(k));
        return acc;
      }
      default: return normalize({{t}});
    }
  }

  bool nullable(const Dnf& d) const {
    return std::any_of(d.begin(), d.end(), [&](const Cube& c) {
      return std::all_of(c.begin(), c.end(), [&](TermId t) { return terms_[t].nullable; });
    });
  }

  Dnf derive(const Dnf& state, std::uint32_t symbol) {
    Dnf out;
    for (const Cube& cube : state) {
      Dnf acc{{}};
      for (TermId leaf : cube) {
        acc = product(acc, derive_term(leaf, symbol));
        if (acc.empty()) break;
      }
      out.insert(out.end(), acc.begin(), acc.end());
    }
    return normalize(std::move(out));
  }

 private:
  TermId intern(Kind kind, std::uint32_t atom, std::vector<TermId> kids) {
    auto key = std::make_tuple(kind, atom, kids);
    if (auto it = index_.find(key); it != index_.end()) return it->second;
    bool nullable = false;
    switch (kind) {
      case Kind::True:
      case Kind::End:
      case Kind::WeakNext:
        nullable = true;
        break;
      case Kind::Until:
      case Kind::Release:
        nullable = terms_[kids[1]].nullable;
        break;
      case Kind::And:
        nullable = std::all_of(kids.begin(), kids.end(), [&](TermId k) { return terms_[k].nullable; });
        break;
      case Kind::Or:
        nullable = std::any_of(kids.begin(), kids.end(), [&](TermId k) { return terms_[k].nullable; });
        break;
      default:
        break;
    }
    const auto id = static_cast<TermId>(terms_.size());
    terms_.push_back({kind, atom, kids, nullable});
    index_.emplace(std::move(key), id);
    return id;
  }

  TermId junction(Kind kind, std::vector<TermId> parts) {
    const TermId unit = kind == Kind::And ? true_ : false_;
    const TermId zero = kind == Kind::And ? false_ : true_;
    std::vector<TermId> flat;
    for (TermId p : parts) {
      if (p == zero) return zero;
      if (p == unit) continue;
      if (terms_[p].kind == kind) {
        flat.insert(flat.end(), terms_[p].kids.begin(), terms_[p].kids.end());
      } else {
        flat.push_back(p);
      }
    }
    std::sort(flat.begin(), flat.end());
    flat.erase(std::unique(flat.begin(), flat.end()), flat.end());
    if (flat.empty()) return unit;
    if (flat.size() == 1) return flat[0];
    return intern(kind, 0, std::move(flat));
  }
  TermId conj(std::vector<TermId> parts) { return junction(Kind::And, std::move(parts)); }
  TermId disj(std::vector<TermId> parts) { return junction(Kind::Or, std::move(parts)); }

  std::optional<Cube> simplify(Cube cube) const {
    std::sort(cube.begin(), cube.end());
    cube.erase(std::unique(cube.begin(), cube.end()), cube.end());
    std::optional<std::uint32_t> positive;
    std::set<std::uint32_t> negative;
    bool alive = false;
    bool end = false;
    bool strict = false;  // some leaf other than Alive needs a non-empty suffix
    for (TermId t : cube) {
      const Term& term = terms_[t];
      if (term.kind == Kind::Lit) {
        if (positive && *positive != term.atom) return std::nullopt;
        positive = term.atom;
      } else if (term.kind == Kind::NegLit) {
        negative.insert(term.atom);
      } else if (term.kind == Kind::Alive) {
        alive = true;
        continue;
      } else if (term.kind == Kind::End) {
        end = true;
      }
      if (!term.nullable) strict = true;
    }
    if (end && (strict || alive)) return std::nullopt;
    if (positive && negative.count(*positive)) return std::nullopt;
    if (negative.size() == num_symbols_) return std::nullopt;
    Cube out;
    for (TermId t : cube) {
      const Term& term = terms_[t];
      if (term.kind == Kind::Alive && strict) continue;
      if (term.kind == Kind::NegLit && positive) continue;
      out.push_back(t);
    }
    return out;
  }

  Dnf normalize(Dnf d) const {
    Dnf cubes;
    for (Cube& c : d) {
      if (auto s = simplify(std::move(c))) cubes.push_back(std::move(*s));
    }
    std::sort(cubes.begin(), cubes.end(), [](const Cube& a, const Cube& b) {
      return a.size() != b.size() ? a.size() < b.size() : a < b;
    });
    cubes.erase(std::unique(cubes.begin(), cubes.end()), cubes.end());
    Dnf kept;
    for (Cube& c : cubes) {
      const bool absorbed = std::any_of(kept.begin(), kept.end(), [&](const Cube& k) {
        return std::includes(c.begin(), c.end(), k.begin(), k.end());
      });
      if (!absorbed) kept.push_back(std::move(c));
    }
    std::sort(kept.begin(), kept.end());
    return kept;
  }

  Dnf product(const Dnf& a, const Dnf& b) const {
    Dnf out;
    for (const Cube& x : a) {
      for (const Cube& y : b) {
        Cube c = x;
        c.insert(c.end(), y.begin(), y.end());
        out.push_back(std::move(c));
      }
    }
    return normalize(std::move(out));
  }

  Dnf unite(Dnf a, const Dnf& b) const {
    a.insert(a.end(), b.begin(), b.end());
    return normalize(std::move(a));
  }

  Dnf derive_term(TermId t, std::uint32_t symbol) {
    const std::uint64_t key = static_cast<std::uint64_t>(t) * num_symbols_ + symbol;
    if (auto it = derivatives_.find(key); it != derivatives_.end()) return it->second;
    const Term term = terms_[t];
    Dnf out;
    switch (term.kind) {
      case Kind::True:
      case Kind::Alive:
        out = {{}};
        break;
      case Kind::False:
      case Kind::End:
        break;
      case Kind::Lit:
        if (term.atom == symbol) out = {{}};
        break;
      case Kind::NegLit:
        if (term.atom != symbol) out = {{}};
        break;
      case Kind::And:
        out = {{}};
        for (TermId k : term.kids) out = product(out, derive_term(k, symbol));
        break;
      case Kind::Or:
        for (TermId k : term.kids) out = unite(std::move(out), derive_term(k, symbol));
        break;
      case Kind::Next:
        out = to_dnf(term.kids[0]);
        if (terms_[term.kids[0]].nullable) out = product(out, {{alive_}});
        break;
      case Kind::WeakNext:
        out = to_dnf(term.kids[0]);
        if (!terms_[term.kids[0]].nullable) out = unite(std::move(out), {{end_}});
        break;
      case Kind::Until: {
        Cube again{t};
        if (term.nullable) again.push_back(alive_);
        out = unite(derive_term(term.kids[1], symbol), product(derive_term(term.kids[0], symbol), {again}));
        break;
      }
      case Kind::Release: {
        Dnf stop = derive_term(term.kids[0], symbol);
        stop = unite(std::move(stop), term.nullable ? Dnf{{t}} : Dnf{{t}, {end_}});
        out = product(derive_term(term.kids[1], symbol), stop);
        break;
      }
    }
    derivatives_.emplace(key, out);
    return out;
  }

  std::size_t num_symbols_;
  std::vector<Term> terms_;
  std::map<std::tuple<Kind, std::uint32_t, std::vector<TermId>>, TermId> index_;
  std::unordered_map<std::uint64_t, Dnf> derivatives_;
  TermId true_, false_, alive_, end_;
};

}  // namespace

Dfa compile(const Formula& phi, const std::vector<std::string>& concepts, const std::map<std::string, Cost>& costs,
            const CompileOptions& options) {
  std::vector<std::string> symbols;
  std::set<std::string> seen;
  for (const auto& c : concepts) {
    if (!is_valid_atom_name(c)) throw InvalidInputError("invalid concept name '" + c + "'");
    if (!seen.insert(c).second) throw InvalidInputError("duplicate concept '" + c + "'");
    if (c != kNoMatch) symbols.push_back(c);
  }
  symbols.emplace_back(kNoMatch);
  for (const auto& a : phi.atoms()) {
    if (std::find(symbols.begin(), symbols.end(), a) == symbols.end()) throw UndeclaredAtomError(a);
  }
  std::vector<Cost> cost(symbols.size(), 1);
  for (const auto& [name, c] : costs) {
    const auto it = std::find(symbols.begin(), symbols.end(), name);
    if (it == symbols.end()) throw UnknownConceptError("cost given for unknown concept '" + name + "'");
    cost[it - symbols.begin()] = c;
  }

  const auto m = static_cast<std::uint32_t>(symbols.size());
  Progression prog(m);
  std::map<Dnf, StateId> ids;
  std::vector<const Dnf*> states;
  std::vector<StateId> delta;
  auto lookup = [&](Dnf d) {
    auto [it, fresh] = ids.emplace(std::move(d), static_cast<StateId>(states.size()));
    if (fresh) {
      if (states.size() >= options.state_cap) {
        throw BudgetExceededError("automaton exceeds the cap of " + std::to_string(options.state_cap) + " states");
      }
      states.push_back(&it->first);
    }
    return it->second;
  };

  lookup(prog.to_dnf(prog.nnf(phi, false, symbols)));
  for (std::size_t q = 0; q < states.size(); ++q) {
    for (std::uint32_t s = 0; s < m; ++s) delta.push_back(lookup(prog.derive(*states[q], s)));
  }
  std::vector<bool> accepting(states.size());
  for (std::size_t q = 0; q < states.size(); ++q) accepting[q] = prog.nullable(*states[q]);

  Dfa raw(std::move(symbols), 0, std::move(accepting), std::move(delta), std::move(cost));
  return annotate(options.minimize ? minimize(raw) : canonical_order(raw));
}

}  // namespace ltlfbeam
