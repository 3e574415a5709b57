#include "ltlfbeam/trace.hpp"

#include <algorithm>

#include <json.hpp>

#include "ltlfbeam/errors.hpp"

namespace ltlfbeam {

namespace {

void canonicalize(Trace::Symbol& s) {
  std::sort(s.begin(), s.end());
  s.erase(std::unique(s.begin(), s.end()), s.end());
}

}  // namespace

Trace::Trace(std::vector<Symbol> symbols) : symbols_(std::move(symbols)) {
  for (auto& s : symbols_) canonicalize(s);
}

Trace Trace::one_hot(const std::vector<std::string>& names) {
  std::vector<Symbol> symbols;
  symbols.reserve(names.size());
  for (const auto& n : names) symbols.push_back({n});
  return Trace(std::move(symbols));
}

bool Trace::holds(std::string_view atom, std::size_t t) const {
  const auto& s = symbols_.at(t);
  return std::binary_search(s.begin(), s.end(), atom, [](const auto& a, const auto& b) {
    return std::string_view(a) < std::string_view(b);
  });
}

bool eval_trace(const Formula& f, const Trace& w, std::size_t t) {
  const std::size_t n = w.length();
  if (t >= n) return false;
  switch (f.op()) {
    case Op::True: return true;
    case Op::Atom: return w.holds(f.name(), t);
    case Op::Not: return !eval_trace(f.child(0), w, t);
    case Op::And: return eval_trace(f.lhs(), w, t) && eval_trace(f.rhs(), w, t);
    case Op::Or: return eval_trace(f.lhs(), w, t) || eval_trace(f.rhs(), w, t);
    case Op::Next: return t + 1 < n && eval_trace(f.child(0), w, t + 1);
    case Op::WeakNext: return t + 1 >= n || eval_trace(f.child(0), w, t + 1);
    case Op::Until:
      // exists j in [t, n) with rhs at j and lhs on [t, j)
      for (std::size_t j = t; j < n; ++j) {
        if (eval_trace(f.rhs(), w, j)) return true;
        if (!eval_trace(f.lhs(), w, j)) return false;
      }
      return false;
    case Op::Release:
      // for all j in [t, n): rhs at j, unless lhs held somewhere in [t, j)
      for (std::size_t j = t; j < n; ++j) {
        if (!eval_trace(f.rhs(), w, j)) return false;
        if (eval_trace(f.lhs(), w, j)) return true;
      }
      return true;
    case Op::Eventually:
      for (std::size_t j = t; j < n; ++j) {
        if (eval_trace(f.child(0), w, j)) return true;
      }
      return false;
    case Op::Always:
      for (std::size_t j = t; j < n; ++j) {
        if (!eval_trace(f.child(0), w, j)) return false;
      }
      return true;
  }
  return false;
}

Trace parse_trace_line(std::string_view line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidInputError(std::string("malformed trace line: ") + e.what());
  }
  if (!j.is_array()) throw InvalidInputError("trace line must be a JSON array");
  std::vector<Trace::Symbol> symbols;
  for (const auto& step : j) {
    if (!step.is_array()) throw InvalidInputError("trace step must be an array of strings");
    Trace::Symbol s;
    for (const auto& a : step) {
      if (!a.is_string()) throw InvalidInputError("trace atom must be a string");
      s.push_back(a.get<std::string>());
    }
    symbols.push_back(std::move(s));
  }
  return Trace(std::move(symbols));
}

std::string format_trace_line(const Trace& w) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& s : w.symbols()) j.push_back(s);
  return j.dump();
}

}  // namespace ltlfbeam
