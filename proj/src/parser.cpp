#include "ltlfbeam/parser.hpp"

#include <algorithm>
#include <cctype>
#include <optional>

#include "ltlfbeam/errors.hpp"

namespace ltlfbeam {

namespace {

enum class Tok {
  End,
  LParen,
  RParen,
  Not,
  And,
  Or,
  Implies,
  Next,
  WeakNext,
  Eventually,
  Always,
  Until,
  Release,
  True,
  False,
  Atom,
};

struct Token {
  Tok kind;
  std::size_t offset;
  std::string text;
};

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

class Lexer {
 public:
  explicit Lexer(std::string_view text) : text_(text) {}

  Token next() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    const std::size_t start = pos_;
    if (pos_ >= text_.size()) return {Tok::End, start, {}};

    struct Symbol {
      std::string_view spelling;
      Tok kind;
    };
    // Longest spellings first.
    static constexpr Symbol kSymbols[] = {
        {"->", Tok::Implies}, {"=>", Tok::Implies}, {"&&", Tok::And}, {"||", Tok::Or},
        {"\xE2\x86\x92", Tok::Implies},  // →
        {"\xE2\x88\xA7", Tok::And},      // ∧
        {"\xE2\x88\xA8", Tok::Or},       // ∨
        {"\xC2\xAC", Tok::Not},          // ¬
        {"\xE2\x8A\xA4", Tok::True},     // ⊤
        {"\xE2\x8A\xA5", Tok::False},    // ⊥
        {"(", Tok::LParen}, {")", Tok::RParen}, {"!", Tok::Not}, {"~", Tok::Not},
        {"&", Tok::And},    {"|", Tok::Or},
    };
    for (const auto& s : kSymbols) {
      if (text_.substr(pos_, s.spelling.size()) == s.spelling) {
        pos_ += s.spelling.size();
        return {s.kind, start, std::string(s.spelling)};
      }
    }

    if (!is_ident_start(text_[pos_])) throw ParseError("unexpected character '" + std::string(1, text_[pos_]) + "'", start);
    while (pos_ < text_.size() && is_ident_char(text_[pos_])) ++pos_;
    std::string word(text_.substr(start, pos_ - start));
    if (word == "X") return {Tok::Next, start, word};
    if (word == "WX") return {Tok::WeakNext, start, word};
    if (word == "F") return {Tok::Eventually, start, word};
    if (word == "G") return {Tok::Always, start, word};
    if (word == "U") return {Tok::Until, start, word};
    if (word == "R") return {Tok::Release, start, word};
    if (word == "true") return {Tok::True, start, word};
    if (word == "false") return {Tok::False, start, word};
    if (!is_valid_atom_name(word)) throw ParseError("unknown operator '" + word + "'", start);
    return {Tok::Atom, start, word};
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
};

class Parser {
 public:
  Parser(std::string_view text, const std::vector<std::string>* alphabet) : lexer_(text), alphabet_(alphabet) {
    advance();
  }

  Formula parse() {
    Formula f = implication();
    if (cur_.kind != Tok::End) throw ParseError("unexpected '" + cur_.text + "'", cur_.offset);
    return f;
  }

 private:
  void advance() { cur_ = lexer_.next(); }

  Formula implication() {
    Formula lhs = disjunction();
    if (cur_.kind == Tok::Implies) {
      advance();
      return Formula::implication(lhs, implication());
    }
    return lhs;
  }

  Formula disjunction() {
    Formula acc = conjunction();
    while (cur_.kind == Tok::Or) {
      advance();
      acc = Formula::disjunction(acc, conjunction());
    }
    return acc;
  }

  Formula conjunction() {
    Formula acc = binary_temporal();
    while (cur_.kind == Tok::And) {
      advance();
      acc = Formula::conjunction(acc, binary_temporal());
    }
    return acc;
  }

  Formula binary_temporal() {
    Formula lhs = unary();
    if (cur_.kind == Tok::Until) {
      advance();
      return Formula::until(lhs, binary_temporal());
    }
    if (cur_.kind == Tok::Release) {
      advance();
      return Formula::release(lhs, binary_temporal());
    }
    return lhs;
  }

  Formula unary() {
    switch (cur_.kind) {
      case Tok::Not: advance(); return Formula::negation(unary());
      case Tok::Next: advance(); return Formula::next(unary());
      case Tok::WeakNext: advance(); return Formula::weak_next(unary());
      case Tok::Eventually: advance(); return Formula::eventually(unary());
      case Tok::Always: advance(); return Formula::always(unary());
      default: return primary();
    }
  }

  Formula primary() {
    switch (cur_.kind) {
      case Tok::True: advance(); return Formula::top();
      case Tok::False: advance(); return Formula::bottom();
      case Tok::Atom: {
        std::string name = cur_.text;
        if (alphabet_ && std::find(alphabet_->begin(), alphabet_->end(), name) == alphabet_->end()) {
          throw UndeclaredAtomError(name);
        }
        advance();
        return Formula::atom(std::move(name));
      }
      case Tok::LParen: {
        advance();
        Formula inner = implication();
        if (cur_.kind != Tok::RParen) throw ParseError("expected ')'", cur_.offset);
        advance();
        return inner;
      }
      case Tok::End: throw ParseError("unexpected end of input", cur_.offset);
      default: throw ParseError("unexpected '" + cur_.text + "'", cur_.offset);
    }
  }

  Lexer lexer_;
  const std::vector<std::string>* alphabet_;
  Token cur_{Tok::End, 0, {}};
};

}  // namespace

bool is_valid_atom_name(std::string_view name) {
  if (name.empty()) return false;
  const char c0 = name.front();
  if (!(std::islower(static_cast<unsigned char>(c0)) || c0 == '_')) return false;
  if (name == "true" || name == "false") return false;
  return std::all_of(name.begin(), name.end(), is_ident_char);
}

Formula parse_formula(std::string_view text, const std::vector<std::string>& alphabet) {
  return Parser(text, &alphabet).parse();
}

Formula parse_formula(std::string_view text) { return Parser(text, nullptr).parse(); }

}  // namespace ltlfbeam
