#pragma once

// Concrete syntax, loosest binding first:
//
//   impl   := or ( ("->" | "=>" | "→") impl )?
//   or     := and ( ("|" | "||" | "∨") and )*
//   and    := until ( ("&" | "&&" | "∧") until )*
//   until  := unary ( ("U" | "R") until )?
//   unary  := ("!" | "~" | "¬" | "X" | "WX" | "F" | "G") unary | primary
//   primary:= "true" | "false" | "⊤" | "⊥" | atom | "(" impl ")"
//
// Atoms start with a lowercase letter or underscore and continue with
// letters, digits or underscores (so the reserved `noMatch` is legal).

#include <string>
#include <string_view>
#include <vector>

#include "ltlfbeam/formula.hpp"

namespace ltlfbeam {

/// Parse `text`. Every atom must appear in `alphabet`; throws
/// UndeclaredAtomError otherwise and ParseError on malformed text.
Formula parse_formula(std::string_view text, const std::vector<std::string>& alphabet);

/// Parse without restricting atoms.
Formula parse_formula(std::string_view text);

bool is_valid_atom_name(std::string_view name);

}  // namespace ltlfbeam
