#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ltlfbeam/formula.hpp"

namespace ltlfbeam {

/// Seeded formula generator for property tests. The result nests at most
/// `depth` operators, uses only atoms from `alphabet`, and is identical
/// across runs and platforms for the same arguments.
Formula random_formula(int depth, const std::vector<std::string>& alphabet, std::uint64_t seed);

}  // namespace ltlfbeam
