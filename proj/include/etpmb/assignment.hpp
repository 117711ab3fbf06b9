#pragma once

#include "etpmb/special_math.hpp"

#include <cstddef>
#include <optional>
#include <vector>

namespace etpmb {

/// Row-to-column assignment. For a matrix with more rows than columns the
/// unassigned rows hold -1.
struct Assignment {
    std::vector<int> col_for_row;
    double cost = 0.0;
};

/// Minimum-cost injective assignment of the smaller side of `cost` via the
/// shortest augmenting path method. Entries may be +∞ (forbidden pairing).
/// Returns nullopt when every complete assignment uses a forbidden entry.
std::optional<Assignment> hungarian(const Matrix& cost);

/// The K lowest-cost assignments in nondecreasing cost order. Equal costs
/// are ordered lexicographically by col_for_row.
std::vector<Assignment> murty_k_best(const Matrix& cost, std::size_t K);

} // namespace etpmb
