#pragma once

#include "etpmb/special_math.hpp"

#include <span>

namespace etpmb {

struct TransportSolution {
    /// supply.size() × demand.size() nonnegative plan.
    Matrix plan;
    double cost = 0.0;
    int pivots = 0;
};

/// Balanced transportation problem min Σ c_ij x_ij subject to row sums =
/// supply and column sums = demand, solved by the transportation simplex
/// (northwest-corner start, MODI potentials, lowest-index pivoting).
TransportSolution solve_transport(const Matrix& cost, std::span<const double> supply,
                                  std::span<const double> demand);

} // namespace etpmb
