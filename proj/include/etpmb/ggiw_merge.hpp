#pragma once

#include "etpmb/ggiw.hpp"

#include <limits>
#include <span>

namespace etpmb {

/// Gate value that admits every component.
inline constexpr double kNoGate = std::numeric_limits<double>::infinity();

struct WeightedGGIW {
    double weight = 0.0;
    const GGIWDensity* density = nullptr;
};

/// Matches E[γ] and E[log γ]. Weights need not be normalized.
GammaParams gamma_merge(std::span<const double> weights, std::span<const GammaParams> comps);

/// Moment matching: weighted mean and covariance including the spread term.
GaussianKinematics gaussian_merge(std::span<const double> weights,
                                  std::span<const GaussianKinematics> comps);

/// Matches E[χ⁻¹] and E[log det χ⁻¹]. If the matched dof would fall at or
/// below 2d + 2, keeps the smallest component dof and the E[χ⁻¹] match.
InverseWishartExtent iw_merge(std::span<const double> weights,
                              std::span<const InverseWishartExtent> comps);

/// KL-minimizing single GGIW for a weighted mixture. When `tau_g` is finite,
/// only components n with KL(n* ‖ n) < tau_g enter, n* being the heaviest.
GGIWDensity ggiw_mixture_merge(std::span<const WeightedGGIW> mix, double tau_g = kNoGate);

} // namespace etpmb
