#pragma once

#include "etpmb/association.hpp"
#include "etpmb/rfs.hpp"

#include <cstddef>
#include <vector>

namespace etpmb {

/// Single-target hypothesis produced by the update.
struct LocalHypothesis {
    /// Predicted track index, or -1 for a new track.
    int parent_track = -1;
    /// Empty for a missed detection.
    CellIndices cell;
    Bernoulli bern;
    double log_lik = 0.0;
};

/// One data association outcome; indices point into UpdateResult::locals.
struct GlobalHypothesis {
    double log_weight = 0.0;
    std::vector<int> selections;
    std::vector<int> new_tracks;
};

/// Updated PPP plus the MBM over detected targets.
struct UpdateResult {
    PoissonIntensity ppp;
    std::vector<LocalHypothesis> locals;
    std::vector<GlobalHypothesis> hyps;
    std::size_t num_tracks = 0;

    double weight(std::size_t j) const;
    const Bernoulli& selection(std::size_t j, std::size_t track) const;
};

} // namespace etpmb
