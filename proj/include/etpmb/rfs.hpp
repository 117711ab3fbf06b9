#pragma once

#include "etpmb/ggiw.hpp"
#include "etpmb/ggiw_merge.hpp"

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <span>
#include <vector>

namespace etpmb {

struct Bernoulli {
    double r = 0.0;
    GGIWDensity density;
    /// Bookkeeping label; not part of the density.
    long track_id = -1;
};

struct PoissonComponent {
    double w = 0.0;
    GGIWDensity density;
};

struct PoissonIntensity {
    std::vector<PoissonComponent> components;

    double mass() const;
};

struct PMBState {
    PoissonIntensity ppp;
    std::vector<Bernoulli> bernoullis;
    long next_track_id = 0;

    /// Σ r + PPP mass.
    double expected_cardinality() const;
};

struct WeightedBernoulli {
    double w = 0.0;
    const Bernoulli* bern = nullptr;
};

/// KL-minimizing single Bernoulli for a mixture. `absent_weight` is extra
/// mixture mass carried by r = 0 members. The result takes the track_id of
/// the heaviest member.
Bernoulli bernoulli_mixture_reduce(std::span<const WeightedBernoulli> mix,
                                   double absent_weight = 0.0, double tau_g = kNoGate);

/// Moves every Bernoulli with r < tau_r into the PPP with weight r.
PMBState recycle(const PMBState& state, double tau_r);

PMBState prune_state(const PMBState& state, double bern_floor, double ppp_floor = 1e-4,
                     std::size_t max_ppp = 200);

/// One header line, then one line per component:
///   B r a b m... P... v V... track_id
///   P w a b m... P... v V...
void write_state(std::ostream& os, const PMBState& state);
PMBState read_state(std::istream& is);

} // namespace etpmb
