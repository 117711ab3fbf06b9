#pragma once

#include "etpmb/mbm.hpp"
#include "etpmb/transport.hpp"

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace etpmb {

enum class MergeStrategy { TO, TON, MLA, EAFS };

std::string_view to_string(MergeStrategy s);
MergeStrategy parse_strategy(std::string_view name);

struct MergeReport {
    MergeStrategy strategy = MergeStrategy::TO;
    /// Objective at the track-oriented initialization.
    double cebv = 0.0;
    /// Objective of the returned approximation.
    double ceav = 0.0;
    int iterations = 1;
    /// Stopped because the decrease fell below tol (not max_iter).
    bool converged = true;
    /// Objective after every computed M-step, starting with cebv.
    std::vector<double> trace;
};

struct MergeOptions {
    double tau_g = kNoGate;
    double tau_n = 15.0;
    double vmb_tol = 1e-3;
    int vmb_max_iter = 20;
};

/// −∫ f log g over Bernoulli sets, with both existence values clamped to
/// [1e-12, 1 − 1e-12].
double bernoulli_cross_entropy(const Bernoulli& f, const Bernoulli& g);

/// Per predicted track, the reduction of its selections weighted by W^j.
std::vector<Bernoulli> merge_existing_TO(const UpdateResult& upd, double tau_g = kNoGate);

/// One Bernoulli per background cell across hypotheses.
std::vector<Bernoulli> merge_new_TO(const UpdateResult& upd, double tau_g = kNoGate);

/// Greedy grouping of new-track Bernoullis by symmetrized KL below tau_n.
std::vector<Bernoulli> merge_new_greedy(const UpdateResult& upd, double tau_n,
                                        double tau_g = kNoGate);

/// assignment[j][ι] = predicted track whose selection in hypothesis j is
/// assigned to approx[ι].
double ub_cross_entropy(const UpdateResult& upd, const std::vector<std::vector<int>>& assignment,
                        const std::vector<Bernoulli>& approx);

/// Distinct existing-track local hypotheses with their marginal weights p_h.
struct HypothesisMarginals {
    std::vector<int> locals;
    std::vector<double> p;
    /// Initial plan: all of p_h on the parent track.
    Matrix initial_plan;
};

HypothesisMarginals hypothesis_marginals(const UpdateResult& upd);

/// Σ_h Σ_ι q(h, ι)·CE(f^h, g^ι).
double ub_cross_entropy(const UpdateResult& upd, const HypothesisMarginals& hm, const Matrix& plan,
                        const std::vector<Bernoulli>& approx);

struct VmbResult {
    std::vector<Bernoulli> bernoullis;
    MergeReport report;
    /// MLA: final per-hypothesis assignment. Empty for EAFS.
    std::vector<std::vector<int>> assignment;
    /// EAFS: final plan over hypothesis_marginals(upd). Empty for MLA.
    Matrix plan;
};

VmbResult vmb_mla(const UpdateResult& upd, const MergeOptions& options);
VmbResult vmb_eafs(const UpdateResult& upd, const MergeOptions& options);

/// Reduces the MBM to one MB. Existing tracks keep their predicted
/// track_id; new tracks draw ids from `next_track_id`.
std::pair<PMBState, MergeReport> merge_to_pmb(const UpdateResult& upd, MergeStrategy strategy,
                                              const MergeOptions& options, long next_track_id);

} // namespace etpmb
