#pragma once

#include "etpmb/assignment.hpp"
#include "etpmb/rfs.hpp"

#include <cstddef>
#include <map>
#include <span>
#include <vector>

namespace etpmb {

/// Sorted measurement indices.
using CellIndices = std::vector<int>;

/// Disjoint cells covering all measurement indices, kept in canonical order
/// (each cell sorted, cells ordered lexicographically).
struct Partition {
    std::vector<CellIndices> cells;

    void canonicalize();
    bool operator==(const Partition& other) const = default;
};

/// DBSCAN over the columns of `measurements`. Points left as noise (only
/// possible with min_pts > 1) become singleton cells.
Partition dbscan_partition(const Matrix& measurements, double eps, int min_pts = 1);

/// One DBSCAN partition per eps in increasing eps order, duplicates removed.
std::vector<Partition> partition_sweep(const Matrix& measurements, std::span<const double> eps_list);

/// Every set partition of {0, ..., n−1}.
std::vector<Partition> exhaustive_partitions(int n);

/// Ten evenly spaced values from 0.1 to 5.
std::vector<double> default_eps_list();

struct AssociationHypothesis {
    std::vector<CellIndices> cells;
    /// Per cell: predicted track index, or -1 for the background.
    std::vector<int> cell_to_track;
    double log_likelihood = 0.0;
    /// Normalized over the pooled hypothesis set.
    double log_weight = 0.0;

    /// -1 when the track is missed.
    int cell_of_track(int track) const;
};

struct AssociationOptions {
    std::size_t k_best = 20;
    /// Cumulative weight kept after sorting; values ≥ 1 keep everything.
    double truncation = 0.9999;
    /// Gate probability for the centroid test; 0 disables gating.
    double gate_prob = 0.999;
};

/// Likelihood factors for one scan, cached per (track or PPP component, cell).
class AssociationModel {
public:
    AssociationModel(const Matrix& measurements, std::span<const Bernoulli> tracks,
                     const PoissonIntensity& ppp, const SensorConfig& sensor,
                     double gate_prob = 0.999);

    std::size_t num_tracks() const { return tracks_.size(); }
    std::size_t num_measurements() const { return static_cast<std::size_t>(z_.cols()); }
    const Matrix& measurements() const { return z_; }
    MeasurementCell gather(const CellIndices& cell) const;

    /// log L^i_∅ = log(1 − r + r⟨f, q_D⟩).
    double log_miss(int track) const;
    /// log L^i_C = log r + log⟨f, ℓ_C⟩; −∞ when gated out.
    double log_detect(int track, const CellIndices& cell);
    /// log L^b_C; −∞ when zero.
    double log_background(const CellIndices& cell);
    bool in_gate(int track, const CellIndices& cell) const;

    /// Detection posterior of a track; requires log_detect to be finite.
    const CellUpdate& track_update(int track, const CellIndices& cell);

    struct PPPTerm {
        int component;
        double log_mass;  // log w_u + log⟨f_u, ℓ_C⟩
        const CellUpdate* update;
    };
    /// In-gate PPP terms of ⟨D, ℓ_C⟩.
    const std::vector<PPPTerm>& ppp_terms(const CellIndices& cell);
    /// log⟨D, ℓ_C⟩ (−∞ when no component contributes).
    double log_ppp_likelihood(const CellIndices& cell);

private:
    bool centroid_in_gate(const GGIWDensity& g, const CellIndices& cell) const;

    Matrix z_;
    std::span<const Bernoulli> tracks_;
    const PoissonIntensity& ppp_;
    SensorConfig sensor_;
    double gate_threshold_;
    std::vector<double> log_miss_;
    std::map<std::pair<int, CellIndices>, CellUpdate> track_cache_;
    std::map<std::pair<int, CellIndices>, CellUpdate> ppp_cache_;
    std::map<CellIndices, std::vector<PPPTerm>> ppp_terms_;
};

/// log L_A for one hypothesis.
double association_log_likelihood(const AssociationHypothesis& hyp, AssociationModel& model);

/// Exhaustive oracle: every partition of the measurements and every
/// injective cell-to-track map, weights normalized. Small instances only.
std::vector<AssociationHypothesis> enumerate_associations(AssociationModel& model);

/// Murty's K-best per partition, pooled and normalized, sorted by weight and
/// truncated. Falls back to a single all-background hypothesis when no
/// hypothesis has positive likelihood.
std::vector<AssociationHypothesis> build_hypotheses(AssociationModel& model,
                                                    std::span<const Partition> partitions,
                                                    const AssociationOptions& options);

} // namespace etpmb
