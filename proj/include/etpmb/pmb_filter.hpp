#pragma once

#include "etpmb/association.hpp"
#include "etpmb/mbm.hpp"
#include "etpmb/merging.hpp"
#include "etpmb/rfs.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace etpmb {

struct FilterConfig {
    MotionConfig motion;
    SensorConfig sensor;
    PoissonIntensity birth;
    std::vector<double> eps_list = default_eps_list();
    AssociationOptions association;
    MergeStrategy merge_strategy = MergeStrategy::MLA;
    double tau_r = 0.1;
    double bern_floor = 1e-3;
    double ppp_floor = 1e-4;
    std::size_t max_ppp = 200;
    double tau_n = 15.0;
    double tau_g = 20.0;
    double vmb_tol = 1e-3;
    int vmb_max_iter = 20;
    double extract_threshold = 0.5;

    MergeOptions merge_options() const;
};

PMBState predict(const PMBState& state, const FilterConfig& cfg);

/// Update of a predicted state with `measurements` (d × N, columns).
UpdateResult update(const PMBState& predicted, const Matrix& measurements, const FilterConfig& cfg);

/// Same as update() with caller-supplied partitions.
UpdateResult update_with_partitions(const PMBState& predicted, const Matrix& measurements,
                                    std::span<const Partition> partitions, const FilterConfig& cfg);

struct StepDiagnostics {
    std::size_t num_hypotheses = 0;
    MergeReport merge;
    double expected_cardinality = 0.0;
};

struct StepResult {
    PMBState state;
    StepDiagnostics diagnostics;
};

/// predict → update → merge → recycle → prune.
StepResult step(const PMBState& state, const Matrix& measurements, const FilterConfig& cfg);

std::vector<ExtendedEstimate> extract(const PMBState& state, double threshold);

} // namespace etpmb
