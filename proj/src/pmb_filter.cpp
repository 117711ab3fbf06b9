#include "etpmb/pmb_filter.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace etpmb {

MergeOptions FilterConfig::merge_options() const {
    MergeOptions o;
    o.tau_g = tau_g;
    o.tau_n = tau_n;
    o.vmb_tol = vmb_tol;
    o.vmb_max_iter = vmb_max_iter;
    return o;
}

PMBState predict(const PMBState& state, const FilterConfig& cfg) {
    PMBState out;
    out.next_track_id = state.next_track_id;
    const double ps = cfg.motion.ps;
    for (const auto& c : state.ppp.components) {
        out.ppp.components.push_back({ps * c.w, ggiw_predict(c.density, cfg.motion)});
    }
    for (const auto& c : cfg.birth.components) out.ppp.components.push_back(c);
    for (const auto& b : state.bernoullis) {
        out.bernoullis.push_back({ps * b.r, ggiw_predict(b.density, cfg.motion), b.track_id});
    }
    return out;
}

UpdateResult update(const PMBState& predicted, const Matrix& measurements, const FilterConfig& cfg) {
    const std::vector<Partition> partitions =
        measurements.cols() > 0 ? partition_sweep(measurements, cfg.eps_list)
                                : std::vector<Partition>{Partition{}};
    return update_with_partitions(predicted, measurements, partitions, cfg);
}

UpdateResult update_with_partitions(const PMBState& predicted, const Matrix& measurements,
                                    std::span<const Partition> partitions, const FilterConfig& cfg) {
    const auto& tracks = predicted.bernoullis;
    const double pd = cfg.sensor.pd;
    AssociationModel model(measurements, tracks, predicted.ppp, cfg.sensor,
                           cfg.association.gate_prob);
    const std::vector<AssociationHypothesis> assoc = build_hypotheses(model, partitions, cfg.association);

    UpdateResult out;
    out.num_tracks = tracks.size();
    for (const auto& c : predicted.ppp.components) {
        out.ppp.components.push_back(
            {c.w * effective_miss_prob(c.density.gamma, pd), ggiw_miss_update(c.density, pd)});
    }

    // Missed-detection locals, one per track.
    std::vector<int> miss_local(tracks.size());
    for (std::size_t t = 0; t < tracks.size(); ++t) {
        const Bernoulli& b = tracks[t];
        const double q = effective_miss_prob(b.density.gamma, pd);
        const double denom = 1.0 - b.r + b.r * q;
        LocalHypothesis lh;
        lh.parent_track = static_cast<int>(t);
        lh.bern = {denom > 0.0 ? b.r * q / denom : 0.0, ggiw_miss_update(b.density, pd), b.track_id};
        lh.log_lik = model.log_miss(static_cast<int>(t));
        miss_local[t] = static_cast<int>(out.locals.size());
        out.locals.push_back(std::move(lh));
    }

    std::map<std::pair<int, CellIndices>, int> detect_local;
    std::map<CellIndices, int> new_local;  // -1 when the cell cannot be a target

    auto detection = [&](int t, const CellIndices& cell) {
        auto key = std::make_pair(t, cell);
        auto it = detect_local.find(key);
        if (it != detect_local.end()) return it->second;
        LocalHypothesis lh;
        lh.parent_track = t;
        lh.cell = cell;
        lh.bern = {1.0, model.track_update(t, cell).posterior, tracks[t].track_id};
        lh.log_lik = model.log_detect(t, cell);
        const int idx = static_cast<int>(out.locals.size());
        out.locals.push_back(std::move(lh));
        detect_local.emplace(std::move(key), idx);
        return idx;
    };

    auto new_track = [&](const CellIndices& cell) {
        auto it = new_local.find(cell);
        if (it != new_local.end()) return it->second;
        const auto& terms = model.ppp_terms(cell);
        int idx = -1;
        if (!terms.empty()) {
            double hi = terms.front().log_mass;
            for (const auto& term : terms) hi = std::max(hi, term.log_mass);
            std::vector<WeightedGGIW> mix;
            for (const auto& term : terms) {
                mix.push_back({std::exp(term.log_mass - hi), &term.update->posterior});
            }
            const double log_ppp = model.log_ppp_likelihood(cell);
            LocalHypothesis lh;
            lh.parent_track = -1;
            lh.cell = cell;
            lh.bern.r = cell.size() > 1 ? 1.0 : std::exp(log_ppp - model.log_background(cell));
            lh.bern.density = ggiw_mixture_merge(mix, cfg.tau_g);
            lh.log_lik = model.log_background(cell);
            idx = static_cast<int>(out.locals.size());
            out.locals.push_back(std::move(lh));
        }
        new_local.emplace(cell, idx);
        return idx;
    };

    for (const auto& h : assoc) {
        GlobalHypothesis g;
        g.log_weight = h.log_weight;
        g.selections = miss_local;
        for (std::size_t c = 0; c < h.cells.size(); ++c) {
            const int t = h.cell_to_track[c];
            if (t >= 0) {
                g.selections[t] = detection(t, h.cells[c]);
            } else if (const int idx = new_track(h.cells[c]); idx >= 0) {
                g.new_tracks.push_back(idx);
            }
        }
        out.hyps.push_back(std::move(g));
    }
    return out;
}

StepResult step(const PMBState& state, const Matrix& measurements, const FilterConfig& cfg) {
    const PMBState predicted = predict(state, cfg);
    const UpdateResult upd = update(predicted, measurements, cfg);
    auto [merged, report] = merge_to_pmb(upd, cfg.merge_strategy, cfg.merge_options(),
                                         predicted.next_track_id);
    StepResult out;
    out.state = prune_state(recycle(merged, cfg.tau_r), cfg.bern_floor, cfg.ppp_floor, cfg.max_ppp);
    out.diagnostics.num_hypotheses = upd.hyps.size();
    out.diagnostics.merge = std::move(report);
    out.diagnostics.expected_cardinality = 0.0;
    for (const auto& b : out.state.bernoullis) out.diagnostics.expected_cardinality += b.r;
    return out;
}

std::vector<ExtendedEstimate> extract(const PMBState& state, double threshold) {
    std::vector<ExtendedEstimate> out;
    for (const auto& b : state.bernoullis) {
        if (b.r > threshold) out.push_back(ggiw_expected_value(b.density));
    }
    return out;
}

} // namespace etpmb
