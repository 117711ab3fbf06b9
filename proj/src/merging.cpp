#include "etpmb/merging.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>

namespace etpmb {

double UpdateResult::weight(std::size_t j) const { return std::exp(hyps[j].log_weight); }

const Bernoulli& UpdateResult::selection(std::size_t j, std::size_t track) const {
    return locals[hyps[j].selections[track]].bern;
}

std::string_view to_string(MergeStrategy s) {
    switch (s) {
        case MergeStrategy::TO: return "TO";
        case MergeStrategy::TON: return "TON";
        case MergeStrategy::MLA: return "MLA";
        case MergeStrategy::EAFS: return "EAFS";
    }
    return "?";
}

MergeStrategy parse_strategy(std::string_view name) {
    if (name == "TO") return MergeStrategy::TO;
    if (name == "TON") return MergeStrategy::TON;
    if (name == "MLA") return MergeStrategy::MLA;
    if (name == "EAFS") return MergeStrategy::EAFS;
    throw DomainError("unknown merge strategy: " + std::string(name));
}

double bernoulli_cross_entropy(const Bernoulli& f, const Bernoulli& g) {
    constexpr double eps = 1e-12;
    const double rf = std::clamp(f.r, eps, 1.0 - eps);
    const double rg = std::clamp(g.r, eps, 1.0 - eps);
    return -(1.0 - rf) * std::log(1.0 - rg) - rf * std::log(rg) +
           rf * ggiw_cross_entropy(f.density, g.density);
}

std::vector<Bernoulli> merge_existing_TO(const UpdateResult& upd, double tau_g) {
    std::vector<Bernoulli> out;
    out.reserve(upd.num_tracks);
    std::vector<WeightedBernoulli> mix(upd.hyps.size());
    for (std::size_t t = 0; t < upd.num_tracks; ++t) {
        for (std::size_t j = 0; j < upd.hyps.size(); ++j) {
            mix[j] = {upd.weight(j), &upd.selection(j, t)};
        }
        out.push_back(bernoulli_mixture_reduce(mix, 0.0, tau_g));
    }
    return out;
}

namespace {

/// Merges one group of new-track locals; hypotheses without a member add
/// r = 0 mass.
Bernoulli reduce_group(const UpdateResult& upd, const std::vector<std::pair<int, int>>& members,
                       double tau_g) {
    // members: (hypothesis j, local index)
    std::vector<WeightedBernoulli> mix;
    double present = 0.0;
    for (auto [j, local] : members) {
        mix.push_back({upd.weight(j), &upd.locals[local].bern});
        present += upd.weight(j);
    }
    double total = 0.0;
    for (std::size_t j = 0; j < upd.hyps.size(); ++j) total += upd.weight(j);
    return bernoulli_mixture_reduce(mix, std::max(0.0, total - present), tau_g);
}

} // namespace

std::vector<Bernoulli> merge_new_TO(const UpdateResult& upd, double tau_g) {
    std::map<CellIndices, std::vector<std::pair<int, int>>> by_cell;
    std::vector<CellIndices> order;
    for (std::size_t j = 0; j < upd.hyps.size(); ++j) {
        for (int local : upd.hyps[j].new_tracks) {
            const CellIndices& cell = upd.locals[local].cell;
            auto [it, inserted] = by_cell.try_emplace(cell);
            if (inserted) order.push_back(cell);
            it->second.push_back({static_cast<int>(j), local});
        }
    }
    std::vector<Bernoulli> out;
    for (const auto& cell : order) out.push_back(reduce_group(upd, by_cell[cell], tau_g));
    return out;
}

std::vector<Bernoulli> merge_new_greedy(const UpdateResult& upd, double tau_n, double tau_g) {
    std::vector<std::size_t> order(upd.hyps.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        return upd.hyps[x].log_weight > upd.hyps[y].log_weight;
    });

    std::map<std::pair<std::size_t, int>, bool> grouped;
    std::vector<Bernoulli> out;
    for (std::size_t s = 0; s < order.size(); ++s) {
        const std::size_t j = order[s];
        for (int seed : upd.hyps[j].new_tracks) {
            if (grouped[{j, seed}]) continue;
            grouped[{j, seed}] = true;
            std::vector<std::pair<int, int>> members = {{static_cast<int>(j), seed}};
            const Bernoulli& seed_bern = upd.locals[seed].bern;
            for (std::size_t s2 = s + 1; s2 < order.size(); ++s2) {
                const std::size_t j2 = order[s2];
                int best = -1;
                double best_d = std::numeric_limits<double>::infinity();
                for (int cand : upd.hyps[j2].new_tracks) {
                    if (grouped[{j2, cand}]) continue;
                    const double dist = ggiw_skl(seed_bern.density, upd.locals[cand].bern.density);
                    if (dist < best_d) {
                        best_d = dist;
                        best = cand;
                    }
                }
                if (best >= 0 && best_d < tau_n) {
                    grouped[{j2, best}] = true;
                    members.push_back({static_cast<int>(j2), best});
                }
            }
            out.push_back(reduce_group(upd, members, tau_g));
        }
    }
    return out;
}

double ub_cross_entropy(const UpdateResult& upd, const std::vector<std::vector<int>>& assignment,
                        const std::vector<Bernoulli>& approx) {
    double total = 0.0;
    for (std::size_t j = 0; j < upd.hyps.size(); ++j) {
        const double w = upd.weight(j);
        for (std::size_t iota = 0; iota < approx.size(); ++iota) {
            total += w * bernoulli_cross_entropy(upd.selection(j, assignment[j][iota]), approx[iota]);
        }
    }
    return total;
}

HypothesisMarginals hypothesis_marginals(const UpdateResult& upd) {
    HypothesisMarginals hm;
    std::map<int, std::size_t> index;
    for (std::size_t j = 0; j < upd.hyps.size(); ++j) {
        const double w = upd.weight(j);
        for (int local : upd.hyps[j].selections) {
            auto [it, inserted] = index.try_emplace(local, hm.locals.size());
            if (inserted) {
                hm.locals.push_back(local);
                hm.p.push_back(0.0);
            }
            hm.p[it->second] += w;
        }
    }
    hm.initial_plan = Matrix::Zero(static_cast<Eigen::Index>(hm.locals.size()),
                                   static_cast<Eigen::Index>(upd.num_tracks));
    for (std::size_t h = 0; h < hm.locals.size(); ++h) {
        hm.initial_plan(static_cast<Eigen::Index>(h), upd.locals[hm.locals[h]].parent_track) = hm.p[h];
    }
    return hm;
}

double ub_cross_entropy(const UpdateResult& upd, const HypothesisMarginals& hm, const Matrix& plan,
                        const std::vector<Bernoulli>& approx) {
    double total = 0.0;
    for (std::size_t h = 0; h < hm.locals.size(); ++h) {
        for (std::size_t iota = 0; iota < approx.size(); ++iota) {
            const double q = plan(static_cast<Eigen::Index>(h), static_cast<Eigen::Index>(iota));
            if (q > 0.0) {
                total += q * bernoulli_cross_entropy(upd.locals[hm.locals[h]].bern, approx[iota]);
            }
        }
    }
    return total;
}

namespace {

std::vector<Bernoulli> mla_m_step(const UpdateResult& upd,
                                  const std::vector<std::vector<int>>& assignment, double tau_g) {
    std::vector<Bernoulli> out;
    std::vector<WeightedBernoulli> mix(upd.hyps.size());
    for (std::size_t iota = 0; iota < upd.num_tracks; ++iota) {
        for (std::size_t j = 0; j < upd.hyps.size(); ++j) {
            mix[j] = {upd.weight(j), &upd.selection(j, assignment[j][iota])};
        }
        out.push_back(bernoulli_mixture_reduce(mix, 0.0, tau_g));
    }
    return out;
}

std::vector<Bernoulli> eafs_m_step(const UpdateResult& upd, const HypothesisMarginals& hm,
                                   const Matrix& plan, double tau_g) {
    std::vector<Bernoulli> out;
    for (std::size_t iota = 0; iota < upd.num_tracks; ++iota) {
        std::vector<WeightedBernoulli> mix;
        for (std::size_t h = 0; h < hm.locals.size(); ++h) {
            const double q = plan(static_cast<Eigen::Index>(h), static_cast<Eigen::Index>(iota));
            if (q > 0.0) mix.push_back({q, &upd.locals[hm.locals[h]].bern});
        }
        out.push_back(bernoulli_mixture_reduce(mix, 0.0, tau_g));
    }
    return out;
}

std::vector<std::vector<int>> identity_assignment(const UpdateResult& upd) {
    std::vector<int> ident(upd.num_tracks);
    std::iota(ident.begin(), ident.end(), 0);
    return std::vector<std::vector<int>>(upd.hyps.size(), ident);
}

/// Block coordinate descent shared by both variants. `State` carries the
/// missing-data variable; e_step maps approximations to a new state.
template <typename State, typename EStep, typename MStep, typename Objective>
VmbResult coordinate_descent(MergeStrategy tag, State state, EStep e_step, MStep m_step,
                             Objective objective, const MergeOptions& options, State& final_state) {
    VmbResult res;
    res.report.strategy = tag;
    std::vector<Bernoulli> approx = m_step(state);
    double obj = objective(state, approx);
    res.report.cebv = obj;
    res.report.trace.push_back(obj);
    res.report.iterations = 1;
    res.report.converged = false;
    for (int it = 0; it < options.vmb_max_iter; ++it) {
        State next = e_step(approx);
        std::vector<Bernoulli> next_approx = m_step(next);
        const double next_obj = objective(next, next_approx);
        res.report.trace.push_back(next_obj);
        if (!(obj - next_obj >= options.vmb_tol)) {
            res.report.converged = true;
            break;
        }
        state = std::move(next);
        approx = std::move(next_approx);
        obj = next_obj;
        ++res.report.iterations;
    }
    res.report.ceav = obj;
    res.bernoullis = std::move(approx);
    final_state = std::move(state);
    return res;
}

} // namespace

VmbResult vmb_mla(const UpdateResult& upd, const MergeOptions& options) {
    const std::size_t n = upd.num_tracks;
    auto m_step = [&](const std::vector<std::vector<int>>& a) { return mla_m_step(upd, a, options.tau_g); };
    auto objective = [&](const std::vector<std::vector<int>>& a, const std::vector<Bernoulli>& g) {
        return ub_cross_entropy(upd, a, g);
    };
    auto e_step = [&](const std::vector<Bernoulli>& g) {
        std::vector<std::vector<int>> a(upd.hyps.size(), std::vector<int>(n));
        Matrix cost(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
        for (std::size_t j = 0; j < upd.hyps.size(); ++j) {
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t iota = 0; iota < n; ++iota)
                    cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(iota)) =
                        bernoulli_cross_entropy(upd.selection(j, i), g[iota]);
            const auto sol = hungarian(cost);
            if (!sol) throw std::logic_error("vmb_mla: E-step assignment infeasible");
            for (std::size_t i = 0; i < n; ++i) a[j][sol->col_for_row[i]] = static_cast<int>(i);
        }
        return a;
    };
    if (n == 0) {
        VmbResult res;
        res.report.strategy = MergeStrategy::MLA;
        res.report.trace = {0.0};
        res.assignment.assign(upd.hyps.size(), {});
        return res;
    }
    std::vector<std::vector<int>> final_state;
    VmbResult res = coordinate_descent(MergeStrategy::MLA, identity_assignment(upd), e_step, m_step,
                                       objective, options, final_state);
    res.assignment = std::move(final_state);
    return res;
}

VmbResult vmb_eafs(const UpdateResult& upd, const MergeOptions& options) {
    const HypothesisMarginals hm = hypothesis_marginals(upd);
    const std::size_t n = upd.num_tracks;
    auto m_step = [&](const Matrix& plan) { return eafs_m_step(upd, hm, plan, options.tau_g); };
    auto objective = [&](const Matrix& plan, const std::vector<Bernoulli>& g) {
        return ub_cross_entropy(upd, hm, plan, g);
    };
    const std::vector<double> demand(n, 1.0);
    auto e_step = [&](const std::vector<Bernoulli>& g) {
        Matrix cost(static_cast<Eigen::Index>(hm.locals.size()), static_cast<Eigen::Index>(n));
        for (std::size_t h = 0; h < hm.locals.size(); ++h)
            for (std::size_t iota = 0; iota < n; ++iota)
                cost(static_cast<Eigen::Index>(h), static_cast<Eigen::Index>(iota)) =
                    bernoulli_cross_entropy(upd.locals[hm.locals[h]].bern, g[iota]);
        // Rescale supplies so the problem balances exactly.
        std::vector<double> supply = hm.p;
        const double total = std::accumulate(supply.begin(), supply.end(), 0.0);
        for (double& s : supply) s *= static_cast<double>(n) / total;
        return solve_transport(cost, supply, demand).plan;
    };
    Matrix final_plan;
    if (n == 0) {
        VmbResult res;
        res.report.strategy = MergeStrategy::EAFS;
        res.report.trace = {0.0};
        return res;
    }
    VmbResult res = coordinate_descent(MergeStrategy::EAFS, hm.initial_plan, e_step, m_step,
                                       objective, options, final_plan);
    res.plan = std::move(final_plan);
    return res;
}

std::pair<PMBState, MergeReport> merge_to_pmb(const UpdateResult& upd, MergeStrategy strategy,
                                              const MergeOptions& options, long next_track_id) {
    PMBState state;
    state.ppp = upd.ppp;
    MergeReport report;
    report.strategy = strategy;

    std::vector<Bernoulli> existing;
    if (strategy == MergeStrategy::MLA) {
        VmbResult res = vmb_mla(upd, options);
        existing = std::move(res.bernoullis);
        report = std::move(res.report);
    } else if (strategy == MergeStrategy::EAFS) {
        VmbResult res = vmb_eafs(upd, options);
        existing = std::move(res.bernoullis);
        report = std::move(res.report);
    } else {
        existing = merge_existing_TO(upd, options.tau_g);
        const double obj = ub_cross_entropy(upd, identity_assignment(upd), existing);
        report.cebv = obj;
        report.ceav = obj;
        report.trace = {obj};
    }
    for (std::size_t t = 0; t < existing.size(); ++t) {
        existing[t].track_id = upd.selection(0, t).track_id;
    }

    std::vector<Bernoulli> fresh = strategy == MergeStrategy::TO
                                       ? merge_new_TO(upd, options.tau_g)
                                       : merge_new_greedy(upd, options.tau_n, options.tau_g);
    for (auto& b : fresh) b.track_id = next_track_id++;

    state.bernoullis = std::move(existing);
    state.bernoullis.insert(state.bernoullis.end(), fresh.begin(), fresh.end());
    state.next_track_id = next_track_id;
    return {std::move(state), std::move(report)};
}

} // namespace etpmb
