#include "etpmb/association.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

namespace etpmb {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kInf = std::numeric_limits<double>::infinity();

double log_add_exp(double x, double y) {
    if (x == kNegInf) return y;
    if (y == kNegInf) return x;
    const double hi = std::max(x, y);
    return hi + std::log1p(std::exp(-std::abs(x - y)));
}

double log_sum_exp(std::span<const double> xs) {
    double hi = kNegInf;
    for (double x : xs) hi = std::max(hi, x);
    if (hi == kNegInf) return kNegInf;
    double acc = 0.0;
    for (double x : xs) acc += std::exp(x - hi);
    return hi + std::log(acc);
}

} // namespace

void Partition::canonicalize() {
    for (auto& c : cells) std::sort(c.begin(), c.end());
    std::sort(cells.begin(), cells.end());
}

Partition dbscan_partition(const Matrix& measurements, double eps, int min_pts) {
    if (!(eps > 0.0) || min_pts < 1) throw DomainError("dbscan_partition: need eps > 0, min_pts >= 1");
    const int n = static_cast<int>(measurements.cols());
    const double eps2 = eps * eps;
    std::vector<std::vector<int>> neighbours(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if ((measurements.col(i) - measurements.col(j)).squaredNorm() <= eps2) {
                neighbours[i].push_back(j);
            }
        }
    }
    std::vector<int> label(n, -1);
    int next_label = 0;
    for (int i = 0; i < n; ++i) {
        if (label[i] >= 0 || static_cast<int>(neighbours[i].size()) < min_pts) continue;
        const int id = next_label++;
        std::vector<int> frontier = {i};
        label[i] = id;
        while (!frontier.empty()) {
            const int p = frontier.back();
            frontier.pop_back();
            if (static_cast<int>(neighbours[p].size()) < min_pts) continue;
            for (int q : neighbours[p]) {
                if (label[q] < 0) {
                    label[q] = id;
                    frontier.push_back(q);
                }
            }
        }
    }
    Partition out;
    out.cells.resize(next_label);
    for (int i = 0; i < n; ++i) {
        if (label[i] >= 0) {
            out.cells[label[i]].push_back(i);
        } else {
            out.cells.push_back({i});
        }
    }
    out.canonicalize();
    return out;
}

std::vector<Partition> partition_sweep(const Matrix& measurements, std::span<const double> eps_list) {
    if (eps_list.empty()) throw DomainError("partition_sweep: eps_list must be nonempty");
    std::vector<double> sorted(eps_list.begin(), eps_list.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<Partition> out;
    for (double eps : sorted) {
        Partition p = dbscan_partition(measurements, eps, 1);
        if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(std::move(p));
    }
    return out;
}

std::vector<Partition> exhaustive_partitions(int n) {
    std::vector<Partition> out;
    Partition current;
    std::function<void(int)> rec = [&](int i) {
        if (i == n) {
            Partition p = current;
            p.canonicalize();
            out.push_back(std::move(p));
            return;
        }
        for (std::size_t c = 0; c < current.cells.size(); ++c) {
            current.cells[c].push_back(i);
            rec(i + 1);
            current.cells[c].pop_back();
        }
        current.cells.push_back({i});
        rec(i + 1);
        current.cells.pop_back();
    };
    rec(0);
    return out;
}

std::vector<double> default_eps_list() {
    std::vector<double> out(10);
    for (int i = 0; i < 10; ++i) out[i] = 0.1 + (5.0 - 0.1) * i / 9.0;
    return out;
}

int AssociationHypothesis::cell_of_track(int track) const {
    for (std::size_t c = 0; c < cell_to_track.size(); ++c) {
        if (cell_to_track[c] == track) return static_cast<int>(c);
    }
    return -1;
}

AssociationModel::AssociationModel(const Matrix& measurements, std::span<const Bernoulli> tracks,
                                   const PoissonIntensity& ppp, const SensorConfig& sensor,
                                   double gate_prob)
    : z_(measurements), tracks_(tracks), ppp_(ppp), sensor_(sensor) {
    const int d = measurements.rows() > 0 ? static_cast<int>(measurements.rows())
                                          : (tracks.empty() ? 2 : tracks.front().density.extent_dim());
    gate_threshold_ = gate_prob > 0.0 ? chi2_quantile(d, gate_prob) : kInf;
    log_miss_.reserve(tracks.size());
    for (const auto& t : tracks) {
        const double q = effective_miss_prob(t.density.gamma, sensor.pd);
        log_miss_.push_back(std::log(1.0 - t.r + t.r * q));
    }
}

MeasurementCell AssociationModel::gather(const CellIndices& cell) const {
    MeasurementCell out(z_.rows(), static_cast<Eigen::Index>(cell.size()));
    for (std::size_t i = 0; i < cell.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = z_.col(cell[i]);
    return out;
}

bool AssociationModel::centroid_in_gate(const GGIWDensity& g, const CellIndices& cell) const {
    if (!std::isfinite(gate_threshold_)) return true;
    const int d = g.extent_dim();
    const Matrix H = measurement_matrix(g.state_dim(), d);
    Vector centroid = Vector::Zero(z_.rows());
    for (int i : cell) centroid += z_.col(i);
    centroid /= static_cast<double>(cell.size());
    const Matrix S = H * g.kin.P * H.transpose() + g.ext.V / (g.ext.v - 2.0 * d - 2.0);
    const Vector eps = centroid - H * g.kin.m;
    const double maha2 = eps.dot(Eigen::LLT<Matrix>(S).solve(eps));
    return maha2 <= gate_threshold_;
}

double AssociationModel::log_miss(int track) const { return log_miss_.at(track); }

bool AssociationModel::in_gate(int track, const CellIndices& cell) const {
    return centroid_in_gate(tracks_[track].density, cell);
}

const CellUpdate& AssociationModel::track_update(int track, const CellIndices& cell) {
    auto key = std::make_pair(track, cell);
    auto it = track_cache_.find(key);
    if (it == track_cache_.end()) {
        it = track_cache_.emplace(key, ggiw_cell_update(tracks_[track].density, gather(cell), sensor_))
                 .first;
    }
    return it->second;
}

double AssociationModel::log_detect(int track, const CellIndices& cell) {
    const double r = tracks_[track].r;
    if (!(r > 0.0) || !(sensor_.pd > 0.0) || !in_gate(track, cell)) return kNegInf;
    return std::log(r) + track_update(track, cell).log_lik;
}

const std::vector<AssociationModel::PPPTerm>& AssociationModel::ppp_terms(const CellIndices& cell) {
    auto it = ppp_terms_.find(cell);
    if (it != ppp_terms_.end()) return it->second;
    std::vector<PPPTerm> terms;
    if (sensor_.pd > 0.0) {
        const MeasurementCell meas = gather(cell);
        for (std::size_t u = 0; u < ppp_.components.size(); ++u) {
            const auto& comp = ppp_.components[u];
            if (!(comp.w > 0.0) || !centroid_in_gate(comp.density, cell)) continue;
            auto key = std::make_pair(static_cast<int>(u), cell);
            auto [pos, inserted] = ppp_cache_.emplace(key, CellUpdate{});
            if (inserted) pos->second = ggiw_cell_update(comp.density, meas, sensor_);
            terms.push_back({static_cast<int>(u), std::log(comp.w) + pos->second.log_lik, &pos->second});
        }
    }
    return ppp_terms_.emplace(cell, std::move(terms)).first->second;
}

double AssociationModel::log_ppp_likelihood(const CellIndices& cell) {
    const auto& terms = ppp_terms(cell);
    std::vector<double> logs;
    logs.reserve(terms.size());
    for (const auto& t : terms) logs.push_back(t.log_mass);
    return log_sum_exp(logs);
}

double AssociationModel::log_background(const CellIndices& cell) {
    const double log_ppp = log_ppp_likelihood(cell);
    if (cell.size() == 1) {
        const double kappa = sensor_.clutter_intensity();
        return log_add_exp(kappa > 0.0 ? std::log(kappa) : kNegInf, log_ppp);
    }
    return log_ppp;
}

double association_log_likelihood(const AssociationHypothesis& hyp, AssociationModel& model) {
    double total = 0.0;
    std::vector<char> detected(model.num_tracks(), 0);
    for (std::size_t c = 0; c < hyp.cells.size(); ++c) {
        const int track = hyp.cell_to_track[c];
        if (track < 0) {
            total += model.log_background(hyp.cells[c]);
        } else {
            detected.at(track) = 1;
            total += model.log_detect(track, hyp.cells[c]);
        }
    }
    for (std::size_t i = 0; i < detected.size(); ++i) {
        if (!detected[i]) total += model.log_miss(static_cast<int>(i));
    }
    return total;
}

namespace {

void normalize(std::vector<AssociationHypothesis>& hyps) {
    std::vector<double> logs;
    logs.reserve(hyps.size());
    for (const auto& h : hyps) logs.push_back(h.log_likelihood);
    const double total = log_sum_exp(logs);
    for (auto& h : hyps) h.log_weight = h.log_likelihood - total;
}

std::vector<AssociationHypothesis> fallback_hypothesis(AssociationModel& model,
                                                       std::span<const Partition> partitions) {
    AssociationHypothesis h;
    if (!partitions.empty()) h.cells = partitions.front().cells;
    h.cell_to_track.assign(h.cells.size(), -1);
    h.log_likelihood = association_log_likelihood(h, model);
    h.log_weight = 0.0;
    return {h};
}

} // namespace

std::vector<AssociationHypothesis> enumerate_associations(AssociationModel& model) {
    const int n = static_cast<int>(model.num_measurements());
    const int tracks = static_cast<int>(model.num_tracks());
    if (n > 6 || tracks > 4) {
        throw DomainError("enumerate_associations: instance exceeds oracle bounds");
    }
    std::vector<AssociationHypothesis> out;
    for (const Partition& p : exhaustive_partitions(n)) {
        AssociationHypothesis h;
        h.cells = p.cells;
        h.cell_to_track.assign(p.cells.size(), -1);
        std::vector<char> used(tracks, 0);
        std::function<void(std::size_t)> rec = [&](std::size_t c) {
            if (c == p.cells.size()) {
                h.log_likelihood = association_log_likelihood(h, model);
                if (h.log_likelihood > kNegInf) out.push_back(h);
                return;
            }
            h.cell_to_track[c] = -1;
            rec(c + 1);
            for (int t = 0; t < tracks; ++t) {
                if (used[t]) continue;
                used[t] = 1;
                h.cell_to_track[c] = t;
                rec(c + 1);
                used[t] = 0;
            }
            h.cell_to_track[c] = -1;
        };
        rec(0);
    }
    if (out.empty()) return fallback_hypothesis(model, exhaustive_partitions(n));
    normalize(out);
    return out;
}

std::vector<AssociationHypothesis> build_hypotheses(AssociationModel& model,
                                                    std::span<const Partition> partitions,
                                                    const AssociationOptions& options) {
    const int tracks = static_cast<int>(model.num_tracks());
    double log_all_miss = 0.0;
    for (int t = 0; t < tracks; ++t) log_all_miss += model.log_miss(t);

    std::vector<AssociationHypothesis> pooled;
    for (const Partition& p : partitions) {
        const std::size_t m = p.cells.size();
        // Cells with no admissible track have a single option: the background.
        std::vector<int> open_rows;
        std::vector<double> background(m);
        double fixed = log_all_miss;
        bool feasible = true;
        for (std::size_t c = 0; c < m; ++c) {
            background[c] = model.log_background(p.cells[c]);
            bool any_track = false;
            for (int t = 0; t < tracks && !any_track; ++t) {
                any_track = model.log_detect(t, p.cells[c]) > kNegInf;
            }
            if (any_track) {
                open_rows.push_back(static_cast<int>(c));
            } else if (background[c] == kNegInf) {
                feasible = false;
            } else {
                fixed += background[c];
            }
        }
        if (!feasible) continue;

        const std::size_t rows = open_rows.size();
        Matrix cost = Matrix::Constant(static_cast<Eigen::Index>(rows),
                                       tracks + static_cast<Eigen::Index>(rows), kInf);
        for (std::size_t r = 0; r < rows; ++r) {
            const CellIndices& cell = p.cells[open_rows[r]];
            for (int t = 0; t < tracks; ++t) {
                const double ld = model.log_detect(t, cell);
                if (ld > kNegInf) cost(static_cast<Eigen::Index>(r), t) = -(ld - model.log_miss(t));
            }
            const double lb = background[open_rows[r]];
            if (lb > kNegInf) cost(static_cast<Eigen::Index>(r), tracks + static_cast<Eigen::Index>(r)) = -lb;
        }

        std::vector<Assignment> solutions;
        if (rows == 0) {
            solutions.push_back(Assignment{});
        } else {
            solutions = murty_k_best(cost, options.k_best);
        }
        for (const Assignment& a : solutions) {
            AssociationHypothesis h;
            h.cells = p.cells;
            h.cell_to_track.assign(m, -1);
            for (std::size_t r = 0; r < rows; ++r) {
                const int col = a.col_for_row[r];
                h.cell_to_track[open_rows[r]] = col < tracks ? col : -1;
            }
            h.log_likelihood = fixed - a.cost;
            if (h.log_likelihood > kNegInf) pooled.push_back(std::move(h));
        }
    }
    if (pooled.empty()) return fallback_hypothesis(model, partitions);

    normalize(pooled);
    std::stable_sort(pooled.begin(), pooled.end(),
                     [](const AssociationHypothesis& x, const AssociationHypothesis& y) {
                         return x.log_weight > y.log_weight;
                     });
    if (options.truncation < 1.0) {
        double cumulative = 0.0;
        std::size_t keep = 0;
        while (keep < pooled.size() && cumulative < options.truncation) {
            cumulative += std::exp(pooled[keep].log_weight);
            ++keep;
        }
        pooled.resize(std::max<std::size_t>(keep, 1));
        normalize(pooled);
    }
    return pooled;
}

} // namespace etpmb
