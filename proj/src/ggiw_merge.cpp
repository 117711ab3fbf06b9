#include "etpmb/ggiw_merge.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace etpmb {

namespace {

double positive_total(std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0) || !std::isfinite(w)) {
            throw DomainError("mixture merge: weights must be finite and nonnegative");
        }
        total += w;
    }
    if (!(total > 0.0)) throw DomainError("mixture merge: total weight must be positive");
    return total;
}

/// Index of the only positive weight, or -1 when several are positive.
int sole_component(std::span<const double> weights) {
    int found = -1;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] > 0.0) {
            if (found >= 0) return -1;
            found = static_cast<int>(i);
        }
    }
    return found;
}

} // namespace

GammaParams gamma_merge(std::span<const double> weights, std::span<const GammaParams> comps) {
    const double total = positive_total(weights);
    if (const int only = sole_component(weights); only >= 0) return comps[only];
    double mean = 0.0;
    double mean_log = 0.0;
    for (std::size_t i = 0; i < comps.size(); ++i) {
        if (weights[i] == 0.0) continue;
        const double w = weights[i] / total;
        mean += w * comps[i].a / comps[i].b;
        mean_log += w * (digamma(comps[i].a) - std::log(comps[i].b));
    }
    const double target = std::min(mean_log - std::log(mean), -1e-15);
    const double a = solve_gamma_shape(target);
    return GammaParams{a, a / mean};
}

GaussianKinematics gaussian_merge(std::span<const double> weights,
                                  std::span<const GaussianKinematics> comps) {
    const double total = positive_total(weights);
    if (const int only = sole_component(weights); only >= 0) return comps[only];
    Vector mean = Vector::Zero(comps.front().m.size());
    for (std::size_t i = 0; i < comps.size(); ++i) mean += (weights[i] / total) * comps[i].m;
    Matrix cov = Matrix::Zero(mean.size(), mean.size());
    for (std::size_t i = 0; i < comps.size(); ++i) {
        if (weights[i] == 0.0) continue;
        const Vector delta = comps[i].m - mean;
        cov += (weights[i] / total) * (comps[i].P + delta * delta.transpose());
    }
    return GaussianKinematics{mean, 0.5 * (cov + cov.transpose())};
}

InverseWishartExtent iw_merge(std::span<const double> weights,
                              std::span<const InverseWishartExtent> comps) {
    const double total = positive_total(weights);
    if (const int only = sole_component(weights); only >= 0) return comps[only];
    const int d = static_cast<int>(comps.front().V.rows());
    Matrix c1 = Matrix::Zero(d, d);
    double rhs = 0.0;
    double min_dof = comps.front().v;
    for (std::size_t i = 0; i < comps.size(); ++i) {
        if (weights[i] == 0.0) continue;
        const double w = weights[i] / total;
        const InverseWishartExtent& c = comps[i];
        c1 += w * (c.v - d - 1.0) * c.V.inverse();
        double psi_sum = 0.0;
        for (int j = 1; j <= d; ++j) psi_sum += digamma(0.5 * (c.v - d - j));
        rhs += w * (psi_sum + d * std::log(2.0) - log_det_spd(c.V));
        min_dof = std::min(min_dof, c.v);
    }
    c1 = 0.5 * (c1 + c1.transpose());
    double v = min_dof;
    try {
        v = solve_iw_dof(d, rhs, log_det_spd(c1));
    } catch (const ConvergenceError&) {
        // Keep min_dof; only the E[χ⁻¹] statistic is matched then.
    }
    Matrix V = (v - d - 1.0) * c1.inverse();
    return InverseWishartExtent{v, 0.5 * (V + V.transpose())};
}

GGIWDensity ggiw_mixture_merge(std::span<const WeightedGGIW> mix, double tau_g) {
    if (mix.empty()) throw DomainError("ggiw_mixture_merge: empty mixture");
    std::size_t best = 0;
    for (std::size_t i = 1; i < mix.size(); ++i) {
        if (mix[i].weight > mix[best].weight) best = i;
    }
    std::vector<double> weights;
    std::vector<GammaParams> gammas;
    std::vector<GaussianKinematics> kins;
    std::vector<InverseWishartExtent> exts;
    for (std::size_t i = 0; i < mix.size(); ++i) {
        if (!(mix[i].weight > 0.0) && i != best) continue;
        if (i != best && std::isfinite(tau_g) &&
            !(ggiw_kl(*mix[best].density, *mix[i].density) < tau_g)) {
            continue;
        }
        weights.push_back(mix[i].weight);
        gammas.push_back(mix[i].density->gamma);
        kins.push_back(mix[i].density->kin);
        exts.push_back(mix[i].density->ext);
    }
    double total = 0.0;
    for (double w : weights) total += w;
    if (weights.size() == 1 || !(total > 0.0)) return *mix[best].density;
    GGIWDensity out;
    out.gamma = gamma_merge(weights, gammas);
    out.kin = gaussian_merge(weights, kins);
    out.ext = iw_merge(weights, exts);
    return out;
}

} // namespace etpmb
