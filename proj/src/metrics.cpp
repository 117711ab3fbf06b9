#include "etpmb/metrics.hpp"

#include "etpmb/assignment.hpp"

#include <algorithm>
#include <cmath>

namespace etpmb {

double gwd(const EllipseEstimate& x, const EllipseEstimate& y) {
    const Matrix root_x = spd_sqrt(x.extent);
    const Matrix cross = spd_sqrt(root_x * y.extent * root_x);
    const double shape = (x.extent + y.extent - 2.0 * cross).trace();
    return std::sqrt(std::max(0.0, (x.center - y.center).squaredNorm() + shape));
}

namespace {

Matrix cutoff_costs(const std::vector<EllipseEstimate>& a, const std::vector<EllipseEstimate>& b,
                    double c, double p, Matrix* distances) {
    Matrix cost(static_cast<Eigen::Index>(a.size()), static_cast<Eigen::Index>(b.size()));
    if (distances) distances->resize(cost.rows(), cost.cols());
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) {
            const double d = gwd(a[i], b[j]);
            if (distances) (*distances)(i, j) = d;
            cost(i, j) = std::pow(std::min(d, c), p);
        }
    }
    return cost;
}

} // namespace

double ospa(const std::vector<EllipseEstimate>& truth, const std::vector<EllipseEstimate>& est,
            double c, double p) {
    const std::size_t n = std::max(truth.size(), est.size());
    const std::size_t m = std::min(truth.size(), est.size());
    if (n == 0) return 0.0;
    double matched = 0.0;
    if (m > 0) {
        const auto sol = hungarian(cutoff_costs(truth, est, c, p, nullptr));
        matched = sol->cost;
    }
    const double value = (matched + std::pow(c, p) * static_cast<double>(n - m)) / static_cast<double>(n);
    return std::pow(value, 1.0 / p);
}

GospaResult gospa(const std::vector<EllipseEstimate>& truth, const std::vector<EllipseEstimate>& est,
                  double c, double p, double alpha) {
    GospaResult out;
    const double unit = std::pow(c, p) / alpha;
    std::vector<int> truth_match(truth.size(), -1);
    Matrix dist;
    if (!truth.empty() && !est.empty()) {
        const auto sol = hungarian(cutoff_costs(truth, est, c, p, &dist));
        truth_match = sol->col_for_row;
    }
    std::vector<char> est_used(est.size(), 0);
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const int j = truth_match[i];
        if (j >= 0 && dist(static_cast<Eigen::Index>(i), j) < c) {
            out.localization += std::pow(dist(static_cast<Eigen::Index>(i), j), p);
            est_used[j] = 1;
        } else {
            ++out.num_missed;
        }
    }
    for (char used : est_used) {
        if (!used) ++out.num_false;
    }
    out.missed = unit * out.num_missed;
    out.false_alarms = unit * out.num_false;
    const double sum = out.localization + out.missed + out.false_alarms;
    out.total = p == 1.0 ? sum : std::pow(sum, 1.0 / p);
    return out;
}

} // namespace etpmb
