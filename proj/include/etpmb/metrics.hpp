#pragma once

#include "etpmb/special_math.hpp"

#include <vector>

namespace etpmb {

struct EllipseEstimate {
    Vector center;
    Matrix extent;
};

/// Gaussian Wasserstein distance (unsquared).
double gwd(const EllipseEstimate& x, const EllipseEstimate& y);

double ospa(const std::vector<EllipseEstimate>& truth, const std::vector<EllipseEstimate>& est,
            double c, double p);

struct GospaResult {
    double total = 0.0;
    double localization = 0.0;
    double missed = 0.0;
    double false_alarms = 0.0;
    int num_missed = 0;
    int num_false = 0;
};

/// GOSPA with GWD base distance. For alpha = 2, total^p = localization +
/// missed + false, where matched pairs at distance ≥ c count as one missed
/// and one false target.
GospaResult gospa(const std::vector<EllipseEstimate>& truth, const std::vector<EllipseEstimate>& est,
                  double c, double p, double alpha = 2.0);

} // namespace etpmb
