#include "etpmb/metrics.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

using namespace etpmb;

namespace {

EllipseEstimate ellipse(double x, double y, Matrix extent = Matrix::Identity(2, 2)) {
    return {(Vector(2) << x, y).finished(), std::move(extent)};
}

EllipseEstimate random_ellipse(oracle::Sampler& s, double span = 15.0) {
    return ellipse(s.uniform(-span, span), s.uniform(-span, span), s.random_spd(2, 0.5, 4.0));
}

std::vector<EllipseEstimate> random_set(oracle::Sampler& s, int max_size) {
    std::vector<EllipseEstimate> out(s.integer(0, max_size));
    for (auto& e : out) e = random_ellipse(s);
    return out;
}

/// GOSPA at alpha = 2 by enumerating every injection of the smaller set.
double gospa_oracle(const std::vector<EllipseEstimate>& x, const std::vector<EllipseEstimate>& y, double c,
                    double p) {
    const double unmatched = 0.5 * std::pow(c, p) * std::abs(static_cast<double>(x.size()) - y.size());
    if (x.empty() || y.empty()) return std::pow(unmatched, 1.0 / p);
    Matrix cost(x.size(), y.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = 0; j < y.size(); ++j) cost(i, j) = std::pow(std::min(gwd(x[i], y[j]), c), p);
    return std::pow(oracle::brute_force_min(cost) + unmatched, 1.0 / p);
}

} // namespace

TEST(Gwd, Examples) {
    EXPECT_NEAR(gwd(ellipse(1, 2), ellipse(1, 2)), 0.0, 1e-7);
    EXPECT_NEAR(gwd(ellipse(0, 0, 2.0 * Matrix::Identity(2, 2)), ellipse(3, 0, 2.0 * Matrix::Identity(2, 2))), 3.0, 1e-12);
    EXPECT_NEAR(gwd(ellipse(0, 0, 4.0 * Matrix::Identity(2, 2)), ellipse(0, 0)), std::sqrt(2.0), 1e-12);
}

TEST(Gwd, CommutingDiagonalClosedForm) {
    Matrix a = Matrix::Zero(2, 2), b = Matrix::Zero(2, 2);
    a.diagonal() << 9.0, 1.0;
    b.diagonal() << 1.0, 4.0;
    // Σ (√a_i − √b_i)² = 4 + 1.
    EXPECT_NEAR(gwd(ellipse(0, 0, a), ellipse(0, 0, b)), std::sqrt(5.0), 1e-12);
}

TEST(Gwd, MetricAxioms) {
    oracle::Sampler s(101);
    for (int i = 0; i < 1000; ++i) {
        const auto a = random_ellipse(s), b = random_ellipse(s), c = random_ellipse(s);
        const double ab = gwd(a, b);
        EXPECT_NEAR(ab, gwd(b, a), 1e-9);
        EXPECT_GE(ab, 0.0);
        EXPECT_LE(gwd(a, c), ab + gwd(b, c) + 1e-9);
        EXPECT_LT(gwd(a, a), 1e-6);
    }
}

TEST(Ospa, Examples) {
    const std::vector<EllipseEstimate> none;
    const std::vector<EllipseEstimate> one = {ellipse(0, 0)};
    EXPECT_EQ(ospa(none, none, 10.0, 1.0), 0.0);
    EXPECT_NEAR(ospa(one, none, 10.0, 1.0), 10.0, 1e-12);
    EXPECT_NEAR(ospa(one, one, 10.0, 1.0), 0.0, 1e-7);
    const std::vector<EllipseEstimate> two = {ellipse(0, 0), ellipse(20, 0)};
    const std::vector<EllipseEstimate> three = {ellipse(0, 0), ellipse(20, 0), ellipse(50, 50)};
    EXPECT_NEAR(ospa(two, three, 10.0, 1.0), 10.0 / 3.0, 1e-7);
    const std::vector<EllipseEstimate> shifted = {ellipse(3, 0)};
    EXPECT_NEAR(ospa(one, shifted, 10.0, 2.0), 3.0, 1e-12);
}

TEST(Gospa, Examples) {
    const std::vector<EllipseEstimate> none;
    const std::vector<EllipseEstimate> one = {ellipse(0, 0)};
    const GospaResult empty = gospa(none, none, 10.0, 1.0);
    EXPECT_EQ(empty.total, 0.0);
    EXPECT_EQ(empty.num_missed + empty.num_false, 0);

    const GospaResult miss = gospa(one, none, 10.0, 1.0, 2.0);
    EXPECT_EQ(miss.total, 5.0);
    EXPECT_EQ(miss.missed, 5.0);
    EXPECT_EQ(miss.num_missed, 1);

    const GospaResult hit = gospa(one, {ellipse(3, 0)}, 10.0, 1.0);
    EXPECT_NEAR(hit.total, 3.0, 1e-12);
    EXPECT_NEAR(hit.localization, 3.0, 1e-12);
    EXPECT_EQ(hit.num_missed + hit.num_false, 0);
}

TEST(Gospa, DistantPairCountsAsMissAndFalse) {
    const GospaResult r = gospa({ellipse(0, 0)}, {ellipse(40, 0)}, 10.0, 1.0);
    EXPECT_EQ(r.num_missed, 1);
    EXPECT_EQ(r.num_false, 1);
    EXPECT_EQ(r.localization, 0.0);
    EXPECT_NEAR(r.total, 10.0, 1e-12);
}

TEST(Gospa, FarFalseEstimateAddsHalfCutoff) {
    oracle::Sampler s(102);
    for (int i = 0; i < 200; ++i) {
        const auto truth = random_set(s, 4);
        auto est = random_set(s, 4);
        const double before = gospa(truth, est, 10.0, 1.0).total;
        est.push_back(ellipse(1e4, 1e4));
        EXPECT_NEAR(gospa(truth, est, 10.0, 1.0).total, before + 5.0, 1e-9);
    }
}

TEST(Gospa, DecompositionAndOracle) {
    oracle::Sampler s(103);
    for (int i = 0; i < 500; ++i) {
        const auto x = random_set(s, 5), y = random_set(s, 5);
        const GospaResult r = gospa(x, y, 10.0, 1.0);
        EXPECT_NEAR(r.total, r.localization + r.missed + r.false_alarms, 1e-12);
        EXPECT_NEAR(r.missed, 5.0 * r.num_missed, 1e-12);
        EXPECT_NEAR(r.false_alarms, 5.0 * r.num_false, 1e-12);
        EXPECT_EQ(static_cast<int>(x.size()) - r.num_missed, static_cast<int>(y.size()) - r.num_false);
        EXPECT_NEAR(r.total, gospa_oracle(x, y, 10.0, 1.0), 1e-9);
        EXPECT_NEAR(gospa(x, y, 10.0, 2.0).total, gospa_oracle(x, y, 10.0, 2.0), 1e-9);
    }
}

TEST(Gospa, MetricAxiomsAndPermutationInvariance) {
    oracle::Sampler s(104);
    for (int i = 0; i < 1000; ++i) {
        const auto x = random_set(s, 4), y = random_set(s, 4), z = random_set(s, 4);
        const double xy = gospa(x, y, 10.0, 1.0).total;
        EXPECT_NEAR(xy, gospa(y, x, 10.0, 1.0).total, 1e-9);
        EXPECT_LT(gospa(x, x, 10.0, 1.0).total, 1e-6 * std::max<std::size_t>(1, x.size()));
        EXPECT_LE(gospa(x, z, 10.0, 1.0).total, xy + gospa(y, z, 10.0, 1.0).total + 1e-9);
        auto xp = x, yp = y;
        std::shuffle(xp.begin(), xp.end(), s.rng);
        std::shuffle(yp.begin(), yp.end(), s.rng);
        EXPECT_NEAR(gospa(xp, yp, 10.0, 1.0).total, xy, 1e-9);
        EXPECT_NEAR(ospa(xp, yp, 10.0, 1.0), ospa(x, y, 10.0, 1.0), 1e-9);
    }
}
