#include "etpmb/assignment.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <limits>
#include <set>

using namespace etpmb;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Matrix random_matrix(oracle::Sampler& s, int rows, int cols, double inf_prob = 0.0) {
    Matrix m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j)
            m(i, j) = s.uniform(0.0, 1.0) < inf_prob ? kInf : s.uniform(-5.0, 10.0);
    return m;
}

double cost_of(const Matrix& m, const std::vector<int>& col_for_row) {
    double c = 0.0;
    for (std::size_t r = 0; r < col_for_row.size(); ++r)
        if (col_for_row[r] >= 0) c += m(static_cast<Eigen::Index>(r), col_for_row[r]);
    return c;
}

} // namespace

TEST(Hungarian, IdentityFavoring) {
    Matrix m(2, 2);
    m << 0, 1, 1, 0;
    const auto a = hungarian(m);
    ASSERT_TRUE(a);
    EXPECT_EQ(a->col_for_row, (std::vector<int>{0, 1}));
    EXPECT_EQ(a->cost, 0.0);
}

TEST(Hungarian, MatchesBruteForceIncludingRectangular) {
    oracle::Sampler s(51);
    for (int i = 0; i < 500; ++i) {
        const int rows = s.integer(1, 5);
        const int cols = s.integer(1, 5);
        const Matrix m = random_matrix(s, rows, cols);
        const auto a = hungarian(m);
        ASSERT_TRUE(a);
        EXPECT_NEAR(a->cost, oracle::brute_force_min(m), 1e-9);
        EXPECT_NEAR(cost_of(m, a->col_for_row), a->cost, 1e-9);
        std::set<int> used;
        int assigned = 0;
        for (int c : a->col_for_row)
            if (c >= 0) {
                used.insert(c);
                ++assigned;
            }
        EXPECT_EQ(assigned, std::min(rows, cols));
        EXPECT_EQ(static_cast<int>(used.size()), assigned);
    }
}

TEST(Hungarian, ForbiddenEntries) {
    oracle::Sampler s(52);
    for (int i = 0; i < 300; ++i) {
        const int n = s.integer(2, 5);
        const Matrix m = random_matrix(s, n, n, 0.4);
        const double ref = oracle::brute_force_min(m);
        const auto a = hungarian(m);
        if (std::isinf(ref)) {
            EXPECT_FALSE(a);
        } else {
            ASSERT_TRUE(a);
            EXPECT_NEAR(a->cost, ref, 1e-9);
        }
    }
}

TEST(Hungarian, RejectsNaN) {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 1) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(hungarian(m), DomainError);
}

TEST(Murty, FirstEqualsHungarian) {
    oracle::Sampler s(53);
    const Matrix m = random_matrix(s, 4, 4);
    const auto k = murty_k_best(m, 1);
    ASSERT_EQ(k.size(), 1u);
    EXPECT_NEAR(k[0].cost, hungarian(m)->cost, 1e-12);
}

TEST(Murty, MatchesSortedBruteForce) {
    oracle::Sampler s(54);
    for (int i = 0; i < 100; ++i) {
        const int n = s.integer(3, 5);
        const Matrix m = random_matrix(s, n, n);
        auto all = oracle::all_injections(m);
        std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.cost < b.cost; });
        const auto k = murty_k_best(m, 10);
        ASSERT_EQ(k.size(), std::min<std::size_t>(10, all.size()));
        for (std::size_t r = 0; r < k.size(); ++r) {
            EXPECT_NEAR(k[r].cost, all[r].cost, 1e-9);
            EXPECT_EQ(k[r].col_for_row, all[r].col_for_row);
        }
    }
}

TEST(Murty, ExhaustsFeasibleSet) {
    Matrix m(3, 3);
    m << 1, kInf, 2, 3, 1, kInf, kInf, 2, 1;
    const auto k = murty_k_best(m, 50);
    std::size_t feasible = 0;
    for (const auto& inj : oracle::all_injections(m))
        if (std::isfinite(inj.cost)) ++feasible;
    EXPECT_EQ(k.size(), feasible);
    for (std::size_t r = 1; r < k.size(); ++r) EXPECT_LE(k[r - 1].cost, k[r].cost);
}

TEST(Murty, InfeasibleGivesEmpty) {
    Matrix m(2, 2);
    m << kInf, kInf, 0, 0;
    EXPECT_TRUE(murty_k_best(m, 5).empty());
}

TEST(Murty, RectangularMatchesBruteForce) {
    oracle::Sampler s(55);
    for (int i = 0; i < 50; ++i) {
        const Matrix m = random_matrix(s, 3, 5);
        auto all = oracle::all_injections(m);
        std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) { return a.cost < b.cost; });
        const auto k = murty_k_best(m, 15);
        ASSERT_EQ(k.size(), 15u);
        for (std::size_t r = 0; r < k.size(); ++r) EXPECT_NEAR(k[r].cost, all[r].cost, 1e-9);
    }
}

TEST(Murty, TiesOrderedLexicographically) {
    const Matrix m = Matrix::Zero(3, 3);
    const auto k = murty_k_best(m, 6);
    ASSERT_EQ(k.size(), 6u);
    for (std::size_t r = 1; r < k.size(); ++r) EXPECT_LT(k[r - 1].col_for_row, k[r].col_for_row);
}
