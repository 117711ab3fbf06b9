#include "etpmb/transport.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <numeric>

using namespace etpmb;

namespace {

std::vector<double> random_simplex(oracle::Sampler& s, int n, double total) {
    std::vector<double> v(n);
    double sum = 0.0;
    for (double& x : v) sum += (x = s.uniform(0.05, 1.0));
    for (double& x : v) x *= total / sum;
    return v;
}

} // namespace

TEST(Transport, MatchesVertexEnumeration) {
    oracle::Sampler s(61);
    for (int i = 0; i < 300; ++i) {
        const int m = s.integer(1, 4);
        const int n = s.integer(1, 3);
        const double total = s.uniform(0.5, 3.0);
        const auto supply = random_simplex(s, m, total);
        const auto demand = random_simplex(s, n, total);
        Matrix cost(m, n);
        for (int r = 0; r < m; ++r)
            for (int c = 0; c < n; ++c) cost(r, c) = s.uniform(-2.0, 5.0);
        const TransportSolution sol = solve_transport(cost, supply, demand);
        EXPECT_NEAR(sol.cost, oracle::transport_vertex_min(cost, supply, demand), 1e-9);
        EXPECT_GE(sol.plan.minCoeff(), -1e-12);
        for (int r = 0; r < m; ++r) EXPECT_NEAR(sol.plan.row(r).sum(), supply[r], 1e-9);
        for (int c = 0; c < n; ++c) EXPECT_NEAR(sol.plan.col(c).sum(), demand[c], 1e-9);
        EXPECT_NEAR((sol.plan.array() * cost.array()).sum(), sol.cost, 1e-9);
    }
}

TEST(Transport, DegenerateIntegralSupplies) {
    // Unit demands with 0/1 supplies: every basis is degenerate.
    Matrix cost(3, 3);
    cost << 1, 2, 3, 2, 4, 6, 3, 6, 9;
    const std::vector<double> supply = {1, 1, 1}, demand = {1, 1, 1};
    const TransportSolution sol = solve_transport(cost, supply, demand);
    EXPECT_NEAR(sol.cost, oracle::transport_vertex_min(cost, supply, demand), 1e-12);
}

TEST(Transport, UnbalancedThrows) {
    const Matrix cost = Matrix::Zero(2, 2);
    const std::vector<double> supply = {1.0, 1.0}, demand = {1.0, 0.5};
    EXPECT_THROW(solve_transport(cost, supply, demand), DomainError);
}
