#include "etpmb/transport.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <vector>

namespace etpmb {

namespace {

constexpr double kReducedCostTol = 1e-12;

struct Cell {
    int i;
    int j;
};

} // namespace

TransportSolution solve_transport(const Matrix& cost, std::span<const double> supply,
                                  std::span<const double> demand) {
    const int m = static_cast<int>(supply.size());
    const int n = static_cast<int>(demand.size());
    if (cost.rows() != m || cost.cols() != n || m == 0 || n == 0) {
        throw DomainError("solve_transport: cost shape must match supply × demand");
    }
    double total_supply = 0.0;
    double total_demand = 0.0;
    for (double s : supply) {
        if (!(s >= 0.0)) throw DomainError("solve_transport: negative supply");
        total_supply += s;
    }
    for (double d : demand) {
        if (!(d >= 0.0)) throw DomainError("solve_transport: negative demand");
        total_demand += d;
    }
    if (std::abs(total_supply - total_demand) > 1e-9 * std::max(1.0, total_demand)) {
        throw DomainError("solve_transport: problem is not balanced");
    }

    Matrix x = Matrix::Zero(m, n);
    std::vector<std::vector<char>> basic(m, std::vector<char>(n, 0));
    std::vector<Cell> basis;

    // Northwest corner; on simultaneous exhaustion advance the row only so
    // the basis keeps m + n − 1 cells.
    {
        std::vector<double> s(supply.begin(), supply.end());
        std::vector<double> d(demand.begin(), demand.end());
        int i = 0;
        int j = 0;
        while (true) {
            const double q = std::min(s[i], d[j]);
            x(i, j) = q;
            basic[i][j] = 1;
            basis.push_back({i, j});
            s[i] -= q;
            d[j] -= q;
            if (i == m - 1 && j == n - 1) break;
            if (i == m - 1) {
                ++j;
            } else if (j == n - 1) {
                ++i;
            } else if (s[i] <= d[j]) {
                ++i;
            } else {
                ++j;
            }
        }
    }

    TransportSolution out;
    const int max_pivots = 50 * (m + n) * (m + n) + 1000;
    std::vector<double> u(m), v(n);
    // Nodes 0..m−1 are rows, m..m+n−1 are columns.
    std::vector<std::vector<std::pair<int, int>>> adj(m + n);
    while (true) {
        for (auto& a : adj) a.clear();
        for (std::size_t k = 0; k < basis.size(); ++k) {
            adj[basis[k].i].push_back({m + basis[k].j, static_cast<int>(k)});
            adj[m + basis[k].j].push_back({basis[k].i, static_cast<int>(k)});
        }
        // Potentials: u_i + v_j = c_ij on the basis tree.
        std::vector<char> seen(m + n, 0);
        std::queue<int> bfs;
        u[0] = 0.0;
        seen[0] = 1;
        bfs.push(0);
        while (!bfs.empty()) {
            const int node = bfs.front();
            bfs.pop();
            for (auto [next, k] : adj[node]) {
                if (seen[next]) continue;
                seen[next] = 1;
                const Cell& c = basis[k];
                if (next >= m) {
                    v[c.j] = cost(c.i, c.j) - u[c.i];
                } else {
                    u[c.i] = cost(c.i, c.j) - v[c.j];
                }
                bfs.push(next);
            }
        }

        int enter_i = -1;
        int enter_j = -1;
        for (int i = 0; i < m && enter_i < 0; ++i) {
            for (int j = 0; j < n; ++j) {
                if (basic[i][j]) continue;
                const double reduced = cost(i, j) - u[i] - v[j];
                if (reduced < -kReducedCostTol * std::max(1.0, std::abs(cost(i, j)))) {
                    enter_i = i;
                    enter_j = j;
                    break;
                }
            }
        }
        if (enter_i < 0) break;
        if (++out.pivots > max_pivots) {
            throw ConvergenceError("solve_transport: pivot limit exceeded");
        }

        // Tree path from column enter_j back to row enter_i.
        std::vector<int> parent_edge(m + n, -1);
        std::vector<int> parent_node(m + n, -1);
        std::fill(seen.begin(), seen.end(), 0);
        const int target = enter_i;
        bfs.push(m + enter_j);
        seen[m + enter_j] = 1;
        while (!bfs.empty()) {
            const int node = bfs.front();
            bfs.pop();
            if (node == target) break;
            for (auto [next, k] : adj[node]) {
                if (seen[next]) continue;
                seen[next] = 1;
                parent_edge[next] = k;
                parent_node[next] = node;
                bfs.push(next);
            }
        }
        while (!bfs.empty()) bfs.pop();
        // Cycle: entering (+), then alternating signs along the path from
        // row enter_i to column enter_j.
        std::vector<int> path;
        for (int node = target; node != m + enter_j; node = parent_node[node]) {
            path.push_back(parent_edge[node]);
        }
        int leave = -1;
        double theta = 0.0;
        for (std::size_t p = 0; p < path.size(); p += 2) {
            const Cell& c = basis[path[p]];
            const double val = x(c.i, c.j);
            if (leave < 0 || val < theta ||
                (val == theta && (c.i < basis[leave].i ||
                                  (c.i == basis[leave].i && c.j < basis[leave].j)))) {
                leave = path[p];
                theta = val;
            }
        }
        x(enter_i, enter_j) += theta;
        for (std::size_t p = 0; p < path.size(); ++p) {
            const Cell& c = basis[path[p]];
            x(c.i, c.j) += (p % 2 == 0) ? -theta : theta;
        }
        const Cell gone = basis[leave];
        x(gone.i, gone.j) = 0.0;
        basic[gone.i][gone.j] = 0;
        basis[leave] = {enter_i, enter_j};
        basic[enter_i][enter_j] = 1;
    }

    out.plan = x.cwiseMax(0.0);
    out.cost = (cost.array() * out.plan.array()).sum();
    return out;
}

} // namespace etpmb
