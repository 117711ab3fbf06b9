#include "etpmb/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

namespace etpmb {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Dijkstra-like search for a shortest augmenting path from row `i`.
/// Returns the sink column, or -1 if none is reachable.
int augmenting_path(const Matrix& cost, std::vector<double>& u, std::vector<double>& v,
                    std::vector<int>& path, const std::vector<int>& row4col,
                    std::vector<double>& spc, int i, std::vector<char>& SR,
                    std::vector<char>& SC, std::vector<int>& remaining, double& min_val) {
    const int nc = static_cast<int>(cost.cols());
    min_val = 0.0;
    int num_remaining = nc;
    for (int it = 0; it < nc; ++it) remaining[it] = nc - it - 1;
    std::fill(SR.begin(), SR.end(), 0);
    std::fill(SC.begin(), SC.end(), 0);
    std::fill(spc.begin(), spc.end(), kInf);

    int sink = -1;
    while (sink == -1) {
        int index = -1;
        double lowest = kInf;
        SR[i] = 1;
        for (int it = 0; it < num_remaining; ++it) {
            const int j = remaining[it];
            const double r = min_val + cost(i, j) - u[i] - v[j];
            if (r < spc[j]) {
                path[j] = i;
                spc[j] = r;
            }
            if (spc[j] < lowest || (spc[j] == lowest && row4col[j] == -1)) {
                lowest = spc[j];
                index = it;
            }
        }
        min_val = lowest;
        if (min_val == kInf || index < 0) return -1;
        const int j = remaining[index];
        if (row4col[j] == -1) {
            sink = j;
        } else {
            i = row4col[j];
        }
        SC[j] = 1;
        remaining[index] = remaining[--num_remaining];
    }
    return sink;
}

/// Requires rows ≤ cols.
std::optional<std::vector<int>> solve_wide(const Matrix& cost) {
    const int nr = static_cast<int>(cost.rows());
    const int nc = static_cast<int>(cost.cols());
    std::vector<double> u(nr, 0.0), v(nc, 0.0), spc(nc, kInf);
    std::vector<int> path(nc, -1), col4row(nr, -1), row4col(nc, -1), remaining(nc);
    std::vector<char> SR(nr), SC(nc);

    for (int cur = 0; cur < nr; ++cur) {
        double min_val = 0.0;
        const int sink = augmenting_path(cost, u, v, path, row4col, spc, cur, SR, SC, remaining,
                                         min_val);
        if (sink < 0) return std::nullopt;
        u[cur] += min_val;
        for (int i = 0; i < nr; ++i) {
            if (SR[i] && i != cur) u[i] += min_val - spc[col4row[i]];
        }
        for (int j = 0; j < nc; ++j) {
            if (SC[j]) v[j] -= min_val - spc[j];
        }
        int j = sink;
        while (true) {
            const int i = path[j];
            row4col[j] = i;
            std::swap(col4row[i], j);
            if (i == cur) break;
        }
    }
    return col4row;
}

double assignment_cost(const Matrix& cost, const std::vector<int>& col_for_row) {
    double total = 0.0;
    for (std::size_t r = 0; r < col_for_row.size(); ++r) {
        if (col_for_row[r] >= 0) total += cost(static_cast<Eigen::Index>(r), col_for_row[r]);
    }
    return total;
}

} // namespace

std::optional<Assignment> hungarian(const Matrix& cost) {
    for (Eigen::Index i = 0; i < cost.rows(); ++i)
        for (Eigen::Index j = 0; j < cost.cols(); ++j)
            if (std::isnan(cost(i, j)) || cost(i, j) == -kInf)
                throw DomainError("hungarian: entries must be finite or +inf");

    Assignment out;
    if (cost.rows() == 0 || cost.cols() == 0) {
        out.col_for_row.assign(static_cast<std::size_t>(cost.rows()), -1);
        return out;
    }
    if (cost.rows() <= cost.cols()) {
        auto sol = solve_wide(cost);
        if (!sol) return std::nullopt;
        out.col_for_row = std::move(*sol);
    } else {
        auto sol = solve_wide(cost.transpose());
        if (!sol) return std::nullopt;
        out.col_for_row.assign(static_cast<std::size_t>(cost.rows()), -1);
        for (std::size_t c = 0; c < sol->size(); ++c) out.col_for_row[(*sol)[c]] = static_cast<int>(c);
    }
    out.cost = assignment_cost(cost, out.col_for_row);
    if (!std::isfinite(out.cost)) return std::nullopt;
    return out;
}

namespace {

struct MurtyNode {
    Assignment sol;
    Matrix cost;
    /// Rows before this index are fixed by inherited constraints.
    std::size_t first_free = 0;
};

struct NodeOrder {
    bool operator()(const MurtyNode& x, const MurtyNode& y) const {
        if (x.sol.cost != y.sol.cost) return x.sol.cost > y.sol.cost;
        return x.sol.col_for_row > y.sol.col_for_row;
    }
};

} // namespace

std::vector<Assignment> murty_k_best(const Matrix& cost, std::size_t K) {
    std::vector<Assignment> out;
    if (K == 0) return out;
    // Work with rows ≤ cols so every row is assigned.
    const bool transposed = cost.rows() > cost.cols();
    const Matrix base = transposed ? Matrix(cost.transpose()) : cost;

    auto to_output = [&](const Assignment& a) {
        if (!transposed) return a;
        Assignment t;
        t.cost = a.cost;
        t.col_for_row.assign(static_cast<std::size_t>(cost.rows()), -1);
        for (std::size_t c = 0; c < a.col_for_row.size(); ++c) {
            t.col_for_row[a.col_for_row[c]] = static_cast<int>(c);
        }
        return t;
    };

    auto first = hungarian(base);
    if (!first) return out;
    std::priority_queue<MurtyNode, std::vector<MurtyNode>, NodeOrder> queue;
    queue.push(MurtyNode{*first, base, 0});

    const std::size_t nr = static_cast<std::size_t>(base.rows());
    while (!queue.empty() && out.size() < K) {
        MurtyNode node = queue.top();
        queue.pop();
        out.push_back(to_output(node.sol));
        if (out.size() == K) break;

        Matrix constrained = node.cost;
        for (std::size_t k = node.first_free; k < nr; ++k) {
            const int row = static_cast<int>(k);
            const int col = node.sol.col_for_row[k];
            Matrix child = constrained;
            child(row, col) = kInf;
            if (auto sol = hungarian(child)) {
                sol->cost = assignment_cost(base, sol->col_for_row);
                queue.push(MurtyNode{std::move(*sol), std::move(child), k});
            }
            // Force (row, col) for the remaining children.
            const double keep = constrained(row, col);
            constrained.row(row).setConstant(kInf);
            constrained.col(col).setConstant(kInf);
            constrained(row, col) = keep;
        }
    }
    return out;
}

} // namespace etpmb
