#pragma once

#include <limits>
#include <stdexcept>
#include <vector>

#include "hycharge/matrix.hpp"

namespace hycharge {

/// Cost value with an exact secondary component. The primary part carries the
/// real objective; the tie part only separates solutions whose primary costs
/// are bit-equal, so it never perturbs the optimum. Tie parts are small
/// integers stored in doubles and stay exact.
struct PairCost {
    double primary = 0.0;
    double tie = 0.0;

    friend PairCost operator+(PairCost a, PairCost b) {
        return {a.primary + b.primary, a.tie + b.tie};
    }
    friend PairCost operator-(PairCost a, PairCost b) {
        return {a.primary - b.primary, a.tie - b.tie};
    }
    PairCost& operator+=(PairCost o) {
        primary += o.primary;
        tie += o.tie;
        return *this;
    }
    PairCost& operator-=(PairCost o) {
        primary -= o.primary;
        tie -= o.tie;
        return *this;
    }
    friend bool operator<(PairCost a, PairCost b) {
        if (a.primary != b.primary) return a.primary < b.primary;
        return a.tie < b.tie;
    }

    static PairCost infinity() { return {std::numeric_limits<double>::infinity(), 0.0}; }
};

/// Minimum-cost perfect assignment on a square matrix via shortest
/// augmenting paths with potentials (Jonker-Volgenant scheme), O(n^3).
/// Returns row -> column. Fully deterministic for a fixed matrix.
inline std::vector<int> min_cost_assignment(const Matrix<PairCost>& cost) {
    if (cost.rows() != cost.cols())
        throw std::invalid_argument("assignment: cost matrix must be square");
    const int n = static_cast<int>(cost.rows());
    std::vector<int> match_col(n, -1);
    if (n == 0) return match_col;

    // 1-based working arrays; index 0 is the virtual start column.
    std::vector<PairCost> u(n + 1), v(n + 1);
    std::vector<int> col_row(n + 1, 0);  // row matched to each column
    std::vector<int> way(n + 1, 0);

    for (int i = 1; i <= n; ++i) {
        col_row[0] = i;
        int j0 = 0;
        std::vector<PairCost> min_slack(n + 1, PairCost::infinity());
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = col_row[j0];
            int j1 = 0;
            PairCost delta = PairCost::infinity();
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const PairCost cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < min_slack[j]) {
                    min_slack[j] = cur;
                    way[j] = j0;
                }
                if (min_slack[j] < delta) {
                    delta = min_slack[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[col_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    min_slack[j] -= delta;
                }
            }
            j0 = j1;
        } while (col_row[j0] != 0);
        do {
            const int j1 = way[j0];
            col_row[j0] = col_row[j1];
            j0 = j1;
        } while (j0);
    }

    for (int j = 1; j <= n; ++j)
        if (col_row[j] > 0) match_col[col_row[j] - 1] = j - 1;
    return match_col;
}

} // namespace hycharge
