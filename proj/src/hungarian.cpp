#include "tcdet/hungarian.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace tcdet {

std::vector<int> solve_assignment_min(const std::vector<std::vector<double>>& cost) {
    const int n = static_cast<int>(cost.size());
    if (n == 0) return {};
    const int m = static_cast<int>(cost[0].size());
    if (n > m)
        throw std::invalid_argument("solve_assignment_min: more rows than columns");
    for (const auto& row : cost) {
        if (static_cast<int>(row.size()) != m)
            throw std::invalid_argument("solve_assignment_min: ragged cost matrix");
        for (double c : row)
            if (!std::isfinite(c))
                throw std::invalid_argument("solve_assignment_min: non-finite cost");
    }

    const double inf = std::numeric_limits<double>::infinity();
    // 1-indexed potentials and matching; p[j] is the row matched to column j
    std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
    std::vector<int> p(m + 1, 0), way(m + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(m + 1, inf);
        std::vector<char> used(m + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            int j1 = -1;
            double delta = inf;
            for (int j = 1; j <= m; ++j) {
                if (used[j]) continue;
                const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= m; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }

    std::vector<int> row_to_col(n, -1);
    for (int j = 1; j <= m; ++j)
        if (p[j] > 0) row_to_col[p[j] - 1] = j - 1;
    return row_to_col;
}

}  // namespace tcdet
