#include "zgcnet/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "zgcnet/error.hpp"

namespace zgcnet {

std::vector<DiagramPoint> diagram_points(const ZPD& zpd, int dim) {
    std::vector<DiagramPoint> out;
    for (const auto& p : zpd.points_of(dim)) out.push_back({p.birth.value(), p.death.value()});
    return out;
}

double ground_distance(const DiagramPoint& a, const DiagramPoint& b) {
    return std::max(std::abs(a.birth - b.birth), std::abs(a.death - b.death));
}

double diagonal_distance(const DiagramPoint& a) { return std::abs(a.death - a.birth) / 2.0; }

std::vector<int> solve_assignment(const std::vector<std::vector<double>>& cost) {
    const int n = static_cast<int>(cost.size());
    if (n == 0) return {};
    for (const auto& row : cost)
        if (static_cast<int>(row.size()) != n) throw ShapeError("assignment cost matrix must be square");
    const double inf = std::numeric_limits<double>::infinity();
    // 1-based arrays; column 0 is a virtual start.
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
    std::vector<int> match(n + 1, 0), way(n + 1, 0);
    std::vector<char> used(n + 1);
    for (int i = 1; i <= n; ++i) {
        match[0] = i;
        int j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            const int i0 = match[j0];
            double delta = inf;
            int j1 = 0;
            for (int j = 1; j <= n; ++j) {
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
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[match[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (match[j0] != 0);
        do {
            const int j1 = way[j0];
            match[j0] = match[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<int> row_to_col(n);
    for (int j = 1; j <= n; ++j) row_to_col[match[j] - 1] = j - 1;
    return row_to_col;
}

MatchingResult wasserstein1(const std::vector<DiagramPoint>& d1, const std::vector<DiagramPoint>& d2) {
    for (const auto* d : {&d1, &d2})
        for (const auto& p : *d)
            if (!std::isfinite(p.birth) || !std::isfinite(p.death)) throw InvalidInput("diagram point is not finite");
    const int n1 = static_cast<int>(d1.size()), n2 = static_cast<int>(d2.size());
    const int n = n1 + n2;
    // rows: d1 points, then diagonal slots for d2; columns: d2 points, then diagonal slots for d1
    std::vector<std::vector<double>> cost(n, std::vector<double>(n, 0.0));
    for (int i = 0; i < n1; ++i) {
        for (int j = 0; j < n2; ++j) cost[i][j] = ground_distance(d1[i], d2[j]);
        for (int j = n2; j < n; ++j) cost[i][j] = diagonal_distance(d1[i]);
    }
    for (int i = n1; i < n; ++i)
        for (int j = 0; j < n2; ++j) cost[i][j] = diagonal_distance(d2[j]);

    MatchingResult result;
    const auto assign = solve_assignment(cost);
    for (int i = 0; i < n; ++i) {
        const int j = assign[i];
        const int a = i < n1 ? i : MatchingResult::kDiagonal;
        const int b = j < n2 ? j : MatchingResult::kDiagonal;
        if (a == MatchingResult::kDiagonal && b == MatchingResult::kDiagonal) continue;
        result.pairing.emplace_back(a, b);
        result.cost += cost[i][j];
    }
    return result;
}

double linf_distance(const ZPIGrid& a, const ZPIGrid& b) {
    if (!(a.spec() == b.spec())) throw ShapeError("ZPI grids have different specs");
    double out = 0.0;
    for (std::size_t k = 0; k < a.pixels().size(); ++k) out = std::max(out, std::abs(a.pixels()[k] - b.pixels()[k]));
    return out;
}

}  // namespace zgcnet
