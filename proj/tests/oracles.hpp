#ifndef RAGA_TESTS_ORACLES_HPP
#define RAGA_TESTS_ORACLES_HPP

// Independent oracles for the test suites. Nothing here may call into the
// implementation paths it is used to check.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "raga/vec.hpp"

namespace oracles {

// Plain objective evaluation, simple left-to-right sum.
inline double fermat_weber_objective(const std::vector<raga::ParameterVector>& points,
                                     const std::vector<double>& weights, double x, double y) {
    double obj = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const double dx = x - points[i][0];
        const double dy = y - points[i][1];
        obj += weights[i] * std::sqrt(dx * dx + dy * dy);
    }
    return obj;
}

struct GridOracleResult {
    double x = 0.0, y = 0.0;
    double objective = 0.0;
};

// 2-D grid search over the padded bounding box followed by shrinking
// pattern-search refinement around the best cell.
inline GridOracleResult grid_refine_geomed_2d(const std::vector<raga::ParameterVector>& points,
                                              const std::vector<double>& weights,
                                              int coarse_cells = 40, int refine_levels = 22) {
    double lo_x = points[0][0], hi_x = points[0][0];
    double lo_y = points[0][1], hi_y = points[0][1];
    for (const auto& p : points) {
        lo_x = std::min(lo_x, p[0]);
        hi_x = std::max(hi_x, p[0]);
        lo_y = std::min(lo_y, p[1]);
        hi_y = std::max(hi_y, p[1]);
    }
    const double extent = std::max({hi_x - lo_x, hi_y - lo_y, 1e-9});
    const double pad = 0.05 * extent;
    lo_x -= pad;
    hi_x += pad;
    lo_y -= pad;
    hi_y += pad;

    GridOracleResult best;
    best.objective = std::numeric_limits<double>::infinity();
    const double step_x = (hi_x - lo_x) / coarse_cells;
    const double step_y = (hi_y - lo_y) / coarse_cells;
    for (int i = 0; i <= coarse_cells; ++i)
        for (int j = 0; j <= coarse_cells; ++j) {
            const double x = lo_x + i * step_x;
            const double y = lo_y + j * step_y;
            const double obj = fermat_weber_objective(points, weights, x, y);
            if (obj < best.objective) best = {x, y, obj};
        }

    double step = std::max(step_x, step_y);
    for (int level = 0; level < refine_levels; ++level) {
        bool improved = true;
        while (improved) {
            improved = false;
            for (int di = -1; di <= 1; ++di)
                for (int dj = -1; dj <= 1; ++dj) {
                    if (di == 0 && dj == 0) continue;
                    const double x = best.x + di * step;
                    const double y = best.y + dj * step;
                    const double obj = fermat_weber_objective(points, weights, x, y);
                    if (obj < best.objective) {
                        best = {x, y, obj};
                        improved = true;
                    }
                }
        }
        step *= 0.5;
    }
    return best;
}

// Literal dense scan at a fixed step over a stated box, then refinement.
inline GridOracleResult dense_grid_geomed_2d(const std::vector<raga::ParameterVector>& points,
                                             const std::vector<double>& weights, double lo_x,
                                             double hi_x, double lo_y, double hi_y, double step) {
    GridOracleResult best;
    best.objective = std::numeric_limits<double>::infinity();
    for (double x = lo_x; x <= hi_x + 0.5 * step; x += step)
        for (double y = lo_y; y <= hi_y + 0.5 * step; y += step) {
            const double obj = fermat_weber_objective(points, weights, x, y);
            if (obj < best.objective) best = {x, y, obj};
        }
    double s = step;
    for (int level = 0; level < 24; ++level) {
        bool improved = true;
        while (improved) {
            improved = false;
            for (int di = -1; di <= 1; ++di)
                for (int dj = -1; dj <= 1; ++dj) {
                    if (di == 0 && dj == 0) continue;
                    const double obj =
                        fermat_weber_objective(points, weights, best.x + di * s, best.y + dj * s);
                    if (obj < best.objective) {
                        best = {best.x + di * s, best.y + dj * s, obj};
                        improved = true;
                    }
                }
        }
        s *= 0.5;
    }
    return best;
}

// Exhaustive subset search: weight of the subset closest to target while staying
// <= target + tol and < 0.5. Usable up to ~20 shards.
inline double best_subset_weight(const std::vector<double>& weights, double target, double tol) {
    const std::size_t n = weights.size();
    double best = 0.0;
    double best_diff = std::fabs(target);
    for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
        double sum = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            if (mask & (std::size_t{1} << i)) sum += weights[i];
        if (sum > target + tol || sum >= 0.5) continue;
        if (std::fabs(sum - target) < best_diff) {
            best_diff = std::fabs(sum - target);
            best = sum;
        }
    }
    return best;
}

} // namespace oracles

#endif // RAGA_TESTS_ORACLES_HPP
