#ifndef RAGA_AGGREGATION_HPP
#define RAGA_AGGREGATION_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "raga/vec.hpp"

namespace raga {

// M uploaded vectors with normalized weights alpha_m; input to every aggregator.
struct WeightedPointSet {
    std::vector<ParameterVector> points;
    std::vector<double> weights;

    std::size_t size() const { return points.size(); }
    std::size_t dim() const { return points.empty() ? 0 : points.front().size(); }

    void validate() const {
        if (points.empty()) throw std::invalid_argument("WeightedPointSet: empty set");
        if (points.size() != weights.size())
            throw std::invalid_argument("WeightedPointSet: points/weights length mismatch");
        const std::size_t p = points.front().size();
        if (p == 0) throw std::invalid_argument("WeightedPointSet: zero-dimensional points");
        double sum = 0.0;
        for (std::size_t i = 0; i < points.size(); ++i) {
            if (points[i].size() != p) throw std::invalid_argument("WeightedPointSet: dimension mismatch");
            if (!(weights[i] >= 0.0)) throw std::invalid_argument("WeightedPointSet: negative weight");
            sum += weights[i];
        }
        if (std::fabs(sum - 1.0) > 1e-12)
            throw std::invalid_argument("WeightedPointSet: weights must sum to 1 within 1e-12");
    }
};

struct GeomedResult {
    ParameterVector point;
    double objective = 0.0;    // sum_i alpha_i * ||point - z_i||
    int iterations = 0;
    double achieved_gap = 0.0; // certified surplus over the best lower estimate
    bool certified = true;     // false: epsilon could not be certified before exit
};

namespace detail {

// All reductions run in one canonical order: points sorted lexicographically by
// (coordinates, weight). This makes every aggregator bit-exactly independent of
// the order in which (point, weight) pairs arrive.
inline std::vector<std::size_t> canonical_order(const WeightedPointSet& set) {
    std::vector<std::size_t> order(set.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& pa = set.points[a];
        const auto& pb = set.points[b];
        for (std::size_t j = 0; j < pa.size(); ++j) {
            if (pa[j] < pb[j]) return true;
            if (pb[j] < pa[j]) return false;
        }
        return set.weights[a] < set.weights[b];
    });
    return order;
}

} // namespace detail

inline double distance_objective(const WeightedPointSet& set, const ParameterVector& y) {
    const auto order = detail::canonical_order(set);
    double obj = 0.0;
    for (std::size_t i : order) obj += set.weights[i] * distance(y, set.points[i]);
    return obj;
}

inline ParameterVector weighted_mean(const WeightedPointSet& set) {
    set.validate();
    const auto order = detail::canonical_order(set);
    ParameterVector out(set.dim(), 0.0);
    for (std::size_t i : order) add_scaled(out, set.weights[i], set.points[i]);
    return out;
}

// Per coordinate: the smallest value whose cumulative weight reaches 0.5
// (an exact 0.5 boundary resolves to the lower value).
inline ParameterVector coordinate_median(const WeightedPointSet& set) {
    set.validate();
    const std::size_t p = set.dim();
    const std::size_t m = set.size();
    ParameterVector out(p, 0.0);
    std::vector<std::pair<double, double>> col(m); // (value, weight)
    for (std::size_t j = 0; j < p; ++j) {
        for (std::size_t i = 0; i < m; ++i) col[i] = {set.points[i][j], set.weights[i]};
        std::sort(col.begin(), col.end());
        double cum = 0.0;
        double v = col.back().first;
        for (const auto& [value, w] : col) {
            cum += w;
            if (cum >= 0.5) {
                v = value;
                break;
            }
        }
        out[j] = v;
    }
    return out;
}

// Per coordinate: drop trim_fraction of total weight from each tail (atoms may be
// trimmed partially), renormalize, average.
inline ParameterVector trimmed_mean(const WeightedPointSet& set, double trim_fraction) {
    set.validate();
    if (!(trim_fraction >= 0.0) || trim_fraction >= 0.5)
        throw std::invalid_argument("trimmed_mean: trim_fraction must lie in [0, 0.5)");
    if (trim_fraction == 0.0) return weighted_mean(set);

    const std::size_t p = set.dim();
    const std::size_t m = set.size();
    ParameterVector out(p, 0.0);
    std::vector<std::pair<double, double>> col(m);
    for (std::size_t j = 0; j < p; ++j) {
        for (std::size_t i = 0; i < m; ++i) col[i] = {set.points[i][j], set.weights[i]};
        std::sort(col.begin(), col.end());
        std::vector<double> kept(m);
        for (std::size_t i = 0; i < m; ++i) kept[i] = col[i].second;
        double cut = trim_fraction;
        for (std::size_t i = 0; i < m && cut > 0.0; ++i) {
            const double take = std::min(cut, kept[i]);
            kept[i] -= take;
            cut -= take;
        }
        cut = trim_fraction;
        for (std::size_t i = m; i-- > 0 && cut > 0.0;) {
            const double take = std::min(cut, kept[i]);
            kept[i] -= take;
            cut -= take;
        }
        double wsum = 0.0, acc = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            acc += kept[i] * col[i].first;
            wsum += kept[i];
        }
        if (!(wsum > 0.0)) throw std::invalid_argument("trimmed_mean: no weight survives trimming");
        out[j] = acc / wsum;
    }
    return out;
}

// One Weiszfeld update with distance smoothing d_i = max(||y - z_i||, smoothing).
inline ParameterVector weiszfeld_step(const ParameterVector& current, const WeightedPointSet& set,
                                      double smoothing) {
    set.validate();
    if (!(smoothing > 0.0)) throw std::invalid_argument("weiszfeld_step: smoothing must be positive");
    if (current.size() != set.dim()) throw std::invalid_argument("weiszfeld_step: dimension mismatch");
    const auto order = detail::canonical_order(set);
    ParameterVector num(set.dim(), 0.0);
    double den = 0.0;
    for (std::size_t i : order) {
        const double d = std::max(distance(current, set.points[i]), smoothing);
        const double c = set.weights[i] / d;
        add_scaled(num, c, set.points[i]);
        den += c;
    }
    for (double& v : num) v /= den;
    return num;
}

namespace detail {

struct PointEvaluation {
    double objective = 0.0;
    double certified_gap = 0.0; // upper bound on objective - optimum
};

// Objective plus a rigorous suboptimality certificate. With g the subgradient
// sum over points at positive distance and a the weight sitting exactly on y,
// convexity gives objective - optimum <= max(0, ||g|| - a) * max_i d_i.
inline PointEvaluation evaluate_geomed_point(const WeightedPointSet& set,
                                             const std::vector<std::size_t>& order,
                                             const ParameterVector& y) {
    PointEvaluation out;
    ParameterVector grad(y.size(), 0.0);
    double anchor_weight = 0.0;
    double radius = 0.0;
    for (std::size_t i : order) {
        const double d = distance(y, set.points[i]);
        out.objective += set.weights[i] * d;
        radius = std::max(radius, d);
        if (d == 0.0) {
            anchor_weight += set.weights[i];
        } else {
            const double c = set.weights[i] / d;
            for (std::size_t j = 0; j < y.size(); ++j) grad[j] += c * (y[j] - set.points[i][j]);
        }
    }
    out.certified_gap = std::max(0.0, norm(grad) - anchor_weight) * radius;
    return out;
}

} // namespace detail

// epsilon-suboptimal weighted geometric median via plain Weiszfeld iteration,
// started from the weighted mean. Terminates once the step decrease and the
// decrease over the last five steps fall below epsilon/10 and the subgradient
// certificate confirms true epsilon-suboptimality. A run that exhausts
// max_iters, or plateaus at machine precision before certifying (which happens
// when the point scale makes the certificate unresolvable in doubles), returns
// the best iterate flagged certified = false.
inline GeomedResult geometric_median(const WeightedPointSet& set, double epsilon,
                                     int max_iters = 10000) {
    set.validate();
    if (!(epsilon > 0.0)) throw std::invalid_argument("geometric_median: epsilon must be positive");
    if (max_iters < 1) throw std::invalid_argument("geometric_median: max_iters must be >= 1");
    constexpr double kSmoothing = 1e-12;
    const double threshold = epsilon / 10.0;
    const auto order = detail::canonical_order(set);

    ParameterVector y = weighted_mean(set);
    auto eval = detail::evaluate_geomed_point(set, order, y);
    std::deque<double> history{eval.objective}; // objectives of the last <= 6 iterates
    int plateau = 0;

    GeomedResult res;
    for (int iter = 1; iter <= max_iters; ++iter) {
        ParameterVector next = weiszfeld_step(y, set, kSmoothing);
        const auto next_eval = detail::evaluate_geomed_point(set, order, next);
        const double step_dec = eval.objective - next_eval.objective;
        history.push_back(next_eval.objective);
        if (history.size() > 6) history.pop_front();
        plateau = step_dec == 0.0 ? plateau + 1 : 0;

        const bool settled = std::fabs(step_dec) < threshold &&
                             (history.size() < 6 || history.front() - next_eval.objective < threshold);
        if (settled && next_eval.certified_gap <= epsilon) {
            res.point = std::move(next);
            res.objective = next_eval.objective;
            res.iterations = iter;
            res.achieved_gap = next_eval.certified_gap;
            res.certified = true;
            return res;
        }
        y = std::move(next);
        eval = next_eval;
        if (plateau >= 4 || iter == max_iters) {
            // no further progress representable, tolerance not certified
            res.point = y;
            res.objective = eval.objective;
            res.iterations = iter;
            res.achieved_gap = eval.certified_gap;
            res.certified = false;
            return res;
        }
    }
    return res;
}

} // namespace raga

#endif // RAGA_AGGREGATION_HPP
