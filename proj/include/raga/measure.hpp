#ifndef RAGA_MEASURE_HPP
#define RAGA_MEASURE_HPP

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "raga/data.hpp"
#include "raga/models.hpp"
#include "raga/theory.hpp"

namespace raga {

// Empirical constants along the probe points. These are lower bounds of the true
// suprema (a-posteriori use only): L from gradient differences over probe pairs
// (exact L = mu = 1 for Quadratic), sigma from per-sample gradient spread scaled
// by the without-replacement factor for batch_size, theta and G from honest local
// gradients against the honest global gradient. epsilon is left for the caller.
inline TheoryConstants measure_constants(const ModelSpec& spec, const ShardedDataset& ds,
                                         const std::vector<ParameterVector>& probe_points,
                                         int batch_size = 1) {
    spec.validate();
    ds.validate();
    if (probe_points.size() < 2)
        throw std::invalid_argument("measure_constants: need at least 2 probe points");
    if (batch_size < 1) throw std::invalid_argument("measure_constants: batch_size must be >= 1");

    TheoryConstants k;
    k.c_alpha = ds.honest_weight;

    if (spec.kind == ModelKind::Quadratic) {
        k.L = 1.0;
        k.mu = 1.0;
    } else {
        double best = 0.0;
        std::vector<ParameterVector> grads;
        grads.reserve(probe_points.size());
        for (const auto& w : probe_points) grads.push_back(detail::honest_global_gradient(spec, w, ds));
        for (std::size_t a = 0; a < probe_points.size(); ++a)
            for (std::size_t b = a + 1; b < probe_points.size(); ++b) {
                const double dw = distance(probe_points[a], probe_points[b]);
                if (dw < 1e-12) continue;
                best = std::max(best, distance(grads[a], grads[b]) / dw);
            }
        k.L = best;
    }

    double sigma_sq = 0.0, theta = 0.0, G = 0.0;
    for (const auto& w : probe_points) {
        const auto global_grad = detail::honest_global_gradient(spec, w, ds);
        for (int m = 0; m < ds.client_count(); ++m) {
            if (ds.byzantine_mask[static_cast<std::size_t>(m)]) continue;
            const auto& shard = ds.shards[static_cast<std::size_t>(m)];
            const auto local = gradient(spec, w, std::span<const Sample>(shard));
            theta = std::max(theta, distance(local, global_grad));
            G = std::max(G, norm(local));

            const int S = static_cast<int>(shard.size());
            const int b = std::min(batch_size, S);
            if (S > 1 && b < S) {
                double var = 0.0;
                for (const Sample& s : shard) {
                    const auto g = gradient(spec, w, std::span<const Sample>(&s, 1));
                    var += squared_norm(vec_sub(g, local));
                }
                var /= static_cast<double>(S);
                const double scaled = var / static_cast<double>(b) *
                                      static_cast<double>(S - b) / static_cast<double>(S - 1);
                sigma_sq = std::max(sigma_sq, scaled);
            }
        }
    }
    k.sigma = std::sqrt(sigma_sq);
    k.theta = theta;
    k.G = G;
    return k;
}

} // namespace raga

#endif // RAGA_MEASURE_HPP
