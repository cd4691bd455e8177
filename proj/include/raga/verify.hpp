#ifndef RAGA_VERIFY_HPP
#define RAGA_VERIFY_HPP

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "raga/client.hpp"
#include "raga/measure.hpp"
#include "raga/server.hpp"
#include "raga/theory.hpp"

namespace raga {

struct BoundCheck {
    std::string name;
    bool passed = true;
    double measured = 0.0;
    double bound = 0.0;
    std::string detail;
};

struct BoundReport {
    TheoryConstants constants;
    BoundTrace trace;
    std::vector<BoundCheck> checks;

    bool all_passed() const {
        for (const auto& c : checks)
            if (!c.passed) return false;
        return true;
    }
};

// Evaluates the per-round and prefix bounds against a finished run. Constants
// are measured along the recorded iterates; epsilon is the aggregator tolerance
// actually used (0 for exact aggregators).
inline BoundReport verify_run_bounds(const TrainerConfig& config, const ShardedDataset& ds,
                                     const ModelSpec& spec, const TrainingResult& result,
                                     const std::vector<int>& prefix_rounds = {}) {
    BoundReport report;
    const int T = static_cast<int>(result.records.size());

    TheoryConstants k = measure_constants(spec, ds, result.iterates, config.batch_size);
    k.epsilon = config.aggregator.kind == AggregatorKind::GeometricMedian ? config.aggregator.epsilon : 0.0;
    report.constants = k;

    std::vector<double> alpha_honest;
    for (int m = 0; m < ds.client_count(); ++m)
        if (!ds.byzantine_mask[static_cast<std::size_t>(m)])
            alpha_honest.push_back(ds.weights[static_cast<std::size_t>(m)]);

    const int K = config.local_steps;
    std::vector<double> eta(static_cast<std::size_t>(T));
    std::vector<double> delta(static_cast<std::size_t>(T));
    std::vector<int> p(static_cast<std::size_t>(T));
    std::vector<double> grad_sq(static_cast<std::size_t>(T));
    auto& tr = report.trace;
    bool lemma3_ok = true, lemma2_ok = true;
    double worst_ratio = 0.0;
    for (int t = 1; t <= T; ++t) {
        const std::size_t i = static_cast<std::size_t>(t - 1);
        eta[i] = lr_value(config.global_lr, t, 1);
        std::vector<double> rates(static_cast<std::size_t>(K));
        for (int kk = 1; kk <= K; ++kk)
            rates[static_cast<std::size_t>(kk - 1)] = lr_value(config.local_lr, t, kk);
        std::vector<std::vector<double>> per_client(alpha_honest.size(), rates);
        delta[i] = delta_t(k, per_client, K, alpha_honest);
        p[i] = p_value(k, eta[i]);
        grad_sq[i] = squared_norm(detail::honest_global_gradient(spec, result.iterates[i], ds));

        const auto& probe = result.probes[i];
        const auto lem = lemma_bounds(k, {{1.0, probe.honest_weighted_sqnorm}}, delta[i]);
        // probe already carries the alpha-weighted sum, hence the unit weight above
        if (probe.z_sqnorm > lem.lemma3 * (1.0 + 1e-9)) lemma3_ok = false;
        if (probe.z_sqnorm > lem.lemma2 * (1.0 + 1e-9)) lemma2_ok = false;
        worst_ratio = std::max(worst_ratio, lem.lemma3 > 0.0 ? probe.z_sqnorm / lem.lemma3 : 0.0);

        tr.rounds.push_back(t);
        tr.eta.push_back(eta[i]);
        tr.delta.push_back(delta[i]);
        tr.p.push_back(p[i]);
        tr.lambda.push_back(k.mu ? *k.mu * eta[i] : 0.0);
        tr.q.push_back(t < T ? 1 : 0);
        if (k.mu) {
            const double lam = *k.mu * eta[i];
            tr.gamma.push_back(lam < 1.0 ? (1.0 - 2.0 * eta[i] * *k.mu + k.L * k.L * eta[i] * eta[i]) / (1.0 - lam)
                                         : std::nan(""));
        } else {
            tr.gamma.push_back(std::nan(""));
        }
        tr.lemma3_bound.push_back(lem.lemma3);
        tr.z_sqnorm.push_back(probe.z_sqnorm);
    }

    report.checks.push_back({"lemma3_every_round", lemma3_ok, worst_ratio, 1.0,
                             "||z^t||^2 against the honest-upload bound, all rounds"});
    report.checks.push_back({"lemma2_every_round", lemma2_ok, 0.0, 0.0,
                             "||z^t||^2 against the (G, sigma) bound, all rounds"});

    std::vector<int> prefixes = prefix_rounds;
    if (prefixes.empty()) prefixes = {T};
    const double F1 = detail::honest_loss(spec, result.iterates.front(), ds);
    for (int prefix : prefixes) {
        if (prefix < 1 || prefix > T) continue;
        const std::size_t n = static_cast<std::size_t>(prefix);
        const std::span<const double> eta_p(eta.data(), n);
        const std::span<const double> delta_p(delta.data(), n);
        const std::span<const int> p_p(p.data(), n);
        const std::span<const double> grad_p(grad_sq.data(), n);
        const double F_drop = F1 - detail::honest_loss(spec, result.iterates[n - 1], ds);
        const double rhs1 = theorem1_rhs(k, eta_p, delta_p, p_p, F_drop);
        const double lhs1 = theorem1_lhs(eta_p, grad_p);
        report.checks.push_back({"theorem1_T" + std::to_string(prefix), lhs1 <= rhs1, lhs1, rhs1,
                                 "eta-weighted average of ||grad F||^2 vs the non-convex bound"});
        tr.theorem1_rhs_prefix.push_back(rhs1);

        if (k.mu) {
            std::vector<double> lambda(n);
            bool lambda_ok = true;
            for (std::size_t i = 0; i < n; ++i) {
                lambda[i] = *k.mu * eta[i];
                if (!(lambda[i] > 0.0) || !(lambda[i] < 1.0)) lambda_ok = false;
            }
            if (lambda_ok) {
                const ParameterVector opt = detail::quadratic_optimum(ds, spec.input_dim);
                const double w1_gap = squared_norm(vec_sub(result.iterates.front(), opt));
                const double rhs2 = theorem2_rhs(k, eta_p, std::span<const double>(lambda.data(), n),
                                                 delta_p, w1_gap);
                const double lhs2 = detail::honest_loss(spec, result.iterates[n - 1], ds) -
                                    detail::honest_loss(spec, opt, ds);
                report.checks.push_back({"theorem2_T" + std::to_string(prefix), lhs2 <= rhs2, lhs2, rhs2,
                                         "optimality gap vs the strongly-convex bound"});
                tr.theorem2_rhs_prefix.push_back(rhs2);
            }
        }
    }
    return report;
}

} // namespace raga

#endif // RAGA_VERIFY_HPP
