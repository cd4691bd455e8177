#ifndef RAGA_THEORY_HPP
#define RAGA_THEORY_HPP

#include <cmath>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace raga {

// Constants feeding the bound evaluators. L, sigma, theta, G are valid bounds
// only along the points they were measured at (a-posteriori use).
struct TheoryConstants {
    double L = 1.0;
    std::optional<double> mu; // strongly-convex families only
    double sigma = 0.0;
    double theta = 0.0;
    double G = 0.0;
    double epsilon = 0.0;
    double c_alpha = 1.0;

    void validate() const {
        if (!(L >= 0.0) || !(sigma >= 0.0) || !(theta >= 0.0) || !(G >= 0.0) || !(epsilon >= 0.0))
            throw std::domain_error("TheoryConstants: constants must be non-negative");
        if (!(c_alpha > 0.5) || c_alpha > 1.0)
            throw std::domain_error("TheoryConstants: C_alpha must lie in (0.5, 1]");
        if (mu && !(*mu >= 0.0)) throw std::domain_error("TheoryConstants: mu must be non-negative");
    }
};

namespace detail {

inline double robust_denom(double c_alpha) {
    const double d = 2.0 * c_alpha - 1.0;
    return d * d;
}

} // namespace detail

// 1 when eta > 1/L, else 0.
inline int p_value(const TheoryConstants& k, double eta) { return eta > 1.0 / k.L ? 1 : 0; }

// Per-round drift/heterogeneity term:
//   8 C / (2C-1)^2 * sum_m [ 2 a_m L^2 (G^2 + s^2) / K * sum_{k=2..K} (k-1) sum_{i<k} r_{m,i}^2
//                            + 2 a_m theta^2 ]
// step_rates holds one row per honest client with its K per-step rates.
inline double delta_t(const TheoryConstants& k,
                      const std::vector<std::vector<double>>& step_rates, int K,
                      const std::vector<double>& alpha_honest) {
    k.validate();
    if (K < 1) throw std::domain_error("delta_t: K must be >= 1");
    if (step_rates.size() != alpha_honest.size())
        throw std::domain_error("delta_t: step_rates and alpha_honest length mismatch");
    double alpha_sum = 0.0;
    for (double a : alpha_honest) alpha_sum += a;
    if (std::fabs(alpha_sum - k.c_alpha) > 1e-9)
        throw std::domain_error("delta_t: honest weights must sum to C_alpha");

    const double lead = 8.0 * k.c_alpha / detail::robust_denom(k.c_alpha);
    const double gs = k.L * k.L * (k.G * k.G + k.sigma * k.sigma);
    double sum = 0.0;
    for (std::size_t m = 0; m < alpha_honest.size(); ++m) {
        const auto& rates = step_rates[m];
        if (static_cast<int>(rates.size()) < K)
            throw std::domain_error("delta_t: fewer than K step rates for a client");
        double drift = 0.0;
        for (int kk = 2; kk <= K; ++kk) {
            double inner = 0.0;
            for (int i = 1; i <= kk - 1; ++i) {
                const double r = rates[static_cast<std::size_t>(i - 1)];
                inner += r * r;
            }
            drift += static_cast<double>(kk - 1) * inner;
        }
        sum += 2.0 * alpha_honest[m] * gs / static_cast<double>(K) * drift +
               2.0 * alpha_honest[m] * k.theta * k.theta;
    }
    return lead * sum;
}

// Weighted-average stationarity functional: sum_t (eta_t / sum eta) * grad_sq_t.
inline double theorem1_lhs(std::span<const double> eta, std::span<const double> grad_sq) {
    if (eta.size() != grad_sq.size() || eta.empty())
        throw std::domain_error("theorem1_lhs: sequence length mismatch");
    double eta_sum = 0.0;
    for (double e : eta) eta_sum += e;
    if (!(eta_sum > 0.0)) throw std::domain_error("theorem1_lhs: sum of rates must be positive");
    double acc = 0.0;
    for (std::size_t t = 0; t < eta.size(); ++t) acc += eta[t] / eta_sum * grad_sq[t];
    return acc;
}

// Four-term right-hand side of the non-convex bound; F_drop = E{F(w^1) - F(w^T)}.
inline double theorem1_rhs(const TheoryConstants& k, std::span<const double> eta,
                           std::span<const double> delta, std::span<const int> p, double F_drop) {
    k.validate();
    const std::size_t T = eta.size();
    if (T == 0 || delta.size() != T || p.size() != T)
        throw std::domain_error("theorem1_rhs: sequences must share length T >= 1");
    double eta_sum = 0.0;
    for (double e : eta) eta_sum += e;
    if (!(eta_sum > 0.0)) throw std::domain_error("theorem1_rhs: sum of rates must be positive");

    const double denom = detail::robust_denom(k.c_alpha);
    const double c2 = k.c_alpha * k.c_alpha;
    double rhs = 2.0 * F_drop / eta_sum;
    for (std::size_t t = 0; t < T; ++t) {
        const double e = eta[t];
        const double pt = static_cast<double>(p[t]);
        const double relax = pt * e * e * k.L - pt * e; // 0 when eta <= 1/L
        rhs += e * delta[t] / eta_sum;
        rhs += 2.0 * (e + relax) * k.epsilon * k.epsilon / (denom * eta_sum);
        rhs += 8.0 * c2 * (e * k.sigma * k.sigma + relax * (k.G * k.G + k.sigma * k.sigma)) /
               (denom * eta_sum);
    }
    return rhs;
}

// Strongly-convex bound: contraction of the initial gap plus accumulated error,
//   gamma_t = (1 - 2 eta_t mu + L^2 eta_t^2) / (1 - lambda_t),
// where round t's error term carries the product of gamma over rounds t+1..T-1.
inline double theorem2_rhs(const TheoryConstants& k, std::span<const double> eta,
                           std::span<const double> lambda, std::span<const double> delta,
                           double w1_gap) {
    k.validate();
    if (!k.mu) throw std::domain_error("theorem2_rhs: mu is required");
    const std::size_t T = eta.size();
    if (T == 0 || lambda.size() != T || delta.size() != T)
        throw std::domain_error("theorem2_rhs: sequences must share length T >= 1");

    std::vector<double> gamma(T, 1.0);
    for (std::size_t t = 0; t + 1 < T; ++t) {
        if (!(lambda[t] > 0.0) || !(lambda[t] < 1.0))
            throw std::domain_error("theorem2_rhs: lambda must lie in (0, 1)");
        const double e = eta[t];
        gamma[t] = (1.0 - 2.0 * e * (*k.mu) + k.L * k.L * e * e) / (1.0 - lambda[t]);
    }

    double lead_product = 1.0;
    for (std::size_t t = 0; t + 1 < T; ++t) lead_product *= gamma[t];

    const double denom = detail::robust_denom(k.c_alpha);
    const double noise = 8.0 * k.sigma * k.sigma * k.c_alpha * k.c_alpha / denom +
                         2.0 * k.epsilon * k.epsilon / denom;

    // suffix[t] = prod of gamma over rounds t+1 .. T-1 (q^T = 0 drops the last round)
    double rhs = 0.5 * k.L * w1_gap * lead_product;
    if (T >= 2) {
        std::vector<double> suffix(T, 1.0);
        for (std::size_t t = T - 1; t-- > 0;)
            suffix[t] = (t + 2 <= T - 1) ? gamma[t + 1] * suffix[t + 1] : 1.0;
        for (std::size_t t = 0; t + 1 < T; ++t)
            rhs += 0.5 * k.L * (eta[t] * eta[t] / lambda[t]) * (delta[t] + noise) * suffix[t];
    }
    return rhs;
}

struct LemmaBounds {
    double lemma1 = 0.0; // bound on E||z^t - grad F(w^t)||^2
    double lemma2 = 0.0; // bound on E||z^t||^2 from (G, sigma)
    double lemma3 = 0.0; // bound on ||geomed||^2 from the honest uploads
};

// weighted_sq_norms holds (alpha_m, ||z_m||^2) for the honest uploads of a round.
inline LemmaBounds lemma_bounds(const TheoryConstants& k,
                                const std::vector<std::pair<double, double>>& weighted_sq_norms,
                                double delta_t_value) {
    k.validate();
    const double denom = detail::robust_denom(k.c_alpha);
    const double eps_term = 2.0 * k.epsilon * k.epsilon / denom;
    LemmaBounds out;
    out.lemma1 = delta_t_value + 8.0 * k.sigma * k.sigma * k.c_alpha * k.c_alpha / denom + eps_term;
    out.lemma2 = 8.0 * k.c_alpha * k.c_alpha * (k.G * k.G + k.sigma * k.sigma) / denom + eps_term;
    double weighted = 0.0;
    for (const auto& [alpha, sq] : weighted_sq_norms) weighted += alpha * sq;
    out.lemma3 = 8.0 * k.c_alpha / denom * weighted + eps_term;
    return out;
}

// Per-round trace of everything the bound evaluators consumed, plus running
// right-hand sides; written out by the verify-bounds command.
struct BoundTrace {
    std::vector<int> rounds;
    std::vector<double> eta;
    std::vector<double> delta;
    std::vector<int> p;
    std::vector<double> gamma;
    std::vector<double> lambda;
    std::vector<int> q;
    std::vector<double> lemma3_bound;
    std::vector<double> z_sqnorm;
    std::vector<double> theorem1_rhs_prefix;
    std::vector<double> theorem2_rhs_prefix;
};

} // namespace raga

#endif // RAGA_THEORY_HPP
