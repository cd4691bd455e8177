#ifndef RAGA_CLIENT_HPP
#define RAGA_CLIENT_HPP

#include <cmath>
#include <stdexcept>
#include <vector>

#include "raga/models.hpp"
#include "raga/rng.hpp"
#include "raga/vec.hpp"

namespace raga {

enum class LrKind { Constant, PolyDecay, PaperExperiment, ScaledByT };

// Constant:        eta0
// PolyDecay:       eta0 * (t + shift)^-exponent
// PaperExperiment: k_ref / (sqrt(5) * sqrt(t + 5))
// ScaledByT:       eta0 * (t_ref * k_ref)^-beta
struct LrSchedule {
    LrKind kind = LrKind::Constant;
    double eta0 = 0.1;
    double shift = 0.0;
    double exponent = 0.5;
    int k_ref = 3;
    double t_ref = 500.0;
    double beta = 0.5;

    static LrSchedule constant(double eta0) {
        LrSchedule s;
        s.kind = LrKind::Constant;
        s.eta0 = eta0;
        return s;
    }
    static LrSchedule poly_decay(double eta0, double shift, double exponent) {
        LrSchedule s;
        s.kind = LrKind::PolyDecay;
        s.eta0 = eta0;
        s.shift = shift;
        s.exponent = exponent;
        return s;
    }
    static LrSchedule paper_experiment(int k_ref) {
        LrSchedule s;
        s.kind = LrKind::PaperExperiment;
        s.k_ref = k_ref;
        return s;
    }
    static LrSchedule scaled_by_t(double eta0, double t_ref, int k_ref, double beta) {
        LrSchedule s;
        s.kind = LrKind::ScaledByT;
        s.eta0 = eta0;
        s.t_ref = t_ref;
        s.k_ref = k_ref;
        s.beta = beta;
        return s;
    }

    void validate() const {
        if (!(eta0 > 0.0)) throw std::invalid_argument("LrSchedule: eta0 must be positive");
        if (kind == LrKind::PolyDecay && shift < 0.0)
            throw std::invalid_argument("LrSchedule: shift must be >= 0");
        if (kind == LrKind::PaperExperiment && k_ref < 1)
            throw std::invalid_argument("LrSchedule: k_ref must be >= 1");
        if (kind == LrKind::ScaledByT && (!(t_ref > 0.0) || k_ref < 1))
            throw std::invalid_argument("LrSchedule: t_ref and k_ref must be positive");
    }

    bool operator==(const LrSchedule&) const = default;
};

inline double lr_value(const LrSchedule& sched, int t, int k) {
    if (t < 1 || k < 1) throw std::invalid_argument("lr_value: need t >= 1 and k >= 1");
    switch (sched.kind) {
    case LrKind::Constant: return sched.eta0;
    case LrKind::PolyDecay: return sched.eta0 * std::pow(static_cast<double>(t) + sched.shift, -sched.exponent);
    case LrKind::PaperExperiment:
        return static_cast<double>(sched.k_ref) / (std::sqrt(5.0) * std::sqrt(static_cast<double>(t) + 5.0));
    case LrKind::ScaledByT:
        return sched.eta0 * std::pow(sched.t_ref * static_cast<double>(sched.k_ref), -sched.beta);
    }
    return sched.eta0;
}

// z_m^t, the average of the K local stochastic gradients.
struct ClientUpdate {
    ParameterVector vector;
    int steps_taken = 0;
    int client_index = 0;
};

// K steps of local SGD from w_t; uploads the average of the gradients taken,
// not the local iterate. gradient_trace (optional) logs each g_k.
inline ClientUpdate local_update_run(const ModelSpec& spec, const ParameterVector& w_t,
                                     const std::vector<Sample>& shard, int K,
                                     const LrSchedule& sched, int batch_size, int t, Rng& rng,
                                     int client_index = 0,
                                     std::vector<ParameterVector>* gradient_trace = nullptr) {
    if (K < 1) throw std::invalid_argument("local_update_run: K must be >= 1");
    if (shard.empty()) throw std::invalid_argument("local_update_run: empty shard");
    if (batch_size < 1 || batch_size > static_cast<int>(shard.size()))
        throw std::invalid_argument("local_update_run: batch_size must lie in [1, shard size]");
    sched.validate();

    ParameterVector w_local = w_t;
    ParameterVector z(w_t.size(), 0.0);
    for (int k = 1; k <= K; ++k) {
        ParameterVector g = stochastic_gradient(spec, w_local, shard, batch_size, rng);
        for (std::size_t i = 0; i < z.size(); ++i) z[i] += g[i];
        add_scaled(w_local, -lr_value(sched, t, k), g);
        if (gradient_trace) gradient_trace->push_back(std::move(g));
    }
    const double inv = 1.0 / static_cast<double>(K);
    for (double& v : z) v *= inv;
    return {std::move(z), K, client_index};
}

} // namespace raga

#endif // RAGA_CLIENT_HPP
