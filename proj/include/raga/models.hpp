#ifndef RAGA_MODELS_HPP
#define RAGA_MODELS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "raga/rng.hpp"
#include "raga/vec.hpp"

namespace raga {

struct Sample {
    std::vector<double> features;
    int label = 0; // class index for classification, unused for quadratic
};

enum class ModelKind { Quadratic, Logistic, Mlp };

// Problem families: strongly-convex quadratic, convex multinomial logistic
// regression, and a non-convex one-hidden-layer tanh MLP. Classification models
// append a constant-1 feature internally (bias).
struct ModelSpec {
    ModelKind kind = ModelKind::Quadratic;
    int input_dim = 1;
    int class_count = 2; // classification only
    int hidden_dim = 16; // Mlp only

    int param_dim() const {
        switch (kind) {
        case ModelKind::Quadratic: return input_dim;
        case ModelKind::Logistic: return (input_dim + 1) * class_count;
        case ModelKind::Mlp:
            return hidden_dim * (input_dim + 1) + class_count * (hidden_dim + 1);
        }
        return 0;
    }

    bool is_classifier() const { return kind != ModelKind::Quadratic; }

    void validate() const {
        if (input_dim < 1) throw std::invalid_argument("ModelSpec: input_dim must be >= 1");
        if (is_classifier() && class_count < 2)
            throw std::invalid_argument("ModelSpec: class_count must be >= 2");
        if (kind == ModelKind::Mlp && hidden_dim < 1)
            throw std::invalid_argument("ModelSpec: hidden_dim must be >= 1");
    }

    bool operator==(const ModelSpec&) const = default;
};

struct GradCheckReport {
    double max_rel_error = 0.0;
    int worst_coordinate = 0;
    double step = 0.0;
};

namespace detail {

inline void check_sample(const ModelSpec& spec, const Sample& s) {
    if (static_cast<int>(s.features.size()) != spec.input_dim)
        throw std::invalid_argument("sample feature dimension does not match ModelSpec");
    if (spec.is_classifier() && (s.label < 0 || s.label >= spec.class_count))
        throw std::invalid_argument("sample label outside declared class count");
}

// log(sum_c exp(z_c)) with the max-logit shift.
inline double log_sum_exp(const std::vector<double>& z) {
    const double zmax = *std::max_element(z.begin(), z.end());
    double s = 0.0;
    for (double v : z) s += std::exp(v - zmax);
    return zmax + std::log(s);
}

inline void logistic_logits(const ModelSpec& spec, const ParameterVector& w, const Sample& s,
                            std::vector<double>& logits) {
    const int d = spec.input_dim;
    logits.assign(static_cast<std::size_t>(spec.class_count), 0.0);
    for (int c = 0; c < spec.class_count; ++c) {
        const double* row = w.data() + static_cast<std::size_t>(c) * (d + 1);
        double z = row[d]; // bias
        for (int j = 0; j < d; ++j) z += row[j] * s.features[static_cast<std::size_t>(j)];
        logits[static_cast<std::size_t>(c)] = z;
    }
}

inline void mlp_forward(const ModelSpec& spec, const ParameterVector& w, const Sample& s,
                        std::vector<double>& hidden, std::vector<double>& logits) {
    const int d = spec.input_dim;
    const int h = spec.hidden_dim;
    const int C = spec.class_count;
    const double* w1 = w.data();
    const double* w2 = w.data() + static_cast<std::size_t>(h) * (d + 1);
    hidden.assign(static_cast<std::size_t>(h), 0.0);
    for (int r = 0; r < h; ++r) {
        const double* row = w1 + static_cast<std::size_t>(r) * (d + 1);
        double z = row[d];
        for (int j = 0; j < d; ++j) z += row[j] * s.features[static_cast<std::size_t>(j)];
        hidden[static_cast<std::size_t>(r)] = std::tanh(z);
    }
    logits.assign(static_cast<std::size_t>(C), 0.0);
    for (int c = 0; c < C; ++c) {
        const double* row = w2 + static_cast<std::size_t>(c) * (h + 1);
        double z = row[h];
        for (int r = 0; r < h; ++r) z += row[r] * hidden[static_cast<std::size_t>(r)];
        logits[static_cast<std::size_t>(c)] = z;
    }
}

inline double sample_loss(const ModelSpec& spec, const ParameterVector& w, const Sample& s,
                          std::vector<double>& scratch_hidden, std::vector<double>& scratch_logits) {
    switch (spec.kind) {
    case ModelKind::Quadratic: {
        double acc = 0.0;
        for (int j = 0; j < spec.input_dim; ++j) {
            const double dv = w[static_cast<std::size_t>(j)] - s.features[static_cast<std::size_t>(j)];
            acc += dv * dv;
        }
        return 0.5 * acc;
    }
    case ModelKind::Logistic: {
        logistic_logits(spec, w, s, scratch_logits);
        return log_sum_exp(scratch_logits) - scratch_logits[static_cast<std::size_t>(s.label)];
    }
    case ModelKind::Mlp: {
        mlp_forward(spec, w, s, scratch_hidden, scratch_logits);
        return log_sum_exp(scratch_logits) - scratch_logits[static_cast<std::size_t>(s.label)];
    }
    }
    return 0.0;
}

inline void softmax_inplace(std::vector<double>& z) {
    const double zmax = *std::max_element(z.begin(), z.end());
    double s = 0.0;
    for (double& v : z) {
        v = std::exp(v - zmax);
        s += v;
    }
    for (double& v : z) v /= s;
}

// Accumulates the gradient of sample s into grad (not averaged).
inline void accumulate_sample_gradient(const ModelSpec& spec, const ParameterVector& w,
                                       const Sample& s, ParameterVector& grad,
                                       std::vector<double>& hidden, std::vector<double>& probs) {
    const int d = spec.input_dim;
    switch (spec.kind) {
    case ModelKind::Quadratic: {
        for (int j = 0; j < d; ++j)
            grad[static_cast<std::size_t>(j)] +=
                w[static_cast<std::size_t>(j)] - s.features[static_cast<std::size_t>(j)];
        return;
    }
    case ModelKind::Logistic: {
        logistic_logits(spec, w, s, probs);
        softmax_inplace(probs);
        for (int c = 0; c < spec.class_count; ++c) {
            const double coef = probs[static_cast<std::size_t>(c)] - (c == s.label ? 1.0 : 0.0);
            double* row = grad.data() + static_cast<std::size_t>(c) * (d + 1);
            for (int j = 0; j < d; ++j) row[j] += coef * s.features[static_cast<std::size_t>(j)];
            row[d] += coef;
        }
        return;
    }
    case ModelKind::Mlp: {
        const int h = spec.hidden_dim;
        const int C = spec.class_count;
        mlp_forward(spec, w, s, hidden, probs);
        softmax_inplace(probs);
        const double* w2 = w.data() + static_cast<std::size_t>(h) * (d + 1);
        double* g1 = grad.data();
        double* g2 = grad.data() + static_cast<std::size_t>(h) * (d + 1);
        for (int c = 0; c < C; ++c) {
            const double delta = probs[static_cast<std::size_t>(c)] - (c == s.label ? 1.0 : 0.0);
            double* row = g2 + static_cast<std::size_t>(c) * (h + 1);
            for (int r = 0; r < h; ++r) row[r] += delta * hidden[static_cast<std::size_t>(r)];
            row[h] += delta;
        }
        for (int r = 0; r < h; ++r) {
            double back = 0.0;
            for (int c = 0; c < C; ++c)
                back += (probs[static_cast<std::size_t>(c)] - (c == s.label ? 1.0 : 0.0)) *
                        w2[static_cast<std::size_t>(c) * (h + 1) + r];
            const double a = hidden[static_cast<std::size_t>(r)];
            const double delta1 = back * (1.0 - a * a);
            double* row = g1 + static_cast<std::size_t>(r) * (d + 1);
            for (int j = 0; j < d; ++j) row[j] += delta1 * s.features[static_cast<std::size_t>(j)];
            row[d] += delta1;
        }
        return;
    }
    }
}

} // namespace detail

// Quadratic/Logistic start at zero; Mlp uses uniform(-1/sqrt(fan_in), +1/sqrt(fan_in))
// per layer from the seeded stream.
inline ParameterVector init_params(const ModelSpec& spec, std::uint64_t seed) {
    spec.validate();
    ParameterVector w(static_cast<std::size_t>(spec.param_dim()), 0.0);
    if (spec.kind != ModelKind::Mlp) return w;
    Rng rng(seed);
    const int d = spec.input_dim;
    const int h = spec.hidden_dim;
    const double b1 = 1.0 / std::sqrt(static_cast<double>(d + 1));
    const double b2 = 1.0 / std::sqrt(static_cast<double>(h + 1));
    const std::size_t split = static_cast<std::size_t>(h) * (d + 1);
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double b = i < split ? b1 : b2;
        w[i] = rng.uniform(-b, b);
    }
    return w;
}

inline double loss(const ModelSpec& spec, const ParameterVector& w, std::span<const Sample> batch) {
    spec.validate();
    if (batch.empty()) throw std::invalid_argument("loss: empty batch");
    if (static_cast<int>(w.size()) != spec.param_dim())
        throw std::invalid_argument("loss: parameter dimension mismatch");
    std::vector<double> hidden, logits;
    double acc = 0.0;
    for (const Sample& s : batch) {
        detail::check_sample(spec, s);
        acc += detail::sample_loss(spec, w, s, hidden, logits);
    }
    return acc / static_cast<double>(batch.size());
}

namespace detail {

template <typename SampleAt>
ParameterVector gradient_over(const ModelSpec& spec, const ParameterVector& w, std::size_t n,
                              SampleAt&& sample_at) {
    spec.validate();
    if (n == 0) throw std::invalid_argument("gradient: empty batch");
    if (static_cast<int>(w.size()) != spec.param_dim())
        throw std::invalid_argument("gradient: parameter dimension mismatch");
    ParameterVector grad(w.size(), 0.0);
    std::vector<double> hidden, probs;
    for (std::size_t i = 0; i < n; ++i) {
        const Sample& s = sample_at(i);
        check_sample(spec, s);
        accumulate_sample_gradient(spec, w, s, grad, hidden, probs);
    }
    const double inv = 1.0 / static_cast<double>(n);
    for (double& g : grad) g *= inv;
    return grad;
}

} // namespace detail

inline ParameterVector gradient(const ModelSpec& spec, const ParameterVector& w,
                                std::span<const Sample> batch) {
    return detail::gradient_over(spec, w, batch.size(),
                                 [&](std::size_t i) -> const Sample& { return batch[i]; });
}

// Gradient over a uniformly drawn (without replacement) subset of the shard.
// batch_size == shard size reproduces gradient() bit-exactly.
inline ParameterVector stochastic_gradient(const ModelSpec& spec, const ParameterVector& w,
                                           const std::vector<Sample>& shard, int batch_size,
                                           Rng& rng) {
    if (shard.empty()) throw std::invalid_argument("stochastic_gradient: empty shard");
    if (batch_size < 1 || batch_size > static_cast<int>(shard.size()))
        throw std::invalid_argument("stochastic_gradient: batch_size must lie in [1, shard size]");
    const auto idx = rng.sample_without_replacement(static_cast<int>(shard.size()), batch_size);
    return detail::gradient_over(spec, w, idx.size(), [&](std::size_t i) -> const Sample& {
        return shard[static_cast<std::size_t>(idx[i])];
    });
}

// Central differences per coordinate against the analytic gradient.
inline GradCheckReport finite_diff_check(const ModelSpec& spec, const ParameterVector& w,
                                         std::span<const Sample> batch, double step) {
    if (!(step > 0.0)) throw std::invalid_argument("finite_diff_check: step must be positive");
    const ParameterVector g = gradient(spec, w, batch);
    GradCheckReport report;
    report.step = step;
    ParameterVector probe = w;
    for (std::size_t i = 0; i < w.size(); ++i) {
        probe[i] = w[i] + step;
        const double up = loss(spec, probe, batch);
        probe[i] = w[i] - step;
        const double down = loss(spec, probe, batch);
        probe[i] = w[i];
        const double fd = (up - down) / (2.0 * step);
        const double rel = std::fabs(g[i] - fd) / std::max(1e-12, std::fabs(g[i]) + std::fabs(fd));
        if (rel > report.max_rel_error) {
            report.max_rel_error = rel;
            report.worst_coordinate = static_cast<int>(i);
        }
    }
    return report;
}

} // namespace raga

#endif // RAGA_MODELS_HPP
