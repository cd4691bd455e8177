#ifndef RAGA_SERVER_HPP
#define RAGA_SERVER_HPP

#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "raga/aggregation.hpp"
#include "raga/attacks.hpp"
#include "raga/client.hpp"
#include "raga/data.hpp"
#include "raga/models.hpp"
#include "raga/rng.hpp"

namespace raga {

enum class AggregatorKind { GeometricMedian, Mean, CoordinateMedian, TrimmedMean };

struct AggregatorConfig {
    AggregatorKind kind = AggregatorKind::GeometricMedian;
    double epsilon = 1e-5;      // GeometricMedian
    int max_iters = 10000;      // GeometricMedian
    double trim_fraction = 0.1; // TrimmedMean

    void validate() const {
        if (kind == AggregatorKind::GeometricMedian) {
            if (!(epsilon > 0.0)) throw std::invalid_argument("AggregatorConfig: epsilon must be positive");
            if (max_iters < 1) throw std::invalid_argument("AggregatorConfig: max_iters must be >= 1");
        }
        if (kind == AggregatorKind::TrimmedMean &&
            (!(trim_fraction >= 0.0) || trim_fraction >= 0.5))
            throw std::invalid_argument("AggregatorConfig: trim_fraction must lie in [0, 0.5)");
    }

    bool operator==(const AggregatorConfig&) const = default;
};

struct TrainerConfig {
    AggregatorConfig aggregator;
    int rounds = 500;
    int local_steps = 3;
    int batch_size = 32;
    LrSchedule global_lr = LrSchedule::paper_experiment(3);
    LrSchedule local_lr = LrSchedule::paper_experiment(3);
    AttackKind attack;
    std::uint64_t seed = 1;
    int eval_every = 1;
    bool record_wall_time = false; // off by default: metrics files stay byte-reproducible

    void validate() const {
        aggregator.validate();
        if (rounds < 1) throw std::invalid_argument("TrainerConfig: rounds must be >= 1");
        if (local_steps < 1) throw std::invalid_argument("TrainerConfig: local_steps must be >= 1");
        if (batch_size < 1) throw std::invalid_argument("TrainerConfig: batch_size must be >= 1");
        if (eval_every < 1) throw std::invalid_argument("TrainerConfig: eval_every must be >= 1");
        global_lr.validate();
        local_lr.validate();
        attack.validate();
    }

    bool operator==(const TrainerConfig&) const = default;
};

// Telemetry for round t. Model metrics describe w^{t+1}, the model produced by
// the round; z_norm and the Weiszfeld fields describe the round's aggregation.
struct RoundRecord {
    int t = 0;
    double train_loss = 0.0;
    std::optional<double> test_loss;
    std::optional<double> test_accuracy;
    double z_norm = 0.0;
    std::optional<double> gap_to_opt; // Quadratic only
    std::optional<int> weiszfeld_iters;
    std::optional<double> wall_ms;
    bool aggregation_certified = true;
};

// Scalars needed by the per-round bound checks, cheap enough to keep for every
// round (the raw uploads are not).
struct RoundTheoryProbe {
    double honest_weighted_sqnorm = 0.0; // sum over honest of alpha_m * ||z_m||^2
    double z_sqnorm = 0.0;               // ||z^t||^2
    double honest_max_norm = 0.0;
};

struct EvalResult {
    double loss = 0.0;
    std::optional<double> accuracy;
};

struct TrainingResult {
    std::vector<RoundRecord> records;
    ParameterVector final_model;
    std::vector<ParameterVector> iterates; // w^1 .. w^{T+1}
    std::vector<RoundTheoryProbe> probes;  // one per round
};

// Mean loss plus argmax accuracy for classifiers (ties resolve to the lowest
// class index; accuracy is absent for Quadratic).
inline EvalResult evaluate(const ModelSpec& spec, const ParameterVector& w,
                           std::span<const Sample> test_set) {
    if (test_set.empty()) throw std::invalid_argument("evaluate: empty test set");
    EvalResult res;
    res.loss = loss(spec, w, test_set);
    if (!spec.is_classifier()) return res;
    std::vector<double> hidden, logits;
    int correct = 0;
    for (const Sample& s : test_set) {
        if (spec.kind == ModelKind::Logistic)
            detail::logistic_logits(spec, w, s, logits);
        else
            detail::mlp_forward(spec, w, s, hidden, logits);
        int best = 0;
        for (int c = 1; c < spec.class_count; ++c)
            if (logits[static_cast<std::size_t>(c)] > logits[static_cast<std::size_t>(best)]) best = c;
        if (best == s.label) ++correct;
    }
    res.accuracy = static_cast<double>(correct) / static_cast<double>(test_set.size());
    return res;
}

namespace detail {

constexpr std::uint64_t kAttackStream = 0x6174746b; // distinct stream tag per round
constexpr std::uint64_t kInitStream = 0x696e6974;

} // namespace detail

struct RoundContext {
    const ParameterVector* quadratic_opt = nullptr; // set when spec is Quadratic
    double optimum_loss = 0.0;
    const std::vector<Sample>* test_set = nullptr;
    bool eval_this_round = false;
};

// One round of Algorithm-1-style training: honest clients run K local SGD steps
// and upload averaged gradients, Byzantine slots are forged server-side, the
// aggregate z^t drives w^{t+1} = w^t - eta^t z^t.
inline std::pair<ParameterVector, RoundRecord> run_round(const ParameterVector& w,
                                                         const TrainerConfig& config,
                                                         const ShardedDataset& ds,
                                                         const ModelSpec& spec, int t,
                                                         const RoundContext& ctx = {},
                                                         RoundTheoryProbe* probe = nullptr) {
    const auto start = std::chrono::steady_clock::now();
    const int M = ds.client_count();
    const bool attacking = config.attack.type != AttackType::NoAttack;

    std::vector<ClientUpdate> honest;
    std::vector<int> byz_slots;
    honest.reserve(static_cast<std::size_t>(M));
    for (int m = 0; m < M; ++m) {
        if (attacking && ds.byzantine_mask[static_cast<std::size_t>(m)]) {
            byz_slots.push_back(m);
            continue;
        }
        const auto& shard = ds.shards[static_cast<std::size_t>(m)];
        const int batch = std::min<int>(config.batch_size, static_cast<int>(shard.size()));
        Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(m), static_cast<std::uint64_t>(t)));
        honest.push_back(local_update_run(spec, w, shard, config.local_steps, config.local_lr, batch,
                                          t, rng, m));
    }

    Rng attack_rng(derive_seed(config.seed, detail::kAttackStream, static_cast<std::uint64_t>(t)));
    const auto forged = forge(config.attack, honest, static_cast<int>(byz_slots.size()),
                              static_cast<int>(w.size()), attack_rng);

    WeightedPointSet set;
    set.points.resize(static_cast<std::size_t>(M));
    set.weights = ds.weights;
    {
        std::size_t h = 0, b = 0;
        for (int m = 0; m < M; ++m) {
            if (attacking && ds.byzantine_mask[static_cast<std::size_t>(m)])
                set.points[static_cast<std::size_t>(m)] = forged[b++];
            else
                set.points[static_cast<std::size_t>(m)] = honest[h++].vector;
        }
    }

    RoundRecord rec;
    rec.t = t;
    ParameterVector z;
    switch (config.aggregator.kind) {
    case AggregatorKind::GeometricMedian: {
        const auto gm = geometric_median(set, config.aggregator.epsilon, config.aggregator.max_iters);
        z = gm.point;
        rec.weiszfeld_iters = gm.iterations;
        rec.aggregation_certified = gm.certified;
        break;
    }
    case AggregatorKind::Mean: z = weighted_mean(set); break;
    case AggregatorKind::CoordinateMedian: z = coordinate_median(set); break;
    case AggregatorKind::TrimmedMean: z = trimmed_mean(set, config.aggregator.trim_fraction); break;
    }

    if (probe) {
        double sq = 0.0, maxn = 0.0;
        std::size_t h = 0;
        for (int m = 0; m < M; ++m) {
            if (attacking && ds.byzantine_mask[static_cast<std::size_t>(m)]) continue;
            const double n2 = squared_norm(honest[h].vector);
            sq += ds.weights[static_cast<std::size_t>(m)] * n2;
            maxn = std::max(maxn, std::sqrt(n2));
            ++h;
        }
        probe->honest_weighted_sqnorm = sq;
        probe->z_sqnorm = squared_norm(z);
        probe->honest_max_norm = maxn;
    }

    ParameterVector next = w;
    add_scaled(next, -lr_value(config.global_lr, t, 1), z);

    rec.z_norm = norm(z);
    rec.train_loss = detail::honest_loss(spec, next, ds);
    if (ctx.quadratic_opt) rec.gap_to_opt = rec.train_loss - ctx.optimum_loss;
    if (ctx.test_set && ctx.eval_this_round) {
        const auto ev = evaluate(spec, next, std::span<const Sample>(*ctx.test_set));
        rec.test_loss = ev.loss;
        rec.test_accuracy = ev.accuracy;
    }
    if (config.record_wall_time) {
        const auto end = std::chrono::steady_clock::now();
        rec.wall_ms = std::chrono::duration<double, std::milli>(end - start).count();
    }
    return {std::move(next), std::move(rec)};
}

inline TrainingResult run_training(const TrainerConfig& config, const ShardedDataset& ds,
                                   const ModelSpec& spec, const std::vector<Sample>& test_set) {
    config.validate();
    spec.validate();
    ds.validate();
    for (const auto& shard : ds.shards)
        for (const Sample& s : shard) detail::check_sample(spec, s);

    RoundContext ctx;
    ParameterVector opt;
    double opt_loss = 0.0;
    if (spec.kind == ModelKind::Quadratic) {
        opt = detail::quadratic_optimum(ds, spec.input_dim);
        opt_loss = detail::honest_loss(spec, opt, ds);
        ctx.quadratic_opt = &opt;
        ctx.optimum_loss = opt_loss;
    }
    if (!test_set.empty()) ctx.test_set = &test_set;

    TrainingResult result;
    ParameterVector w = init_params(spec, derive_seed(config.seed, detail::kInitStream, 0));
    result.iterates.push_back(w);
    for (int t = 1; t <= config.rounds; ++t) {
        ctx.eval_this_round = (t % config.eval_every == 0) || t == config.rounds;
        RoundTheoryProbe probe;
        auto [next, rec] = run_round(w, config, ds, spec, t, ctx, &probe);
        w = std::move(next);
        result.records.push_back(std::move(rec));
        result.probes.push_back(probe);
        result.iterates.push_back(w);
    }
    result.final_model = std::move(w);
    return result;
}

} // namespace raga

#endif // RAGA_SERVER_HPP
