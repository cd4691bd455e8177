#ifndef RAGA_EXPERIMENT_HPP
#define RAGA_EXPERIMENT_HPP

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "raga/config.hpp"
#include "raga/csv.hpp"
#include "raga/data.hpp"
#include "raga/server.hpp"

namespace raga {

struct BuiltExperiment {
    ShardedDataset train;
    std::vector<Sample> test;
    ModelSpec spec;
};

namespace detail {

inline std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

constexpr std::uint64_t kMarkStream = 0x6d61726b;
constexpr std::uint64_t kTestStream = 0x74657374;

} // namespace detail

// Materializes the dataset/model pair a config describes. The partition and the
// Byzantine marking depend only on partition.seed, so every run seed trains on
// the same data.
inline BuiltExperiment build_experiment(const ExperimentConfig& cfg) {
    BuiltExperiment built;
    const auto& d = cfg.dataset;
    switch (d.kind) {
    case DatasetKind::Mnist:
    case DatasetKind::SyntheticDigits: {
        std::vector<Sample> train_samples, test_samples;
        if (d.kind == DatasetKind::Mnist) {
            const auto images = detail::read_file_bytes(d.images_path);
            const auto labels = detail::read_file_bytes(d.labels_path);
            train_samples = parse_idx(images, labels);
            const auto test_images = detail::read_file_bytes(d.test_images_path);
            const auto test_labels = detail::read_file_bytes(d.test_labels_path);
            test_samples = parse_idx(test_images, test_labels);
        } else {
            const auto train_idx = synthetic_digit_idx(d.subset, d.digit_noise, cfg.partition.seed);
            train_samples = parse_idx(train_idx.images, train_idx.labels);
            const auto test_idx =
                synthetic_digit_idx(d.test_subset, d.digit_noise,
                                    seed_mix(cfg.partition.seed, detail::kTestStream), true);
            test_samples = parse_idx(test_idx.images, test_idx.labels);
        }
        if (cfg.model_kind == ModelKind::Quadratic)
            throw ConfigError("model 'quadratic' requires a 'quadratic' dataset");
        if (d.subset < static_cast<int>(train_samples.size()))
            train_samples.resize(static_cast<std::size_t>(d.subset));
        if (d.test_subset < static_cast<int>(test_samples.size()))
            test_samples.resize(static_cast<std::size_t>(d.test_subset));
        built.train = dirichlet_partition(train_samples, cfg.partition);
        built.test = std::move(test_samples);
        built.spec.kind = cfg.model_kind;
        built.spec.input_dim = static_cast<int>(built.test.front().features.size());
        built.spec.class_count = 10;
        built.spec.hidden_dim = cfg.hidden_dim;
        break;
    }
    case DatasetKind::Quadratic: {
        const int M = cfg.partition.client_count;
        Rng rng(cfg.partition.seed);
        std::vector<ParameterVector> offsets(static_cast<std::size_t>(M));
        for (auto& off : offsets) {
            off.resize(static_cast<std::size_t>(d.dim));
            for (double& v : off) v = d.offset_scale * rng.normal();
        }
        built.train = synthetic_quadratic(d.dim, M, d.per_shard, offsets, d.noise_std,
                                          seed_mix(cfg.partition.seed, 2));
        built.spec.kind = ModelKind::Quadratic;
        built.spec.input_dim = d.dim;
        // held-out pool drawn the same way, a quarter shard per client
        for (int m = 0; m < M; ++m)
            for (int i = 0; i < std::max(1, d.per_shard / 4); ++i) {
                Sample s;
                s.features.resize(static_cast<std::size_t>(d.dim));
                for (int j = 0; j < d.dim; ++j)
                    s.features[static_cast<std::size_t>(j)] =
                        offsets[static_cast<std::size_t>(m)][static_cast<std::size_t>(j)] +
                        d.noise_std * rng.normal();
                built.test.push_back(std::move(s));
            }
        break;
    }
    case DatasetKind::Logistic: {
        if (cfg.model_kind == ModelKind::Quadratic)
            throw ConfigError("model 'quadratic' requires a 'quadratic' dataset");
        built.train = synthetic_logistic(d.dim, cfg.partition.client_count, d.per_shard,
                                         d.class_count, d.separation, cfg.partition.concentration,
                                         cfg.partition.seed);
        const auto held_out =
            synthetic_logistic(d.dim, 1, std::max(64, d.per_shard), d.class_count, d.separation,
                               cfg.partition.concentration, seed_mix(cfg.partition.seed, detail::kTestStream));
        built.test = held_out.shards.front();
        built.spec.kind = cfg.model_kind;
        built.spec.input_dim = d.dim;
        built.spec.class_count = d.class_count;
        built.spec.hidden_dim = cfg.hidden_dim;
        break;
    }
    }
    if (cfg.byz_fraction > 0.0)
        built.train = mark_byzantine(built.train, cfg.byz_fraction,
                                     seed_mix(cfg.partition.seed, detail::kMarkStream));
    built.spec.validate();
    return built;
}

inline std::filesystem::path resolve_output_dir(const ExperimentConfig& cfg) {
    if (const char* root = std::getenv("RAGA_OUTPUT_ROOT"))
        return std::filesystem::path(root) / cfg.output_dir;
    return cfg.output_dir;
}

struct SeedSummary {
    std::uint64_t seed = 0;
    double max_test_accuracy = 0.0;
    double final_test_accuracy = 0.0;
    double final_train_loss = 0.0;
};

struct ExperimentSummary {
    std::vector<SeedSummary> per_seed;
    std::filesystem::path output_dir;

    double mean_max_accuracy() const {
        double s = 0.0;
        for (const auto& r : per_seed) s += r.max_test_accuracy;
        return per_seed.empty() ? 0.0 : s / static_cast<double>(per_seed.size());
    }
    double best_max_accuracy() const {
        double s = 0.0;
        for (const auto& r : per_seed) s = std::max(s, r.max_test_accuracy);
        return s;
    }
};

// One metrics CSV per seed plus an aggregate summary (mean/max test accuracy
// across seeds). Poor accuracy is not a failure; only structural errors are.
inline ExperimentSummary run_experiment(const ExperimentConfig& cfg, bool quiet = false) {
    const auto built = build_experiment(cfg);
    const auto out_dir = resolve_output_dir(cfg);
    std::filesystem::create_directories(out_dir);

    ExperimentSummary summary;
    summary.output_dir = out_dir;
    for (std::uint64_t seed : cfg.seeds) {
        TrainerConfig trainer = cfg.trainer;
        trainer.seed = seed;
        const auto result = run_training(trainer, built.train, built.spec, built.test);
        const auto path = out_dir / ("metrics_seed" + std::to_string(seed) + ".csv");
        emit_csv(result.records, path);

        SeedSummary row;
        row.seed = seed;
        row.final_train_loss = result.records.back().train_loss;
        for (const auto& rec : result.records) {
            if (rec.test_accuracy) row.max_test_accuracy = std::max(row.max_test_accuracy, *rec.test_accuracy);
        }
        if (result.records.back().test_accuracy)
            row.final_test_accuracy = *result.records.back().test_accuracy;
        summary.per_seed.push_back(row);
        if (!quiet)
            std::cout << "seed " << seed << ": final_train_loss=" << format_value(row.final_train_loss)
                      << " max_test_acc=" << format_value(row.max_test_accuracy) << " -> " << path.string()
                      << "\n";
    }

    std::ofstream out(out_dir / "summary.csv", std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (out_dir / "summary.csv").string());
    out << "metric,mean,max\n";
    double mean_final = 0.0, max_final = 0.0, mean_loss = 0.0, max_loss = 0.0;
    for (const auto& r : summary.per_seed) {
        mean_final += r.final_test_accuracy;
        max_final = std::max(max_final, r.final_test_accuracy);
        mean_loss += r.final_train_loss;
        max_loss = std::max(max_loss, r.final_train_loss);
    }
    const double n = static_cast<double>(summary.per_seed.size());
    out << "max_test_accuracy," << format_value(summary.mean_max_accuracy()) << ','
        << format_value(summary.best_max_accuracy()) << '\n';
    out << "final_test_accuracy," << format_value(mean_final / n) << ',' << format_value(max_final) << '\n';
    out << "final_train_loss," << format_value(mean_loss / n) << ',' << format_value(max_loss) << '\n';
    return summary;
}

} // namespace raga

#endif // RAGA_EXPERIMENT_HPP
