#ifndef RAGA_CONFIG_HPP
#define RAGA_CONFIG_HPP

#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "raga/data.hpp"
#include "raga/server.hpp"

namespace raga {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class DatasetKind { Mnist, Quadratic, Logistic, SyntheticDigits };

struct DatasetConfig {
    DatasetKind kind = DatasetKind::Mnist;
    // mnist
    std::string images_path = "data/train-images-idx3-ubyte";
    std::string labels_path = "data/train-labels-idx1-ubyte";
    std::string test_images_path = "data/t10k-images-idx3-ubyte";
    std::string test_labels_path = "data/t10k-labels-idx1-ubyte";
    int subset = 4000;
    int test_subset = 1000;
    // quadratic
    int dim = 5;
    int per_shard = 20;
    double offset_scale = 1.0;
    double noise_std = 0.0;
    // logistic (shares dim/per_shard)
    int class_count = 2;
    double separation = 4.0;
    // synthetic_digits (shares subset/test_subset)
    double digit_noise = 0.03;

    bool operator==(const DatasetConfig&) const = default;
};

struct ExperimentConfig {
    DatasetConfig dataset;
    ModelKind model_kind = ModelKind::Logistic;
    int hidden_dim = 32;
    TrainerConfig trainer;
    PartitionPlan partition;
    double byz_fraction = 0.0;
    std::string output_dir = "out";
    std::vector<std::uint64_t> seeds = {1};

    bool operator==(const ExperimentConfig&) const = default;
};

namespace detail {

using json = nlohmann::ordered_json;

inline void expect_keys(const json& obj, const std::set<std::string>& allowed,
                        const std::string& context) {
    for (const auto& [key, value] : obj.items())
        if (!allowed.count(key))
            throw ConfigError("unknown key '" + key + "' in " + context);
}

template <typename T>
T get_or(const json& obj, const std::string& key, T fallback, const std::string& context) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("key '" + key + "' in " + context + " has the wrong type");
    }
}

inline LrSchedule parse_lr(const json& obj, const std::string& context, int default_k) {
    expect_keys(obj, {"kind", "eta0", "shift", "exponent", "k_ref", "t_ref", "beta"}, context);
    const auto kind = get_or<std::string>(obj, "kind", "paper_experiment", context);
    LrSchedule s;
    if (kind == "constant") s.kind = LrKind::Constant;
    else if (kind == "poly_decay") s.kind = LrKind::PolyDecay;
    else if (kind == "paper_experiment") s.kind = LrKind::PaperExperiment;
    else if (kind == "scaled_by_t") s.kind = LrKind::ScaledByT;
    else throw ConfigError("key 'kind' in " + context + ": unknown schedule '" + kind + "'");
    s.eta0 = get_or<double>(obj, "eta0", 0.1, context);
    s.shift = get_or<double>(obj, "shift", 0.0, context);
    s.exponent = get_or<double>(obj, "exponent", 0.5, context);
    s.k_ref = get_or<int>(obj, "k_ref", default_k, context);
    s.t_ref = get_or<double>(obj, "t_ref", 500.0, context);
    s.beta = get_or<double>(obj, "beta", 0.5, context);
    try {
        s.validate();
    } catch (const std::exception& e) {
        throw ConfigError(context + ": " + e.what());
    }
    return s;
}

inline AttackKind parse_attack(const json& obj, const std::string& context) {
    expect_keys(obj, {"kind", "std", "scale", "coeff"}, context);
    const auto kind = get_or<std::string>(obj, "kind", "none", context);
    AttackKind a;
    if (kind == "none") a.type = AttackType::NoAttack;
    else if (kind == "gaussian") a.type = AttackType::Gaussian;
    else if (kind == "signflip") a.type = AttackType::SignFlip;
    else if (kind == "lie") a.type = AttackType::Lie;
    else throw ConfigError("key 'kind' in " + context + ": unknown attack '" + kind + "'");
    a.gaussian_std = get_or<double>(obj, "std", a.gaussian_std, context);
    a.signflip_scale = get_or<double>(obj, "scale", a.signflip_scale, context);
    a.lie_coeff = get_or<double>(obj, "coeff", a.lie_coeff, context);
    try {
        a.validate();
    } catch (const std::exception& e) {
        throw ConfigError(context + ": " + e.what());
    }
    return a;
}

inline const char* lr_kind_name(LrKind k) {
    switch (k) {
    case LrKind::Constant: return "constant";
    case LrKind::PolyDecay: return "poly_decay";
    case LrKind::PaperExperiment: return "paper_experiment";
    case LrKind::ScaledByT: return "scaled_by_t";
    }
    return "constant";
}

inline const char* attack_name(AttackType t) {
    switch (t) {
    case AttackType::NoAttack: return "none";
    case AttackType::Gaussian: return "gaussian";
    case AttackType::SignFlip: return "signflip";
    case AttackType::Lie: return "lie";
    }
    return "none";
}

inline const char* aggregator_name(AggregatorKind k) {
    switch (k) {
    case AggregatorKind::GeometricMedian: return "geometric_median";
    case AggregatorKind::Mean: return "mean";
    case AggregatorKind::CoordinateMedian: return "coordinate_median";
    case AggregatorKind::TrimmedMean: return "trimmed_mean";
    }
    return "geometric_median";
}

inline const char* dataset_name(DatasetKind k) {
    switch (k) {
    case DatasetKind::Mnist: return "mnist";
    case DatasetKind::Quadratic: return "quadratic";
    case DatasetKind::Logistic: return "logistic";
    case DatasetKind::SyntheticDigits: return "synthetic_digits";
    }
    return "mnist";
}

inline const char* model_name(ModelKind k) {
    switch (k) {
    case ModelKind::Quadratic: return "quadratic";
    case ModelKind::Logistic: return "logistic";
    case ModelKind::Mlp: return "mlp";
    }
    return "logistic";
}

} // namespace detail

// JSON config -> validated ExperimentConfig. Unknown keys are rejected; absent
// keys take the documented defaults (M=50, batch 32, epsilon 1e-5, K=3, T=500).
inline ExperimentConfig parse_config(const std::string& text) {
    using detail::expect_keys;
    using detail::get_or;
    detail::json root;
    try {
        root = detail::json::parse(text);
    } catch (const detail::json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!root.is_object()) throw ConfigError("config root must be a JSON object");
    expect_keys(root,
                {"dataset", "model", "trainer", "partition", "byz_fraction", "eval_every",
                 "output_dir", "seeds"},
                "config");

    ExperimentConfig cfg;

    if (root.contains("dataset")) {
        const auto& d = root.at("dataset");
        expect_keys(d,
                    {"kind", "images_path", "labels_path", "test_images_path", "test_labels_path",
                     "subset", "test_subset", "dim", "per_shard", "offset_scale", "noise_std",
                     "class_count", "separation", "digit_noise"},
                    "dataset");
        const auto kind = get_or<std::string>(d, "kind", "mnist", "dataset");
        if (kind == "mnist") cfg.dataset.kind = DatasetKind::Mnist;
        else if (kind == "quadratic") cfg.dataset.kind = DatasetKind::Quadratic;
        else if (kind == "logistic") cfg.dataset.kind = DatasetKind::Logistic;
        else if (kind == "synthetic_digits") cfg.dataset.kind = DatasetKind::SyntheticDigits;
        else throw ConfigError("key 'kind' in dataset: unknown dataset '" + kind + "'");
        cfg.dataset.images_path = get_or<std::string>(d, "images_path", cfg.dataset.images_path, "dataset");
        cfg.dataset.labels_path = get_or<std::string>(d, "labels_path", cfg.dataset.labels_path, "dataset");
        cfg.dataset.test_images_path =
            get_or<std::string>(d, "test_images_path", cfg.dataset.test_images_path, "dataset");
        cfg.dataset.test_labels_path =
            get_or<std::string>(d, "test_labels_path", cfg.dataset.test_labels_path, "dataset");
        cfg.dataset.subset = get_or<int>(d, "subset", cfg.dataset.subset, "dataset");
        cfg.dataset.test_subset = get_or<int>(d, "test_subset", cfg.dataset.test_subset, "dataset");
        cfg.dataset.dim = get_or<int>(d, "dim", cfg.dataset.dim, "dataset");
        cfg.dataset.per_shard = get_or<int>(d, "per_shard", cfg.dataset.per_shard, "dataset");
        cfg.dataset.offset_scale = get_or<double>(d, "offset_scale", cfg.dataset.offset_scale, "dataset");
        cfg.dataset.noise_std = get_or<double>(d, "noise_std", cfg.dataset.noise_std, "dataset");
        cfg.dataset.class_count = get_or<int>(d, "class_count", cfg.dataset.class_count, "dataset");
        cfg.dataset.separation = get_or<double>(d, "separation", cfg.dataset.separation, "dataset");
        cfg.dataset.digit_noise = get_or<double>(d, "digit_noise", cfg.dataset.digit_noise, "dataset");
        if (cfg.dataset.subset < 1) throw ConfigError("key 'subset' in dataset must be >= 1");
        if (cfg.dataset.per_shard < 1) throw ConfigError("key 'per_shard' in dataset must be >= 1");
    }

    if (cfg.dataset.kind == DatasetKind::Quadratic) cfg.model_kind = ModelKind::Quadratic;
    if (root.contains("model")) {
        const auto& m = root.at("model");
        expect_keys(m, {"kind", "hidden_dim"}, "model");
        const auto kind = get_or<std::string>(m, "kind", "logistic", "model");
        if (kind == "quadratic") cfg.model_kind = ModelKind::Quadratic;
        else if (kind == "logistic") cfg.model_kind = ModelKind::Logistic;
        else if (kind == "mlp") cfg.model_kind = ModelKind::Mlp;
        else throw ConfigError("key 'kind' in model: unknown model '" + kind + "'");
        cfg.hidden_dim = get_or<int>(m, "hidden_dim", cfg.hidden_dim, "model");
        if (cfg.hidden_dim < 1) throw ConfigError("key 'hidden_dim' in model must be >= 1");
    }

    if (root.contains("trainer")) {
        const auto& t = root.at("trainer");
        expect_keys(t,
                    {"aggregator", "epsilon", "max_iters", "trim_fraction", "rounds", "local_steps",
                     "batch_size", "global_lr", "local_lr", "attack", "seed"},
                    "trainer");
        const auto agg = get_or<std::string>(t, "aggregator", "geometric_median", "trainer");
        if (agg == "geometric_median") cfg.trainer.aggregator.kind = AggregatorKind::GeometricMedian;
        else if (agg == "mean") cfg.trainer.aggregator.kind = AggregatorKind::Mean;
        else if (agg == "coordinate_median") cfg.trainer.aggregator.kind = AggregatorKind::CoordinateMedian;
        else if (agg == "trimmed_mean") cfg.trainer.aggregator.kind = AggregatorKind::TrimmedMean;
        else throw ConfigError("key 'aggregator' in trainer: unknown aggregator '" + agg + "'");
        cfg.trainer.aggregator.epsilon = get_or<double>(t, "epsilon", 1e-5, "trainer");
        cfg.trainer.aggregator.max_iters = get_or<int>(t, "max_iters", 10000, "trainer");
        cfg.trainer.aggregator.trim_fraction = get_or<double>(t, "trim_fraction", 0.1, "trainer");
        cfg.trainer.rounds = get_or<int>(t, "rounds", 500, "trainer");
        cfg.trainer.local_steps = get_or<int>(t, "local_steps", 3, "trainer");
        cfg.trainer.batch_size = get_or<int>(t, "batch_size", 32, "trainer");
        cfg.trainer.seed = get_or<std::uint64_t>(t, "seed", 1, "trainer");
        const int k = cfg.trainer.local_steps;
        cfg.trainer.global_lr = t.contains("global_lr")
                                    ? detail::parse_lr(t.at("global_lr"), "trainer.global_lr", k)
                                    : LrSchedule::paper_experiment(k);
        cfg.trainer.local_lr = t.contains("local_lr")
                                   ? detail::parse_lr(t.at("local_lr"), "trainer.local_lr", k)
                                   : LrSchedule::paper_experiment(k);
        cfg.trainer.attack = t.contains("attack") ? detail::parse_attack(t.at("attack"), "trainer.attack")
                                                  : AttackKind{};
    } else {
        cfg.trainer.global_lr = LrSchedule::paper_experiment(cfg.trainer.local_steps);
        cfg.trainer.local_lr = LrSchedule::paper_experiment(cfg.trainer.local_steps);
    }

    if (root.contains("partition")) {
        const auto& p = root.at("partition");
        expect_keys(p, {"clients", "concentration", "seed"}, "partition");
        cfg.partition.client_count = get_or<int>(p, "clients", 50, "partition");
        cfg.partition.concentration = get_or<double>(p, "concentration", 0.6, "partition");
        cfg.partition.seed = get_or<std::uint64_t>(p, "seed", 1, "partition");
        if (cfg.partition.client_count < 1) throw ConfigError("key 'clients' in partition must be >= 1");
        if (!(cfg.partition.concentration > 0.0))
            throw ConfigError("key 'concentration' in partition must be positive");
    }

    cfg.byz_fraction = get_or<double>(root, "byz_fraction", 0.0, "config");
    if (!(cfg.byz_fraction >= 0.0) || cfg.byz_fraction >= 0.5)
        throw ConfigError("key 'byz_fraction': honest fraction must exceed 0.5 (need byz_fraction < 0.5)");
    cfg.trainer.eval_every = get_or<int>(root, "eval_every", 1, "config");
    if (cfg.trainer.eval_every < 1) throw ConfigError("key 'eval_every' must be >= 1");
    cfg.output_dir = get_or<std::string>(root, "output_dir", "out", "config");
    if (root.contains("seeds")) {
        try {
            cfg.seeds = root.at("seeds").get<std::vector<std::uint64_t>>();
        } catch (const detail::json::exception&) {
            throw ConfigError("key 'seeds' must be an array of non-negative integers");
        }
        if (cfg.seeds.empty()) throw ConfigError("key 'seeds' must not be empty");
    }

    try {
        cfg.trainer.validate();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("trainer: ") + e.what());
    }
    return cfg;
}

inline std::string serialize_config(const ExperimentConfig& cfg) {
    using detail::json;
    json root;
    json d;
    d["kind"] = detail::dataset_name(cfg.dataset.kind);
    switch (cfg.dataset.kind) {
    case DatasetKind::Mnist:
        d["images_path"] = cfg.dataset.images_path;
        d["labels_path"] = cfg.dataset.labels_path;
        d["test_images_path"] = cfg.dataset.test_images_path;
        d["test_labels_path"] = cfg.dataset.test_labels_path;
        d["subset"] = cfg.dataset.subset;
        d["test_subset"] = cfg.dataset.test_subset;
        break;
    case DatasetKind::Quadratic:
        d["dim"] = cfg.dataset.dim;
        d["per_shard"] = cfg.dataset.per_shard;
        d["offset_scale"] = cfg.dataset.offset_scale;
        d["noise_std"] = cfg.dataset.noise_std;
        break;
    case DatasetKind::Logistic:
        d["dim"] = cfg.dataset.dim;
        d["per_shard"] = cfg.dataset.per_shard;
        d["class_count"] = cfg.dataset.class_count;
        d["separation"] = cfg.dataset.separation;
        break;
    case DatasetKind::SyntheticDigits:
        d["subset"] = cfg.dataset.subset;
        d["test_subset"] = cfg.dataset.test_subset;
        d["digit_noise"] = cfg.dataset.digit_noise;
        break;
    }
    root["dataset"] = d;

    json m;
    m["kind"] = detail::model_name(cfg.model_kind);
    if (cfg.model_kind == ModelKind::Mlp) m["hidden_dim"] = cfg.hidden_dim;
    root["model"] = m;

    json t;
    t["aggregator"] = detail::aggregator_name(cfg.trainer.aggregator.kind);
    if (cfg.trainer.aggregator.kind == AggregatorKind::GeometricMedian) {
        t["epsilon"] = cfg.trainer.aggregator.epsilon;
        t["max_iters"] = cfg.trainer.aggregator.max_iters;
    }
    if (cfg.trainer.aggregator.kind == AggregatorKind::TrimmedMean)
        t["trim_fraction"] = cfg.trainer.aggregator.trim_fraction;
    t["rounds"] = cfg.trainer.rounds;
    t["local_steps"] = cfg.trainer.local_steps;
    t["batch_size"] = cfg.trainer.batch_size;
    t["seed"] = cfg.trainer.seed;
    const auto lr_json = [](const LrSchedule& s) {
        json j;
        j["kind"] = detail::lr_kind_name(s.kind);
        switch (s.kind) {
        case LrKind::Constant: j["eta0"] = s.eta0; break;
        case LrKind::PolyDecay:
            j["eta0"] = s.eta0;
            j["shift"] = s.shift;
            j["exponent"] = s.exponent;
            break;
        case LrKind::PaperExperiment: j["k_ref"] = s.k_ref; break;
        case LrKind::ScaledByT:
            j["eta0"] = s.eta0;
            j["t_ref"] = s.t_ref;
            j["k_ref"] = s.k_ref;
            j["beta"] = s.beta;
            break;
        }
        return j;
    };
    t["global_lr"] = lr_json(cfg.trainer.global_lr);
    t["local_lr"] = lr_json(cfg.trainer.local_lr);
    json a;
    a["kind"] = detail::attack_name(cfg.trainer.attack.type);
    if (cfg.trainer.attack.type == AttackType::Gaussian) a["std"] = cfg.trainer.attack.gaussian_std;
    if (cfg.trainer.attack.type == AttackType::SignFlip) a["scale"] = cfg.trainer.attack.signflip_scale;
    if (cfg.trainer.attack.type == AttackType::Lie) a["coeff"] = cfg.trainer.attack.lie_coeff;
    t["attack"] = a;
    root["trainer"] = t;

    json p;
    p["clients"] = cfg.partition.client_count;
    p["concentration"] = cfg.partition.concentration;
    p["seed"] = cfg.partition.seed;
    root["partition"] = p;

    root["byz_fraction"] = cfg.byz_fraction;
    root["eval_every"] = cfg.trainer.eval_every;
    root["output_dir"] = cfg.output_dir;
    root["seeds"] = cfg.seeds;
    return root.dump(2) + "\n";
}

inline ExperimentConfig load_config_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

} // namespace raga

#endif // RAGA_CONFIG_HPP
