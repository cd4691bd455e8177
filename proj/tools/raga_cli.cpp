// Experiment front-end: run single configs, sweep attack/fraction/heterogeneity
// grids, verify the convergence bounds on a finished run, and exercise the
// gradient and median kernels standalone.

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "raga/raga.hpp"

namespace {

using raga::ExperimentConfig;

std::vector<std::string> split_list(const std::string& csv) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : csv) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

void apply_override(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "byz_fraction") {
        cfg.byz_fraction = std::stod(value);
        if (!(cfg.byz_fraction >= 0.0) || cfg.byz_fraction >= 0.5)
            throw raga::ConfigError("sweep byz_fraction: honest fraction must exceed 0.5");
    } else if (key == "attack") {
        if (value == "none") cfg.trainer.attack.type = raga::AttackType::NoAttack;
        else if (value == "gaussian") cfg.trainer.attack.type = raga::AttackType::Gaussian;
        else if (value == "signflip") cfg.trainer.attack.type = raga::AttackType::SignFlip;
        else if (value == "lie") cfg.trainer.attack.type = raga::AttackType::Lie;
        else throw raga::ConfigError("sweep attack: unknown attack '" + value + "'");
    } else if (key == "concentration") {
        cfg.partition.concentration = std::stod(value);
    } else if (key == "aggregator") {
        if (value == "geometric_median") cfg.trainer.aggregator.kind = raga::AggregatorKind::GeometricMedian;
        else if (value == "mean") cfg.trainer.aggregator.kind = raga::AggregatorKind::Mean;
        else if (value == "coordinate_median")
            cfg.trainer.aggregator.kind = raga::AggregatorKind::CoordinateMedian;
        else if (value == "trimmed_mean") cfg.trainer.aggregator.kind = raga::AggregatorKind::TrimmedMean;
        else throw raga::ConfigError("sweep aggregator: unknown aggregator '" + value + "'");
    } else if (key == "rounds") {
        cfg.trainer.rounds = std::stoi(value);
    } else if (key == "local_steps") {
        cfg.trainer.local_steps = std::stoi(value);
    } else if (key == "batch_size") {
        cfg.trainer.batch_size = std::stoi(value);
    } else {
        throw raga::ConfigError("sweep: cannot vary key '" + key + "'");
    }
}

int cmd_run(const std::string& config_path, long long seed_override, bool timings) {
    auto cfg = raga::load_config_file(config_path);
    if (seed_override >= 0) cfg.seeds = {static_cast<std::uint64_t>(seed_override)};
    cfg.trainer.record_wall_time = timings;
    const auto summary = raga::run_experiment(cfg);
    std::cout << "summary: mean max_test_acc=" << raga::format_value(summary.mean_max_accuracy())
              << " best=" << raga::format_value(summary.best_max_accuracy()) << "\n";
    return 0;
}

int cmd_sweep(const std::string& config_path, const std::vector<std::string>& vary,
              long long seed_override) {
    const auto base = raga::load_config_file(config_path);
    std::vector<std::pair<std::string, std::vector<std::string>>> axes;
    for (const auto& spec : vary) {
        const auto eq = spec.find('=');
        if (eq == std::string::npos)
            throw raga::ConfigError("--vary expects key=v1,v2,... got '" + spec + "'");
        axes.emplace_back(spec.substr(0, eq), split_list(spec.substr(eq + 1)));
    }
    std::vector<std::map<std::string, std::string>> cells{{}};
    for (const auto& [key, values] : axes) {
        std::vector<std::map<std::string, std::string>> next;
        for (const auto& cell : cells)
            for (const auto& v : values) {
                auto c = cell;
                c[key] = v;
                next.push_back(std::move(c));
            }
        cells = std::move(next);
    }

    const auto root = raga::resolve_output_dir(base);
    std::ofstream sweep_summary;
    std::filesystem::create_directories(root);
    sweep_summary.open(root / "sweep_summary.csv", std::ios::binary);
    sweep_summary << "cell,mean_max_test_accuracy,best_max_test_accuracy\n";
    std::vector<std::pair<std::string, std::filesystem::path>> series;
    for (const auto& cell : cells) {
        auto cfg = base;
        std::string label;
        for (const auto& [key, value] : cell) {
            apply_override(cfg, key, value);
            if (!label.empty()) label += ",";
            label += key + "=" + value;
        }
        if (label.empty()) label = "base";
        if (seed_override >= 0) cfg.seeds = {static_cast<std::uint64_t>(seed_override)};
        std::string dir_label = label;
        std::replace(dir_label.begin(), dir_label.end(), ',', '_');
        cfg.output_dir = (std::filesystem::path(base.output_dir) / dir_label).string();
        std::cout << "[sweep] " << label << "\n";
        const auto summary = raga::run_experiment(cfg);
        sweep_summary << label << ',' << raga::format_value(summary.mean_max_accuracy()) << ','
                      << raga::format_value(summary.best_max_accuracy()) << '\n';
        series.emplace_back(label, summary.output_dir /
                                       ("metrics_seed" + std::to_string(cfg.seeds.front()) + ".csv"));
    }
    raga::emit_plot_data(series, root / "plot_data.csv");
    std::cout << "sweep summary -> " << (root / "sweep_summary.csv").string() << "\n";
    std::cout << "plot data -> " << (root / "plot_data.csv").string() << "\n";
    return 0;
}

int cmd_verify_bounds(const std::string& config_path, long long seed_override) {
    auto cfg = raga::load_config_file(config_path);
    if (seed_override >= 0) cfg.seeds = {static_cast<std::uint64_t>(seed_override)};
    const auto built = raga::build_experiment(cfg);
    auto trainer = cfg.trainer;
    trainer.seed = cfg.seeds.front();
    const auto result = raga::run_training(trainer, built.train, built.spec, built.test);
    const int T = trainer.rounds;
    std::vector<int> prefixes;
    for (int p : {10, 50, 200, T})
        if (p <= T && (prefixes.empty() || prefixes.back() != p)) prefixes.push_back(p);
    const auto report = raga::verify_run_bounds(trainer, built.train, built.spec, result, prefixes);

    std::cout << "constants: L=" << raga::format_value(report.constants.L)
              << " mu=" << (report.constants.mu ? raga::format_value(*report.constants.mu) : "-")
              << " sigma=" << raga::format_value(report.constants.sigma)
              << " theta=" << raga::format_value(report.constants.theta)
              << " G=" << raga::format_value(report.constants.G)
              << " C_alpha=" << raga::format_value(report.constants.c_alpha) << "\n";
    for (const auto& check : report.checks)
        std::cout << (check.passed ? "PASS " : "FAIL ") << check.name << "  measured="
                  << raga::format_value(check.measured) << " bound=" << raga::format_value(check.bound)
                  << "  (" << check.detail << ")\n";

    const auto out_dir = raga::resolve_output_dir(cfg);
    std::filesystem::create_directories(out_dir);
    std::ofstream trace(out_dir / "bounds.csv", std::ios::binary);
    trace << "round,eta,delta,p,gamma,lambda,q,lemma3_bound,z_sqnorm\n";
    const auto& tr = report.trace;
    for (std::size_t i = 0; i < tr.rounds.size(); ++i)
        trace << tr.rounds[i] << ',' << raga::format_value(tr.eta[i]) << ','
              << raga::format_value(tr.delta[i]) << ',' << tr.p[i] << ','
              << raga::format_value(tr.gamma[i]) << ',' << raga::format_value(tr.lambda[i]) << ','
              << tr.q[i] << ',' << raga::format_value(tr.lemma3_bound[i]) << ','
              << raga::format_value(tr.z_sqnorm[i]) << '\n';
    std::cout << "trace -> " << (out_dir / "bounds.csv").string() << "\n";
    return report.all_passed() ? 0 : 1;
}

int cmd_gradcheck(int cases) {
    using namespace raga;
    Rng rng(424242);
    struct Family {
        const char* name;
        ModelKind kind;
        double step;
        double threshold;
    };
    const Family families[] = {
        {"quadratic", ModelKind::Quadratic, 1e-6, 1e-8},
        {"logistic", ModelKind::Logistic, 1e-6, 1e-5},
        {"mlp", ModelKind::Mlp, 1e-5, 1e-4},
    };
    bool ok = true;
    for (const auto& fam : families) {
        double worst = 0.0;
        for (int i = 0; i < cases; ++i) {
            ModelSpec spec;
            spec.kind = fam.kind;
            spec.input_dim = 2 + static_cast<int>(rng.uniform_index(5));
            spec.class_count = 2 + static_cast<int>(rng.uniform_index(3));
            spec.hidden_dim = 2 + static_cast<int>(rng.uniform_index(5));
            const int batch = 1 + static_cast<int>(rng.uniform_index(8));
            std::vector<Sample> samples;
            for (int b = 0; b < batch; ++b) {
                Sample s;
                s.features.resize(static_cast<std::size_t>(spec.input_dim));
                for (double& v : s.features) v = rng.normal();
                s.label = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(spec.class_count)));
                samples.push_back(std::move(s));
            }
            ParameterVector w(static_cast<std::size_t>(spec.param_dim()));
            if (fam.kind == ModelKind::Quadratic) {
                for (int j = 0; j < spec.input_dim; ++j) {
                    double mean_j = 0.0;
                    for (const auto& s : samples) mean_j += s.features[static_cast<std::size_t>(j)];
                    mean_j /= batch;
                    const double sign = rng.next_double() < 0.5 ? -1.0 : 1.0;
                    w[static_cast<std::size_t>(j)] = mean_j + sign * rng.uniform(0.5, 1.5);
                }
            } else {
                for (double& v : w) v = 0.5 * rng.normal();
            }
            const auto report = finite_diff_check(spec, w, samples, fam.step);
            worst = std::max(worst, report.max_rel_error);
        }
        const bool pass = worst < fam.threshold;
        ok = ok && pass;
        std::cout << (pass ? "PASS " : "FAIL ") << fam.name << ": max_rel_error="
                  << format_value(worst) << " threshold=" << format_value(fam.threshold) << "\n";
    }
    return ok ? 0 : 1;
}

int cmd_median_bench(int points, int dim, int instances) {
    using namespace raga;
    Rng rng(1234);
    double total_ms = 0.0;
    long long total_iters = 0;
    for (int i = 0; i < instances; ++i) {
        WeightedPointSet set;
        for (int m = 0; m < points; ++m) {
            ParameterVector p(static_cast<std::size_t>(dim));
            for (double& v : p) v = rng.normal();
            set.points.push_back(std::move(p));
            set.weights.push_back(1.0 / points);
        }
        double fix = 0.0;
        for (std::size_t j = 0; j + 1 < set.weights.size(); ++j) fix += set.weights[j];
        set.weights.back() = 1.0 - fix;
        const auto start = std::chrono::steady_clock::now();
        const auto res = geometric_median(set, 1e-5);
        const auto end = std::chrono::steady_clock::now();
        total_ms += std::chrono::duration<double, std::milli>(end - start).count();
        total_iters += res.iterations;
    }
    std::cout << "median-bench: M=" << points << " p=" << dim << " instances=" << instances
              << " mean_iters=" << (total_iters / std::max(1, instances))
              << " mean_ms=" << format_value(total_ms / std::max(1, instances)) << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"RAGA federated-learning simulator"};
    app.require_subcommand(1);

    std::string config_path;
    long long seed_override = -1;
    bool timings = false;
    std::vector<std::string> vary;
    int cases = 100;
    int bench_points = 50, bench_dim = 100, bench_instances = 20;

    auto* run = app.add_subcommand("run", "run one experiment config");
    run->add_option("config", config_path, "JSON config path")->required();
    run->add_option("--seed", seed_override, "override the seeds list with one seed");
    run->add_flag("--timings", timings, "record wall-clock per round (metrics stop being byte-reproducible)");

    auto* sweep = app.add_subcommand("sweep", "Cartesian sweep over config overrides");
    sweep->add_option("config", config_path, "JSON config path")->required();
    sweep->add_option("--vary", vary, "axis as key=v1,v2,... (repeatable)")->required();
    sweep->add_option("--seed", seed_override, "override the seeds list with one seed");

    auto* verify = app.add_subcommand("verify-bounds", "run a config and check the convergence bounds");
    verify->add_option("config", config_path, "JSON config path")->required();
    verify->add_option("--seed", seed_override, "override the seeds list with one seed");

    auto* grad = app.add_subcommand("gradcheck", "finite-difference gradient checks per model family");
    grad->add_option("--cases", cases, "random cases per family");

    auto* bench = app.add_subcommand("median-bench", "time the Weiszfeld kernel on random instances");
    bench->add_option("--points", bench_points, "points per instance");
    bench->add_option("--dim", bench_dim, "dimension");
    bench->add_option("--instances", bench_instances, "instance count");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) return cmd_run(config_path, seed_override, timings);
        if (*sweep) return cmd_sweep(config_path, vary, seed_override);
        if (*verify) return cmd_verify_bounds(config_path, seed_override);
        if (*grad) return cmd_gradcheck(cases);
        if (*bench) return cmd_median_bench(bench_points, bench_dim, bench_instances);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
