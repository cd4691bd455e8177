// Acceptance suite: one pass/fail line per criterion, every tolerance pinned in
// code. Runs standalone (no fixtures beyond the library and the test oracles).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "raga/raga.hpp"

namespace {

using namespace raga;
using Clock = std::chrono::steady_clock;

struct Reporter {
    bool ok = true;
    std::vector<std::string> notes;

    void require(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            notes.push_back("FAILED: " + what);
        }
    }
    void note(const std::string& what) { notes.push_back(what); }
};

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v) { return format_value(v); }

// ---------------------------------------------------------------------------
// 1. Weiszfeld vs grid+refine oracle, 200 random instances, eps = 1e-5, < 5 s.
void criterion_geomed_oracle(Reporter& r) {
    const auto start = Clock::now();
    Rng rng(6021023);
    double worst_gap = -1e300;
    for (int trial = 0; trial < 200; ++trial) {
        const int m = 1 + static_cast<int>(rng.uniform_index(6));
        WeightedPointSet set;
        double wsum = 0.0;
        for (int i = 0; i < m; ++i) {
            set.points.push_back({2.0 * rng.normal(), 2.0 * rng.normal()});
            const double w = 0.05 + rng.next_double();
            set.weights.push_back(w);
            wsum += w;
        }
        for (double& w : set.weights) w /= wsum;
        double fix = 0.0;
        for (std::size_t i = 0; i + 1 < set.weights.size(); ++i) fix += set.weights[i];
        set.weights.back() = 1.0 - fix;

        const auto res = geometric_median(set, 1e-5);
        const auto oracle = oracles::grid_refine_geomed_2d(set.points, set.weights);
        worst_gap = std::max(worst_gap, res.objective - oracle.objective);
        r.require(res.objective <= oracle.objective + 1e-5,
                  "trial " + std::to_string(trial) + ": objective " + fmt(res.objective) +
                      " exceeds oracle " + fmt(oracle.objective) + " + 1e-5");
    }
    const double secs = seconds_since(start);
    r.require(secs < 5.0, "runtime " + fmt(secs) + "s exceeds 5s");
    r.note("200 instances, worst objective surplus " + fmt(worst_gap) + ", " + fmt(secs) + "s");
}

// ---------------------------------------------------------------------------
// 2. Contamination bound, 1000 randomized trials, adversaries up to 1e12.
void criterion_lemma3_contamination(Reporter& r) {
    const auto start = Clock::now();
    Rng rng(52409);
    const double c_alphas[] = {0.55, 0.6, 0.75, 0.9};
    const double eps = 1e-5;
    double worst_ratio = 0.0, worst_norm_ratio = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const double c_alpha = c_alphas[trial % 4];
        const int dim = 2 + static_cast<int>(rng.uniform_index(4));
        const int honest = 2 + static_cast<int>(rng.uniform_index(5));
        const int byz = 1 + static_cast<int>(rng.uniform_index(3));

        WeightedPointSet set;
        std::vector<double> hw(static_cast<std::size_t>(honest));
        double hsum = 0.0;
        for (auto& w : hw) {
            w = 0.2 + rng.next_double();
            hsum += w;
        }
        for (auto& w : hw) w *= c_alpha / hsum;
        double weighted_sq = 0.0, max_honest_norm = 0.0;
        for (int i = 0; i < honest; ++i) {
            ParameterVector p(static_cast<std::size_t>(dim));
            for (double& v : p) v = rng.normal();
            weighted_sq += hw[static_cast<std::size_t>(i)] * squared_norm(p);
            max_honest_norm = std::max(max_honest_norm, norm(p));
            set.points.push_back(std::move(p));
            set.weights.push_back(hw[static_cast<std::size_t>(i)]);
        }
        const double magnitude = (trial % 4 == 3) ? 1e12 : std::pow(10.0, 12.0 * rng.next_double());
        for (int b = 0; b < byz; ++b) {
            ParameterVector p(static_cast<std::size_t>(dim));
            double n = 0.0;
            for (double& v : p) {
                v = rng.normal();
                n += v * v;
            }
            n = std::sqrt(n);
            for (double& v : p) v *= magnitude / n;
            set.points.push_back(std::move(p));
            set.weights.push_back((1.0 - c_alpha) / byz);
        }
        double fix = 0.0;
        for (std::size_t i = 0; i + 1 < set.weights.size(); ++i) fix += set.weights[i];
        set.weights.back() = 1.0 - fix;

        const auto res = geometric_median(set, eps, 200000);
        const double denom = (2.0 * c_alpha - 1.0) * (2.0 * c_alpha - 1.0);
        const double bound = 8.0 * c_alpha / denom * weighted_sq + 2.0 * eps * eps / denom;
        const double sq = squared_norm(res.point);
        worst_ratio = std::max(worst_ratio, sq / bound);
        r.require(sq <= bound * (1.0 + 1e-9), "trial " + std::to_string(trial) +
                                                  ": ||geomed||^2 " + fmt(sq) + " breaks bound " +
                                                  fmt(bound));
        const double norm_ratio = norm(res.point) / max_honest_norm;
        worst_norm_ratio = std::max(worst_norm_ratio, norm_ratio);
        r.require(norm_ratio <= 2.0, "trial " + std::to_string(trial) + ": output norm " +
                                         fmt(norm(res.point)) + " exceeds 2x honest max " +
                                         fmt(max_honest_norm));
    }
    r.note("1000 trials, worst bound ratio " + fmt(worst_ratio) + ", worst norm ratio " +
           fmt(worst_norm_ratio) + ", " + fmt(seconds_since(start)) + "s");
}

// ---------------------------------------------------------------------------
// 3. Strongly-convex regime: theta = 0, sigma = 0, K = 1, eta = 0.5.
void criterion_strongly_convex_convergence(Reporter& r) {
    const auto start = Clock::now();
    const int dim = 5, clients = 10, per_shard = 8;
    std::vector<ParameterVector> offsets(clients, ParameterVector{0.8, -0.4, 1.2, 0.0, -2.0});
    const auto ds = synthetic_quadratic(dim, clients, per_shard, offsets, 0.0, 404);
    const ModelSpec spec{ModelKind::Quadratic, dim};

    TrainerConfig cfg;
    cfg.aggregator.kind = AggregatorKind::GeometricMedian;
    cfg.aggregator.epsilon = 1e-9;
    cfg.rounds = 100;
    cfg.local_steps = 1;
    cfg.batch_size = per_shard;
    cfg.global_lr = LrSchedule::constant(0.5);
    cfg.local_lr = LrSchedule::constant(0.5);
    cfg.seed = 11;
    cfg.eval_every = 100;

    const auto result = run_training(cfg, ds, spec, {});
    const double final_gap = *result.records.back().gap_to_opt;
    r.require(final_gap < 1e-10, "final gap " + fmt(final_gap) + " not below 1e-10");

    // closed-form GD oracle: per-round loss-gap contraction (1 - eta)^2 = 0.25,
    // checked while the gap is large enough for the ratio to be meaningful
    int checked = 0;
    for (std::size_t t = 1; t < result.records.size(); ++t) {
        const double prev = *result.records[t - 1].gap_to_opt;
        const double cur = *result.records[t].gap_to_opt;
        if (prev < 1e-12) break;
        const double ratio = cur / prev;
        r.require(std::fabs(ratio - 0.25) <= 1e-9,
                  "round " + std::to_string(t + 1) + ": contraction " + fmt(ratio) + " != 0.25");
        ++checked;
    }
    r.require(checked >= 10, "too few contraction rounds checked");
    const double secs = seconds_since(start);
    r.require(secs < 1.0, "runtime " + fmt(secs) + "s exceeds 1s");
    r.note("final gap " + fmt(final_gap) + ", " + std::to_string(checked) +
           " contraction rounds, " + fmt(secs) + "s");
}

// ---------------------------------------------------------------------------
// 4. Theorem 1/2 domination at T in {10, 50, 200} on exactly-known quadratics.
void criterion_bound_domination(Reporter& r) {
    const auto start = Clock::now();
    const int dim = 3, clients = 4, per_shard = 6;
    std::vector<ParameterVector> offsets = {
        {1.0, 0.0, -0.5}, {-0.5, 0.8, 0.0}, {0.0, -0.6, 0.9}, {0.4, 0.3, -0.2}};
    const auto ds = synthetic_quadratic(dim, clients, per_shard, offsets, 0.0, 1212);
    const ModelSpec spec{ModelKind::Quadratic, dim};

    for (int K : {1, 3}) {
        TrainerConfig cfg;
        cfg.aggregator.kind = AggregatorKind::GeometricMedian;
        cfg.aggregator.epsilon = 1e-7;
        cfg.rounds = 200;
        cfg.local_steps = K;
        cfg.batch_size = per_shard;
        cfg.global_lr = LrSchedule::constant(0.5);
        cfg.local_lr = LrSchedule::constant(K == 1 ? 0.5 : 0.1);
        cfg.seed = 3;
        cfg.eval_every = 200;

        const auto result = run_training(cfg, ds, spec, {});
        const auto report = verify_run_bounds(cfg, ds, spec, result, {10, 50, 200});
        for (const auto& check : report.checks) {
            r.require(check.passed, "K=" + std::to_string(K) + " " + check.name + ": measured " +
                                        fmt(check.measured) + " vs bound " + fmt(check.bound));
            if (check.name.rfind("theorem", 0) == 0)
                r.note("K=" + std::to_string(K) + " " + check.name + ": measured " +
                       fmt(check.measured) + " <= bound " + fmt(check.bound));
        }
    }
    r.note("runtime " + fmt(seconds_since(start)) + "s");
}

// ---------------------------------------------------------------------------
// 5 & 6. Desk-scale attack resilience and heterogeneity sensitivity.
ExperimentConfig digits_config(double byz_fraction, AttackType attack, AggregatorKind agg,
                               double concentration) {
    ExperimentConfig cfg;
    cfg.dataset.kind = DatasetKind::SyntheticDigits;
    cfg.dataset.subset = 4000;
    cfg.dataset.test_subset = 1000;
    cfg.dataset.digit_noise = 0.03;
    cfg.model_kind = ModelKind::Logistic;
    cfg.trainer.aggregator.kind = agg;
    cfg.trainer.aggregator.epsilon = 1e-5;
    cfg.trainer.rounds = 200;
    cfg.trainer.local_steps = 3;
    cfg.trainer.batch_size = 32;
    cfg.trainer.global_lr = LrSchedule::paper_experiment(3);
    cfg.trainer.local_lr = LrSchedule::paper_experiment(3);
    cfg.trainer.attack.type = attack;
    cfg.trainer.eval_every = 200;
    cfg.partition.client_count = 50;
    cfg.partition.concentration = concentration;
    cfg.partition.seed = 7;
    cfg.byz_fraction = byz_fraction;
    cfg.seeds = {1};
    return cfg;
}

double final_accuracy(const ExperimentConfig& cfg, Reporter& r, const std::string& label) {
    const auto built = build_experiment(cfg);
    auto trainer = cfg.trainer;
    trainer.seed = cfg.seeds.front();
    const auto result = run_training(trainer, built.train, built.spec, built.test);
    const auto& last = result.records.back();
    const double acc = last.test_accuracy ? *last.test_accuracy : 0.0;
    r.note(label + ": final test accuracy " + fmt(acc));
    return acc;
}

void criterion_attack_resilience(Reporter& r) {
    const auto start = Clock::now();
    const double raga_gauss = final_accuracy(
        digits_config(0.4, AttackType::Gaussian, AggregatorKind::GeometricMedian, 0.6), r,
        "RAGA + gaussian(var 90), byz 0.4");
    const double raga_flip = final_accuracy(
        digits_config(0.4, AttackType::SignFlip, AggregatorKind::GeometricMedian, 0.6), r,
        "RAGA + sign-flip(3), byz 0.4");
    const double raga_lie = final_accuracy(
        digits_config(0.4, AttackType::Lie, AggregatorKind::GeometricMedian, 0.6), r,
        "RAGA + LIE(0.7), byz 0.4");
    const double mean_gauss = final_accuracy(
        digits_config(0.4, AttackType::Gaussian, AggregatorKind::Mean, 0.6), r,
        "Mean + gaussian(var 90), byz 0.4");
    const double mean_flip = final_accuracy(
        digits_config(0.4, AttackType::SignFlip, AggregatorKind::Mean, 0.6), r,
        "Mean + sign-flip(3), byz 0.4");

    r.require(raga_gauss >= 0.80, "RAGA under gaussian " + fmt(raga_gauss) + " < 0.80");
    r.require(raga_flip >= 0.80, "RAGA under sign-flip " + fmt(raga_flip) + " < 0.80");
    r.require(raga_lie >= 0.80, "RAGA under LIE " + fmt(raga_lie) + " < 0.80");
    r.require(mean_gauss <= 0.30, "Mean under gaussian " + fmt(mean_gauss) + " > 0.30");
    r.require(mean_flip <= 0.30, "Mean under sign-flip " + fmt(mean_flip) + " > 0.30");
    const double secs = seconds_since(start);
    r.require(secs < 300.0, "runtime " + fmt(secs) + "s exceeds 5min");
    r.note("runtime " + fmt(secs) + "s");
}

void criterion_heterogeneity(Reporter& r) {
    const auto start = Clock::now();
    const double acc_06 = final_accuracy(
        digits_config(0.0, AttackType::NoAttack, AggregatorKind::GeometricMedian, 0.6), r,
        "RAGA no attack, phi = 0.6");
    const double acc_02 = final_accuracy(
        digits_config(0.0, AttackType::NoAttack, AggregatorKind::GeometricMedian, 0.2), r,
        "RAGA no attack, phi = 0.2");
    r.require(acc_06 >= 0.80, "phi=0.6 accuracy " + fmt(acc_06) + " < 0.80");
    r.require(acc_02 >= 0.80, "phi=0.2 accuracy " + fmt(acc_02) + " < 0.80");
    r.require(std::fabs(acc_06 - acc_02) <= 0.05,
              "heterogeneity gap " + fmt(std::fabs(acc_06 - acc_02)) + " > 0.05");
    r.note("|acc(0.2) - acc(0.6)| = " + fmt(std::fabs(acc_06 - acc_02)) + ", " +
           fmt(seconds_since(start)) + "s");
}

// ---------------------------------------------------------------------------
// 7. Finite-difference gradient checks, 100 random cases per family.
void criterion_gradcheck(Reporter& r) {
    const auto start = Clock::now();
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
    for (const auto& fam : families) {
        double worst = 0.0;
        for (int i = 0; i < 100; ++i) {
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
            worst = std::max(worst, finite_diff_check(spec, w, samples, fam.step).max_rel_error);
        }
        r.require(worst < fam.threshold, std::string(fam.name) + ": max_rel_error " + fmt(worst) +
                                             " >= " + fmt(fam.threshold));
        r.note(std::string(fam.name) + ": 100 cases, max_rel_error " + fmt(worst) + " (threshold " +
               fmt(fam.threshold) + ")");
    }
    const double secs = seconds_since(start);
    r.require(secs < 30.0, "runtime " + fmt(secs) + "s exceeds 30s");
    r.note("runtime " + fmt(secs) + "s");
}

// ---------------------------------------------------------------------------
// 8. Byte-identical metrics CSVs across reruns of the same config + seed.
void criterion_determinism(Reporter& r) {
    const auto read_bytes = [](const std::filesystem::path& p) {
        std::ifstream in(p, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    };
    const auto base = std::filesystem::temp_directory_path() / "raga_acceptance_det";
    std::filesystem::remove_all(base);

    ExperimentConfig cfg = digits_config(0.3, AttackType::Lie, AggregatorKind::GeometricMedian, 0.6);
    cfg.dataset.subset = 400;
    cfg.dataset.test_subset = 100;
    cfg.trainer.rounds = 5;
    cfg.trainer.eval_every = 1;
    cfg.seeds = {1, 2};

    cfg.output_dir = (base / "a").string();
    run_experiment(cfg, true);
    cfg.output_dir = (base / "b").string();
    run_experiment(cfg, true);
    for (std::uint64_t seed : cfg.seeds) {
        const auto name = "metrics_seed" + std::to_string(seed) + ".csv";
        const auto a = read_bytes(base / "a" / name);
        const auto b = read_bytes(base / "b" / name);
        r.require(!a.empty(), name + " missing or empty");
        r.require(a == b, name + " differs between reruns");
    }
    r.note("2 seeds x 2 runs, metrics byte-identical");
}

// ---------------------------------------------------------------------------
// 9. Dirichlet partitioner statistics: 10_000 draws, 3 standard errors.
void criterion_dirichlet_statistics(Reporter& r) {
    const auto start = Clock::now();
    const int M = 5, classes = 3, per_class = 40;
    std::vector<Sample> samples;
    for (int c = 0; c < classes; ++c)
        for (int i = 0; i < per_class; ++i)
            samples.push_back({{static_cast<double>(c * per_class + i)}, c});

    const int draws = 10000;
    std::vector<double> sum(static_cast<std::size_t>(M * classes), 0.0);
    std::vector<double> sumsq(static_cast<std::size_t>(M * classes), 0.0);
    for (int d = 0; d < draws; ++d) {
        const auto ds = dirichlet_partition(samples, PartitionPlan{M, 0.5, 90000 + static_cast<std::uint64_t>(d)});
        int total = 0;
        double checksum = 0.0;
        std::vector<int> class_counts(classes, 0);
        std::vector<int> cell_counts(static_cast<std::size_t>(M * classes), 0);
        for (int m = 0; m < M; ++m) {
            total += ds.sizes[static_cast<std::size_t>(m)];
            for (const auto& s : ds.shards[static_cast<std::size_t>(m)]) {
                checksum += s.features[0];
                class_counts[static_cast<std::size_t>(s.label)] += 1;
                cell_counts[static_cast<std::size_t>(m * classes + s.label)] += 1;
            }
        }
        // conservation: sample ids 0..119 appear exactly once (their sum pins it)
        if (total != static_cast<int>(samples.size()) || checksum != (120.0 * 119.0) / 2.0 ||
            class_counts != std::vector<int>(classes, per_class)) {
            r.require(false, "conservation violated in draw " + std::to_string(d));
            return;
        }
        for (std::size_t idx = 0; idx < cell_counts.size(); ++idx) {
            const double share = static_cast<double>(cell_counts[idx]) / per_class;
            sum[idx] += share;
            sumsq[idx] += share * share;
        }
    }
    double worst_sigma = 0.0;
    for (int m = 0; m < M; ++m)
        for (int c = 0; c < classes; ++c) {
            const std::size_t idx = static_cast<std::size_t>(m * classes + c);
            const double mean = sum[idx] / draws;
            const double var = sumsq[idx] / draws - mean * mean;
            const double se = std::sqrt(var / draws);
            const double sigmas = std::fabs(mean - 1.0 / M) / se;
            worst_sigma = std::max(worst_sigma, sigmas);
            r.require(sigmas <= 3.0, "client " + std::to_string(m) + " class " + std::to_string(c) +
                                         ": mean share " + fmt(mean) + " is " + fmt(sigmas) +
                                         " SEs from 1/M");
        }
    r.note("10000 draws, worst deviation " + fmt(worst_sigma) + " SEs, conservation exact, " +
           fmt(seconds_since(start)) + "s");
}

struct Criterion {
    std::string name;
    std::function<void(Reporter&)> run;
};

} // namespace

int main(int argc, char** argv) {
    const std::string filter = argc > 1 ? argv[1] : "";
    std::vector<Criterion> criteria = {
        {"1 geomed oracle equivalence", criterion_geomed_oracle},
        {"2 lemma3 contamination bound", criterion_lemma3_contamination},
        {"3 strongly-convex convergence", criterion_strongly_convex_convergence},
        {"4 theorem 1/2 bound domination", criterion_bound_domination},
        {"5 attack resilience vs collapse", criterion_attack_resilience},
        {"6 heterogeneity sensitivity", criterion_heterogeneity},
        {"7 gradient correctness", criterion_gradcheck},
        {"8 determinism", criterion_determinism},
        {"9 dirichlet partition statistics", criterion_dirichlet_statistics},
    };
    int failures = 0;
    for (auto& c : criteria) {
        if (!filter.empty() && c.name.find(filter) == std::string::npos) continue;
        Reporter r;
        try {
            c.run(r);
        } catch (const std::exception& e) {
            r.ok = false;
            r.notes.push_back(std::string("exception: ") + e.what());
        }
        std::printf("%s  %s\n", r.ok ? "PASS" : "FAIL", c.name.c_str());
        for (const auto& n : r.notes) std::printf("      %s\n", n.c_str());
        std::fflush(stdout);
        if (!r.ok) ++failures;
    }
    return failures == 0 ? 0 : 1;
}
