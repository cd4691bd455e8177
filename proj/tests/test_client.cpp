#include <doctest.h>

#include <cmath>

#include "raga/client.hpp"

using namespace raga;

TEST_CASE("lr_value per schedule kind") {
    const auto paper = LrSchedule::paper_experiment(3);
    CHECK(lr_value(paper, 5, 1) == doctest::Approx(3.0 / std::sqrt(50.0)).epsilon(1e-12));
    CHECK(lr_value(paper, 5, 1) == doctest::Approx(0.424264).epsilon(1e-6));

    const auto constant = LrSchedule::constant(0.1);
    for (int t : {1, 7, 500})
        for (int k : {1, 2, 3}) CHECK(lr_value(constant, t, k) == 0.1);

    const auto poly = LrSchedule::poly_decay(1.0, 0.0, 0.5);
    CHECK(lr_value(poly, 4, 1) == doctest::Approx(0.5).epsilon(1e-12));

    const auto scaled = LrSchedule::scaled_by_t(2.0, 100.0, 5, 1.0);
    CHECK(lr_value(scaled, 9, 2) == doctest::Approx(2.0 / 500.0).epsilon(1e-12));

    CHECK_THROWS_AS(lr_value(constant, 0, 1), std::invalid_argument);
    CHECK_THROWS_AS(lr_value(constant, 1, 0), std::invalid_argument);
    CHECK_THROWS_AS(LrSchedule::constant(0.0).validate(), std::invalid_argument);
}

TEST_CASE("lr_value stays positive and finite") {
    for (const auto& sched : {LrSchedule::paper_experiment(3), LrSchedule::constant(0.2),
                              LrSchedule::poly_decay(0.9, 5.0, 1.0 / 3.0 + 1.0 / 6.0),
                              LrSchedule::scaled_by_t(1.0, 500.0, 3, 0.5)}) {
        for (int t = 1; t <= 1000; t += 37) {
            const double v = lr_value(sched, t, 1 + t % 3);
            CHECK(v > 0.0);
            CHECK(std::isfinite(v));
        }
    }
}

TEST_CASE("local_update_run closed-form cases") {
    const ModelSpec quad{ModelKind::Quadratic, 1};

    // K=1 full batch: z = w - mean(shard)
    std::vector<Sample> shard = {{{1.0}, 0}, {{3.0}, 0}};
    Rng rng(1);
    const auto upd = local_update_run(quad, {5.0}, shard, 1, LrSchedule::constant(0.5), 2, 1, rng, 4);
    CHECK(upd.vector == ParameterVector{3.0});
    CHECK(upd.steps_taken == 1);
    CHECK(upd.client_index == 4);

    // stationary start: all gradients zero regardless of K
    Rng rng2(1);
    const auto zero = local_update_run(quad, {2.0}, shard, 5, LrSchedule::constant(0.5), 2, 1, rng2);
    CHECK(zero.vector == ParameterVector{0.0});

    // hand-executed two-step recursion: shard {0}, w=1, K=2, eta=0.5
    std::vector<Sample> origin = {{{0.0}, 0}};
    Rng rng3(1);
    const auto two = local_update_run(quad, {1.0}, origin, 2, LrSchedule::constant(0.5), 1, 1, rng3);
    CHECK(two.vector == ParameterVector{0.75});
}

TEST_CASE("local_update_run gradient trace identities") {
    const ModelSpec quad{ModelKind::Quadratic, 2};
    std::vector<Sample> shard = {{{1.0, -1.0}, 0}, {{2.0, 0.5}, 0}, {{-1.0, 3.0}, 0}};
    const ParameterVector w_t = {4.0, -2.0};
    const auto sched = LrSchedule::paper_experiment(3);
    const int K = 4;

    std::vector<ParameterVector> trace;
    Rng rng(9);
    const auto upd = local_update_run(quad, w_t, shard, K, sched, 3, 7, rng, 0, &trace);
    REQUIRE(static_cast<int>(trace.size()) == K);

    // upload is the running average of the logged gradients, same accumulation order
    ParameterVector avg(w_t.size(), 0.0);
    for (const auto& g : trace)
        for (std::size_t i = 0; i < avg.size(); ++i) avg[i] += g[i];
    for (double& v : avg) v *= 1.0 / K;
    CHECK(avg == upd.vector);

    // the logged gradients are exactly the full-batch gradients along the replayed
    // local path, and the final iterate is w_t minus the per-step weighted trace
    ParameterVector w_replay = w_t;
    for (int k = 1; k <= K; ++k) {
        CHECK(trace[static_cast<std::size_t>(k - 1)] == gradient(quad, w_replay, shard));
        add_scaled(w_replay, -lr_value(sched, 7, k), trace[static_cast<std::size_t>(k - 1)]);
    }
    ParameterVector w_direct = w_t;
    for (int k = 1; k <= K; ++k)
        add_scaled(w_direct, -lr_value(sched, 7, k), trace[static_cast<std::size_t>(k - 1)]);
    CHECK(w_direct == w_replay);
}

TEST_CASE("local_update_run determinism and validation") {
    const ModelSpec quad{ModelKind::Quadratic, 1};
    std::vector<Sample> shard;
    Rng data_rng(2);
    for (int i = 0; i < 10; ++i) shard.push_back({{data_rng.normal()}, 0});

    Rng r1(55), r2(55);
    const auto a = local_update_run(quad, {1.0}, shard, 3, LrSchedule::constant(0.3), 4, 2, r1);
    const auto b = local_update_run(quad, {1.0}, shard, 3, LrSchedule::constant(0.3), 4, 2, r2);
    CHECK(a.vector == b.vector);

    Rng r3(55);
    CHECK_THROWS_AS(local_update_run(quad, {1.0}, shard, 0, LrSchedule::constant(0.3), 4, 2, r3),
                    std::invalid_argument);
    CHECK_THROWS_AS(local_update_run(quad, {1.0}, shard, 1, LrSchedule::constant(0.3), 11, 2, r3),
                    std::invalid_argument);
}
