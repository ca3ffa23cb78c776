#include <catch2/catch_amalgamated.hpp>

#include "sds/metrics/contact_match.hpp"
#include "sds/optimizer.hpp"

using namespace sds;

namespace {

/// Planted-optimum quadratic over the parameter box. Distances are taken
/// in range-normalized coordinates so every dimension of the heterogeneous
/// box (Hz, meters, cycle fractions) carries equal weight.
TrainConfig convex_config(std::uint64_t seed, const GaitParameters& target) {
    TrainConfig config;
    config.budget = 300;
    config.seed = seed;
    config.objective_override = [target](const GaitParameters& p) {
        const auto a = p.to_array();
        const auto b = target.to_array();
        const auto& bounds = GaitParameters::bounds();
        double d2 = 0.0;
        for (int i = 0; i < GaitParameters::kDims; ++i) {
            const double d = (a[i] - b[i]) / (bounds.hi[i] - bounds.lo[i]);
            d2 += d * d;
        }
        return -d2;
    };
    return config;
}

GaitParameters planted_target() {
    GaitParameters t;
    t.frequency = 1.8;
    t.duty = 0.62;
    t.phase = {0.1, 0.6, 0.55, 0.12};
    t.step_length = 0.21;
    t.step_height = 0.07;
    t.base_height_target = 0.27;
    t.bob_amplitude = 0.013;
    t.forward_speed = 0.9;
    return t;
}

}  // namespace

TEST_CASE("checkpoint_telemetry: exact population statistics") {
    const std::vector<std::string> names = {"a"};
    SECTION("identical members have zero variance") {
        const auto stats = checkpoint_telemetry(names, {{1.5}, {1.5}, {1.5}});
        CHECK(stats.at("a").mean == 1.5);
        CHECK(stats.at("a").variance == 0.0);
    }
    SECTION("two members use the population convention") {
        const auto stats = checkpoint_telemetry(names, {{0.0}, {2.0}});
        CHECK(stats.at("a").mean == 1.0);
        CHECK(stats.at("a").variance == 1.0);
    }
    SECTION("random population matches a direct computation") {
        std::mt19937_64 rng(9);
        std::uniform_real_distribution<double> u(-5, 5);
        std::vector<std::vector<double>> pop;
        for (int i = 0; i < 32; ++i) pop.push_back({u(rng)});
        double mean = 0;
        for (const auto& m : pop) mean += m[0];
        mean /= 32.0;
        double var = 0;
        for (const auto& m : pop) var += (m[0] - mean) * (m[0] - mean);
        var /= 32.0;
        const auto stats = checkpoint_telemetry(names, pop);
        CHECK_THAT(stats.at("a").mean, Catch::Matchers::WithinAbs(mean, 1e-12));
        CHECK_THAT(stats.at("a").variance, Catch::Matchers::WithinAbs(var, 1e-12));
    }
}

TEST_CASE("rescale_unbounded: growth beyond 10x triggers a proportional cut") {
    std::vector<CheckpointStats> history(2);
    history[0].iteration = 100;
    history[0].components["grow"] = {0.5, 0.1};
    history[0].components["stable"] = {0.8, 0.1};
    history[1].iteration = 200;
    history[1].components["grow"] = {50.0, 0.1};
    history[1].components["stable"] = {0.9, 0.1};

    const auto updates = rescale_unbounded(history, {"grow", "stable"}, {1.0, 2.0});
    REQUIRE(updates.size() == 1);
    CHECK(updates[0].component == "grow");
    CHECK_THAT(updates[0].new_weight, Catch::Matchers::WithinAbs(0.01, 1e-12));
}

TEST_CASE("rescale_unbounded: zero first-checkpoint mean uses the absolute floor") {
    std::vector<CheckpointStats> history(2);
    history[0].iteration = 100;
    history[0].components["c"] = {0.0, 0.0};
    history[1].iteration = 200;
    history[1].components["c"] = {1.5, 0.0};
    const auto updates = rescale_unbounded(history, {"c"}, {1.0});
    REQUIRE(updates.size() == 1);  // ratio 1.5 / max(0, 0.1) = 15
    CHECK_THAT(updates[0].new_weight, Catch::Matchers::WithinAbs(1.0 / 15.0, 1e-12));
}

TEST_CASE("rescale_unbounded: needs two checkpoints") {
    std::vector<CheckpointStats> history(1);
    history[0].components["c"] = {100.0, 0.0};
    CHECK(rescale_unbounded(history, {"c"}, {1.0}).empty());
}

TEST_CASE("flag_zero_gradient: constant components are flagged") {
    std::vector<CheckpointStats> history(2);
    history[0].components["c"] = {1.0, 0.0};
    history[0].components["v"] = {1.0, 0.5};
    history[1].components["c"] = {1.0, 1e-12};
    history[1].components["v"] = {1.2, 0.4};
    const auto flagged = flag_zero_gradient(history);
    CHECK(flagged.count("c") == 1);
    CHECK(flagged.count("v") == 0);
    CHECK(flag_zero_gradient({}).empty());
}

TEST_CASE("train: converges to the planted optimum of the convex objective") {
    const GaitParameters target = planted_target();
    const dsl::RewardProgram prog = dsl::parse("objective = base_height");
    const TrainingRun run = train(prog, convex_config(1234, target));
    const auto best = run.best_params.to_array();
    const auto want = target.to_array();
    for (int d = 0; d < GaitParameters::kDims; ++d) {
        INFO("dimension " << d);
        CHECK_THAT(best[d], Catch::Matchers::WithinAbs(want[d], 1e-2));
    }
}

TEST_CASE("train: budget 1 yields exactly one checkpoint") {
    TrainConfig config = convex_config(7, planted_target());
    config.budget = 1;
    const TrainingRun run = train(dsl::parse("objective = base_height"), config);
    CHECK(run.history.size() == 1);
    CHECK(run.history[0].iteration == 1);
}

TEST_CASE("train: deterministic transcript for a fixed seed") {
    TrainConfig config = convex_config(42, planted_target());
    config.budget = 60;
    const dsl::RewardProgram prog = dsl::parse("objective = base_height");
    const TrainingRun a = train(prog, config);
    const TrainingRun b = train(prog, config);
    CHECK(a.to_json().dump() == b.to_json().dump());
}

TEST_CASE("train: elitism keeps the best objective non-decreasing") {
    TrainConfig config = convex_config(5, planted_target());
    config.budget = 120;
    const TrainingRun run = train(dsl::parse("objective = base_height"), config);
    REQUIRE_FALSE(run.best_objective_per_iteration.empty());
    for (std::size_t i = 1; i < run.best_objective_per_iteration.size(); ++i)
        CHECK(run.best_objective_per_iteration[i] >= run.best_objective_per_iteration[i - 1]);
}

TEST_CASE("train: best parameters respect the bounds") {
    TrainConfig config = convex_config(11, planted_target());
    config.budget = 50;
    const TrainingRun run = train(dsl::parse("objective = base_height"), config);
    CHECK(run.best_params.within_bounds());
}

TEST_CASE("train: checkpoint iterations follow the stride") {
    TrainConfig config = convex_config(3, planted_target());
    config.budget = 250;
    config.checkpoint_stride = 100;
    const TrainingRun run = train(dsl::parse("objective = base_height"), config);
    REQUIRE(run.history.size() == 3);
    CHECK(run.history[0].iteration == 100);
    CHECK(run.history[1].iteration == 200);
    CHECK(run.history[2].iteration == 250);  // final iteration always checkpoints
}

TEST_CASE("train: constant sub-reward is flagged uninformative") {
    TrainConfig config;
    config.budget = 30;
    config.rollout_steps = 200;
    config.seed = 8;
    const dsl::RewardProgram prog = dsl::parse(
        "c = 1.0 + base_height * 0\n"
        "vel = exp(-square(base_lin_vel.x - command.x))\n");
    const TrainingRun run = train(prog, config);
    CHECK(run.flagged_uninformative.count("c") == 1);
    CHECK(run.flagged_uninformative.count("vel") == 0);
}

TEST_CASE("train: numeric blowups on most offspring fail the run") {
    TrainConfig config;
    config.budget = 10;
    config.rollout_steps = 50;
    config.seed = 2;
    // 1 / (x - x) is non-finite for every observation once evaluated.
    const dsl::RewardProgram prog = dsl::parse("d = 1 / (base_height - base_height + 0 * joint_vel[0])");
    const TrainingRun run = train(prog, config);
    CHECK(run.status == TrainStatus::Failed);
    CHECK(run.failure_reason == "numeric");
}

TEST_CASE("train: seeded trot reward reaches exact template contacts") {
    TrainConfig config;
    config.budget = 400;
    config.rollout_steps = 1000;
    config.seed = 17;
    config.command = {0.5, 0.0, 0.0};
    const dsl::RewardProgram prog = dsl::parse(
        "cp = 5.0 * match_phase(foot_contacts, \"trot\")\n"
        "vel = exp(-square(base_lin_vel.x - command.x))\n"
        "bh = exp(-square(base_height - 0.30))\n");
    const TrainingRun run = train(prog, config);
    REQUIRE_FALSE(run.failed());

    const RolloutTrace trace =
        rollout(run.best_params, Morphology{}, 1000, kSimDt, config.command);
    const GaitTemplate tmpl = reference_gait(GaitLabel::Trot);
    const MatchReport report = contact_match(trace.contacts, tmpl, tmpl.duty);
    INFO("best objective " << run.best_objective << " percent " << report.percent);
    CHECK(report.percent == 100.0);
}
