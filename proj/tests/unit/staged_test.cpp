#include <gtest/gtest.h>

#include <set>

#include "factorkit/errors.hpp"
#include "factorkit/staged.hpp"

namespace factorkit {
namespace {

using Stages = std::vector<std::vector<std::size_t>>;

ToyModel stack(std::size_t hidden_layers, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::size_t> widths(hidden_layers + 1, 8);
    widths.push_back(2);
    ToyModel m = dense_mlp(widths, rng);
    m.layers.back().factorizable = false;
    return m;
}

TEST(BuildPlan, HighToLowOnePerStage) {
    const StagedPlan p = build_plan(4, StageOrder::high_to_low, 500, 1);
    EXPECT_EQ(p.stages, (Stages{{3}, {2}, {1}, {0}}));
    EXPECT_EQ(p.steps_per_stage, 500u);
}

TEST(BuildPlan, LowToHighAndAllAtOnce) {
    EXPECT_EQ(build_plan(4, StageOrder::low_to_high).stages, (Stages{{0}, {1}, {2}, {3}}));
    EXPECT_EQ(build_plan(4, StageOrder::all_at_once).stages, (Stages{{0, 1, 2, 3}}));
    EXPECT_EQ(build_plan(4, StageOrder::all_at_once, 500, 3).stages.size(), 1u);
}

TEST(BuildPlan, TwelveLayersFivePerStagePartition) {
    const StagedPlan p = build_plan(12, StageOrder::high_to_low, 50, 5);
    EXPECT_EQ(p.stages, (Stages{{7, 8, 9, 10, 11}, {2, 3, 4, 5, 6}, {0, 1}}));
    std::set<std::size_t> all;
    std::size_t total = 0;
    for (const auto& s : p.stages) {
        all.insert(s.begin(), s.end());
        total += s.size();
    }
    EXPECT_EQ(total, 12u);
    EXPECT_EQ(all.size(), 12u);
    EXPECT_EQ(*all.rbegin(), 11u);
}

TEST(BuildPlan, Errors) {
    EXPECT_THROW(build_plan(0, StageOrder::high_to_low), ArgumentError);
    EXPECT_THROW(build_plan(3, StageOrder::high_to_low, 10, 0), ArgumentError);
}

TEST(PlanJson, RoundTripAndValidation) {
    const StagedPlan p = build_plan(5, StageOrder::high_to_low, 50, 2);
    const std::string text = plan_to_json(p);
    EXPECT_EQ(text, R"({"order":"high_to_low","steps_per_stage":50,"stages":[[3,4],[1,2],[0]]})");
    EXPECT_EQ(plan_from_json(text), p);
    EXPECT_THROW(plan_from_json(R"({"order":"high_to_low","steps_per_stage":1,"stages":[[0],[0]]})"), FormatError);
    EXPECT_THROW(plan_from_json(R"({"order":"sideways","steps_per_stage":1,"stages":[[0]]})"), FormatError);
    EXPECT_THROW(plan_from_json("[1,2"), FormatError);
}

TEST(StagedTrain, HighToLowFactorizesLastLayerFirst) {
    const TaskData data = make_separable_task(128, 64, 8, 2.0, 21);
    ToyModel m = stack(3, 401);
    TrainConfig cfg;
    cfg.learning_rate = 1e-3;
    const StagedPlan plan = build_plan(3, StageOrder::high_to_low, 1, 1);
    std::vector<std::vector<Method>> seen;
    auto observe = [&](std::size_t, const ToyModel& model) {
        std::vector<Method> kinds;
        for (const auto& layer : model.layers) kinds.push_back(method_of(layer.weight));
        seen.push_back(kinds);
    };
    const RunRecord r = staged_train(m, data, cfg, plan, ProjectionConfig{Method::low_rank, 2}, observe);
    const Method D = Method::dense, L = Method::low_rank;
    ASSERT_EQ(seen.size(), 3u);
    EXPECT_EQ(seen[0], (std::vector<Method>{D, D, L, D}));
    EXPECT_EQ(seen[1], (std::vector<Method>{D, L, L, D}));
    EXPECT_EQ(seen[2], (std::vector<Method>{L, L, L, D}));
    EXPECT_TRUE(r.staged);
    EXPECT_EQ(r.method, Method::low_rank);
    EXPECT_EQ(r.steps, 4u);
    EXPECT_EQ(r.plan_json, plan_to_json(plan));
}

TEST(StagedTrain, AllAtOnceWithoutStageStepsEqualsUnstagedTraining) {
    const TaskData data = make_separable_task(200, 64, 8, 1.0, 22);
    const ProjectionConfig proj{Method::monarch, 1, 2};
    TrainConfig cfg;
    cfg.learning_rate = 5e-4;
    cfg.epochs = 2;
    cfg.optimizer.kind = OptimizerKind::adamw;

    ToyModel staged_model = stack(2, 402);
    RunRecord staged = staged_train(staged_model, data, cfg, build_plan(2, StageOrder::all_at_once, 0), proj);

    ToyModel plain = stack(2, 402);
    for (std::size_t l : plain.factorizable_layers())
        project_layer(plain.layers[l], std::get<DenseMatrix>(plain.layers[l].weight), proj);
    RunRecord unstaged = train_run(plain, data, cfg);

    EXPECT_EQ(staged.final_train_loss, unstaged.final_train_loss);
    EXPECT_EQ(staged.eval_accuracy, unstaged.eval_accuracy);
    EXPECT_EQ(staged.steps, unstaged.steps);
    staged.staged = false;
    staged.plan_json.clear();
    staged.rank = staged.blocks = 0;
    EXPECT_EQ(staged, unstaged);
}

TEST(StagedTrain, SingleLayerStagingMatchesAllAtOnce) {
    const TaskData data = make_separable_task(96, 32, 8, 1.0, 23);
    TrainConfig cfg;
    cfg.learning_rate = 1e-3;
    const ProjectionConfig proj{Method::low_rank, 2};
    ToyModel a = stack(1, 403);
    ToyModel b = stack(1, 403);
    const RunRecord ra = staged_train(a, data, cfg, build_plan(1, StageOrder::high_to_low, 3), proj);
    const RunRecord rb = staged_train(b, data, cfg, build_plan(1, StageOrder::all_at_once, 3), proj);
    EXPECT_EQ(ra.final_train_loss, rb.final_train_loss);
    EXPECT_EQ(ra.eval_accuracy, rb.eval_accuracy);
}

TEST(StagedTrain, LaterStagesProjectTrainedWeights) {
    const TaskData data = make_separable_task(64, 32, 8, 1.0, 24);
    TrainConfig cfg;
    cfg.learning_rate = 1e-2;
    const ProjectionConfig proj{Method::low_rank, 3};

    // Replays stage 0 by hand to get layer 0 as it stands when stage 1 begins.
    ToyModel probe = stack(2, 404);
    const DenseMatrix original0 = std::get<DenseMatrix>(probe.layers[0].weight);
    {
        Trainer t(probe, data.train, cfg);
        project_layer(probe.layers[1], std::get<DenseMatrix>(probe.layers[1].weight), proj);
        probe.touch();
        t.run(5);
    }
    const DenseMatrix trained0 = std::get<DenseMatrix>(probe.layers[0].weight);
    ASSERT_GT(max_abs_difference(trained0, original0), 1e-6);
    const DenseMatrix expected = reconstruct(project(trained0, Method::low_rank, 3));

    ToyModel m = stack(2, 404);
    std::size_t calls = 0;
    auto observe = [&](std::size_t stage, const ToyModel& model) {
        ++calls;
        if (stage == 0) EXPECT_TRUE(std::holds_alternative<DenseMatrix>(model.layers[0].weight));
        if (stage == 1) EXPECT_EQ(reconstruct(model.layers[0].weight), expected);
    };
    staged_train(m, data, cfg, build_plan(2, StageOrder::high_to_low, 5), proj, observe);
    EXPECT_EQ(calls, 2u);
    EXPECT_TRUE(std::holds_alternative<LowRankFactors>(m.layers[0].weight));
    EXPECT_TRUE(std::holds_alternative<LowRankFactors>(m.layers[1].weight));
}

TEST(StagedTrain, FromInitialWeightsSwitch) {
    const TaskData data = make_separable_task(64, 32, 8, 1.0, 25);
    TrainConfig cfg;
    cfg.learning_rate = 1e-2;
    ToyModel m = stack(2, 405);
    const DenseMatrix original0 = std::get<DenseMatrix>(m.layers[0].weight);
    ProjectionConfig proj{Method::low_rank, 3};
    proj.from_current_weights = false;
    const DenseMatrix expected = reconstruct(project(original0, Method::low_rank, 3));
    auto observe = [&](std::size_t stage, const ToyModel& model) {
        if (stage == 1) EXPECT_EQ(reconstruct(model.layers[0].weight), expected);
    };
    staged_train(m, data, cfg, build_plan(2, StageOrder::high_to_low, 5), proj, observe);
}

TEST(StagedTrain, PlanModelMismatchAndFactorizedInputRejected) {
    const TaskData data = make_separable_task(32, 16, 8, 1.0, 26);
    ToyModel m = stack(2, 406);
    EXPECT_THROW(staged_train(m, data, TrainConfig{}, build_plan(3, StageOrder::high_to_low), ProjectionConfig{}),
                 ArgumentError);
    m.layers[0].weight = project(std::get<DenseMatrix>(m.layers[0].weight), Method::low_rank, 2);
    EXPECT_THROW(staged_train(m, data, TrainConfig{}, build_plan(2, StageOrder::high_to_low), ProjectionConfig{}),
                 ArgumentError);
}

}  // namespace
}  // namespace factorkit
