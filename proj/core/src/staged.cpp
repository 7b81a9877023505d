#include "factorkit/staged.hpp"

#include <algorithm>
#include <string>

#include "json.hpp"

#include "factorkit/errors.hpp"

namespace factorkit {

namespace {

void check_partition(const std::vector<std::vector<std::size_t>>& stages, std::size_t layer_count) {
    std::vector<int> seen(layer_count, 0);
    for (const auto& stage : stages) {
        if (stage.empty()) throw ArgumentError("staged plan: empty stage");
        for (std::size_t l : stage) {
            if (l >= layer_count || seen[l]++)
                throw ArgumentError("staged plan: stages must partition the layers 0.." +
                                    std::to_string(layer_count - 1));
        }
    }
    if (std::count(seen.begin(), seen.end(), 0) != 0)
        throw ArgumentError("staged plan: some layers are never factorized");
}

}  // namespace

std::string_view stage_order_name(StageOrder o) noexcept {
    switch (o) {
        case StageOrder::high_to_low: return "high_to_low";
        case StageOrder::low_to_high: return "low_to_high";
        case StageOrder::all_at_once: return "all_at_once";
    }
    return "?";
}

StageOrder parse_stage_order(std::string_view name) {
    for (StageOrder o : {StageOrder::high_to_low, StageOrder::low_to_high, StageOrder::all_at_once})
        if (stage_order_name(o) == name) return o;
    throw ArgumentError("unknown stage order '" + std::string(name) +
                        "' (expected high_to_low, low_to_high or all_at_once)");
}

StagedPlan build_plan(std::size_t layer_count, StageOrder order, std::size_t steps_per_stage,
                      std::size_t layers_per_stage) {
    if (layer_count == 0) throw ArgumentError("build_plan: no layers to factorize");
    if (layers_per_stage == 0) throw ArgumentError("build_plan: layers_per_stage must be positive");
    StagedPlan plan{order, steps_per_stage, layer_count, {}};
    if (order == StageOrder::all_at_once) {
        plan.stages.emplace_back(layer_count);
        for (std::size_t l = 0; l < layer_count; ++l) plan.stages[0][l] = l;
        return plan;
    }
    for (std::size_t start = 0; start < layer_count; start += layers_per_stage) {
        const std::size_t end = std::min(layer_count, start + layers_per_stage);
        std::vector<std::size_t> stage;
        for (std::size_t k = start; k < end; ++k)
            stage.push_back(order == StageOrder::low_to_high ? k : layer_count - 1 - k);
        std::sort(stage.begin(), stage.end());
        plan.stages.push_back(std::move(stage));
    }
    return plan;
}

std::string plan_to_json(const StagedPlan& plan) {
    nlohmann::ordered_json j;
    j["order"] = std::string(stage_order_name(plan.order));
    j["steps_per_stage"] = plan.steps_per_stage;
    j["stages"] = plan.stages;
    return j.dump();
}

StagedPlan plan_from_json(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(std::string("staged plan: ") + e.what(), e.byte);
    }
    try {
        StagedPlan plan;
        plan.order = parse_stage_order(j.at("order").get<std::string>());
        plan.steps_per_stage = j.at("steps_per_stage").get<std::size_t>();
        plan.stages = j.at("stages").get<std::vector<std::vector<std::size_t>>>();
        for (const auto& s : plan.stages) plan.layer_count += s.size();
        check_partition(plan.stages, plan.layer_count);
        return plan;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("staged plan: ") + e.what(), 0);
    } catch (const ArgumentError& e) {
        throw FormatError(e.what(), 0);
    }
}

void project_layer(FactorizedLinear& layer, const DenseMatrix& source, const ProjectionConfig& config) {
    layer.weight = project(source, config.method, config.rank, config.blocks);
}

RunRecord staged_train(ToyModel& model, const TaskData& data, const TrainConfig& config,
                       const StagedPlan& plan, const ProjectionConfig& projection,
                       const StageObserver& observer) {
    const std::vector<std::size_t> targets = model.factorizable_layers();
    if (plan.layer_count != targets.size())
        throw ArgumentError("staged_train: plan covers " + std::to_string(plan.layer_count) +
                            " layers but the model has " + std::to_string(targets.size()) +
                            " factorizable layers");
    check_partition(plan.stages, plan.layer_count);
    std::vector<DenseMatrix> initial;
    for (std::size_t l : targets) {
        const auto* w = std::get_if<DenseMatrix>(&model.layers[l].weight);
        if (!w) throw ArgumentError("staged_train: layer " + std::to_string(l) + " is already factorized");
        if (!projection.from_current_weights) initial.push_back(*w);
    }

    Trainer trainer(model, data.train, config);
    for (std::size_t s = 0; s < plan.stages.size() && !trainer.diverged(); ++s) {
        for (std::size_t idx : plan.stages[s]) {
            FactorizedLinear& layer = model.layers[targets[idx]];
            const DenseMatrix source = projection.from_current_weights
                                           ? std::get<DenseMatrix>(layer.weight)
                                           : initial[idx];
            project_layer(layer, source, projection);
        }
        model.touch();
        if (observer) observer(s, model);
        trainer.run(plan.steps_per_stage);
    }
    if (trainer.steps_taken() < trainer.budget()) trainer.run(trainer.budget() - trainer.steps_taken());

    RunRecord r = finish_run(model, data, config, trainer);
    r.method = projection.method;
    r.staged = true;
    r.rank = projection.rank;
    r.blocks = projection.method == Method::low_rank ? 1 : projection.blocks;
    r.plan_json = plan_to_json(plan);
    return r;
}

}  // namespace factorkit
