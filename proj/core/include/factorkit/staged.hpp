#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "factorkit/factorize.hpp"
#include "factorkit/train.hpp"

namespace factorkit {

enum class StageOrder { high_to_low, low_to_high, all_at_once };

std::string_view stage_order_name(StageOrder o) noexcept;
/// "high_to_low", "low_to_high" or "all_at_once"; ArgumentError otherwise.
StageOrder parse_stage_order(std::string_view name);

inline constexpr std::size_t kPaperStepsPerStage = 500;
inline constexpr std::size_t kToyStepsPerStage = 50;

/// Stages of layer indices, in the order they are factorized. Indices count
/// factorizable layers only (0 = the first factorizable layer).
struct StagedPlan {
    StageOrder order = StageOrder::high_to_low;
    std::size_t steps_per_stage = kPaperStepsPerStage;
    std::size_t layer_count = 0;
    std::vector<std::vector<std::size_t>> stages;

    friend bool operator==(const StagedPlan&, const StagedPlan&) = default;
};

/// HighToLow groups layers from the last one down, LowToHigh from the first
/// one up, AllAtOnce emits a single stage. Throws ArgumentError for zero
/// layers or zero layers per stage.
StagedPlan build_plan(std::size_t layer_count, StageOrder order,
                      std::size_t steps_per_stage = kPaperStepsPerStage,
                      std::size_t layers_per_stage = 1);

/// {"order", "steps_per_stage", "stages"} as compact JSON.
std::string plan_to_json(const StagedPlan& plan);
/// Inverse of plan_to_json; also checks the set invariants. Throws FormatError.
StagedPlan plan_from_json(std::string_view text);

struct ProjectionConfig {
    Method method = Method::low_rank;
    std::size_t rank = 1;
    std::size_t blocks = kDefaultBlocks;
    /// Project from weights as trained so far (true) or from the weights the
    /// model had when staged training started (false).
    bool from_current_weights = true;
};

/// Replaces the layer's weight by the projection of `source`; the bias is kept.
void project_layer(FactorizedLinear& layer, const DenseMatrix& source, const ProjectionConfig& config);

/// Called after each stage's projection, before its training steps.
using StageObserver = std::function<void(std::size_t stage, const ToyModel&)>;

/// Runs the plan on a model whose factorizable layers are all dense: each
/// stage projects its layers and trains steps_per_stage steps, then training
/// continues until config.epochs worth of steps have been taken in total. Stage
/// steps draw from the same batch stream and count toward that total; the
/// optimizer is not reset between stages. Throws ArgumentError when the plan
/// does not match the model's factorizable layers.
RunRecord staged_train(ToyModel& model, const TaskData& data, const TrainConfig& config,
                       const StagedPlan& plan, const ProjectionConfig& projection,
                       const StageObserver& observer = {});

}  // namespace factorkit
