#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

#include "factorkit/factors.hpp"
#include "factorkit/model.hpp"

namespace factorkit {

enum class OptimizerKind { sgd, adamw };

std::string_view optimizer_name(OptimizerKind k) noexcept;
/// "sgd" or "adamw"; ArgumentError otherwise.
OptimizerKind parse_optimizer(std::string_view name);

struct OptimizerConfig {
    OptimizerKind kind = OptimizerKind::sgd;
    double momentum = 0.0;  ///< SGD only
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    /// Decoupled decay for AdamW, applied to weights but not biases.
    double weight_decay = 0.0;

    friend bool operator==(const OptimizerConfig&, const OptimizerConfig&) = default;
};

/// Applies gradient steps to a ToyModel.
///
/// State (momentum or Adam moments, and the Adam step count) is kept per layer.
/// It survives across steps as long as the layer keeps its parameterization; a
/// layer whose weight changes variant or size (a staged projection) starts over
/// with fresh state while every other layer keeps its own.
class Optimizer {
public:
    explicit Optimizer(OptimizerConfig config = {}) : config_(config) {}

    void step(ToyModel& model, const Gradients& grads, double lr);

    const OptimizerConfig& config() const noexcept { return config_; }
    std::size_t steps() const noexcept { return steps_; }

private:
    struct Slot {
        std::vector<std::size_t> shape;  ///< variant index followed by span sizes
        std::size_t count = 0;
        std::vector<std::vector<double>> first;
        std::vector<std::vector<double>> second;
    };

    void update(std::span<double> param, std::span<const double> grad, std::vector<double>& m,
                std::vector<double>& v, std::size_t t, double lr, bool decay) const;

    OptimizerConfig config_;
    std::vector<Slot> slots_;
    std::size_t steps_ = 0;
};

}  // namespace factorkit
