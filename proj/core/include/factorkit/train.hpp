#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "factorkit/data.hpp"
#include "factorkit/factors.hpp"
#include "factorkit/model.hpp"
#include "factorkit/optim.hpp"

namespace factorkit {

/// The six-point learning-rate grid of the fine-tuning protocol.
inline constexpr std::array<double, 6> kPaperLrGrid{1e-4, 5e-4, 1e-5, 5e-5, 1e-6, 5e-6};

struct TrainConfig {
    double learning_rate = 1e-4;
    std::size_t epochs = 1;
    std::size_t batch_size = 32;
    std::uint64_t seed = 1;
    OptimizerConfig optimizer;
};

/// One training run. `failed` is exactly eval_accuracy <= majority_accuracy.
struct RunRecord {
    std::string key;
    std::string phase = "final";  ///< "final" or "search"
    Method method = Method::dense;
    bool staged = false;
    std::uint64_t seed = 0;
    double learning_rate = 0.0;
    std::string dataset;
    std::size_t train_size = 0;
    std::size_t budget = 0;
    std::size_t rank = 0;
    std::size_t blocks = 0;
    std::size_t steps = 0;
    double final_train_loss = 0.0;  ///< NaN when training diverged
    double eval_accuracy = 0.0;
    double majority_accuracy = 0.0;
    bool failed = false;
    std::string diagnostic;
    std::string plan_json;  ///< staged plan, empty for unstaged runs

    friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

/// Single-line JSON with a fixed field order. NaN losses are written as null.
std::string to_json_line(const RunRecord& record);
/// Inverse of to_json_line. Throws FormatError on malformed input.
RunRecord parse_run_record(std::string_view line);

/// Seeded epoch-wise shuffled mini-batches. The last batch of an epoch may be short.
class BatchStream {
public:
    BatchStream(std::size_t samples, std::size_t batch_size, std::uint64_t seed);

    std::span<const std::size_t> next();
    std::size_t steps_per_epoch() const noexcept;

private:
    void reshuffle();

    std::size_t batch_size_;
    Rng rng_;
    std::vector<std::size_t> order_;
    std::size_t cursor_;
};

/// Runs optimizer steps on a model over a shuffled training set. The model is
/// held by reference, so its layers can be replaced between calls to run().
class Trainer {
public:
    Trainer(ToyModel& model, const Dataset& train, const TrainConfig& config);

    /// Takes up to `steps` steps; stops at the first non-finite batch loss.
    /// Returns the number of steps taken.
    std::size_t run(std::size_t steps);

    /// epochs × steps per epoch.
    std::size_t budget() const noexcept { return budget_; }
    std::size_t steps_taken() const noexcept { return taken_; }
    bool diverged() const noexcept { return diverged_; }
    const std::string& diagnostic() const noexcept { return diagnostic_; }
    /// Loss of every step taken so far, in order.
    const std::vector<double>& losses() const noexcept { return losses_; }

private:
    ToyModel& model_;
    const Dataset& train_;
    TrainConfig config_;
    BatchStream stream_;
    Optimizer optimizer_;
    std::size_t budget_;
    std::size_t taken_ = 0;
    bool diverged_ = false;
    std::string diagnostic_;
    std::vector<double> losses_;
};

/// Mean cross-entropy over a whole dataset.
double dataset_loss(const ToyModel& model, const Dataset& data);
double accuracy(const ToyModel& model, const Dataset& data);

/// Fills the outcome fields of a record from a finished trainer.
RunRecord finish_run(const ToyModel& model, const TaskData& data, const TrainConfig& config,
                     const Trainer& trainer);

/// Trains `model` in place for config.epochs and reports the outcome. A
/// non-finite loss ends the run early and marks it failed with eval accuracy 0.
RunRecord train_run(ToyModel& model, const TaskData& data, const TrainConfig& config);

struct LrSearchResult {
    double selected = 0.0;
    std::vector<RunRecord> runs;  ///< one 1-epoch run per grid point, grid order
    bool all_diverged = false;
};

/// The selection rule of lr_search applied to finished runs: smallest finite
/// final training loss, ties to the larger rate, smallest rate when none is finite.
LrSearchResult select_learning_rate(std::span<const RunRecord> runs);

using RunFn = std::function<RunRecord(ToyModel&, const TaskData&, const TrainConfig&)>;

/// Trains a fresh model from `factory` for one epoch per learning rate and
/// selects the one with the smallest final training loss. Diverged runs are
/// excluded; ties go to the larger rate. When every run diverges the smallest
/// rate is returned and all_diverged is set. `run` defaults to train_run.
LrSearchResult lr_search(const std::function<ToyModel()>& factory, const TaskData& data,
                         std::span<const double> grid, const TrainConfig& base,
                         const RunFn& run = {});

}  // namespace factorkit
