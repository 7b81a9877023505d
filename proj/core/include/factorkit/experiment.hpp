#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "factorkit/data.hpp"
#include "factorkit/staged.hpp"
#include "factorkit/train.hpp"

namespace factorkit {

/// Synthetic downstream task drawn from the shared cluster world.
struct DatasetSpec {
    std::string name;
    std::size_t train_size = 1280;
    std::size_t eval_size = 512;
    std::vector<double> class_weights;  ///< uniform when empty
    std::uint64_t seed = 1;

    friend bool operator==(const DatasetSpec&, const DatasetSpec&) = default;
};

/// The cluster world and the dense body pretrained on it. Every grid run
/// starts from this body plus a freshly initialized classifier head.
struct WorldSpec {
    std::size_t width = 64;  ///< input features and body width
    std::size_t depth = 3;   ///< body layers, all width×width and factorizable
    std::size_t clusters = 24;
    std::size_t classes = 2;
    double separation = 3.5;
    double noise = 1.0;
    std::uint64_t seed = 7;
    std::size_t pretrain_samples = 4096;
    std::size_t pretrain_epochs = 4;
    double pretrain_lr = 1e-3;

    friend bool operator==(const WorldSpec&, const WorldSpec&) = default;
};

/// search: per cell, one 1-epoch run per rate on the first seed picks the rate
/// used by every seed. sweep: every rate is its own grid point.
enum class LrMode { search, sweep };

struct ExperimentGrid {
    std::vector<Method> methods{Method::dense, Method::low_rank, Method::block_lr, Method::monarch};
    std::vector<bool> staged{false, true};
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6};
    std::vector<double> learning_rates{kPaperLrGrid.begin(), kPaperLrGrid.end()};
    /// Total weight parameters allowed over the factorized body layers.
    std::vector<std::size_t> budgets;
    std::vector<DatasetSpec> datasets;
    LrMode lr_mode = LrMode::search;
    std::size_t blocks = kDefaultBlocks;
    std::size_t epochs = 5;
    std::size_t batch_size = 32;
    OptimizerConfig optimizer{OptimizerKind::adamw};
    StageOrder stage_order = StageOrder::high_to_low;
    std::size_t steps_per_stage = kToyStepsPerStage;
    std::size_t layers_per_stage = 1;
    WorldSpec world;

    friend bool operator==(const ExperimentGrid&, const ExperimentGrid&) = default;
};

/// Seeds 1-6 and the six-rate grid on two low-data (1,280) and two high-data
/// (12,800) imbalanced tasks, at about 12.5% and 25% of the body's weights.
ExperimentGrid toy_stability_grid();
/// Low-rank only, rank 1 on a 128-wide body, fixed rate 5e-4: large
/// projection error that makes failures likely.
ExperimentGrid adversarial_grid();

/// Non-empty axes, distinct seeds and dataset names, positive sizes. Throws ArgumentError.
void validate(const ExperimentGrid& grid);

std::string_view lr_mode_name(LrMode m) noexcept;
LrMode parse_lr_mode(std::string_view name);

/// Pretty-printed JSON with every field.
std::string grid_to_json(const ExperimentGrid& grid);
/// Reads a grid config. Missing fields keep their defaults, unknown fields are
/// rejected. Throws FormatError whose message names the line and column of a
/// syntax error or the offending field, and ArgumentError from validate().
ExperimentGrid grid_from_json(std::string_view text);

/// 16 hex digits of FNV-1a over "method|staged|seed|lr|budget|dataset|phase".
std::string run_key(Method method, bool staged, std::uint64_t seed, double learning_rate,
                    std::size_t budget, std::string_view dataset, std::string_view phase);

/// One (method, staged, budget, dataset) combination. Dense cells are unstaged
/// and carry budget 0.
struct Cell {
    Method method = Method::dense;
    bool staged = false;
    std::size_t budget = 0;
    std::size_t dataset = 0;  ///< index into grid.datasets
};

std::vector<Cell> enumerate_cells(const ExperimentGrid& grid);

/// Body pretrained on the world's pretext task (cluster ids as labels).
ToyModel pretrained_body(const WorldSpec& world);
/// Body plus a classifier head drawn from `seed`; the head is not factorizable.
ToyModel downstream_model(const ToyModel& body, std::size_t classes, std::uint64_t seed);
TaskData make_dataset(const WorldSpec& world, const DatasetSpec& spec);

/// JSON-lines run store keyed by RunRecord::key. Appends are serialized and
/// flushed line by line; an empty path keeps records in memory only.
class Ledger {
public:
    Ledger() = default;
    /// Loads the file when it exists. A malformed final line without a newline
    /// (an interrupted append) is dropped; any other malformed line throws FormatError.
    explicit Ledger(std::filesystem::path path);

    bool contains(const std::string& key) const;
    std::optional<RunRecord> find(const std::string& key) const;
    /// Throws ArgumentError on a duplicate key and IoError when the write fails;
    /// the record is kept only if it was persisted.
    void append(const RunRecord& record);
    std::vector<RunRecord> records() const;
    std::size_t size() const;
    std::size_t dropped_lines() const noexcept { return dropped_; }

private:
    std::filesystem::path path_;
    mutable std::mutex mutex_;
    std::vector<RunRecord> records_;
    std::unordered_map<std::string, std::size_t> index_;
    std::size_t dropped_ = 0;
};

std::vector<RunRecord> read_ledger(const std::filesystem::path& path);

struct RunOptions {
    std::size_t jobs = 1;  ///< cells processed concurrently
    std::function<void(const RunRecord&)> on_record;
};

struct GridSummary {
    std::size_t executed = 0;
    std::size_t skipped = 0;  ///< already present in the ledger
    std::vector<std::string> errors;
};

/// Runs every grid point missing from the ledger. Failures of one cell (an
/// infeasible budget, a write error) are collected in `errors` and the sweep
/// carries on.
GridSummary run_grid(const ExperimentGrid& grid, Ledger& ledger, const RunOptions& options = {});

struct CellStats {
    Method method = Method::dense;
    bool staged = false;
    std::size_t attempted = 0;
    std::size_t failed = 0;
    double unstable_pct = 0.0;
    std::optional<double> mean_accuracy;  ///< over non-failed runs; absent when all failed
};

struct SizeCellStats {
    Method method = Method::dense;
    bool staged = false;
    SizeClass size = SizeClass::low;
    std::size_t attempted = 0;
    std::size_t failed = 0;
    double unstable_pct = 0.0;
};

struct StabilityReport {
    std::vector<CellStats> cells;       ///< sorted by (method, staged)
    std::vector<SizeCellStats> by_size; ///< sorted by (method, staged, size)
};

/// Aggregates the final-phase records. Pure and order-independent. Throws
/// ArgumentError when there are none.
StabilityReport aggregate(std::span<const RunRecord> ledger);

struct SizeSplitRow {
    Method method = Method::dense;
    std::size_t low_attempted = 0, low_failed = 0;
    std::size_t high_attempted = 0, high_failed = 0;
    std::optional<double> low_pct;   ///< absent without low-data runs
    std::optional<double> high_pct;
};

/// unstable% per (method, size class), pooling staged and unstaged runs.
std::vector<SizeSplitRow> data_size_split(const StabilityReport& report);

/// "method,staged,runs,failed,unstable_pct,mean_accuracy"; empty accuracy when absent.
std::string report_to_csv(const StabilityReport& report);
/// Cells, size breakdown and size split as JSON.
std::string report_to_json(const StabilityReport& report);

}  // namespace factorkit
