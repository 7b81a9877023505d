#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "factorkit/matrix.hpp"
#include "factorkit/rng.hpp"

namespace factorkit {

/// Labelled samples, one per row of `x`.
struct Dataset {
    DenseMatrix x;
    std::vector<std::size_t> y;
    std::size_t classes = 0;

    std::size_t size() const noexcept { return y.size(); }
    std::size_t features() const noexcept { return x.cols(); }
    /// Selected samples as columns (features × idx.size()).
    DenseMatrix columns(std::span<const std::size_t> idx) const;
};

struct TaskData {
    std::string name;
    Dataset train;
    Dataset eval;
};

/// Tasks with strictly more training samples than this are high-data.
inline constexpr std::size_t kHighDataThreshold = 10000;

enum class SizeClass { low, high };
SizeClass size_class(std::size_t train_size) noexcept;
std::string_view size_class_name(SizeClass c) noexcept;

/// Frequency of the most common label. Throws ArgumentError when empty.
double majority_accuracy(std::span<const std::size_t> labels);

/// Accuracy on `eval` of the constant predictor that always answers the most
/// frequent training label (lowest label on ties).
double majority_baseline(const Dataset& train, const Dataset& eval);

/// Gaussian clusters shared by a pretext task and the downstream tasks derived from it.
struct ClusterWorld {
    DenseMatrix centers;  ///< clusters × features
    double noise = 1.0;

    std::size_t clusters() const noexcept { return centers.rows(); }
    std::size_t features() const noexcept { return centers.cols(); }
};

/// Cluster centres drawn as N(0, separation²/features) per coordinate, so
/// the expected distance between two centres is about separation·√2.
ClusterWorld make_world(std::size_t clusters, std::size_t features, double separation, double noise,
                        std::uint64_t seed);

/// Samples labelled by cluster id, clusters drawn uniformly.
Dataset sample_pretext(const ClusterWorld& world, std::size_t n, std::uint64_t seed);

/// Downstream task: cluster k belongs to class k mod classes. A sample picks
/// its class from `class_weights` (uniform when empty), then a cluster of
/// that class uniformly, then adds isotropic noise.
struct TaskSpec {
    std::string name;
    std::size_t train_size = 1280;
    std::size_t eval_size = 512;
    std::size_t classes = 2;
    std::vector<double> class_weights;
    std::uint64_t seed = 0;
};

TaskData make_task(const ClusterWorld& world, const TaskSpec& spec);

/// Two well separated Gaussian classes (means ±separation along the first
/// axis, unit noise). Linearly separable for large separation.
TaskData make_separable_task(std::size_t train_size, std::size_t eval_size, std::size_t features,
                             double separation, std::uint64_t seed);

}  // namespace factorkit
