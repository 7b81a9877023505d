#include "factorkit/data.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "factorkit/errors.hpp"

namespace factorkit {

namespace {

std::size_t most_frequent(std::span<const std::size_t> labels) {
    std::vector<std::size_t> counts;
    for (std::size_t y : labels) {
        if (y >= counts.size()) counts.resize(y + 1, 0);
        ++counts[y];
    }
    return static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

std::size_t pick(Rng& rng, const std::vector<double>& cumulative) {
    const double u = rng.uniform() * cumulative.back();
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    return std::min<std::size_t>(it - cumulative.begin(), cumulative.size() - 1);
}

void fill_sample(const ClusterWorld& world, std::size_t cluster, Rng& rng, std::span<double> out) {
    for (std::size_t f = 0; f < out.size(); ++f) out[f] = world.centers(cluster, f) + world.noise * rng.normal();
}

}  // namespace

DenseMatrix Dataset::columns(std::span<const std::size_t> idx) const {
    DenseMatrix out(features(), idx.size());
    for (std::size_t c = 0; c < idx.size(); ++c) {
        const auto row = x.row(idx[c]);
        for (std::size_t f = 0; f < row.size(); ++f) out(f, c) = row[f];
    }
    return out;
}

SizeClass size_class(std::size_t train_size) noexcept {
    return train_size > kHighDataThreshold ? SizeClass::high : SizeClass::low;
}

std::string_view size_class_name(SizeClass c) noexcept { return c == SizeClass::high ? "high" : "low"; }

double majority_accuracy(std::span<const std::size_t> labels) {
    if (labels.empty()) throw ArgumentError("majority_accuracy: no labels");
    const std::size_t top = most_frequent(labels);
    return static_cast<double>(std::count(labels.begin(), labels.end(), top)) /
           static_cast<double>(labels.size());
}

double majority_baseline(const Dataset& train, const Dataset& eval) {
    if (train.y.empty() || eval.y.empty()) throw ArgumentError("majority_baseline: empty dataset");
    const std::size_t top = most_frequent(train.y);
    return static_cast<double>(std::count(eval.y.begin(), eval.y.end(), top)) /
           static_cast<double>(eval.y.size());
}

ClusterWorld make_world(std::size_t clusters, std::size_t features, double separation, double noise,
                        std::uint64_t seed) {
    if (clusters == 0 || features == 0) throw ArgumentError("make_world: empty world");
    Rng rng = Rng::derive(seed, 0x776f726c64);
    return ClusterWorld{
        rng.gaussian_matrix(clusters, features, separation / std::sqrt(static_cast<double>(features))),
        noise};
}

Dataset sample_pretext(const ClusterWorld& world, std::size_t n, std::uint64_t seed) {
    Rng rng = Rng::derive(seed, 0x707265);
    Dataset d{DenseMatrix(n, world.features()), std::vector<std::size_t>(n), world.clusters()};
    for (std::size_t s = 0; s < n; ++s) {
        const std::size_t k = static_cast<std::size_t>(rng.below(world.clusters()));
        d.y[s] = k;
        fill_sample(world, k, rng, d.x.row(s));
    }
    return d;
}

TaskData make_task(const ClusterWorld& world, const TaskSpec& spec) {
    if (spec.classes < 2 || spec.classes > world.clusters())
        throw ArgumentError("make_task: need 2 <= classes <= clusters");
    if (!spec.class_weights.empty() && spec.class_weights.size() != spec.classes)
        throw ArgumentError("make_task: class_weights length must equal classes");
    if (spec.train_size == 0 || spec.eval_size == 0) throw ArgumentError("make_task: empty split");

    std::vector<double> cumulative(spec.classes);
    double acc = 0.0;
    for (std::size_t c = 0; c < spec.classes; ++c) {
        const double w = spec.class_weights.empty() ? 1.0 : spec.class_weights[c];
        if (!(w > 0.0)) throw ArgumentError("make_task: class weights must be positive");
        cumulative[c] = acc += w;
    }
    std::vector<std::vector<std::size_t>> members(spec.classes);
    for (std::size_t k = 0; k < world.clusters(); ++k) members[k % spec.classes].push_back(k);

    auto draw = [&](std::size_t n, std::uint64_t tag) {
        Rng rng = Rng::derive(spec.seed, tag);
        Dataset d{DenseMatrix(n, world.features()), std::vector<std::size_t>(n), spec.classes};
        for (std::size_t s = 0; s < n; ++s) {
            const std::size_t c = pick(rng, cumulative);
            const auto& pool = members[c];
            const std::size_t k = pool[static_cast<std::size_t>(rng.below(pool.size()))];
            d.y[s] = c;
            fill_sample(world, k, rng, d.x.row(s));
        }
        return d;
    };
    return TaskData{spec.name, draw(spec.train_size, 1), draw(spec.eval_size, 2)};
}

TaskData make_separable_task(std::size_t train_size, std::size_t eval_size, std::size_t features,
                             double separation, std::uint64_t seed) {
    auto draw = [&](std::size_t n, std::uint64_t tag) {
        Rng rng = Rng::derive(seed, tag);
        Dataset d{DenseMatrix(n, features), std::vector<std::size_t>(n), 2};
        for (std::size_t s = 0; s < n; ++s) {
            const std::size_t c = static_cast<std::size_t>(rng.below(2));
            d.y[s] = c;
            auto row = d.x.row(s);
            for (double& v : row) v = rng.normal();
            row[0] += c == 0 ? -separation : separation;
        }
        return d;
    };
    return TaskData{"separable", draw(train_size, 11), draw(eval_size, 12)};
}

}  // namespace factorkit
