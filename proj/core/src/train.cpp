#include "factorkit/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "json.hpp"

#include "factorkit/errors.hpp"

namespace factorkit {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr std::size_t kEvalChunk = 512;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

ordered_json number_or_null(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(); }

double number_or_nan(const ordered_json& j) { return j.is_null() ? kNaN : j.get<double>(); }

Method record_method(const ToyModel& model) {
    for (const auto& layer : model.layers)
        if (layer.factorizable && method_of(layer.weight) != Method::dense) return method_of(layer.weight);
    return Method::dense;
}

template <class Fn>
void for_each_chunk(const Dataset& data, Fn&& fn) {
    std::vector<std::size_t> idx;
    for (std::size_t start = 0; start < data.size(); start += kEvalChunk) {
        const std::size_t end = std::min(data.size(), start + kEvalChunk);
        idx.resize(end - start);
        std::iota(idx.begin(), idx.end(), start);
        fn(std::span<const std::size_t>(idx));
    }
}

}  // namespace

std::string to_json_line(const RunRecord& r) {
    ordered_json j;
    j["key"] = r.key;
    j["phase"] = r.phase;
    j["method"] = std::string(method_name(r.method));
    j["staged"] = r.staged;
    j["seed"] = r.seed;
    j["learning_rate"] = r.learning_rate;
    j["dataset"] = r.dataset;
    j["train_size"] = r.train_size;
    j["budget"] = r.budget;
    j["rank"] = r.rank;
    j["blocks"] = r.blocks;
    j["steps"] = r.steps;
    j["final_train_loss"] = number_or_null(r.final_train_loss);
    j["eval_accuracy"] = r.eval_accuracy;
    j["majority_accuracy"] = r.majority_accuracy;
    j["failed"] = r.failed;
    j["diagnostic"] = r.diagnostic;
    j["plan"] = r.plan_json.empty() ? ordered_json() : ordered_json::parse(r.plan_json);
    return j.dump();
}

RunRecord parse_run_record(std::string_view line) {
    ordered_json j;
    try {
        j = ordered_json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(std::string("run record: ") + e.what(), e.byte);
    }
    try {
        RunRecord r;
        r.key = j.at("key").get<std::string>();
        r.phase = j.at("phase").get<std::string>();
        r.method = parse_method(j.at("method").get<std::string>());
        r.staged = j.at("staged").get<bool>();
        r.seed = j.at("seed").get<std::uint64_t>();
        r.learning_rate = j.at("learning_rate").get<double>();
        r.dataset = j.at("dataset").get<std::string>();
        r.train_size = j.at("train_size").get<std::size_t>();
        r.budget = j.at("budget").get<std::size_t>();
        r.rank = j.at("rank").get<std::size_t>();
        r.blocks = j.at("blocks").get<std::size_t>();
        r.steps = j.at("steps").get<std::size_t>();
        r.final_train_loss = number_or_nan(j.at("final_train_loss"));
        r.eval_accuracy = j.at("eval_accuracy").get<double>();
        r.majority_accuracy = j.at("majority_accuracy").get<double>();
        r.failed = j.at("failed").get<bool>();
        r.diagnostic = j.at("diagnostic").get<std::string>();
        const auto& plan = j.at("plan");
        r.plan_json = plan.is_null() ? std::string() : plan.dump();
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("run record: ") + e.what(), 0);
    }
}

BatchStream::BatchStream(std::size_t samples, std::size_t batch_size, std::uint64_t seed)
    : batch_size_(batch_size), rng_(Rng::derive(seed, 0x6261746368)), order_(samples), cursor_(samples) {
    if (samples == 0 || batch_size == 0) throw ArgumentError("BatchStream: empty dataset or batch");
    std::iota(order_.begin(), order_.end(), 0);
}

void BatchStream::reshuffle() {
    rng_.shuffle(std::span<std::size_t>(order_));
    cursor_ = 0;
}

std::span<const std::size_t> BatchStream::next() {
    if (cursor_ >= order_.size()) reshuffle();
    const std::size_t n = std::min(batch_size_, order_.size() - cursor_);
    std::span<const std::size_t> out(order_.data() + cursor_, n);
    cursor_ += n;
    return out;
}

std::size_t BatchStream::steps_per_epoch() const noexcept {
    return (order_.size() + batch_size_ - 1) / batch_size_;
}

Trainer::Trainer(ToyModel& model, const Dataset& train, const TrainConfig& config)
    : model_(model),
      train_(train),
      config_(config),
      stream_(train.size(), config.batch_size, config.seed),
      optimizer_(config.optimizer),
      budget_(config.epochs * stream_.steps_per_epoch()) {
    validate(model);
    if (train.features() != model.in_features())
        throw ShapeError("Trainer: dataset has " + std::to_string(train.features()) +
                         " features, model expects " + std::to_string(model.in_features()));
    if (train.classes > model.classes())
        throw ShapeError("Trainer: dataset has more classes than the model outputs");
}

std::size_t Trainer::run(std::size_t steps) {
    std::size_t done = 0;
    ForwardCache cache;
    while (done < steps && !diverged_) {
        const auto idx = stream_.next();
        std::vector<std::size_t> labels(idx.size());
        for (std::size_t c = 0; c < idx.size(); ++c) labels[c] = train_.y[idx[c]];
        const DenseMatrix logits = forward(model_, train_.columns(idx), &cache);
        const LossResult loss = softmax_cross_entropy(logits, labels);
        if (!std::isfinite(loss.loss)) {
            diverged_ = true;
            diagnostic_ = "non-finite training loss at step " + std::to_string(taken_ + 1);
            break;
        }
        losses_.push_back(loss.loss);
        optimizer_.step(model_, backward(model_, cache, loss.dlogits), config_.learning_rate);
        ++taken_;
        ++done;
    }
    return done;
}

double dataset_loss(const ToyModel& model, const Dataset& data) {
    double total = 0.0;
    for_each_chunk(data, [&](std::span<const std::size_t> idx) {
        std::vector<std::size_t> labels(idx.size());
        for (std::size_t c = 0; c < idx.size(); ++c) labels[c] = data.y[idx[c]];
        total += softmax_cross_entropy(forward(model, data.columns(idx)), labels).loss *
                 static_cast<double>(idx.size());
    });
    return total / static_cast<double>(data.size());
}

double accuracy(const ToyModel& model, const Dataset& data) {
    std::size_t correct = 0;
    for_each_chunk(data, [&](std::span<const std::size_t> idx) {
        const auto pred = predict(forward(model, data.columns(idx)));
        for (std::size_t c = 0; c < idx.size(); ++c) correct += pred[c] == data.y[idx[c]];
    });
    return static_cast<double>(correct) / static_cast<double>(data.size());
}

RunRecord finish_run(const ToyModel& model, const TaskData& data, const TrainConfig& config,
                     const Trainer& trainer) {
    RunRecord r;
    r.method = record_method(model);
    r.seed = config.seed;
    r.learning_rate = config.learning_rate;
    r.dataset = data.name;
    r.train_size = data.train.size();
    r.steps = trainer.steps_taken();
    r.majority_accuracy = majority_baseline(data.train, data.eval);
    r.diagnostic = trainer.diagnostic();
    const double loss = trainer.diverged() ? kNaN : dataset_loss(model, data.train);
    if (!std::isfinite(loss)) {
        // A diverged model makes no usable predictions.
        r.final_train_loss = kNaN;
        r.eval_accuracy = 0.0;
        if (r.diagnostic.empty()) r.diagnostic = "non-finite training loss after training";
    } else {
        r.final_train_loss = loss;
        r.eval_accuracy = accuracy(model, data.eval);
    }
    r.failed = r.eval_accuracy <= r.majority_accuracy;
    return r;
}

RunRecord train_run(ToyModel& model, const TaskData& data, const TrainConfig& config) {
    Trainer trainer(model, data.train, config);
    trainer.run(trainer.budget());
    return finish_run(model, data, config, trainer);
}

LrSearchResult select_learning_rate(std::span<const RunRecord> runs) {
    if (runs.empty()) throw ArgumentError("select_learning_rate: no runs");
    LrSearchResult out;
    bool found = false;
    double best_loss = 0.0;
    double smallest = runs.front().learning_rate;
    for (const RunRecord& rec : runs) {
        const double lr = rec.learning_rate;
        const double loss = rec.final_train_loss;
        smallest = std::min(smallest, lr);
        if (std::isfinite(loss) &&
            (!found || loss < best_loss || (loss == best_loss && lr > out.selected))) {
            found = true;
            best_loss = loss;
            out.selected = lr;
        }
    }
    if (!found) {
        out.all_diverged = true;
        out.selected = smallest;
    }
    return out;
}

LrSearchResult lr_search(const std::function<ToyModel()>& factory, const TaskData& data,
                         std::span<const double> grid, const TrainConfig& base, const RunFn& run) {
    if (grid.empty()) throw ArgumentError("lr_search: empty learning-rate grid");
    std::vector<RunRecord> runs;
    for (double lr : grid) {
        TrainConfig cfg = base;
        cfg.learning_rate = lr;
        cfg.epochs = 1;
        ToyModel model = factory();
        RunRecord rec = run ? run(model, data, cfg) : train_run(model, data, cfg);
        rec.phase = "search";
        rec.learning_rate = lr;
        runs.push_back(std::move(rec));
    }
    LrSearchResult out = select_learning_rate(runs);
    out.runs = std::move(runs);
    return out;
}

}  // namespace factorkit
