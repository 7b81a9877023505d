#include "factorkit/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include "json.hpp"

#include "factorkit/errors.hpp"

namespace factorkit {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

constexpr std::uint64_t kBodyTag = 0x626f6479;
constexpr std::uint64_t kPretextTag = 0x70726574;
constexpr std::uint64_t kHeadTag = 0x68656164;

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::size_t line_of(std::string_view text, std::size_t byte) {
    byte = std::min(byte, text.size());
    return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

// Position of a field name in the source, for error messages.
std::size_t field_offset(std::string_view text, const std::string& key) {
    const auto pos = text.find("\"" + key + "\"");
    return pos == std::string_view::npos ? 0 : pos;
}

[[noreturn]] void field_error(std::string_view text, const std::string& key, const std::string& what) {
    const std::size_t off = field_offset(text, key);
    throw FormatError("grid config line " + std::to_string(line_of(text, off)) + ": field \"" + key +
                          "\": " + what,
                      off);
}

void check_keys(std::string_view text, const json& obj, const std::set<std::string>& allowed,
                const std::string& where) {
    if (!obj.is_object()) field_error(text, where, "expected an object");
    for (const auto& [k, v] : obj.items())
        if (!allowed.count(k)) field_error(text, k, "unknown field in " + where);
}

template <class T>
void read_field(std::string_view text, const json& obj, const std::string& key, T& out) {
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception& e) {
        field_error(text, key, e.what());
    }
}

ordered_json dataset_json(const DatasetSpec& d) {
    return {{"name", d.name},
            {"train_size", d.train_size},
            {"eval_size", d.eval_size},
            {"class_weights", d.class_weights},
            {"seed", d.seed}};
}

ordered_json world_json(const WorldSpec& w) {
    return {{"width", w.width},
            {"depth", w.depth},
            {"clusters", w.clusters},
            {"classes", w.classes},
            {"separation", w.separation},
            {"noise", w.noise},
            {"seed", w.seed},
            {"pretrain_samples", w.pretrain_samples},
            {"pretrain_epochs", w.pretrain_epochs},
            {"pretrain_lr", w.pretrain_lr}};
}

std::string cell_label(const ExperimentGrid& grid, const Cell& c) {
    return std::string(method_name(c.method)) + (c.staged ? "/staged" : "") + " budget " +
           std::to_string(c.budget) + " on " + grid.datasets[c.dataset].name;
}

struct Context {
    const ExperimentGrid& grid;
    ToyModel body;
    std::vector<TaskData> data;
    std::vector<std::pair<std::size_t, std::size_t>> shapes;
};

RunRecord execute(const Context& ctx, const Cell& cell, std::size_t rank, std::uint64_t seed, double lr,
                  std::size_t epochs, const std::string& phase) {
    const ExperimentGrid& g = ctx.grid;
    const TaskData& data = ctx.data[cell.dataset];
    ToyModel model = downstream_model(ctx.body, g.world.classes, seed);
    TrainConfig cfg;
    cfg.learning_rate = lr;
    cfg.epochs = epochs;
    cfg.batch_size = g.batch_size;
    cfg.seed = seed;
    cfg.optimizer = g.optimizer;

    const ProjectionConfig proj{cell.method, rank, g.blocks};
    RunRecord r;
    if (cell.method == Method::dense) {
        r = train_run(model, data, cfg);
    } else if (cell.staged) {
        const StagedPlan plan = build_plan(g.world.depth, g.stage_order, g.steps_per_stage, g.layers_per_stage);
        r = staged_train(model, data, cfg, plan, proj);
    } else {
        for (std::size_t l : model.factorizable_layers())
            project_layer(model.layers[l], std::get<DenseMatrix>(model.layers[l].weight), proj);
        model.touch();
        r = train_run(model, data, cfg);
        r.rank = rank;
        r.blocks = cell.method == Method::low_rank ? 1 : g.blocks;
    }
    r.method = cell.method;
    r.staged = cell.staged;
    r.phase = phase;
    r.seed = seed;
    r.learning_rate = lr;
    r.budget = cell.budget;
    r.key = run_key(cell.method, cell.staged, seed, lr, cell.budget, data.name, phase);
    return r;
}

class CellRunner {
public:
    CellRunner(const Context& ctx, Ledger& ledger, const RunOptions& options)
        : ctx_(ctx), ledger_(ledger), options_(options) {}

    void run(const Cell& cell) {
        const ExperimentGrid& g = ctx_.grid;
        std::size_t rank = 0;
        try {
            if (cell.method != Method::dense)
                rank = solve_rank(cell.method, ctx_.shapes, cell.budget,
                                  cell.method == Method::low_rank ? 1 : g.blocks)
                           .rank;
        } catch (const Error& e) {
            error(cell_label(g, cell) + ": " + e.what());
            return;
        }
        if (g.lr_mode == LrMode::sweep) {
            for (double lr : g.learning_rates)
                for (std::uint64_t seed : g.seeds) obtain(cell, rank, seed, lr, g.epochs, "final");
            return;
        }
        double lr = g.learning_rates.front();
        if (g.learning_rates.size() > 1) {
            std::vector<RunRecord> search;
            for (double candidate : g.learning_rates) {
                auto r = obtain(cell, rank, g.seeds.front(), candidate, 1, "search");
                if (!r) return;  // the rate cannot be chosen without every search run
                search.push_back(std::move(*r));
            }
            lr = select_learning_rate(search).selected;
        }
        for (std::uint64_t seed : g.seeds) obtain(cell, rank, seed, lr, g.epochs, "final");
    }

    GridSummary summary() {
        GridSummary s;
        s.executed = executed_;
        s.skipped = skipped_;
        s.errors = errors_;
        return s;
    }

private:
    std::optional<RunRecord> obtain(const Cell& cell, std::size_t rank, std::uint64_t seed, double lr,
                                    std::size_t epochs, const std::string& phase) {
        const std::string key =
            run_key(cell.method, cell.staged, seed, lr, cell.budget, ctx_.grid.datasets[cell.dataset].name, phase);
        if (auto existing = ledger_.find(key)) {
            ++skipped_;
            return existing;
        }
        try {
            RunRecord r = execute(ctx_, cell, rank, seed, lr, epochs, phase);
            ledger_.append(r);
            ++executed_;
            if (options_.on_record) {
                std::lock_guard lock(mutex_);
                options_.on_record(r);
            }
            return r;
        } catch (const Error& e) {
            error(cell_label(ctx_.grid, cell) + " seed " + std::to_string(seed) + " lr " + format_double(lr) +
                  ": " + e.what());
            return std::nullopt;
        }
    }

    void error(std::string msg) {
        std::lock_guard lock(mutex_);
        errors_.push_back(std::move(msg));
    }

    const Context& ctx_;
    Ledger& ledger_;
    const RunOptions& options_;
    std::mutex mutex_;
    std::atomic<std::size_t> executed_{0};
    std::atomic<std::size_t> skipped_{0};
    std::vector<std::string> errors_;
};

double pct(std::size_t failed, std::size_t attempted) {
    return attempted == 0 ? 0.0 : 100.0 * static_cast<double>(failed) / static_cast<double>(attempted);
}

}  // namespace

ExperimentGrid toy_stability_grid() {
    ExperimentGrid g;
    g.budgets = {1536, 3072};
    g.datasets = {{"low_a", 1280, 512, {0.7, 0.3}, 11},
                  {"low_b", 1280, 512, {0.65, 0.35}, 12},
                  {"high_a", 12800, 512, {0.7, 0.3}, 21},
                  {"high_b", 12800, 512, {0.65, 0.35}, 22}};
    return g;
}

ExperimentGrid adversarial_grid() {
    ExperimentGrid g;
    g.methods = {Method::low_rank};
    g.learning_rates = {5e-4};
    g.world.width = 128;
    // Rank 1 on each 128×128 body layer.
    g.budgets = {g.world.depth * 2 * g.world.width};
    g.datasets = {{"adv_low", 1280, 512, {0.7, 0.3}, 31}};
    return g;
}

void validate(const ExperimentGrid& g) {
    if (g.methods.empty() || g.staged.empty() || g.seeds.empty() || g.learning_rates.empty() ||
        g.datasets.empty())
        throw ArgumentError("experiment grid: every axis must be non-empty");
    const bool factorized = std::any_of(g.methods.begin(), g.methods.end(),
                                        [](Method m) { return m != Method::dense; });
    if (factorized && g.budgets.empty())
        throw ArgumentError("experiment grid: factorized methods need at least one budget");
    if (std::set<std::uint64_t>(g.seeds.begin(), g.seeds.end()).size() != g.seeds.size())
        throw ArgumentError("experiment grid: seeds must be distinct");
    if (std::set<Method>(g.methods.begin(), g.methods.end()).size() != g.methods.size())
        throw ArgumentError("experiment grid: methods must be distinct");
    std::set<std::string> names;
    for (const auto& d : g.datasets) {
        if (d.name.empty() || d.name.find('|') != std::string::npos)
            throw ArgumentError("experiment grid: dataset names must be non-empty and free of '|'");
        if (!names.insert(d.name).second) throw ArgumentError("experiment grid: duplicate dataset " + d.name);
        if (d.train_size == 0 || d.eval_size == 0)
            throw ArgumentError("experiment grid: dataset " + d.name + " has no samples");
        if (!d.class_weights.empty() && d.class_weights.size() != g.world.classes)
            throw ArgumentError("experiment grid: dataset " + d.name + " needs one weight per class");
    }
    for (double lr : g.learning_rates)
        if (!(lr >= 0.0)) throw ArgumentError("experiment grid: learning rates must be non-negative");
    const WorldSpec& w = g.world;
    if (w.width == 0 || w.depth == 0 || w.classes < 2 || w.clusters < w.classes)
        throw ArgumentError("experiment grid: world needs width, depth, >= 2 classes and >= classes clusters");
    if (g.epochs == 0 || g.batch_size == 0 || g.blocks == 0 || g.layers_per_stage == 0)
        throw ArgumentError("experiment grid: epochs, batch_size, blocks and layers_per_stage must be positive");
}

std::string_view lr_mode_name(LrMode m) noexcept { return m == LrMode::search ? "search" : "sweep"; }

LrMode parse_lr_mode(std::string_view name) {
    if (name == "search") return LrMode::search;
    if (name == "sweep") return LrMode::sweep;
    throw ArgumentError("unknown lr mode \"" + std::string(name) + "\"");
}

std::string grid_to_json(const ExperimentGrid& g) {
    ordered_json j;
    std::vector<std::string> methods;
    for (Method m : g.methods) methods.emplace_back(method_name(m));
    j["methods"] = methods;
    j["staged"] = std::vector<bool>(g.staged.begin(), g.staged.end());
    j["seeds"] = g.seeds;
    j["learning_rates"] = g.learning_rates;
    j["budgets"] = g.budgets;
    j["datasets"] = ordered_json::array();
    for (const auto& d : g.datasets) j["datasets"].push_back(dataset_json(d));
    j["lr_mode"] = lr_mode_name(g.lr_mode);
    j["blocks"] = g.blocks;
    j["epochs"] = g.epochs;
    j["batch_size"] = g.batch_size;
    j["optimizer"] = {{"kind", optimizer_name(g.optimizer.kind)},
                      {"momentum", g.optimizer.momentum},
                      {"beta1", g.optimizer.beta1},
                      {"beta2", g.optimizer.beta2},
                      {"epsilon", g.optimizer.epsilon},
                      {"weight_decay", g.optimizer.weight_decay}};
    j["stage_order"] = stage_order_name(g.stage_order);
    j["steps_per_stage"] = g.steps_per_stage;
    j["layers_per_stage"] = g.layers_per_stage;
    j["world"] = world_json(g.world);
    return j.dump(2);
}

ExperimentGrid grid_from_json(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        const std::size_t off = e.byte == 0 ? 0 : e.byte - 1;
        const std::size_t line = line_of(text, off);
        const auto line_start = text.rfind('\n', off == 0 ? 0 : off - 1);
        const std::size_t column = line_start == std::string_view::npos ? off + 1 : off - line_start;
        throw FormatError("grid config syntax error at line " + std::to_string(line) + ", column " +
                              std::to_string(column),
                          off);
    }
    check_keys(text, j,
               {"methods", "staged", "seeds", "learning_rates", "budgets", "datasets", "lr_mode", "blocks",
                "epochs", "batch_size", "optimizer", "stage_order", "steps_per_stage", "layers_per_stage",
                "world"},
               "grid");
    ExperimentGrid g;
    try {
        if (j.contains("methods")) {
            std::vector<std::string> names;
            read_field(text, j, "methods", names);
            g.methods.clear();
            for (const auto& n : names) g.methods.push_back(parse_method(n));
        }
        if (j.contains("lr_mode")) {
            std::string s;
            read_field(text, j, "lr_mode", s);
            g.lr_mode = parse_lr_mode(s);
        }
        if (j.contains("stage_order")) {
            std::string s;
            read_field(text, j, "stage_order", s);
            g.stage_order = parse_stage_order(s);
        }
    } catch (const ArgumentError& e) {
        throw FormatError(std::string("grid config: ") + e.what(), 0);
    }
    if (j.contains("staged")) {
        std::vector<bool> staged;
        read_field(text, j, "staged", staged);
        g.staged.assign(staged.begin(), staged.end());
    }
    read_field(text, j, "seeds", g.seeds);
    read_field(text, j, "learning_rates", g.learning_rates);
    read_field(text, j, "budgets", g.budgets);
    read_field(text, j, "blocks", g.blocks);
    read_field(text, j, "epochs", g.epochs);
    read_field(text, j, "batch_size", g.batch_size);
    read_field(text, j, "steps_per_stage", g.steps_per_stage);
    read_field(text, j, "layers_per_stage", g.layers_per_stage);
    if (j.contains("datasets")) {
        if (!j["datasets"].is_array()) field_error(text, "datasets", "expected an array");
        for (const auto& d : j["datasets"]) {
            check_keys(text, d, {"name", "train_size", "eval_size", "class_weights", "seed"}, "datasets");
            DatasetSpec spec;
            read_field(text, d, "name", spec.name);
            read_field(text, d, "train_size", spec.train_size);
            read_field(text, d, "eval_size", spec.eval_size);
            read_field(text, d, "class_weights", spec.class_weights);
            read_field(text, d, "seed", spec.seed);
            g.datasets.push_back(std::move(spec));
        }
    }
    if (j.contains("optimizer")) {
        const json& o = j["optimizer"];
        check_keys(text, o, {"kind", "momentum", "beta1", "beta2", "epsilon", "weight_decay"}, "optimizer");
        if (o.contains("kind")) {
            std::string s;
            read_field(text, o, "kind", s);
            try {
                g.optimizer.kind = parse_optimizer(s);
            } catch (const ArgumentError& e) {
                field_error(text, "kind", e.what());
            }
        }
        read_field(text, o, "momentum", g.optimizer.momentum);
        read_field(text, o, "beta1", g.optimizer.beta1);
        read_field(text, o, "beta2", g.optimizer.beta2);
        read_field(text, o, "epsilon", g.optimizer.epsilon);
        read_field(text, o, "weight_decay", g.optimizer.weight_decay);
    }
    if (j.contains("world")) {
        const json& w = j["world"];
        check_keys(text, w,
                   {"width", "depth", "clusters", "classes", "separation", "noise", "seed", "pretrain_samples",
                    "pretrain_epochs", "pretrain_lr"},
                   "world");
        read_field(text, w, "width", g.world.width);
        read_field(text, w, "depth", g.world.depth);
        read_field(text, w, "clusters", g.world.clusters);
        read_field(text, w, "classes", g.world.classes);
        read_field(text, w, "separation", g.world.separation);
        read_field(text, w, "noise", g.world.noise);
        read_field(text, w, "seed", g.world.seed);
        read_field(text, w, "pretrain_samples", g.world.pretrain_samples);
        read_field(text, w, "pretrain_epochs", g.world.pretrain_epochs);
        read_field(text, w, "pretrain_lr", g.world.pretrain_lr);
    }
    validate(g);
    return g;
}

std::string run_key(Method method, bool staged, std::uint64_t seed, double learning_rate, std::size_t budget,
                    std::string_view dataset, std::string_view phase) {
    const std::string text = std::string(method_name(method)) + "|" + (staged ? "1" : "0") + "|" +
                             std::to_string(seed) + "|" + format_double(learning_rate) + "|" +
                             std::to_string(budget) + "|" + std::string(dataset) + "|" + std::string(phase);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::vector<Cell> enumerate_cells(const ExperimentGrid& g) {
    std::vector<Cell> out;
    for (Method m : g.methods) {
        if (m == Method::dense) {
            for (std::size_t d = 0; d < g.datasets.size(); ++d) out.push_back({m, false, 0, d});
            continue;
        }
        for (bool s : g.staged)
            for (std::size_t b : g.budgets)
                for (std::size_t d = 0; d < g.datasets.size(); ++d) out.push_back({m, s, b, d});
    }
    return out;
}

ToyModel pretrained_body(const WorldSpec& w) {
    const ClusterWorld world = make_world(w.clusters, w.width, w.separation, w.noise, w.seed);
    std::vector<std::size_t> widths(w.depth + 1, w.width);
    widths.push_back(w.clusters);
    Rng rng = Rng::derive(w.seed, kBodyTag);
    ToyModel model = dense_mlp(widths, rng);

    const std::uint64_t data_seed = Rng::derive(w.seed, kPretextTag).next_u64();
    const TaskData pretext{"pretext", sample_pretext(world, w.pretrain_samples, data_seed),
                           sample_pretext(world, 256, data_seed + 1)};
    TrainConfig cfg;
    cfg.learning_rate = w.pretrain_lr;
    cfg.epochs = w.pretrain_epochs;
    cfg.seed = w.seed;
    cfg.optimizer.kind = OptimizerKind::adamw;
    if (w.pretrain_epochs > 0) train_run(model, pretext, cfg);

    model.layers.pop_back();
    model.touch();
    return model;
}

ToyModel downstream_model(const ToyModel& body, std::size_t classes, std::uint64_t seed) {
    if (body.layers.empty()) throw ArgumentError("downstream_model: empty body");
    ToyModel model = body;
    Rng rng = Rng::derive(seed, kHeadTag);
    FactorizedLinear head = dense_layer(classes, body.layers.back().bias.size(), rng);
    head.factorizable = false;
    model.layers.push_back(std::move(head));
    model.touch();
    return model;
}

TaskData make_dataset(const WorldSpec& w, const DatasetSpec& spec) {
    const ClusterWorld world = make_world(w.clusters, w.width, w.separation, w.noise, w.seed);
    TaskSpec t;
    t.name = spec.name;
    t.train_size = spec.train_size;
    t.eval_size = spec.eval_size;
    t.classes = w.classes;
    t.class_weights = spec.class_weights;
    t.seed = spec.seed;
    return make_task(world, t);
}

Ledger::Ledger(std::filesystem::path path) : path_(std::move(path)) {
    std::error_code ec;
    if (!std::filesystem::exists(path_, ec)) return;
    std::ifstream in(path_, std::ios::binary);
    if (!in) throw IoError("cannot read ledger " + path_.string());
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    std::size_t pos = 0, line_no = 0, good_end = 0;
    while (pos < text.size()) {
        ++line_no;
        const std::size_t nl = text.find('\n', pos);
        const bool terminated = nl != std::string::npos;
        const std::string line = text.substr(pos, terminated ? nl - pos : std::string::npos);
        const std::size_t next = terminated ? nl + 1 : text.size();
        if (!line.empty()) {
            try {
                RunRecord r = parse_run_record(line);
                if (index_.count(r.key))
                    throw FormatError("ledger " + path_.string() + " line " + std::to_string(line_no) +
                                          ": duplicate key " + r.key,
                                      pos);
                index_.emplace(r.key, records_.size());
                records_.push_back(std::move(r));
            } catch (const FormatError& e) {
                if (terminated)
                    throw FormatError("ledger " + path_.string() + " line " + std::to_string(line_no) + ": " +
                                          e.detail(),
                                      pos);
                ++dropped_;
                break;
            }
        }
        if (terminated) good_end = next;
        pos = next;
    }
    if (good_end < text.size()) {
        // Cut the unterminated tail so the next append starts on a fresh line.
        if (dropped_ == 0) {
            std::ofstream out(path_, std::ios::app | std::ios::binary);
            out << '\n';
        } else {
            std::filesystem::resize_file(path_, good_end, ec);
            if (ec) throw IoError("cannot repair ledger " + path_.string() + ": " + ec.message());
        }
    }
}

bool Ledger::contains(const std::string& key) const {
    std::lock_guard lock(mutex_);
    return index_.count(key) != 0;
}

std::optional<RunRecord> Ledger::find(const std::string& key) const {
    std::lock_guard lock(mutex_);
    const auto it = index_.find(key);
    if (it == index_.end()) return std::nullopt;
    return records_[it->second];
}

void Ledger::append(const RunRecord& record) {
    std::lock_guard lock(mutex_);
    if (index_.count(record.key)) throw ArgumentError("ledger: duplicate key " + record.key);
    if (!path_.empty()) {
        std::ofstream out(path_, std::ios::app | std::ios::binary);
        out << to_json_line(record) << '\n';
        out.flush();
        if (!out) throw IoError("cannot append to ledger " + path_.string());
    }
    index_.emplace(record.key, records_.size());
    records_.push_back(record);
}

std::vector<RunRecord> Ledger::records() const {
    std::lock_guard lock(mutex_);
    return records_;
}

std::size_t Ledger::size() const {
    std::lock_guard lock(mutex_);
    return records_.size();
}

std::vector<RunRecord> read_ledger(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw IoError("no ledger at " + path.string());
    return Ledger(path).records();
}

GridSummary run_grid(const ExperimentGrid& grid, Ledger& ledger, const RunOptions& options) {
    validate(grid);
    Context ctx{grid, pretrained_body(grid.world), {}, {}};
    for (const auto& d : grid.datasets) ctx.data.push_back(make_dataset(grid.world, d));
    for (std::size_t l : ctx.body.factorizable_layers()) {
        const auto& w = std::get<DenseMatrix>(ctx.body.layers[l].weight);
        ctx.shapes.emplace_back(w.rows(), w.cols());
    }

    const std::vector<Cell> cells = enumerate_cells(grid);
    CellRunner runner(ctx, ledger, options);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < cells.size(); i = next++) runner.run(cells[i]);
    };
    const std::size_t jobs = std::max<std::size_t>(1, std::min(options.jobs, cells.size()));
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < jobs; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    return runner.summary();
}

StabilityReport aggregate(std::span<const RunRecord> ledger) {
    struct Acc {
        std::size_t attempted = 0, failed = 0;
        std::vector<double> ok_accuracy;
    };
    std::map<std::pair<Method, bool>, Acc> cells;
    std::map<std::tuple<Method, bool, SizeClass>, Acc> sizes;
    for (const RunRecord& r : ledger) {
        if (r.phase != "final") continue;
        for (Acc* a : {&cells[{r.method, r.staged}], &sizes[{r.method, r.staged, size_class(r.train_size)}]}) {
            ++a->attempted;
            if (r.failed)
                ++a->failed;
            else
                a->ok_accuracy.push_back(r.eval_accuracy);
        }
    }
    if (cells.empty()) throw ArgumentError("aggregate: the ledger has no final runs");

    StabilityReport report;
    for (auto& [k, a] : cells) {
        CellStats c{k.first, k.second, a.attempted, a.failed, pct(a.failed, a.attempted), std::nullopt};
        if (!a.ok_accuracy.empty()) {
            // Summed in sorted order so the mean does not depend on ledger order.
            std::sort(a.ok_accuracy.begin(), a.ok_accuracy.end());
            double sum = 0.0;
            for (double v : a.ok_accuracy) sum += v;
            c.mean_accuracy = sum / static_cast<double>(a.ok_accuracy.size());
        }
        report.cells.push_back(c);
    }
    for (const auto& [k, a] : sizes)
        report.by_size.push_back(
            {std::get<0>(k), std::get<1>(k), std::get<2>(k), a.attempted, a.failed, pct(a.failed, a.attempted)});
    return report;
}

std::vector<SizeSplitRow> data_size_split(const StabilityReport& report) {
    std::map<Method, SizeSplitRow> rows;
    for (const auto& s : report.by_size) {
        SizeSplitRow& row = rows[s.method];
        row.method = s.method;
        if (s.size == SizeClass::low) {
            row.low_attempted += s.attempted;
            row.low_failed += s.failed;
        } else {
            row.high_attempted += s.attempted;
            row.high_failed += s.failed;
        }
    }
    std::vector<SizeSplitRow> out;
    for (auto& [m, row] : rows) {
        if (row.low_attempted) row.low_pct = pct(row.low_failed, row.low_attempted);
        if (row.high_attempted) row.high_pct = pct(row.high_failed, row.high_attempted);
        out.push_back(row);
    }
    return out;
}

std::string report_to_csv(const StabilityReport& report) {
    std::string out = "method,staged,runs,failed,unstable_pct,mean_accuracy\n";
    char buf[64];
    for (const auto& c : report.cells) {
        out += std::string(method_name(c.method)) + "," + (c.staged ? "true" : "false") + "," +
               std::to_string(c.attempted) + "," + std::to_string(c.failed) + ",";
        std::snprintf(buf, sizeof buf, "%.4f", c.unstable_pct);
        out += buf;
        out += ",";
        if (c.mean_accuracy) {
            std::snprintf(buf, sizeof buf, "%.6f", *c.mean_accuracy);
            out += buf;
        }
        out += "\n";
    }
    return out;
}

std::string report_to_json(const StabilityReport& report) {
    ordered_json j;
    j["cells"] = ordered_json::array();
    for (const auto& c : report.cells)
        j["cells"].push_back({{"method", method_name(c.method)},
                              {"staged", c.staged},
                              {"runs", c.attempted},
                              {"failed", c.failed},
                              {"unstable_pct", c.unstable_pct},
                              {"mean_accuracy", c.mean_accuracy ? ordered_json(*c.mean_accuracy) : ordered_json()}});
    j["by_size"] = ordered_json::array();
    for (const auto& s : report.by_size)
        j["by_size"].push_back({{"method", method_name(s.method)},
                                {"staged", s.staged},
                                {"size_class", size_class_name(s.size)},
                                {"runs", s.attempted},
                                {"failed", s.failed},
                                {"unstable_pct", s.unstable_pct}});
    j["data_size_split"] = ordered_json::array();
    for (const auto& r : data_size_split(report))
        j["data_size_split"].push_back({{"method", method_name(r.method)},
                                        {"low_runs", r.low_attempted},
                                        {"low_unstable_pct", r.low_pct ? ordered_json(*r.low_pct) : ordered_json()},
                                        {"high_runs", r.high_attempted},
                                        {"high_unstable_pct", r.high_pct ? ordered_json(*r.high_pct) : ordered_json()}});
    return j.dump(2);
}

}  // namespace factorkit
