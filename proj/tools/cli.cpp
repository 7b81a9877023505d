#include "cli.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "factorkit/array_io.hpp"
#include "factorkit/bench.hpp"
#include "factorkit/checkpoint.hpp"
#include "factorkit/errors.hpp"
#include "factorkit/experiment.hpp"
#include "factorkit/factorize.hpp"
#include "factorkit/staged.hpp"
#include "factorkit/svd.hpp"

#ifndef FACTORKIT_VERSION
#define FACTORKIT_VERSION "0.0.0"
#endif

namespace factorkit::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

// An error that carries a list of per-item failures for the envelope.
class DetailedError : public Error {
public:
    DetailedError(const char* kind, const std::string& what, json details)
        : Error(what), kind_(kind), details_(std::move(details)) {}
    const char* kind() const noexcept override { return kind_; }
    const json& details() const noexcept { return details_; }

private:
    const char* kind_;
    json details_;
};

struct Global {
    std::uint64_t seed = 1;
    std::string out_dir = ".";
    std::string format = "csv";
    std::size_t jobs = 1;
};

struct FactorizeArgs {
    std::string input;
    std::string output = "factorized";
    std::string method;
    std::string rank;
    std::optional<std::size_t> budget;
    std::size_t blocks = kDefaultBlocks;
};

struct ReconstructArgs {
    std::string input;
    std::string output = "reconstructed";
};

struct ExperimentArgs {
    std::string config;
    std::string preset;
    std::string ledger = "ledger.jsonl";
};

struct BenchArgs {
    std::size_t width = 768;
    std::size_t layers = 4;
    double ratio = 0.265;
    std::size_t blocks = kDefaultBlocks;
    std::size_t warmup = 2;
    std::size_t runs = 8;
    std::size_t batch = 100;
};

struct PlanArgs {
    std::size_t layers = 0;
    std::string order = "high_to_low";
    std::size_t steps_per_stage = kPaperStepsPerStage;
    std::size_t layers_per_stage = 1;
};

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
    out.flush();
    if (!out) throw IoError("cannot write " + path.string());
}

// Relative outputs land under --out-dir; absolute ones are kept.
fs::path under(const Global& g, const std::string& p) {
    const fs::path path(p);
    return path.is_absolute() ? path : fs::path(g.out_dir) / path;
}

std::string layer_name_from(const fs::path& file) {
    std::string name = file.stem().string();
    for (char& c : name)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.')) c = '_';
    return name.empty() ? "w" : name;
}

// A bundle directory, or a single FKT1 file taken as a one-layer dense bundle.
Checkpoint load_input(const fs::path& input) {
    if (fs::is_directory(input)) return read_checkpoint(input);
    if (!fs::exists(input)) throw IoError("no such input: " + input.string());
    Checkpoint c{Method::dense, 0, 1, {}};
    c.layers.push_back({layer_name_from(input), read_array(input)});
    return c;
}

json summary_of(const GridSummary& s) {
    return json{{"executed", s.executed}, {"skipped", s.skipped}, {"errors", s.errors}};
}

json cmd_factorize(const Global& g, const FactorizeArgs& a) {
    const Checkpoint in = load_input(a.input);
    if (in.method != Method::dense) throw ArgumentError("factorize: input bundle is already " +
                                                        std::string(method_name(in.method)));
    if (in.layers.empty()) throw ArgumentError("factorize: input has no layers");
    const Method method = parse_method(a.method);
    if (method == Method::dense) throw ArgumentError("factorize: --method must be a factorized method");
    const std::size_t blocks = method == Method::low_rank ? 1 : a.blocks;
    if (blocks == 0) throw ArgumentError("factorize: --blocks must be positive");

    std::vector<std::pair<std::size_t, std::size_t>> shapes;
    json bad = json::array();
    for (const auto& layer : in.layers) {
        const std::size_t m = rows_of(layer.weight), n = cols_of(layer.weight);
        shapes.emplace_back(m, n);
        if (m % blocks != 0 || n % blocks != 0)
            bad.push_back({{"layer", layer.name},
                           {"rows", m},
                           {"cols", n},
                           {"message", std::to_string(blocks) + " blocks do not divide " + std::to_string(m) + "x" +
                                           std::to_string(n)}});
    }
    if (!bad.empty())
        throw DetailedError("argument", "factorize: --blocks " + std::to_string(blocks) + " does not fit " +
                                            std::to_string(bad.size()) + " layer(s)",
                            std::move(bad));

    std::size_t rank = 0;
    if (a.budget) {
        rank = solve_rank(method, shapes, *a.budget, blocks).rank;
    } else if (a.rank == "full") {
        rank = std::numeric_limits<std::size_t>::max();
        for (const auto& [m, n] : shapes) rank = std::min(rank, max_rank(method, m, n, blocks));
    } else {
        std::size_t used = 0;
        try {
            rank = std::stoull(a.rank, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != a.rank.size() || a.rank.empty() || a.rank[0] == '-' || rank == 0)
            throw ArgumentError("factorize: --rank must be a positive integer or \"full\"");
        for (std::size_t i = 0; i < shapes.size(); ++i) {
            const std::size_t cap = max_rank(method, shapes[i].first, shapes[i].second, blocks);
            if (rank > cap)
                bad.push_back({{"layer", in.layers[i].name}, {"message", "rank above maximum " + std::to_string(cap)}});
        }
        if (!bad.empty())
            throw DetailedError("argument", "factorize: rank " + a.rank + " too large for " +
                                                std::to_string(bad.size()) + " layer(s)",
                                std::move(bad));
    }

    Checkpoint out{method, rank, blocks, {}};
    std::vector<std::string> layer_extra;
    json layers = json::array();
    std::size_t params = 0, dense = 0;
    for (const auto& layer : in.layers) {
        const auto& w = std::get<DenseMatrix>(layer.weight);
        Factorization f = project(w, method, rank, blocks);
        const double err = frobenius_distance(w, reconstruct(f));
        const double norm = frobenius_norm(w);
        const json extra{{"params", param_count(f)},
                         {"frobenius_error", err},
                         {"relative_error", norm > 0.0 ? err / norm : 0.0}};
        params += param_count(f);
        dense += w.size();
        layer_extra.push_back(extra.dump());
        json entry{{"name", layer.name}};
        entry.update(extra);
        layers.push_back(std::move(entry));
        out.layers.push_back({layer.name, std::move(f)});
    }
    const double ratio = static_cast<double>(params) / static_cast<double>(dense);
    json manifest_extra{{"params", params}, {"dense_params", dense}, {"compression_ratio", ratio}};
    if (a.budget) manifest_extra["budget"] = *a.budget;
    manifest_extra["source"] = fs::absolute(a.input).string();

    const fs::path dir = under(g, a.output);
    write_checkpoint(dir, out, manifest_extra.dump(), layer_extra);
    return json{{"output", dir.string()}, {"method", method_name(method)}, {"rank", rank}, {"blocks", blocks},
                {"params", params}, {"dense_params", dense}, {"compression_ratio", ratio}, {"layers", layers}};
}

json cmd_reconstruct(const Global& g, const ReconstructArgs& a) {
    const Checkpoint in = load_input(a.input);
    Checkpoint out{Method::dense, 0, 1, {}};
    for (const auto& layer : in.layers) out.layers.push_back({layer.name, reconstruct(layer.weight)});
    const fs::path dir = under(g, a.output);
    write_checkpoint(dir, out, json{{"source", fs::absolute(a.input).string()}}.dump());
    return json{{"output", dir.string()}, {"layers", out.layers.size()}};
}

std::string cmd_spectrum(const Global& g, const std::string& input) {
    const auto curve = spectrum_curve(read_array(input));
    std::string text;
    if (g.format == "json") {
        json rows = json::array();
        for (const auto& [r, e] : curve) rows.push_back({{"r", r}, {"relative_error", e}});
        text = rows.dump(2) + "\n";
    } else {
        text = "r,relative_error\n";
        char buf[64];
        for (const auto& [r, e] : curve) {
            std::snprintf(buf, sizeof buf, "%zu,%.17g\n", r, e);
            text += buf;
        }
    }
    write_text(under(g, "spectrum." + g.format), text);
    return text;
}

std::string cmd_experiment(const Global& g, const ExperimentArgs& a) {
    ExperimentGrid grid;
    if (!a.config.empty())
        grid = grid_from_json(read_text(a.config));
    else if (a.preset == "toy")
        grid = toy_stability_grid();
    else
        grid = adversarial_grid();
    validate(grid);
    write_text(under(g, "grid.json"), grid_to_json(grid) + "\n");

    Ledger ledger(under(g, a.ledger));
    const GridSummary summary = run_grid(grid, ledger, RunOptions{g.jobs, {}});
    const auto records = ledger.records();
    std::string text;
    if (!records.empty()) {
        const StabilityReport report = aggregate(records);
        text = g.format == "json" ? report_to_json(report) + "\n" : report_to_csv(report);
        write_text(under(g, "report." + g.format), text);
    }
    write_text(under(g, "summary.json"), summary_of(summary).dump(2) + "\n");
    if (!summary.errors.empty()) {
        json details = json::array();
        for (const auto& e : summary.errors) details.push_back({{"message", e}});
        throw DetailedError("run", "experiment: " + std::to_string(summary.errors.size()) + " cell(s) failed",
                            std::move(details));
    }
    return text;
}

std::string cmd_bench(const Global& g, const BenchArgs& a) {
    const BenchConfig config{a.warmup, a.runs, a.batch, g.seed};
    validate(config);
    const auto cases = cases_at_ratio(a.width, a.layers, a.ratio, a.blocks);
    const auto rows = run_bench(cases, config);
    const std::string text = g.format == "json" ? bench_to_json(rows, config) + "\n" : bench_to_csv(rows);
    write_text(under(g, "bench." + g.format), text);
    return text;
}

std::string cmd_plan(const Global& g, const PlanArgs& a) {
    const StagedPlan plan = build_plan(a.layers, parse_stage_order(a.order), a.steps_per_stage, a.layers_per_stage);
    const std::string text = plan_to_json(plan) + "\n";
    write_text(under(g, "plan.json"), text);
    return text;
}

void print_error(std::ostream& err, const std::string& command, const char* kind, const std::string& message,
                 const json& details = nullptr) {
    json e{{"kind", kind}, {"message", message}};
    if (!details.is_null()) e["details"] = details;
    err << json{{"error", e}, {"command", command}}.dump() << '\n';
}

// Options that name existing files; they are made absolute in the manifest so
// a rerun from another directory reads the same inputs.
const std::set<std::string> kInputOptions{"--input", "--config"};

struct Resolved {
    json options = json::object();
    std::vector<std::string> argv;
};

void resolve_options(const CLI::App& app, Resolved& r) {
    for (const CLI::Option* opt : app.get_options()) {
        const std::string name = opt->get_name(false, true);
        if (name.rfind("--", 0) != 0 || name == "--help") continue;
        std::vector<std::string> values = opt->results();
        if (values.empty() && !opt->get_default_str().empty()) values.push_back(opt->get_default_str());
        if (values.empty()) continue;
        if (kInputOptions.count(name) || name == "--out-dir")
            for (auto& v : values) v = fs::absolute(v).lexically_normal().string();
        r.options[name] = values.size() == 1 ? json(values[0]) : json(values);
        for (const auto& v : values) {
            r.argv.push_back(name);
            r.argv.push_back(v);
        }
    }
}

int run_parsed(const std::string& command, const std::function<std::string()>& body,
               std::ostream& out, std::ostream& err) {
    try {
        out << body();
        out.flush();
        return kOk;
    } catch (const DetailedError& e) {
        print_error(err, command, e.kind(), e.what(), e.details());
    } catch (const Error& e) {
        print_error(err, command, e.kind(), e.what());
    } catch (const std::exception& e) {
        print_error(err, command, "internal", e.what());
    }
    return kFailed;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Factorized weight matrices: compression, training experiments and benchmarks", "factorkit"};
    app.set_version_flag("--version", FACTORKIT_VERSION);
    app.require_subcommand(1);
    app.fallthrough();

    Global g;
    if (const char* env = std::getenv(kOutDirEnv); env && *env) g.out_dir = env;
    app.add_option("--seed", g.seed, "Seed for generated data")->capture_default_str();
    app.add_option("--out-dir", g.out_dir, "Directory for outputs and the run manifest")->capture_default_str();
    app.add_option("--format", g.format, "Table format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    app.add_option("--jobs", g.jobs, "Concurrent runs (experiment)")->check(CLI::PositiveNumber)->capture_default_str();

    const std::vector<std::string> methods{"low_rank", "block_lr", "monarch"};

    FactorizeArgs fa;
    auto* factorize = app.add_subcommand("factorize", "Project a dense bundle onto factorized weights");
    factorize->add_option("--input", fa.input, "Dense bundle directory or single .fkt matrix")->required();
    factorize->add_option("--output", fa.output, "Output bundle directory")->capture_default_str();
    factorize->add_option("--method", fa.method, "low_rank, block_lr or monarch")
        ->required()
        ->check(CLI::IsMember(methods));
    auto* rank_opt = factorize->add_option("--rank", fa.rank, "Rank per layer, or \"full\"");
    auto* budget_opt = factorize->add_option("--budget", fa.budget, "Total weight parameters allowed");
    rank_opt->excludes(budget_opt);
    factorize->add_option("--blocks", fa.blocks, "Blocks per side (block_lr, monarch)")->capture_default_str();

    ReconstructArgs ra;
    auto* reconstruct_cmd = app.add_subcommand("reconstruct", "Expand a factorized bundle to dense weights");
    reconstruct_cmd->add_option("--input", ra.input, "Bundle directory")->required();
    reconstruct_cmd->add_option("--output", ra.output, "Output bundle directory")->capture_default_str();

    std::string spectrum_input;
    auto* spectrum = app.add_subcommand("spectrum", "Relative truncation error for every rank");
    spectrum->add_option("--input", spectrum_input, "Matrix file (.fkt)")->required();

    ExperimentArgs ea;
    auto* experiment = app.add_subcommand("experiment", "Run a stability grid and aggregate it");
    auto* config_opt = experiment->add_option("--config", ea.config, "Grid config (JSON)");
    auto* preset_opt =
        experiment->add_option("--preset", ea.preset, "Built-in grid")->check(CLI::IsMember({"toy", "adversarial"}));
    config_opt->excludes(preset_opt);
    experiment->add_option("--ledger", ea.ledger, "Run ledger (JSON lines); resumed when present")
        ->capture_default_str();

    BenchArgs ba;
    auto* bench = app.add_subcommand("bench", "Apply latency of dense and factorized stacks");
    bench->add_option("--width", ba.width)->capture_default_str()->check(CLI::PositiveNumber);
    bench->add_option("--layers", ba.layers)->capture_default_str()->check(CLI::PositiveNumber);
    bench->add_option("--ratio", ba.ratio, "Target params / dense params")->capture_default_str();
    bench->add_option("--blocks", ba.blocks)->capture_default_str()->check(CLI::PositiveNumber);
    bench->add_option("--warmup", ba.warmup, "Discarded runs")->capture_default_str();
    bench->add_option("--runs", ba.runs, "Measured runs")->capture_default_str();
    bench->add_option("--batch", ba.batch, "Examples per run")->capture_default_str();

    PlanArgs pa;
    auto* plan = app.add_subcommand("plan", "Print a staged factorization plan");
    plan->add_option("--layers", pa.layers, "Factorizable layers")->required()->check(CLI::PositiveNumber);
    plan->add_option("--order", pa.order)
        ->check(CLI::IsMember({"high_to_low", "low_to_high", "all_at_once"}))
        ->capture_default_str();
    plan->add_option("--steps-per-stage", pa.steps_per_stage)->capture_default_str();
    plan->add_option("--layers-per-stage", pa.layers_per_stage)->capture_default_str()->check(CLI::PositiveNumber);

    std::string manifest_path;
    auto* rerun = app.add_subcommand("rerun", "Repeat a run from its manifest");
    rerun->add_option("manifest", manifest_path, "Manifest written by an earlier run")->required();

    std::vector<char*> argv{const_cast<char*>("factorkit")};
    for (const auto& a : args) argv.push_back(const_cast<char*>(a.c_str()));
    std::string command = args.empty() ? "" : args.front();
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
        if (factorize->parsed() && rank_opt->count() == 0 && budget_opt->count() == 0)
            throw CLI::ValidationError("factorize", "exactly one of --rank and --budget is required");
        if (experiment->parsed() && config_opt->count() == 0 && preset_opt->count() == 0)
            throw CLI::ValidationError("experiment", "one of --config and --preset is required");
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::CallForVersion&) {
        out << FACTORKIT_VERSION << '\n';
        return kOk;
    } catch (const CLI::ParseError& e) {
        print_error(err, command, "usage", e.what());
        return kUsage;
    }

    const CLI::App* sub = app.get_subcommands().front();
    command = sub->get_name();

    if (sub == rerun) {
        try {
            const json m = json::parse(read_text(manifest_path));
            std::vector<std::string> again = m.at("argv").get<std::vector<std::string>>();
            const CLI::Option* out_dir = app.get_option("--out-dir");
            if (out_dir->count() > 0 || (std::getenv(kOutDirEnv) && *std::getenv(kOutDirEnv))) {
                const auto it = std::find(again.begin(), again.end(), "--out-dir");
                if (it != again.end() && it + 1 != again.end()) *(it + 1) = g.out_dir;
            }
            return run(again, out, err);
        } catch (const nlohmann::json::exception& e) {
            print_error(err, command, "format", manifest_path + ": " + e.what());
        } catch (const Error& e) {
            print_error(err, command, e.kind(), e.what());
        }
        return kFailed;
    }

    Resolved resolved;
    resolved.argv.push_back(command);
    resolve_options(*sub, resolved);
    resolve_options(app, resolved);
    const json manifest{{"command", command},
                        {"version", FACTORKIT_VERSION},
                        {"options", resolved.options},
                        {"argv", resolved.argv}};

    return run_parsed(
        command,
        [&]() -> std::string {
            std::error_code ec;
            fs::create_directories(g.out_dir, ec);
            if (ec) throw IoError("cannot create " + g.out_dir + ": " + ec.message());
            write_text(under(g, command + ".manifest.json"), manifest.dump(2) + "\n");
            if (sub == factorize) return cmd_factorize(g, fa).dump(2) + "\n";
            if (sub == reconstruct_cmd) return cmd_reconstruct(g, ra).dump(2) + "\n";
            if (sub == spectrum) return cmd_spectrum(g, spectrum_input);
            if (sub == experiment) return cmd_experiment(g, ea);
            if (sub == bench) return cmd_bench(g, ba);
            return cmd_plan(g, pa);
        },
        out, err);
}

}  // namespace factorkit::cli
