#include "factorkit/bench.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>

#include "json.hpp"

#include "factorkit/errors.hpp"

namespace factorkit {

namespace {

constexpr std::uint64_t kInputTag = 0x696e707574;
constexpr std::uint64_t kStackTag = 0x737461636b;

void fill(std::span<double> values, Rng& rng, double stddev) {
    for (double& v : values) v = rng.normal(0.0, stddev);
}

std::size_t params_of(std::span<const Factorization> layers) {
    std::size_t total = 0;
    for (const auto& f : layers) total += param_count(f);
    return total;
}

template <class Fn>
BenchResult time_runs(const BenchConfig& config, Fn&& body) {
    validate(config);
    std::vector<double> samples;
    volatile double sink = 0.0;
    for (std::size_t run = 0; run < config.warmup_runs + config.measured_runs; ++run) {
        const auto start = std::chrono::steady_clock::now();
        const DenseMatrix y = body();
        const auto stop = std::chrono::steady_clock::now();
        sink = sink + y(0, 0);
        if (run >= config.warmup_runs)
            samples.push_back(std::chrono::duration<double, std::milli>(stop - start).count());
    }
    return summarize_samples(std::move(samples));
}

}  // namespace

void validate(const BenchConfig& c) {
    if (c.warmup_runs < 1) throw ArgumentError("bench: warmup_runs must be at least 1");
    if (c.measured_runs < 3) throw ArgumentError("bench: measured_runs must be at least 3");
    if (c.batch < 1) throw ArgumentError("bench: batch must be at least 1");
}

BenchResult summarize_samples(std::vector<double> samples) {
    if (samples.empty()) throw ArgumentError("bench: no samples");
    BenchResult r;
    double sum = 0.0;
    for (double s : samples) sum += s;
    r.mean_ms = sum / static_cast<double>(samples.size());
    double sq = 0.0;
    for (double s : samples) sq += (s - r.mean_ms) * (s - r.mean_ms);
    r.std_ms = std::sqrt(sq / static_cast<double>(samples.size()));
    r.samples_ms = std::move(samples);
    return r;
}

Factorization random_factorization(Method method, std::size_t m, std::size_t n, std::size_t rank,
                                   std::size_t blocks, Rng& rng) {
    const double stddev = 1.0 / std::sqrt(static_cast<double>(n));
    auto shaped = [&]() -> Factorization {
        if (method == Method::dense) return DenseMatrix(m, n);
        if (method == Method::low_rank) {
            if (rank == 0 || rank > std::min(m, n)) throw ArgumentError("random_factorization: bad rank");
            return LowRankFactors{DenseMatrix(m, rank), DenseMatrix(n, rank)};
        }
        const BlockGrid g = BlockGrid::square(m, n, blocks);
        if (rank == 0 || rank > std::min(g.o, g.p)) throw ArgumentError("random_factorization: bad rank");
        if (method == Method::block_lr)
            return BlockLowRankFactors{g, BlockTensor(blocks, blocks, g.o, rank),
                                       BlockTensor(blocks, blocks, rank, g.p)};
        return MonarchFactors{blocks,
                              std::vector<DenseMatrix>(blocks, DenseMatrix(g.o, blocks * rank)),
                              std::vector<DenseMatrix>(blocks, DenseMatrix(blocks * rank, g.p)),
                              StridePermutation(m, g.o),
                              StridePermutation(blocks * blocks * rank, blocks)};
    };
    Factorization f = shaped();
    for (auto span : parameter_spans(f)) fill(span, rng, stddev);
    return f;
}

std::size_t apply_flops(const Factorization& f) {
    const std::size_t m = rows_of(f), n = cols_of(f);
    if (std::holds_alternative<DenseMatrix>(f)) return m * n;
    if (const auto* lr = std::get_if<LowRankFactors>(&f)) return lr->rank() * (m + n);
    if (const auto* bl = std::get_if<BlockLowRankFactors>(&f))
        return bl->grid.b1 * bl->grid.b2 * bl->rank() * (bl->grid.o + bl->grid.p);
    const auto& mf = std::get<MonarchFactors>(f);
    return mf.blocks * mf.blocks * mf.rank() * (mf.block_rows() + mf.block_cols());
}

BenchResult bench_apply(const Factorization& f, const BenchConfig& config) {
    return bench_stack(std::span<const Factorization>(&f, 1), config);
}

BenchResult bench_stack(std::span<const Factorization> layers, const BenchConfig& config) {
    validate(config);
    if (layers.empty()) throw ArgumentError("bench_stack: no layers");
    for (std::size_t l = 1; l < layers.size(); ++l)
        if (cols_of(layers[l]) != rows_of(layers[l - 1]))
            throw ShapeError("bench_stack: layer " + std::to_string(l) + " does not take the previous output");
    Rng rng = Rng::derive(config.seed, kInputTag);
    const DenseMatrix x = rng.gaussian_matrix(cols_of(layers.front()), config.batch);
    return time_runs(config, [&] {
        DenseMatrix y = factorkit::apply(layers.front(), x);
        for (std::size_t l = 1; l < layers.size(); ++l) y = factorkit::apply(layers[l], y);
        return y;
    });
}

std::vector<BenchCase> cases_at_ratio(std::size_t width, std::size_t layers, double ratio, std::size_t blocks) {
    if (!(ratio > 0.0 && ratio <= 1.0)) throw ArgumentError("cases_at_ratio: ratio must be in (0, 1]");
    const std::vector<std::pair<std::size_t, std::size_t>> shapes(layers, {width, width});
    const auto budget = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(layers * width * width)));
    const std::size_t rank = solve_rank(Method::block_lr, shapes, budget, blocks).rank;
    return {{Method::dense, width, layers, 0, 1},
            {Method::low_rank, width, layers, blocks * rank, 1},
            {Method::block_lr, width, layers, rank, blocks},
            {Method::monarch, width, layers, rank, blocks}};
}

std::vector<BenchRow> run_bench(std::span<const BenchCase> cases, const BenchConfig& config) {
    validate(config);
    std::vector<BenchRow> rows;
    for (const BenchCase& c : cases) {
        if (c.layers == 0 || c.width == 0) throw ArgumentError("run_bench: empty stack");
        Rng rng = Rng::derive(config.seed, kStackTag);
        std::vector<Factorization> stack;
        for (std::size_t l = 0; l < c.layers; ++l)
            stack.push_back(random_factorization(c.method, c.width, c.width, c.rank, c.blocks, rng));
        BenchRow row{c, params_of(stack), 0.0, 0, {}};
        row.ratio = static_cast<double>(row.params) / static_cast<double>(c.layers * c.width * c.width);
        for (const auto& f : stack) row.flops += apply_flops(f);
        row.result = bench_stack(stack, config);
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string bench_to_csv(std::span<const BenchRow> rows) {
    std::string out = "method,params,mean_ms,std_ms\n";
    char buf[96];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, ",%zu,%.6f,%.6f\n", r.params, r.result.mean_ms, r.result.std_ms);
        out += std::string(method_name(r.spec.method)) + buf;
    }
    return out;
}

std::string bench_to_json(std::span<const BenchRow> rows, const BenchConfig& config) {
    nlohmann::ordered_json j;
    j["config"] = {{"warmup_runs", config.warmup_runs},
                   {"measured_runs", config.measured_runs},
                   {"batch", config.batch},
                   {"seed", config.seed}};
    j["rows"] = nlohmann::ordered_json::array();
    for (const auto& r : rows)
        j["rows"].push_back({{"method", method_name(r.spec.method)},
                             {"width", r.spec.width},
                             {"layers", r.spec.layers},
                             {"rank", r.spec.rank},
                             {"blocks", r.spec.blocks},
                             {"params", r.params},
                             {"ratio", r.ratio},
                             {"flops", r.flops},
                             {"mean_ms", r.result.mean_ms},
                             {"std_ms", r.result.std_ms},
                             {"samples_ms", r.result.samples_ms}});
    return j.dump(2);
}

}  // namespace factorkit
