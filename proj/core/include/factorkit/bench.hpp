#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "factorkit/factorize.hpp"
#include "factorkit/rng.hpp"

namespace factorkit {

struct BenchConfig {
    std::size_t warmup_runs = 2;    ///< timed but discarded
    std::size_t measured_runs = 8;
    std::size_t batch = 100;        ///< examples per run
    std::uint64_t seed = 1;         ///< input data
};

/// warmup_runs >= 1, measured_runs >= 3, batch >= 1. Throws ArgumentError.
void validate(const BenchConfig& config);

struct BenchResult {
    double mean_ms = 0.0;
    double std_ms = 0.0;  ///< population standard deviation
    std::vector<double> samples_ms;
};

/// Mean and population std of measured samples. Throws ArgumentError when empty.
BenchResult summarize_samples(std::vector<double> samples_ms);

/// Factors of the given structure filled with N(0, 1/n) entries; no SVD involved.
Factorization random_factorization(Method method, std::size_t m, std::size_t n, std::size_t rank,
                                   std::size_t blocks, Rng& rng);

/// Multiply-adds per example of apply().
std::size_t apply_flops(const Factorization& f);

/// Wall-clock time of apply(f, X) for a fixed random batch X.
BenchResult bench_apply(const Factorization& f, const BenchConfig& config);
/// Same for a stack applied layer after layer. Throws ShapeError on mismatched layers.
BenchResult bench_stack(std::span<const Factorization> layers, const BenchConfig& config);

/// `layers` square width×width layers of one method at a fixed rank.
struct BenchCase {
    Method method = Method::dense;
    std::size_t width = 768;
    std::size_t layers = 4;
    std::size_t rank = 0;  ///< ignored for dense
    std::size_t blocks = kDefaultBlocks;
};

/// Dense plus the three factorized methods at equal parameter counts: block LR
/// and Monarch take the largest rank r within `ratio` of the dense count and
/// low-rank takes rank blocks·r, so all three also do the same multiply-adds.
std::vector<BenchCase> cases_at_ratio(std::size_t width, std::size_t layers, double ratio,
                                      std::size_t blocks = kDefaultBlocks);

struct BenchRow {
    BenchCase spec;
    std::size_t params = 0;
    double ratio = 0.0;        ///< params / dense params
    std::size_t flops = 0;     ///< multiply-adds per example over the stack
    BenchResult result;
};

/// Benchmarks each case in turn; stacks are drawn from config.seed.
std::vector<BenchRow> run_bench(std::span<const BenchCase> cases, const BenchConfig& config);

/// "method,params,mean_ms,std_ms"
std::string bench_to_csv(std::span<const BenchRow> rows);
/// Rows with ranks, ratios and raw samples.
std::string bench_to_json(std::span<const BenchRow> rows, const BenchConfig& config);

}  // namespace factorkit
