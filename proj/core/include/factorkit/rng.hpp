#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>

#include "factorkit/matrix.hpp"

namespace factorkit {

/// Deterministic random source.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. The standard library distributions are implementation-defined, so
/// every derived variate is computed here instead:
///   - uniform(): top 53 bits of one engine draw, scaled to [0, 1).
///   - normal(): Marsaglia polar method on pairs of uniform() draws; the second
///     variate of each pair is cached.
///   - below(n): modulo of the raw 64-bit draw, with rejection of the biased tail.
/// Identical seeds therefore yield identical streams on every conforming platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

    std::uint64_t seed() const noexcept { return seed_; }

    std::uint64_t next_u64() { return engine_(); }
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double normal();
    double normal(double mean, double stddev) { return mean + stddev * normal(); }
    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t below(std::uint64_t n);

    DenseMatrix gaussian_matrix(std::size_t rows, std::size_t cols, double stddev = 1.0);

    /// Fisher–Yates shuffle driven by below().
    template <class T>
    void shuffle(std::span<T> items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

    /// Independent child stream, derived from this seed and a tag via splitmix64.
    static Rng derive(std::uint64_t seed, std::uint64_t tag);

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace factorkit
