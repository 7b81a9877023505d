#include "factorkit/factors.hpp"

#include <algorithm>
#include <string>
#include <type_traits>

#include "factorkit/errors.hpp"

namespace factorkit {

namespace {

template <class Span, class F>
std::vector<Span> collect_spans(F& f) {
    return std::visit(
        [](auto& x) -> std::vector<Span> {
            using T = std::remove_cvref_t<decltype(x)>;
            if constexpr (std::is_same_v<T, DenseMatrix>) {
                return {x.data()};
            } else if constexpr (std::is_same_v<T, LowRankFactors>) {
                return {x.u.data(), x.v.data()};
            } else if constexpr (std::is_same_v<T, BlockLowRankFactors>) {
                return {x.left.data(), x.right.data()};
            } else {
                std::vector<Span> out;
                for (auto& b : x.left_blocks) out.push_back(b.data());
                for (auto& b : x.right_blocks) out.push_back(b.data());
                return out;
            }
        },
        f);
}

}  // namespace

std::string_view method_name(Method m) noexcept {
    switch (m) {
        case Method::dense: return "dense";
        case Method::low_rank: return "low_rank";
        case Method::block_lr: return "block_lr";
        case Method::monarch: return "monarch";
    }
    return "unknown";
}

Method parse_method(std::string_view name) {
    for (Method m : {Method::dense, Method::low_rank, Method::block_lr, Method::monarch})
        if (method_name(m) == name) return m;
    throw ArgumentError("unknown factorization method '" + std::string(name) +
                        "' (expected dense|low_rank|block_lr|monarch)");
}

Method method_of(const Factorization& f) noexcept {
    return static_cast<Method>(f.index());
}

std::size_t rows_of(const Factorization& f) noexcept {
    return std::visit([](const auto& x) { return x.rows(); }, f);
}

std::size_t cols_of(const Factorization& f) noexcept {
    return std::visit([](const auto& x) { return x.cols(); }, f);
}

std::vector<std::span<double>> parameter_spans(Factorization& f) {
    return collect_spans<std::span<double>>(f);
}

std::vector<std::span<const double>> parameter_spans(const Factorization& f) {
    return collect_spans<std::span<const double>>(f);
}

Factorization zeros_like(const Factorization& f) {
    Factorization z = f;
    for (auto span : parameter_spans(z)) std::fill(span.begin(), span.end(), 0.0);
    return z;
}

}  // namespace factorkit
