#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "factorkit/blocks.hpp"
#include "factorkit/matrix.hpp"
#include "factorkit/permutation.hpp"

namespace factorkit {

/// W ≈ U·Vᵀ with U m×r and V n×r.
struct LowRankFactors {
    DenseMatrix u;
    DenseMatrix v;

    std::size_t rank() const noexcept { return u.cols(); }
    std::size_t rows() const noexcept { return u.rows(); }
    std::size_t cols() const noexcept { return v.rows(); }
};

/// Per-block rank-r factorization: block (i, j) of W ≈ left(i, j)·right(i, j)
/// where left is b1×b2×o×r and right is b1×b2×r×p.
struct BlockLowRankFactors {
    BlockGrid grid;
    BlockTensor left;
    BlockTensor right;

    std::size_t rank() const noexcept { return left.dims()[3]; }
    std::size_t rows() const noexcept { return grid.rows(); }
    std::size_t cols() const noexcept { return grid.cols(); }
};

/// Monarch factorization M = P₁·L·P₂ᵀ·R of an m×n matrix with b blocks and rank r.
///
/// L is block diagonal with b blocks of shape o×(b·r) (o = m/b); R is block
/// diagonal with b blocks of shape (b·r)×p (p = n/b). Inside left block i,
/// column j·r + t holds the t-th left factor column of sub-block (i, j); inside
/// right block j, row t·b + i holds the t-th right factor row of sub-block
/// (i, j). With that layout:
///   - P₂ᵀ acts on the b²r intermediate rows as permute_rows(·, inner_perm),
///     inner_perm = StridePermutation(b²r, b);
///   - P₁ acts on the m output rows as permute_rows(·, row_perm),
///     row_perm = StridePermutation(m, m/b), which sends row k of block i to
///     row k·b + i.
/// so M equals P₁ applied to a block low-rank matrix whose (i, j) block is
/// Σ_t L_i[:, j·r+t]·R_j[t·b+i, :].
struct MonarchFactors {
    std::size_t blocks;
    std::vector<DenseMatrix> left_blocks;   ///< b blocks, each o×(b·r)
    std::vector<DenseMatrix> right_blocks;  ///< b blocks, each (b·r)×p
    StridePermutation row_perm;
    StridePermutation inner_perm;

    std::size_t rank() const noexcept { return left_blocks.front().cols() / blocks; }
    std::size_t block_rows() const noexcept { return left_blocks.front().rows(); }
    std::size_t block_cols() const noexcept { return right_blocks.front().cols(); }
    std::size_t rows() const noexcept { return blocks * block_rows(); }
    std::size_t cols() const noexcept { return blocks * block_cols(); }
};

/// A layer weight in any of the supported parameterizations. A bare
/// DenseMatrix is the unfactorized case.
using Factorization = std::variant<DenseMatrix, LowRankFactors, BlockLowRankFactors, MonarchFactors>;

enum class Method { dense, low_rank, block_lr, monarch };

std::string_view method_name(Method m) noexcept;
/// Accepts "dense", "low_rank", "block_lr", "monarch". Throws ArgumentError otherwise.
Method parse_method(std::string_view name);
Method method_of(const Factorization& f) noexcept;

std::size_t rows_of(const Factorization& f) noexcept;
std::size_t cols_of(const Factorization& f) noexcept;

/// Views over every stored trainable tensor, in a fixed per-variant order.
std::vector<std::span<double>> parameter_spans(Factorization& f);
std::vector<std::span<const double>> parameter_spans(const Factorization& f);

/// Same structure as `f` with every stored value set to zero (gradient buffers).
Factorization zeros_like(const Factorization& f);

}  // namespace factorkit
