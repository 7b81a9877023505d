#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "factorkit/blocks.hpp"
#include "factorkit/factors.hpp"
#include "factorkit/matrix.hpp"

namespace factorkit {

inline constexpr std::size_t kDefaultBlocks = 4;

/// Truncated-SVD projection onto rank r. Requires 1 ≤ r ≤ min(m, n).
LowRankFactors low_rank_project(const DenseMatrix& w, std::size_t rank);

/// Independent truncated SVD of each block. Requires r ≤ min(o, p).
BlockLowRankFactors block_lr_project(const DenseMatrix& w, const BlockGrid& grid,
                                     std::size_t rank);

/// Monarch projection: rows of w are stride-permuted so that block i of the
/// permuted matrix collects rows i, i+b, i+2b, ...; the permuted matrix is
/// projected block-wise with block_lr_project on a b×b grid and the 4-D
/// factors are repacked into block-diagonal L and R. Requires b | m, b | n
/// and r ≤ min(m/b, n/b).
MonarchFactors monarch_project(const DenseMatrix& w, std::size_t blocks, std::size_t rank);

/// Rows of w reordered as seen by the Monarch block grid (P₁ᵀ·w).
DenseMatrix monarch_permute(const DenseMatrix& w, std::size_t blocks);
/// Inverse of monarch_permute (P₁·x).
DenseMatrix monarch_unpermute(const DenseMatrix& x, std::size_t blocks);

/// Dispatches to the projection for `method`; block methods use a b×b grid.
/// Method::dense returns w unchanged.
Factorization project(const DenseMatrix& w, Method method, std::size_t rank,
                      std::size_t blocks = kDefaultBlocks);

DenseMatrix reconstruct(const Factorization& f);
DenseMatrix reconstruct(const LowRankFactors& f);
DenseMatrix reconstruct(const BlockLowRankFactors& f);
DenseMatrix reconstruct(const MonarchFactors& f);

/// Y = W·X for a batch of column vectors X (n×batch) without forming W.
DenseMatrix apply(const Factorization& f, const DenseMatrix& x);

std::size_t param_count(const Factorization& f);

/// Largest admissible rank for `method` on an m×n matrix with b blocks.
/// Throws ArgumentError if b does not divide both dimensions.
std::size_t max_rank(Method method, std::size_t m, std::size_t n,
                     std::size_t blocks = kDefaultBlocks);

/// Parameter count of `method` at (rank, blocks) on an m×n matrix.
std::size_t factorized_params(Method method, std::size_t m, std::size_t n, std::size_t rank,
                              std::size_t blocks = kDefaultBlocks);

struct RankSolution {
    Method method = Method::low_rank;
    std::size_t rank = 0;
    std::size_t blocks = 1;
    std::size_t params = 0;        ///< achieved factorized parameter count
    std::size_t dense_params = 0;  ///< Σ m·n
    double ratio = 0.0;            ///< params / dense_params
};

/// Largest uniform rank whose total parameter count over `shapes` fits in
/// `budget`, capped at the smallest per-layer maximum rank. Weight matrices
/// only; biases are not counted. Throws InfeasibleError when rank 1 already
/// exceeds the budget and ArgumentError for Method::dense or bad block counts.
RankSolution solve_rank(Method method,
                        const std::vector<std::pair<std::size_t, std::size_t>>& shapes,
                        std::size_t budget, std::size_t blocks = kDefaultBlocks);

}  // namespace factorkit
