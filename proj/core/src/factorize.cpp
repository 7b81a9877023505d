#include "factorkit/factorize.hpp"

#include <algorithm>
#include <limits>
#include <string>
#include <type_traits>

#include "factorkit/errors.hpp"
#include "factorkit/svd.hpp"
#include "gemm.hpp"

namespace factorkit {

namespace {

std::string dims(std::size_t m, std::size_t n) {
    return std::to_string(m) + "x" + std::to_string(n);
}

void check_rank(std::size_t rank, std::size_t limit, const char* what) {
    if (rank < 1 || rank > limit)
        throw ArgumentError(std::string(what) + ": rank " + std::to_string(rank) +
                            " outside [1, " + std::to_string(limit) + "]");
}

void check_blocks(std::size_t m, std::size_t n, std::size_t blocks) {
    if (blocks == 0 || m % blocks != 0 || n % blocks != 0)
        throw ArgumentError("block count " + std::to_string(blocks) + " does not divide " +
                            dims(m, n));
}

// Block (i, j) of the Monarch-permuted matrix:
//   out[k][l] = Σ_t left_blocks[i](k, j·r + t) · right_blocks[j](t·b + i, l),
// t ascending from 0.0. The arithmetic matches the block low-rank reconstruction
// of the same factors term for term.
void monarch_block(const MonarchFactors& f, std::size_t i, std::size_t j, DenseMatrix& out) {
    const std::size_t b = f.blocks;
    const std::size_t r = f.rank();
    const std::size_t o = f.block_rows();
    const std::size_t p = f.block_cols();
    const DenseMatrix& left = f.left_blocks[i];
    const DenseMatrix& right = f.right_blocks[j];
    for (std::size_t k = 0; k < o; ++k) {
        double* dst = out.row(i * o + k).data() + j * p;
        for (std::size_t t = 0; t < r; ++t) {
            const double a = left(k, j * r + t);
            const double* src = right.row(t * b + i).data();
            for (std::size_t l = 0; l < p; ++l) dst[l] += a * src[l];
        }
    }
}

}  // namespace

LowRankFactors low_rank_project(const DenseMatrix& w, std::size_t rank) {
    check_rank(rank, std::min(w.rows(), w.cols()), "low_rank_project");
    return truncate(svd(w), rank);
}

BlockLowRankFactors block_lr_project(const DenseMatrix& w, const BlockGrid& grid,
                                     std::size_t rank) {
    grid.check_shape(w.rows(), w.cols());
    check_rank(rank, std::min(grid.o, grid.p), "block_lr_project");
    BlockLowRankFactors f{grid, BlockTensor(grid.b1, grid.b2, grid.o, rank),
                          BlockTensor(grid.b1, grid.b2, rank, grid.p)};
    // Blocks are disjoint, so the order of the b1·b2 SVDs does not affect the result.
    for (std::size_t i = 0; i < grid.b1; ++i)
        for (std::size_t j = 0; j < grid.b2; ++j) {
            const LowRankFactors lr = truncate(svd(extract_block(w, grid, i, j)), rank);
            f.left.set_slice(i, j, lr.u);
            for (std::size_t t = 0; t < rank; ++t)
                for (std::size_t l = 0; l < grid.p; ++l) f.right(i, j, t, l) = lr.v(l, t);
        }
    return f;
}

DenseMatrix monarch_permute(const DenseMatrix& w, std::size_t blocks) {
    check_blocks(w.rows(), blocks, blocks);
    return permute_rows(w, StridePermutation(w.rows(), blocks));
}

DenseMatrix monarch_unpermute(const DenseMatrix& x, std::size_t blocks) {
    check_blocks(x.rows(), blocks, blocks);
    return permute_rows(x, StridePermutation(x.rows(), x.rows() / blocks));
}

MonarchFactors monarch_project(const DenseMatrix& w, std::size_t blocks, std::size_t rank) {
    const std::size_t m = w.rows();
    const std::size_t n = w.cols();
    check_blocks(m, n, blocks);
    const std::size_t b = blocks;
    const std::size_t o = m / b;
    const std::size_t p = n / b;
    check_rank(rank, std::min(o, p), "monarch_project");

    const BlockLowRankFactors blr =
        block_lr_project(monarch_permute(w, b), BlockGrid::square(m, n, b), rank);

    MonarchFactors f{b,
                     std::vector<DenseMatrix>(b, DenseMatrix(o, b * rank)),
                     std::vector<DenseMatrix>(b, DenseMatrix(b * rank, p)),
                     StridePermutation(m, o),
                     StridePermutation(b * b * rank, b)};
    for (std::size_t i = 0; i < b; ++i)
        for (std::size_t j = 0; j < b; ++j)
            for (std::size_t t = 0; t < rank; ++t) {
                for (std::size_t k = 0; k < o; ++k) f.left_blocks[i](k, j * rank + t) = blr.left(i, j, k, t);
                for (std::size_t l = 0; l < p; ++l) f.right_blocks[j](t * b + i, l) = blr.right(i, j, t, l);
            }
    return f;
}

Factorization project(const DenseMatrix& w, Method method, std::size_t rank, std::size_t blocks) {
    switch (method) {
        case Method::dense: return w;
        case Method::low_rank: return low_rank_project(w, rank);
        case Method::block_lr:
            return block_lr_project(w, BlockGrid::square(w.rows(), w.cols(), blocks), rank);
        case Method::monarch: return monarch_project(w, blocks, rank);
    }
    throw ArgumentError("project: unknown method");
}

DenseMatrix reconstruct(const LowRankFactors& f) { return matmul_nt(f.u, f.v); }

DenseMatrix reconstruct(const BlockLowRankFactors& f) {
    const BlockGrid& g = f.grid;
    const std::size_t r = f.rank();
    DenseMatrix w(g.rows(), g.cols());
    for (std::size_t i = 0; i < g.b1; ++i)
        for (std::size_t j = 0; j < g.b2; ++j)
            detail::gemm_accumulate(g.o, r, g.p, f.left.slice(i, j).data(), r,
                                    f.right.slice(i, j).data(), g.p,
                                    w.row(i * g.o).data() + j * g.p, w.cols());
    return w;
}

DenseMatrix reconstruct(const MonarchFactors& f) {
    DenseMatrix x(f.rows(), f.cols());
    for (std::size_t i = 0; i < f.blocks; ++i)
        for (std::size_t j = 0; j < f.blocks; ++j) monarch_block(f, i, j, x);
    return permute_rows(x, f.row_perm);
}

DenseMatrix reconstruct(const Factorization& f) {
    return std::visit(
        [](const auto& x) -> DenseMatrix {
            if constexpr (std::is_same_v<std::remove_cvref_t<decltype(x)>, DenseMatrix>)
                return x;
            else
                return reconstruct(x);
        },
        f);
}

DenseMatrix apply(const Factorization& f, const DenseMatrix& x) {
    const std::size_t n = cols_of(f);
    if (x.rows() != n)
        throw ShapeError("apply: input has " + std::to_string(x.rows()) + " rows, layer expects " +
                         std::to_string(n));
    const std::size_t batch = x.cols();

    if (const auto* w = std::get_if<DenseMatrix>(&f)) return matmul(*w, x);

    if (const auto* lr = std::get_if<LowRankFactors>(&f)) return matmul(lr->u, matmul_tn(lr->v, x));

    if (const auto* bl = std::get_if<BlockLowRankFactors>(&f)) {
        const BlockGrid& g = bl->grid;
        const std::size_t r = bl->rank();
        DenseMatrix y(g.rows(), batch);
        std::vector<double> t(r * batch);
        for (std::size_t i = 0; i < g.b1; ++i)
            for (std::size_t j = 0; j < g.b2; ++j) {
                std::fill(t.begin(), t.end(), 0.0);
                detail::gemm_accumulate(r, g.p, batch, bl->right.slice(i, j).data(), g.p,
                                        x.row(j * g.p).data(), batch, t.data(), batch);
                detail::gemm_accumulate(g.o, r, batch, bl->left.slice(i, j).data(), r, t.data(),
                                        batch, y.row(i * g.o).data(), batch);
            }
        return y;
    }

    const auto& mf = std::get<MonarchFactors>(f);
    const std::size_t b = mf.blocks;
    const std::size_t inner = b * mf.rank();
    const std::size_t o = mf.block_rows();
    const std::size_t p = mf.block_cols();
    // z = R·x, block-diagonal
    DenseMatrix z(b * inner, batch);
    for (std::size_t j = 0; j < b; ++j)
        detail::gemm_accumulate(inner, p, batch, mf.right_blocks[j].data().data(), p,
                                x.row(j * p).data(), batch, z.row(j * inner).data(), batch);
    // P₂ᵀ·z, then L·(P₂ᵀ·z), block-diagonal
    const DenseMatrix zp = permute_rows(z, mf.inner_perm);
    DenseMatrix h(mf.rows(), batch);
    for (std::size_t i = 0; i < b; ++i)
        detail::gemm_accumulate(o, inner, batch, mf.left_blocks[i].data().data(), inner,
                                zp.row(i * inner).data(), batch, h.row(i * o).data(), batch);
    return permute_rows(h, mf.row_perm);
}

std::size_t param_count(const Factorization& f) {
    std::size_t total = 0;
    for (auto span : parameter_spans(f)) total += span.size();
    return total;
}

std::size_t max_rank(Method method, std::size_t m, std::size_t n, std::size_t blocks) {
    switch (method) {
        case Method::dense:
        case Method::low_rank: return std::min(m, n);
        case Method::block_lr:
        case Method::monarch:
            check_blocks(m, n, blocks);
            return std::min(m / blocks, n / blocks);
    }
    return 0;
}

std::size_t factorized_params(Method method, std::size_t m, std::size_t n, std::size_t rank,
                              std::size_t blocks) {
    switch (method) {
        case Method::dense: return m * n;
        case Method::low_rank: return rank * (m + n);
        case Method::block_lr:
        case Method::monarch: return blocks * rank * (m + n);
    }
    return 0;
}

RankSolution solve_rank(Method method,
                        const std::vector<std::pair<std::size_t, std::size_t>>& shapes,
                        std::size_t budget, std::size_t blocks) {
    if (method == Method::dense) throw ArgumentError("solve_rank: dense has no rank");
    if (shapes.empty()) throw ArgumentError("solve_rank: no layer shapes given");
    const std::size_t b = method == Method::low_rank ? 1 : blocks;

    std::size_t per_rank = 0;
    std::size_t dense = 0;
    std::size_t cap = std::numeric_limits<std::size_t>::max();
    for (const auto& [m, n] : shapes) {
        per_rank += factorized_params(method, m, n, 1, b);
        dense += m * n;
        cap = std::min(cap, max_rank(method, m, n, b));
    }
    if (budget < per_rank)
        throw InfeasibleError("solve_rank: budget " + std::to_string(budget) +
                              " is below the rank-1 cost " + std::to_string(per_rank));

    RankSolution sol;
    sol.method = method;
    sol.blocks = b;
    sol.rank = std::min(cap, budget / per_rank);
    sol.params = sol.rank * per_rank;
    sol.dense_params = dense;
    sol.ratio = static_cast<double>(sol.params) / static_cast<double>(dense);
    return sol;
}

}  // namespace factorkit
