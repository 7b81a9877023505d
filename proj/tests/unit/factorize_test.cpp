#include <gtest/gtest.h>

#include <cmath>

#include "factorkit/errors.hpp"
#include "factorkit/factorize.hpp"
#include "factorkit/rng.hpp"
#include "factorkit/svd.hpp"
#include "oracles.hpp"

namespace factorkit {
namespace {

DenseMatrix diag3() {
    const double d[] = {3.0, 2.0, 1.0};
    return DenseMatrix::diagonal(d);
}

double rel_error(const DenseMatrix& a, const DenseMatrix& b) {
    return frobenius_distance(a, b) / std::max(1e-300, frobenius_norm(b));
}

TEST(LowRankProject, DiagonalRankTwo) {
    const auto f = low_rank_project(diag3(), 2);
    EXPECT_NEAR(frobenius_distance(reconstruct(f), diag3()), 1.0, 1e-12);
}

TEST(LowRankProject, FullRankIsExactAndMatchesTruncate) {
    Rng rng(201);
    const DenseMatrix w = rng.gaussian_matrix(9, 6);
    const auto f = low_rank_project(w, 6);
    EXPECT_LE(frobenius_distance(reconstruct(f), w), 1e-9 * frobenius_norm(w));
    const auto g = truncate(svd(w), 6);
    EXPECT_EQ(f.u, g.u);
    EXPECT_EQ(f.v, g.v);
}

TEST(LowRankProject, BeatsRandomRankFourCandidates) {
    Rng rng(202);
    const DenseMatrix w = rng.gaussian_matrix(12, 8);
    const double best = frobenius_distance(reconstruct(low_rank_project(w, 4)), w);
    for (int c = 0; c < 200; ++c)
        ASSERT_LT(best, frobenius_distance(oracle::random_rank(rng, 12, 8, 4), w));
}

TEST(LowRankProject, RankOutOfRange) {
    EXPECT_THROW(low_rank_project(diag3(), 0), ArgumentError);
    EXPECT_THROW(low_rank_project(diag3(), 4), ArgumentError);
}

TEST(BlockLrProject, SingleBlockIsLowRankBitExact) {
    Rng rng(203);
    const DenseMatrix w = rng.gaussian_matrix(10, 7);
    const auto blr = block_lr_project(w, BlockGrid{1, 1, 10, 7}, 3);
    const auto lr = low_rank_project(w, 3);
    EXPECT_EQ(reconstruct(blr), reconstruct(lr));
}

TEST(BlockLrProject, BlockDiagonalRankOneIsExact) {
    Rng rng(204);
    std::vector<DenseMatrix> blocks;
    for (int i = 0; i < 3; ++i) blocks.push_back(oracle::random_rank(rng, 4, 4, 1));
    const DenseMatrix w = oracle::block_diagonal(blocks);
    const auto f = block_lr_project(w, BlockGrid::square(12, 12, 3), 1);
    EXPECT_LE(frobenius_distance(reconstruct(f), w), 1e-12 * frobenius_norm(w));
}

TEST(BlockLrProject, PerBlockErrorsMatchStandaloneSvd) {
    Rng rng(205);
    const DenseMatrix w = rng.gaussian_matrix(8, 8);
    const BlockGrid grid{2, 2, 4, 4};
    const DenseMatrix approx = reconstruct(block_lr_project(w, grid, 2));
    double total2 = 0.0;
    for (std::size_t i = 0; i < 2; ++i)
        for (std::size_t j = 0; j < 2; ++j) {
            const DenseMatrix wb = extract_block(w, grid, i, j);
            const double err = frobenius_distance(extract_block(approx, grid, i, j), wb);
            const double expected = oracle::tail(oracle::singular_values(wb), 2);
            EXPECT_NEAR(err, expected, 1e-9 * std::max(1.0, expected));
            total2 += expected * expected;
        }
    EXPECT_NEAR(frobenius_distance(approx, w), std::sqrt(total2), 1e-9);
}

TEST(BlockLrProject, RectangularBlocksSquareGrid) {
    Rng rng(206);
    const DenseMatrix w = rng.gaussian_matrix(12, 8);
    const auto f = block_lr_project(w, BlockGrid::square(12, 8, 4), 2);
    EXPECT_EQ(f.grid.o, 3u);
    EXPECT_EQ(f.grid.p, 2u);
    EXPECT_LE(frobenius_distance(reconstruct(f), w), 1e-9 * frobenius_norm(w));
}

TEST(BlockLrProject, RankAboveBlockSizeRejected) {
    Rng rng(207);
    EXPECT_THROW(block_lr_project(rng.gaussian_matrix(8, 8), BlockGrid{2, 2, 4, 4}, 5),
                 ArgumentError);
    EXPECT_THROW(block_lr_project(rng.gaussian_matrix(8, 8), BlockGrid{2, 2, 4, 3}, 1),
                 ShapeError);
}

TEST(MonarchProject, SingleBlockMatchesLowRank) {
    Rng rng(208);
    const DenseMatrix w = rng.gaussian_matrix(9, 6);
    const auto mf = monarch_project(w, 1, 2);
    EXPECT_TRUE(mf.row_perm.is_identity());
    EXPECT_TRUE(mf.inner_perm.is_identity());
    EXPECT_LE(max_abs_difference(reconstruct(mf), reconstruct(low_rank_project(w, 2))), 1e-12);
}

TEST(MonarchProject, FourByFourExampleStructure) {
    const DenseMatrix w{{1, 2, 3, 4}, {5, 6, 7, 8}, {9, 10, 11, 12}, {13, 14, 15, 16}};
    const auto mf = monarch_project(w, 2, 1);
    // Rows 0 and 2 form the first block row of the permuted matrix, rows 1 and 3 the second.
    const DenseMatrix permuted = monarch_permute(w, 2);
    EXPECT_EQ(permuted, (DenseMatrix{{1, 2, 3, 4}, {9, 10, 11, 12}, {5, 6, 7, 8}, {13, 14, 15, 16}}));
    const DenseMatrix via_blocks =
        monarch_unpermute(reconstruct(block_lr_project(permuted, BlockGrid::square(4, 4, 2), 1)), 2);
    EXPECT_EQ(reconstruct(mf), via_blocks);
    // Each 2×2 block of the permuted matrix has rank ≤ 2, so rank 1 leaves a residual.
    EXPECT_GT(frobenius_distance(reconstruct(mf), w), 0.0);
    EXPECT_EQ(reconstruct(monarch_project(w, 2, 2)), monarch_unpermute(reconstruct(
        block_lr_project(permuted, BlockGrid::square(4, 4, 2), 2)), 2));
}

TEST(MonarchProject, IdentityWithPermutedBlockLowRankExact) {
    Rng rng(209);
    for (auto [m, n] : {std::pair<std::size_t, std::size_t>{8, 8}, {24, 16}, {16, 24}, {12, 8}})
        for (std::size_t b : {1u, 2u, 4u})
            for (std::size_t r : {1u, 2u}) {
                const DenseMatrix w = rng.gaussian_matrix(m, n);
                const DenseMatrix lhs = reconstruct(monarch_project(w, b, r));
                const DenseMatrix rhs = monarch_unpermute(
                    reconstruct(block_lr_project(monarch_permute(w, b), BlockGrid::square(m, n, b), r)), b);
                ASSERT_EQ(lhs, rhs) << m << "x" << n << " b=" << b << " r=" << r;
            }
}

TEST(MonarchProject, MatchesExplicitPermutationMatrixOracle) {
    Rng rng(210);
    for (auto [m, n, b, r] : {std::array<std::size_t, 4>{8, 8, 2, 2}, {12, 8, 2, 2}, {16, 16, 4, 1},
                              {9, 9, 3, 1}, {16, 16, 4, 4}}) {
        const auto mf = monarch_project(rng.gaussian_matrix(m, n), b, r);
        EXPECT_LE(max_abs_difference(reconstruct(mf), oracle::monarch_dense(mf)), 1e-12)
            << m << "x" << n << " b=" << b << " r=" << r;
    }
}

TEST(MonarchProject, ClassicShapeHasEqualPermutations) {
    Rng rng(211);
    const auto mf = monarch_project(rng.gaussian_matrix(16, 16), 4, 1);
    EXPECT_EQ(mf.row_perm.table(), mf.inner_perm.table());
    EXPECT_EQ(mf.left_blocks[0].rows(), 4u);
    EXPECT_EQ(mf.left_blocks[0].cols(), 4u);
}

TEST(MonarchProject, FactoredMatvecMatchesDense) {
    Rng rng(212);
    const Factorization f = monarch_project(rng.gaussian_matrix(12, 8), 2, 2);
    const DenseMatrix dense = reconstruct(f);
    for (int trial = 0; trial < 50; ++trial) {
        const DenseMatrix x = rng.gaussian_matrix(8, 1);
        const DenseMatrix y = matmul(dense, x);
        ASSERT_LE(frobenius_distance(factorkit::apply(f, x), y), 1e-10 * std::max(1.0, frobenius_norm(y)));
    }
}

TEST(MonarchProject, BlockCountMustDivide) {
    Rng rng(213);
    EXPECT_THROW(monarch_project(rng.gaussian_matrix(10, 10), 3, 1), ArgumentError);
    EXPECT_THROW(monarch_project(rng.gaussian_matrix(8, 8), 2, 5), ArgumentError);
}

TEST(Reconstruct, DenseIsIdentity) {
    Rng rng(214);
    const DenseMatrix w = rng.gaussian_matrix(3, 4);
    EXPECT_EQ(reconstruct(Factorization{w}), w);
}

TEST(Reconstruct, FullRankDiagonal) {
    EXPECT_LE(max_abs_difference(reconstruct(low_rank_project(diag3(), 3)), diag3()), 1e-9);
}

TEST(Apply, AllVariantsAgreeWithReconstruction) {
    Rng rng(215);
    const DenseMatrix w = rng.gaussian_matrix(24, 16);
    const DenseMatrix x = rng.gaussian_matrix(16, 7);
    for (Method m : {Method::dense, Method::low_rank, Method::block_lr, Method::monarch}) {
        const Factorization f = project(w, m, 2, 4);
        const DenseMatrix expected = matmul(reconstruct(f), x);
        EXPECT_LE(rel_error(factorkit::apply(f, x), expected), 1e-10) << method_name(m);
    }
}

TEST(Apply, DenseIsMatmul) {
    Rng rng(216);
    const DenseMatrix w = rng.gaussian_matrix(5, 4);
    const DenseMatrix x = rng.gaussian_matrix(4, 3);
    EXPECT_EQ(factorkit::apply(Factorization{w}, x), matmul(w, x));
}

TEST(Apply, RankOneOuterProduct) {
    const DenseMatrix u{{1}, {2}, {3}};
    const DenseMatrix v{{4}, {-1}};
    const Factorization f = LowRankFactors{u, v};
    const DenseMatrix x{{1, 0}, {2, 1}};
    EXPECT_EQ(factorkit::apply(f, x), matmul(u, matmul_tn(v, x)));
    EXPECT_EQ(factorkit::apply(f, x), (DenseMatrix{{2, -1}, {4, -2}, {6, -3}}));
}

TEST(Apply, ShapeMismatch) {
    const Factorization f = DenseMatrix(3, 4);
    EXPECT_THROW(factorkit::apply(f, DenseMatrix(3, 1)), ShapeError);
}

TEST(ParamCount, PaperFormulas) {
    Rng rng(217);
    const DenseMatrix w = rng.gaussian_matrix(768, 768);
    EXPECT_EQ(factorized_params(Method::low_rank, 768, 768, 64), 98304u);
    EXPECT_EQ(factorized_params(Method::block_lr, 768, 768, 8, 4), 49152u);
    EXPECT_EQ(factorized_params(Method::monarch, 768, 768, 8, 4), 49152u);
    EXPECT_EQ(param_count(Factorization{w}), 768u * 768u);

    LowRankFactors lr{DenseMatrix(768, 64), DenseMatrix(768, 64)};
    EXPECT_EQ(param_count(Factorization{lr}), 98304u);
}

TEST(ParamCount, BlockAndMonarchAgreeOnProjectedFactors) {
    Rng rng(218);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t b = 1 + rng.below(4);
        const std::size_t m = b * (1 + rng.below(6));
        const std::size_t n = b * (1 + rng.below(6));
        const std::size_t r = 1 + rng.below(std::min(m, n) / b);
        const DenseMatrix w = rng.gaussian_matrix(m, n);
        const std::size_t expected = b * r * (m + n);
        EXPECT_EQ(param_count(project(w, Method::block_lr, r, b)), expected);
        EXPECT_EQ(param_count(project(w, Method::monarch, r, b)), expected);
        EXPECT_EQ(param_count(project(w, Method::low_rank, r, b)), r * (m + n));
    }
}

TEST(ErrorMonotonicity, NonIncreasingInRank) {
    Rng rng(219);
    const DenseMatrix w = rng.gaussian_matrix(16, 12);
    for (Method m : {Method::low_rank, Method::block_lr, Method::monarch}) {
        double prev = INFINITY;
        for (std::size_t r = 1; r <= max_rank(m, 16, 12, 2); ++r) {
            const double err = frobenius_distance(reconstruct(project(w, m, r, 2)), w);
            EXPECT_LE(err, prev + 1e-12) << method_name(m) << " r=" << r;
            prev = err;
        }
        EXPECT_LE(prev, 1e-9 * frobenius_norm(w));
    }
}

TEST(SolveRank, SingleSquareLayer) {
    const auto sol = solve_rank(Method::low_rank, {{768, 768}}, 98304);
    EXPECT_EQ(sol.rank, 64u);
    EXPECT_EQ(sol.params, 98304u);
    EXPECT_DOUBLE_EQ(sol.ratio, 98304.0 / (768.0 * 768.0));
}

TEST(SolveRank, DenseBudgetReachesBreakEvenCap) {
    // r(m+n) ≤ mn allows r = mn/(m+n) at most: 4 for an 8×8 layer, 1 for 2×64.
    EXPECT_EQ(solve_rank(Method::low_rank, {{8, 8}}, 64).rank, 4u);
    EXPECT_EQ(solve_rank(Method::low_rank, {{2, 64}}, 128).rank, 1u);
    EXPECT_EQ(solve_rank(Method::low_rank, {{2, 64}}, 1u << 20).rank, 2u);
}

TEST(SolveRank, MatchesLinearScan) {
    const std::vector<std::pair<std::size_t, std::size_t>> shapes{{64, 32}, {32, 64}, {48, 48}, {64, 64}};
    for (Method m : {Method::low_rank, Method::block_lr, Method::monarch})
        for (std::size_t budget : {2000u, 5000u, 12345u, 30000u, 100000u}) {
            std::size_t best = 0;
            for (std::size_t r = 1;; ++r) {
                bool ok = true;
                std::size_t total = 0;
                for (auto [rows, cols] : shapes) {
                    if (r > max_rank(m, rows, cols, 4)) ok = false;
                    total += factorized_params(m, rows, cols, r, 4);
                }
                if (!ok || total > budget) break;
                best = r;
            }
            if (best == 0) {
                EXPECT_THROW(solve_rank(m, shapes, budget, 4), InfeasibleError);
                continue;
            }
            const auto sol = solve_rank(m, shapes, budget, 4);
            EXPECT_EQ(sol.rank, best) << method_name(m) << " budget=" << budget;
            EXPECT_LE(sol.params, budget);
        }
}

TEST(SolveRank, Errors) {
    EXPECT_THROW(solve_rank(Method::low_rank, {{768, 768}}, 1535), InfeasibleError);
    EXPECT_THROW(solve_rank(Method::dense, {{4, 4}}, 100), ArgumentError);
    EXPECT_THROW(solve_rank(Method::monarch, {{10, 10}}, 1000, 3), ArgumentError);
    EXPECT_THROW(solve_rank(Method::low_rank, {}, 1000), ArgumentError);
}

TEST(MethodNames, RoundTrip) {
    for (Method m : {Method::dense, Method::low_rank, Method::block_lr, Method::monarch})
        EXPECT_EQ(parse_method(method_name(m)), m);
    EXPECT_THROW(parse_method("tucker"), ArgumentError);
}

TEST(ZerosLike, SameStructureAllZero) {
    Rng rng(220);
    const Factorization f = project(rng.gaussian_matrix(8, 8), Method::monarch, 1, 2);
    Factorization z = zeros_like(f);
    EXPECT_EQ(method_of(z), Method::monarch);
    EXPECT_EQ(param_count(z), param_count(f));
    for (auto span : parameter_spans(z))
        for (double v : span) EXPECT_EQ(v, 0.0);
}

}  // namespace
}  // namespace factorkit
