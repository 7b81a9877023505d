#pragma once

#include <cstddef>

namespace factorkit::detail {

// Register tiles of TR rows by 4 columns of C. Element (i, k) of A sits at
// a[i·row_stride + k·k_stride], which covers both A and Aᵀ storage. Every
// output element starts from its current value and adds its products in
// ascending k, so the tiling never changes a result bit.
template <std::size_t TR>
inline void gemm_rows(std::size_t K, std::size_t N, const double* a, std::size_t row_stride,
                      std::size_t k_stride, const double* b, std::size_t ldb, double* c,
                      std::size_t ldc) {
    constexpr std::size_t TC = 4;
    std::size_t j = 0;
    for (; j + TC <= N; j += TC) {
        double acc[TR][TC];
        for (std::size_t r = 0; r < TR; ++r)
            for (std::size_t q = 0; q < TC; ++q) acc[r][q] = c[r * ldc + j + q];
        for (std::size_t k = 0; k < K; ++k) {
            const double* bk = b + k * ldb + j;
            for (std::size_t r = 0; r < TR; ++r) {
                const double x = a[r * row_stride + k * k_stride];
                for (std::size_t q = 0; q < TC; ++q) acc[r][q] += x * bk[q];
            }
        }
        for (std::size_t r = 0; r < TR; ++r)
            for (std::size_t q = 0; q < TC; ++q) c[r * ldc + j + q] = acc[r][q];
    }
    for (; j < N; ++j)
        for (std::size_t r = 0; r < TR; ++r) {
            double s = c[r * ldc + j];
            for (std::size_t k = 0; k < K; ++k) s += a[r * row_stride + k * k_stride] * b[k * ldb + j];
            c[r * ldc + j] = s;
        }
}

inline void gemm_strided(std::size_t M, std::size_t K, std::size_t N, const double* a,
                         std::size_t row_stride, std::size_t k_stride, const double* b,
                         std::size_t ldb, double* c, std::size_t ldc) {
    std::size_t i = 0;
    for (; i + 4 <= M; i += 4)
        gemm_rows<4>(K, N, a + i * row_stride, row_stride, k_stride, b, ldb, c + i * ldc, ldc);
    const double* ai = a + i * row_stride;
    double* ci = c + i * ldc;
    switch (M - i) {
        case 3: gemm_rows<3>(K, N, ai, row_stride, k_stride, b, ldb, ci, ldc); break;
        case 2: gemm_rows<2>(K, N, ai, row_stride, k_stride, b, ldb, ci, ldc); break;
        case 1: gemm_rows<1>(K, N, ai, row_stride, k_stride, b, ldb, ci, ldc); break;
        default: break;
    }
}

// C[M×N] += A[M×K]·B[K×N] on strided row-major storage.
inline void gemm_accumulate(std::size_t M, std::size_t K, std::size_t N, const double* a,
                            std::size_t lda, const double* b, std::size_t ldb, double* c,
                            std::size_t ldc) {
    gemm_strided(M, K, N, a, lda, 1, b, ldb, c, ldc);
}

// C[M×N] += Aᵀ·B where A is stored K×M (row-major, leading dimension lda).
inline void gemm_tn_accumulate(std::size_t M, std::size_t K, std::size_t N, const double* a,
                               std::size_t lda, const double* b, std::size_t ldb, double* c,
                               std::size_t ldc) {
    gemm_strided(M, K, N, a, 1, lda, b, ldb, c, ldc);
}

// C[M×N] += A·Bᵀ where B is stored N×K. Dot-product form.
inline void gemm_nt_accumulate(std::size_t M, std::size_t K, std::size_t N, const double* a,
                               std::size_t lda, const double* b, std::size_t ldb, double* c,
                               std::size_t ldc) {
    for (std::size_t i = 0; i < M; ++i) {
        const double* ai = a + i * lda;
        double* ci = c + i * ldc;
        for (std::size_t j = 0; j < N; ++j) {
            const double* bj = b + j * ldb;
            double sum = 0.0;
            for (std::size_t k = 0; k < K; ++k) sum += ai[k] * bj[k];
            ci[j] += sum;
        }
    }
}

}  // namespace factorkit::detail
