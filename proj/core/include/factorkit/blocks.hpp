#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "factorkit/matrix.hpp"

namespace factorkit {

/// Partition of an m×n matrix into a b1×b2 grid of o×p blocks.
struct BlockGrid {
    std::size_t b1 = 1;  ///< block rows
    std::size_t b2 = 1;  ///< block columns
    std::size_t o = 1;   ///< block height
    std::size_t p = 1;   ///< block width

    /// Grid with `b1`×`b2` blocks over an m×n matrix. Throws ArgumentError unless
    /// b1 | m and b2 | n.
    static BlockGrid for_shape(std::size_t m, std::size_t n, std::size_t b1, std::size_t b2);
    /// Square grid (b1 = b2 = b), rectangular blocks allowed.
    static BlockGrid square(std::size_t m, std::size_t n, std::size_t b) {
        return for_shape(m, n, b, b);
    }

    std::size_t rows() const noexcept { return b1 * o; }
    std::size_t cols() const noexcept { return b2 * p; }
    bool is_square_grid() const noexcept { return b1 == b2; }

    /// Throws ShapeError unless the grid tiles an m×n matrix exactly.
    void check_shape(std::size_t m, std::size_t n) const;

    friend bool operator==(const BlockGrid&, const BlockGrid&) = default;
};

/// Dense row-major 4-D tensor T[i][j][k][l].
class BlockTensor {
public:
    BlockTensor(std::size_t d0, std::size_t d1, std::size_t d2, std::size_t d3);

    const std::array<std::size_t, 4>& dims() const noexcept { return dims_; }
    std::size_t size() const noexcept { return data_.size(); }

    double& operator()(std::size_t i, std::size_t j, std::size_t k, std::size_t l) noexcept {
        return data_[offset(i, j, k, l)];
    }
    double operator()(std::size_t i, std::size_t j, std::size_t k, std::size_t l) const noexcept {
        return data_[offset(i, j, k, l)];
    }

    /// Contiguous d2×d3 slice at (i, j).
    std::span<double> slice(std::size_t i, std::size_t j) noexcept {
        return {data_.data() + offset(i, j, 0, 0), dims_[2] * dims_[3]};
    }
    std::span<const double> slice(std::size_t i, std::size_t j) const noexcept {
        return {data_.data() + offset(i, j, 0, 0), dims_[2] * dims_[3]};
    }
    DenseMatrix slice_matrix(std::size_t i, std::size_t j) const;
    void set_slice(std::size_t i, std::size_t j, const DenseMatrix& m);

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }

    friend bool operator==(const BlockTensor&, const BlockTensor&) = default;

private:
    std::size_t offset(std::size_t i, std::size_t j, std::size_t k, std::size_t l) const noexcept {
        return ((i * dims_[1] + j) * dims_[2] + k) * dims_[3] + l;
    }

    std::array<std::size_t, 4> dims_;
    std::vector<double> data_;
};

/// T[i][j][k][l] = w[i·o + k][j·p + l].
BlockTensor split_blocks(const DenseMatrix& w, const BlockGrid& grid);

/// Inverse of split_blocks; the tensor's dims must be (b1, b2, o, p).
DenseMatrix join_blocks(const BlockTensor& t);

/// Copy of block (bi, bj) of `w` under `grid`.
DenseMatrix extract_block(const DenseMatrix& w, const BlockGrid& grid, std::size_t bi,
                          std::size_t bj);

}  // namespace factorkit
