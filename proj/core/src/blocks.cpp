#include "factorkit/blocks.hpp"

#include <algorithm>
#include <string>

#include "factorkit/errors.hpp"

namespace factorkit {

BlockGrid BlockGrid::for_shape(std::size_t m, std::size_t n, std::size_t b1, std::size_t b2) {
    if (b1 == 0 || b2 == 0 || m % b1 != 0 || n % b2 != 0)
        throw ArgumentError("block grid " + std::to_string(b1) + "x" + std::to_string(b2) +
                            " does not divide a " + std::to_string(m) + "x" + std::to_string(n) +
                            " matrix");
    return BlockGrid{b1, b2, m / b1, n / b2};
}

void BlockGrid::check_shape(std::size_t m, std::size_t n) const {
    if (b1 == 0 || b2 == 0 || o == 0 || p == 0 || rows() != m || cols() != n)
        throw ShapeError("block grid (" + std::to_string(b1) + "," + std::to_string(b2) + "," +
                         std::to_string(o) + "," + std::to_string(p) + ") does not tile a " +
                         std::to_string(m) + "x" + std::to_string(n) + " matrix");
}

BlockTensor::BlockTensor(std::size_t d0, std::size_t d1, std::size_t d2, std::size_t d3)
    : dims_{d0, d1, d2, d3} {
    if (d0 == 0 || d1 == 0 || d2 == 0 || d3 == 0)
        throw ShapeError("block tensor dimensions must be positive");
    data_.assign(d0 * d1 * d2 * d3, 0.0);
}

DenseMatrix BlockTensor::slice_matrix(std::size_t i, std::size_t j) const {
    auto s = slice(i, j);
    return DenseMatrix(dims_[2], dims_[3], std::vector<double>(s.begin(), s.end()));
}

void BlockTensor::set_slice(std::size_t i, std::size_t j, const DenseMatrix& m) {
    if (m.rows() != dims_[2] || m.cols() != dims_[3])
        throw ShapeError("block tensor slice shape mismatch");
    std::copy(m.data().begin(), m.data().end(), slice(i, j).begin());
}

BlockTensor split_blocks(const DenseMatrix& w, const BlockGrid& grid) {
    grid.check_shape(w.rows(), w.cols());
    BlockTensor t(grid.b1, grid.b2, grid.o, grid.p);
    for (std::size_t i = 0; i < grid.b1; ++i)
        for (std::size_t j = 0; j < grid.b2; ++j)
            for (std::size_t k = 0; k < grid.o; ++k) {
                auto src = w.row(i * grid.o + k).subspan(j * grid.p, grid.p);
                std::copy(src.begin(), src.end(), t.slice(i, j).begin() + k * grid.p);
            }
    return t;
}

DenseMatrix join_blocks(const BlockTensor& t) {
    const auto [b1, b2, o, p] = t.dims();
    DenseMatrix w(b1 * o, b2 * p);
    for (std::size_t i = 0; i < b1; ++i)
        for (std::size_t j = 0; j < b2; ++j)
            for (std::size_t k = 0; k < o; ++k) {
                const double* src = t.slice(i, j).data() + k * p;
                std::copy(src, src + p, w.row(i * o + k).begin() + j * p);
            }
    return w;
}

DenseMatrix extract_block(const DenseMatrix& w, const BlockGrid& grid, std::size_t bi,
                          std::size_t bj) {
    grid.check_shape(w.rows(), w.cols());
    DenseMatrix block(grid.o, grid.p);
    for (std::size_t k = 0; k < grid.o; ++k) {
        auto src = w.row(bi * grid.o + k).subspan(bj * grid.p, grid.p);
        std::copy(src.begin(), src.end(), block.row(k).begin());
    }
    return block;
}

}  // namespace factorkit
