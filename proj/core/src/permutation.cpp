#include "factorkit/permutation.hpp"

#include <algorithm>
#include <string>

#include "factorkit/errors.hpp"

namespace factorkit {

StridePermutation::StridePermutation(std::size_t length, std::size_t blocks)
    : length_(length), blocks_(blocks) {
    if (length == 0 || blocks == 0 || length % blocks != 0)
        throw ArgumentError("stride permutation: block count " + std::to_string(blocks) +
                            " must be positive and divide length " + std::to_string(length));
}

std::vector<std::size_t> StridePermutation::table() const {
    std::vector<std::size_t> t(length_);
    for (std::size_t i = 0; i < length_; ++i) t[i] = (*this)(i);
    return t;
}

DenseMatrix StridePermutation::matrix() const {
    DenseMatrix p(length_, length_);
    for (std::size_t i = 0; i < length_; ++i) p((*this)(i), i) = 1.0;
    return p;
}

DenseMatrix permute_rows(const DenseMatrix& w, const StridePermutation& perm) {
    if (perm.length() != w.rows())
        throw ShapeError("permute_rows: permutation length " + std::to_string(perm.length()) +
                         " does not match row count " + std::to_string(w.rows()));
    DenseMatrix out(w.rows(), w.cols());
    for (std::size_t i = 0; i < w.rows(); ++i) {
        auto src = w.row(i);
        std::copy(src.begin(), src.end(), out.row(perm(i)).begin());
    }
    return out;
}

DenseMatrix permute_cols(const DenseMatrix& w, const StridePermutation& perm) {
    if (perm.length() != w.cols())
        throw ShapeError("permute_cols: permutation length " + std::to_string(perm.length()) +
                         " does not match column count " + std::to_string(w.cols()));
    const auto table = perm.table();
    DenseMatrix out(w.rows(), w.cols());
    for (std::size_t i = 0; i < w.rows(); ++i) {
        auto src = w.row(i);
        auto dst = out.row(i);
        for (std::size_t j = 0; j < w.cols(); ++j) dst[table[j]] = src[j];
    }
    return out;
}

}  // namespace factorkit
