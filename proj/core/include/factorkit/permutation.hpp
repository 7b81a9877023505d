#pragma once

#include <cstddef>
#include <vector>

#include "factorkit/matrix.hpp"

namespace factorkit {

/// Blocked-transpose ("stride") permutation of {0, .., N-1}:
///
///     π(i) = (i mod b)·(N/b) + ⌊i/b⌋
///
/// Viewing the index set as an (N/b)×b row-major grid, π transposes it. The
/// inverse of StridePermutation(N, b) is StridePermutation(N, N/b).
class StridePermutation {
public:
    StridePermutation(std::size_t length, std::size_t blocks);

    std::size_t length() const noexcept { return length_; }
    std::size_t blocks() const noexcept { return blocks_; }

    std::size_t operator()(std::size_t i) const noexcept {
        return (i % blocks_) * (length_ / blocks_) + i / blocks_;
    }

    StridePermutation inverse() const { return StridePermutation(length_, length_ / blocks_); }
    bool is_identity() const noexcept { return blocks_ == 1 || blocks_ == length_; }

    /// Explicit table {π(0), .., π(N-1)}.
    std::vector<std::size_t> table() const;

    /// Permutation matrix P with P·x moving entry i to position π(i).
    DenseMatrix matrix() const;

    friend bool operator==(const StridePermutation&, const StridePermutation&) = default;

private:
    std::size_t length_;
    std::size_t blocks_;
};

/// Row π(i) of the result is row i of `w`, i.e. P·w.
DenseMatrix permute_rows(const DenseMatrix& w, const StridePermutation& perm);

/// Column π(j) of the result is column j of `w`, i.e. w·Pᵀ.
DenseMatrix permute_cols(const DenseMatrix& w, const StridePermutation& perm);

}  // namespace factorkit
