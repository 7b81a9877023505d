#include "factorkit/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "factorkit/errors.hpp"
#include "gemm.hpp"

namespace factorkit {

namespace {

void require_positive(std::size_t rows, std::size_t cols) {
    if (rows == 0 || cols == 0) {
        std::ostringstream msg;
        msg << "matrix dimensions must be positive, got " << rows << "x" << cols;
        throw ShapeError(msg.str());
    }
}

std::string shape_str(const DenseMatrix& m) {
    return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols) {
    require_positive(rows, cols);
    data_.assign(rows * cols, 0.0);
}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    require_positive(rows, cols);
    if (data_.size() != rows * cols) {
        std::ostringstream msg;
        msg << "data length " << data_.size() << " does not match shape " << rows << "x" << cols;
        throw ShapeError(msg.str());
    }
}

DenseMatrix::DenseMatrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() ? rows.begin()->size() : 0) {
    require_positive(rows_, cols_);
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) throw ShapeError("ragged initializer list");
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

DenseMatrix DenseMatrix::diagonal(std::span<const double> diag) {
    DenseMatrix m(diag.size(), diag.size());
    for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
    return m;
}

DenseMatrix DenseMatrix::transposed() const {
    DenseMatrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
}

bool DenseMatrix::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols() != b.rows())
        throw ShapeError("matmul: cannot multiply " + shape_str(a) + " by " + shape_str(b));
    DenseMatrix c(a.rows(), b.cols());
    detail::gemm_accumulate(a.rows(), a.cols(), b.cols(), a.data().data(), a.cols(),
                            b.data().data(), b.cols(), c.data().data(), c.cols());
    return c;
}

DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.rows() != b.rows())
        throw ShapeError("matmul_tn: cannot multiply transpose of " + shape_str(a) + " by " +
                         shape_str(b));
    DenseMatrix c(a.cols(), b.cols());
    detail::gemm_tn_accumulate(a.cols(), a.rows(), b.cols(), a.data().data(), a.cols(),
                               b.data().data(), b.cols(), c.data().data(), c.cols());
    return c;
}

DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols() != b.cols())
        throw ShapeError("matmul_nt: cannot multiply " + shape_str(a) + " by transpose of " +
                         shape_str(b));
    DenseMatrix c(a.rows(), b.rows());
    detail::gemm_nt_accumulate(a.rows(), a.cols(), b.rows(), a.data().data(), a.cols(),
                               b.data().data(), b.cols(), c.data().data(), c.cols());
    return c;
}

DenseMatrix add(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw ShapeError("add: shape mismatch " + shape_str(a) + " vs " + shape_str(b));
    DenseMatrix c = a;
    auto cd = c.data();
    auto bd = b.data();
    for (std::size_t i = 0; i < cd.size(); ++i) cd[i] += bd[i];
    return c;
}

DenseMatrix subtract(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw ShapeError("subtract: shape mismatch " + shape_str(a) + " vs " + shape_str(b));
    DenseMatrix c = a;
    auto cd = c.data();
    auto bd = b.data();
    for (std::size_t i = 0; i < cd.size(); ++i) cd[i] -= bd[i];
    return c;
}

DenseMatrix scaled(const DenseMatrix& a, double factor) {
    DenseMatrix c = a;
    for (double& v : c.data()) v *= factor;
    return c;
}

double frobenius_norm(const DenseMatrix& a) {
    double sum = 0.0;
    for (double v : a.data()) sum += v * v;
    return std::sqrt(sum);
}

double frobenius_distance(const DenseMatrix& a, const DenseMatrix& b) {
    return frobenius_norm(subtract(a, b));
}

double max_abs_difference(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw ShapeError("max_abs_difference: shape mismatch " + shape_str(a) + " vs " +
                         shape_str(b));
    double worst = 0.0;
    auto ad = a.data();
    auto bd = b.data();
    for (std::size_t i = 0; i < ad.size(); ++i) worst = std::max(worst, std::abs(ad[i] - bd[i]));
    return worst;
}

}  // namespace factorkit
