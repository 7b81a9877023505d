#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "factorkit/factors.hpp"
#include "factorkit/matrix.hpp"

namespace factorkit {

/// Full (thin) singular value decomposition w = u·diag(s)·vt with k = min(m, n).
///
/// s is non-increasing and non-negative. For every triple the entry of largest
/// magnitude in the u column is non-negative; ties go to the lowest row index.
struct SvdResult {
    DenseMatrix u;   ///< m×k, orthonormal columns
    std::vector<double> s;
    DenseMatrix vt;  ///< k×n, orthonormal rows
};

struct JacobiOptions {
    int max_sweeps = 60;
    /// A sweep in which every column pair satisfies |gᵢ·gⱼ| ≤ tol·‖gᵢ‖‖gⱼ‖ ends the iteration.
    double tolerance = 1e-12;
};

/// One-sided (Hestenes) Jacobi SVD. Deterministic for identical input.
/// Throws NumericalError naming the shape if `max_sweeps` is exhausted and
/// ArgumentError on non-finite input.
SvdResult svd(const DenseMatrix& w, const JacobiOptions& options = {});

/// Best rank-r approximation split symmetrically: U = u[:, :r]·diag(√s),
/// V = vtᵀ[:, :r]·diag(√s). Requires 1 ≤ r ≤ k.
LowRankFactors truncate(const SvdResult& res, std::size_t rank);

/// √(Σ_{i ≥ r} s_i²) for the zero-based tail starting at r.
double tail_energy(const std::vector<double>& s, std::size_t rank);

/// (r, ‖w − w_r‖_F / ‖w‖_F) for r = 1..min(m, n), using the singular spectrum.
/// A zero matrix yields all-zero errors.
std::vector<std::pair<std::size_t, double>> spectrum_curve(const DenseMatrix& w);

}  // namespace factorkit
