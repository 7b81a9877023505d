#include "factorkit/svd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "factorkit/errors.hpp"

namespace factorkit {

namespace {

using Column = std::vector<double>;

double dot(const Column& a, const Column& b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
    return sum;
}

void rotate(Column& p, Column& q, double c, double s) {
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double x = p[i];
        const double y = q[i];
        p[i] = c * x - s * y;
        q[i] = s * x + c * y;
    }
}

// Orthogonalizes `v` against every column in `basis` (two Gram–Schmidt passes).
void orthogonalize(Column& v, const std::vector<Column>& basis) {
    for (int pass = 0; pass < 2; ++pass)
        for (const Column& b : basis) {
            const double proj = dot(v, b);
            for (std::size_t i = 0; i < v.size(); ++i) v[i] -= proj * b[i];
        }
}

// Unit vector orthogonal to `basis`, taken from the standard basis vector
// with the largest residual (lowest index on ties).
Column complete_basis(std::size_t m, const std::vector<Column>& basis) {
    Column best;
    double best_norm = -1.0;
    for (std::size_t k = 0; k < m; ++k) {
        Column e(m, 0.0);
        e[k] = 1.0;
        orthogonalize(e, basis);
        const double norm = std::sqrt(dot(e, e));
        if (norm > best_norm) {
            best_norm = norm;
            best = std::move(e);
        }
    }
    for (double& x : best) x /= best_norm;
    return best;
}

// Tall case (m >= n): a copy of the columns of `w` is orthogonalized in place.
SvdResult jacobi_tall(const DenseMatrix& w, const JacobiOptions& opt) {
    const std::size_t m = w.rows();
    const std::size_t n = w.cols();

    std::vector<Column> g(n, Column(m));
    std::vector<Column> v(n, Column(n, 0.0));
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < m; ++i) g[j][i] = w(i, j);
        v[j][j] = 1.0;
    }

    // Pairs are rotated whenever they are not orthogonal to working precision;
    // the sweep loop ends once the largest relative off-diagonal seen in a sweep
    // is within the tolerance.
    const double rotate_floor = std::numeric_limits<double>::epsilon() * static_cast<double>(m);
    bool converged = n < 2;
    std::vector<double> norm2(n);
    for (int sweep = 0; sweep < opt.max_sweeps && !converged; ++sweep) {
        for (std::size_t j = 0; j < n; ++j) norm2[j] = dot(g[j], g[j]);
        double worst = 0.0;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double alpha = norm2[p];
                const double beta = norm2[q];
                if (alpha == 0.0 || beta == 0.0) continue;
                const double gamma = dot(g[p], g[q]);
                const double rel = std::abs(gamma) / std::sqrt(alpha * beta);
                worst = std::max(worst, rel);
                if (rel <= rotate_floor) continue;
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::hypot(1.0, zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                rotate(g[p], g[q], c, s);
                rotate(v[p], v[q], c, s);
                norm2[p] = alpha - t * gamma;
                norm2[q] = beta + t * gamma;
            }
        }
        converged = worst <= opt.tolerance;
    }
    if (!converged)
        throw NumericalError("svd: one-sided Jacobi did not converge within " +
                             std::to_string(opt.max_sweeps) + " sweeps for a " + std::to_string(m) +
                             "x" + std::to_string(n) + " matrix");

    std::vector<double> sigma(n);
    for (std::size_t j = 0; j < n; ++j) sigma[j] = std::sqrt(dot(g[j], g[j]));

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return sigma[a] > sigma[b]; });

    const double smax = sigma[order.front()];
    const double null_floor = smax * 1e-14;
    std::vector<Column> ucols;
    std::vector<std::size_t> null_slots;
    ucols.reserve(n);
    for (std::size_t idx = 0; idx < n; ++idx) {
        const std::size_t j = order[idx];
        Column col(m, 0.0);
        if (sigma[j] > null_floor && sigma[j] > 0.0) {
            for (std::size_t i = 0; i < m; ++i) col[i] = g[j][i] / sigma[j];
        } else {
            null_slots.push_back(idx);
        }
        ucols.push_back(std::move(col));
    }
    if (!null_slots.empty()) {
        std::vector<Column> basis;
        for (std::size_t idx = 0; idx < n; ++idx)
            if (std::find(null_slots.begin(), null_slots.end(), idx) == null_slots.end())
                basis.push_back(ucols[idx]);
        for (std::size_t idx : null_slots) {
            ucols[idx] = complete_basis(m, basis);
            basis.push_back(ucols[idx]);
        }
    }

    SvdResult res{DenseMatrix(m, n), std::vector<double>(n), DenseMatrix(n, n)};
    for (std::size_t idx = 0; idx < n; ++idx) {
        const std::size_t j = order[idx];
        res.s[idx] = sigma[j];
        for (std::size_t i = 0; i < m; ++i) res.u(i, idx) = ucols[idx][i];
        for (std::size_t i = 0; i < n; ++i) res.vt(idx, i) = v[j][i];
    }
    return res;
}

void apply_sign_convention(SvdResult& res) {
    const std::size_t m = res.u.rows();
    const std::size_t k = res.s.size();
    for (std::size_t t = 0; t < k; ++t) {
        std::size_t arg = 0;
        double best = -1.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double a = std::abs(res.u(i, t));
            if (a > best) {
                best = a;
                arg = i;
            }
        }
        if (res.u(arg, t) < 0.0) {
            for (std::size_t i = 0; i < m; ++i) res.u(i, t) = -res.u(i, t);
            for (double& x : res.vt.row(t)) x = -x;
        }
    }
}

}  // namespace

SvdResult svd(const DenseMatrix& w, const JacobiOptions& options) {
    if (!w.all_finite()) throw ArgumentError("svd: input contains non-finite values");
    SvdResult res = [&] {
        if (w.rows() >= w.cols()) return jacobi_tall(w, options);
        try {
            SvdResult t = jacobi_tall(w.transposed(), options);
            return SvdResult{t.vt.transposed(), std::move(t.s), t.u.transposed()};
        } catch (const NumericalError&) {
            throw NumericalError("svd: one-sided Jacobi did not converge within " +
                                 std::to_string(options.max_sweeps) + " sweeps for a " +
                                 std::to_string(w.rows()) + "x" + std::to_string(w.cols()) +
                                 " matrix");
        }
    }();
    apply_sign_convention(res);
    return res;
}

LowRankFactors truncate(const SvdResult& res, std::size_t rank) {
    const std::size_t k = res.s.size();
    if (rank < 1 || rank > k)
        throw ArgumentError("truncate: rank " + std::to_string(rank) + " outside [1, " +
                            std::to_string(k) + "]");
    const std::size_t m = res.u.rows();
    const std::size_t n = res.vt.cols();
    LowRankFactors f{DenseMatrix(m, rank), DenseMatrix(n, rank)};
    for (std::size_t t = 0; t < rank; ++t) {
        const double root = std::sqrt(res.s[t]);
        for (std::size_t i = 0; i < m; ++i) f.u(i, t) = res.u(i, t) * root;
        for (std::size_t j = 0; j < n; ++j) f.v(j, t) = res.vt(t, j) * root;
    }
    return f;
}

double tail_energy(const std::vector<double>& s, std::size_t rank) {
    double sum = 0.0;
    for (std::size_t i = s.size(); i > rank; --i) sum += s[i - 1] * s[i - 1];
    return std::sqrt(sum);
}

std::vector<std::pair<std::size_t, double>> spectrum_curve(const DenseMatrix& w) {
    const SvdResult res = svd(w);
    const std::size_t k = res.s.size();
    const double total = frobenius_norm(w);

    // Suffix sums from the smallest singular value up keep the curve monotone.
    std::vector<double> tail(k + 1, 0.0);
    for (std::size_t i = k; i > 0; --i) tail[i - 1] = tail[i] + res.s[i - 1] * res.s[i - 1];

    std::vector<std::pair<std::size_t, double>> curve;
    curve.reserve(k);
    for (std::size_t r = 1; r <= k; ++r)
        curve.emplace_back(r, total > 0.0 ? std::sqrt(tail[r]) / total : 0.0);
    return curve;
}

}  // namespace factorkit
