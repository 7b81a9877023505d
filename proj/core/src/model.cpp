#include "factorkit/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "factorkit/errors.hpp"
#include "factorkit/factorize.hpp"
#include "gemm.hpp"

namespace factorkit {

namespace {

using detail::gemm_accumulate;
using detail::gemm_nt_accumulate;
using detail::gemm_tn_accumulate;

void add_bias(DenseMatrix& z, const std::vector<double>& bias) {
    for (std::size_t i = 0; i < z.rows(); ++i)
        for (double& v : z.row(i)) v += bias[i];
}

void dense_backward(const DenseMatrix& w, const DenseMatrix& x, const DenseMatrix& dy,
                    DenseMatrix& dw, DenseMatrix* dx) {
    dw = matmul_nt(dy, x);
    if (dx) *dx = matmul_tn(w, dy);
}

void low_rank_backward(const LowRankFactors& f, const DenseMatrix& x, const DenseMatrix& dy,
                       LowRankFactors& df, DenseMatrix* dx) {
    const DenseMatrix t = matmul_tn(f.v, x);    // r×B
    df.u = matmul_nt(dy, t);                    // m×r
    const DenseMatrix dt = matmul_tn(f.u, dy);  // r×B
    df.v = matmul_nt(x, dt);                    // n×r
    if (dx) *dx = matmul(f.v, dt);
}

void block_lr_backward(const BlockLowRankFactors& f, const DenseMatrix& x, const DenseMatrix& dy,
                       BlockLowRankFactors& df, DenseMatrix* dx) {
    const BlockGrid& g = f.grid;
    const std::size_t r = f.rank();
    const std::size_t batch = x.cols();
    std::vector<double> t(r * batch);
    std::vector<double> dt(r * batch);
    if (dx) *dx = DenseMatrix(g.cols(), batch);
    for (std::size_t i = 0; i < g.b1; ++i)
        for (std::size_t j = 0; j < g.b2; ++j) {
            const double* left = f.left.slice(i, j).data();
            const double* right = f.right.slice(i, j).data();
            const double* xj = x.row(j * g.p).data();
            const double* dyi = dy.row(i * g.o).data();
            std::fill(t.begin(), t.end(), 0.0);
            std::fill(dt.begin(), dt.end(), 0.0);
            gemm_accumulate(r, g.p, batch, right, g.p, xj, batch, t.data(), batch);
            gemm_nt_accumulate(g.o, batch, r, dyi, batch, t.data(), batch,
                               df.left.slice(i, j).data(), r);
            gemm_tn_accumulate(r, g.o, batch, left, r, dyi, batch, dt.data(), batch);
            gemm_nt_accumulate(r, batch, g.p, dt.data(), batch, xj, batch,
                               df.right.slice(i, j).data(), g.p);
            if (dx)
                gemm_tn_accumulate(g.p, r, batch, right, g.p, dt.data(), batch,
                                   dx->row(j * g.p).data(), batch);
        }
}

void monarch_backward(const MonarchFactors& f, const DenseMatrix& x, const DenseMatrix& dy,
                      MonarchFactors& df, DenseMatrix* dx) {
    const std::size_t b = f.blocks;
    const std::size_t inner = b * f.rank();
    const std::size_t o = f.block_rows();
    const std::size_t p = f.block_cols();
    const std::size_t batch = x.cols();

    DenseMatrix z(b * inner, batch);
    for (std::size_t j = 0; j < b; ++j)
        gemm_accumulate(inner, p, batch, f.right_blocks[j].data().data(), p, x.row(j * p).data(),
                        batch, z.row(j * inner).data(), batch);
    const DenseMatrix zp = permute_rows(z, f.inner_perm);
    const DenseMatrix dh = permute_rows(dy, f.row_perm.inverse());

    DenseMatrix dzp(b * inner, batch);
    for (std::size_t i = 0; i < b; ++i) {
        df.left_blocks[i] = DenseMatrix(o, inner);
        gemm_nt_accumulate(o, batch, inner, dh.row(i * o).data(), batch, zp.row(i * inner).data(),
                           batch, df.left_blocks[i].data().data(), inner);
        gemm_tn_accumulate(inner, o, batch, f.left_blocks[i].data().data(), inner,
                           dh.row(i * o).data(), batch, dzp.row(i * inner).data(), batch);
    }
    const DenseMatrix dz = permute_rows(dzp, f.inner_perm.inverse());
    if (dx) *dx = DenseMatrix(b * p, batch);
    for (std::size_t j = 0; j < b; ++j) {
        df.right_blocks[j] = DenseMatrix(inner, p);
        gemm_nt_accumulate(inner, batch, p, dz.row(j * inner).data(), batch, x.row(j * p).data(),
                           batch, df.right_blocks[j].data().data(), p);
        if (dx)
            gemm_tn_accumulate(p, inner, batch, f.right_blocks[j].data().data(), p,
                               dz.row(j * inner).data(), batch, dx->row(j * p).data(), batch);
    }
}

}  // namespace

std::size_t ToyModel::param_count() const {
    std::size_t total = 0;
    for (const auto& layer : layers) total += factorkit::param_count(layer.weight) + layer.bias.size();
    return total;
}

std::vector<std::size_t> ToyModel::factorizable_layers() const {
    std::vector<std::size_t> out;
    for (std::size_t l = 0; l < layers.size(); ++l)
        if (layers[l].factorizable) out.push_back(l);
    return out;
}

void validate(const ToyModel& model) {
    if (model.layers.empty()) throw ShapeError("model has no layers");
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        const auto& layer = model.layers[l];
        if (layer.bias.size() != layer.out_features())
            throw ShapeError("layer " + std::to_string(l) + ": bias length " +
                             std::to_string(layer.bias.size()) + " != " +
                             std::to_string(layer.out_features()));
        if (l > 0 && layer.in_features() != model.layers[l - 1].out_features())
            throw ShapeError("layer " + std::to_string(l) + " expects " +
                             std::to_string(layer.in_features()) + " inputs, previous layer emits " +
                             std::to_string(model.layers[l - 1].out_features()));
    }
}

FactorizedLinear dense_layer(std::size_t out, std::size_t in, Rng& rng) {
    return FactorizedLinear{rng.gaussian_matrix(out, in, 1.0 / std::sqrt(static_cast<double>(in))),
                            std::vector<double>(out, 0.0)};
}

ToyModel dense_mlp(std::span<const std::size_t> widths, Rng& rng) {
    if (widths.size() < 2) throw ArgumentError("dense_mlp: need at least input and output widths");
    ToyModel model;
    for (std::size_t l = 0; l + 1 < widths.size(); ++l)
        model.layers.push_back(dense_layer(widths[l + 1], widths[l], rng));
    return model;
}

double gelu(double x) noexcept { return 0.5 * x * (1.0 + std::erf(x * std::numbers::sqrt2 / 2.0)); }

double gelu_grad(double x) noexcept {
    const double cdf = 0.5 * (1.0 + std::erf(x * std::numbers::sqrt2 / 2.0));
    const double pdf = std::exp(-0.5 * x * x) * std::numbers::inv_sqrtpi / std::numbers::sqrt2;
    return cdf + x * pdf;
}

DenseMatrix forward(const ToyModel& model, const DenseMatrix& x, ForwardCache* cache) {
    validate(model);
    if (x.rows() != model.in_features())
        throw ShapeError("forward: input has " + std::to_string(x.rows()) + " features, model expects " +
                         std::to_string(model.in_features()));
    if (cache) {
        cache->revision = model.revision;
        cache->inputs.clear();
        cache->preacts.clear();
    }
    DenseMatrix h = x;
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        const auto& layer = model.layers[l];
        DenseMatrix z = factorkit::apply(layer.weight, h);
        add_bias(z, layer.bias);
        if (cache) {
            cache->inputs.push_back(std::move(h));
            cache->preacts.push_back(z);
        }
        if (l + 1 == model.layers.size()) return z;
        for (double& v : z.data()) v = gelu(v);
        h = std::move(z);
    }
    return h;
}

Gradients zero_gradients(const ToyModel& model) {
    Gradients g;
    for (const auto& layer : model.layers) {
        g.weight.push_back(zeros_like(layer.weight));
        g.bias.emplace_back(layer.bias.size(), 0.0);
    }
    return g;
}

void linear_backward(const Factorization& w, const DenseMatrix& x, const DenseMatrix& dy,
                     Factorization& dw, DenseMatrix* dx) {
    std::visit(
        [&](const auto& f) {
            using T = std::remove_cvref_t<decltype(f)>;
            T& df = std::get<T>(dw);
            if constexpr (std::is_same_v<T, DenseMatrix>)
                dense_backward(f, x, dy, df, dx);
            else if constexpr (std::is_same_v<T, LowRankFactors>)
                low_rank_backward(f, x, dy, df, dx);
            else if constexpr (std::is_same_v<T, BlockLowRankFactors>)
                block_lr_backward(f, x, dy, df, dx);
            else
                monarch_backward(f, x, dy, df, dx);
        },
        w);
}

Gradients backward(const ToyModel& model, const ForwardCache& cache, const DenseMatrix& dlogits) {
    const std::size_t n = model.layers.size();
    if (cache.revision != model.revision || cache.inputs.size() != n || cache.preacts.size() != n)
        throw ArgumentError("backward: cache does not belong to the current model state");
    for (std::size_t l = 0; l < n; ++l)
        if (cache.inputs[l].rows() != model.layers[l].in_features() ||
            cache.preacts[l].rows() != model.layers[l].out_features())
            throw ArgumentError("backward: cache shapes do not match layer " + std::to_string(l));
    if (dlogits.rows() != model.classes() || dlogits.cols() != cache.inputs.front().cols())
        throw ShapeError("backward: upstream gradient shape mismatch");

    Gradients g = zero_gradients(model);
    DenseMatrix dz = dlogits;
    for (std::size_t l = n; l-- > 0;) {
        const auto& layer = model.layers[l];
        if (layer.train_bias)
            for (std::size_t i = 0; i < dz.rows(); ++i) {
                double sum = 0.0;
                for (double v : dz.row(i)) sum += v;
                g.bias[l][i] = sum;
            }
        if (l == 0) {
            if (layer.train_weight) linear_backward(layer.weight, cache.inputs[0], dz, g.weight[0], nullptr);
            break;
        }
        DenseMatrix dx(layer.in_features(), dz.cols());
        if (layer.train_weight) {
            linear_backward(layer.weight, cache.inputs[l], dz, g.weight[l], &dx);
        } else {
            Factorization scratch = zeros_like(layer.weight);
            linear_backward(layer.weight, cache.inputs[l], dz, scratch, &dx);
        }
        const DenseMatrix& z = cache.preacts[l - 1];
        for (std::size_t i = 0; i < dx.size(); ++i) dx.data()[i] *= gelu_grad(z.data()[i]);
        dz = std::move(dx);
    }
    return g;
}

LossResult softmax_cross_entropy(const DenseMatrix& logits, std::span<const std::size_t> labels) {
    const std::size_t classes = logits.rows();
    const std::size_t batch = logits.cols();
    if (labels.size() != batch) throw ShapeError("softmax_cross_entropy: label count != batch");
    LossResult out{0.0, DenseMatrix(classes, batch)};
    const double inv = 1.0 / static_cast<double>(batch);
    for (std::size_t c = 0; c < batch; ++c) {
        if (labels[c] >= classes) throw ArgumentError("softmax_cross_entropy: label out of range");
        double peak = logits(0, c);
        for (std::size_t k = 1; k < classes; ++k) peak = std::max(peak, logits(k, c));
        double denom = 0.0;
        for (std::size_t k = 0; k < classes; ++k) denom += std::exp(logits(k, c) - peak);
        out.loss += (std::log(denom) + peak - logits(labels[c], c)) * inv;
        for (std::size_t k = 0; k < classes; ++k) {
            const double prob = std::exp(logits(k, c) - peak) / denom;
            out.dlogits(k, c) = (prob - (k == labels[c] ? 1.0 : 0.0)) * inv;
        }
    }
    return out;
}

std::vector<std::size_t> predict(const DenseMatrix& logits) {
    std::vector<std::size_t> out(logits.cols(), 0);
    for (std::size_t c = 0; c < logits.cols(); ++c) {
        double best = -INFINITY;
        for (std::size_t k = 0; k < logits.rows(); ++k)
            if (logits(k, c) > best) {
                best = logits(k, c);
                out[c] = k;
            }
    }
    return out;
}

}  // namespace factorkit
