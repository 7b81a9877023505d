#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "factorkit/factors.hpp"
#include "factorkit/matrix.hpp"
#include "factorkit/rng.hpp"

namespace factorkit {

/// y = W·x + b for column-vector activations. The weight can be dense or any
/// factorized variant.
struct FactorizedLinear {
    Factorization weight;
    std::vector<double> bias;
    bool train_weight = true;
    bool train_bias = true;
    /// Whether a staged plan may project this layer. Classifier heads are not.
    bool factorizable = true;

    std::size_t out_features() const noexcept { return rows_of(weight); }
    std::size_t in_features() const noexcept { return cols_of(weight); }
};

/// Stack of linear layers with exact GELU between them and raw logits out.
/// Anything that replaces parameters or layers must call touch() so that
/// caches built against the old state are rejected by backward().
struct ToyModel {
    std::vector<FactorizedLinear> layers;
    std::uint64_t revision = 0;

    void touch() noexcept { ++revision; }
    std::size_t in_features() const { return layers.front().in_features(); }
    std::size_t classes() const { return layers.back().out_features(); }
    std::size_t param_count() const;
    /// Indices of layers with factorizable == true, ascending.
    std::vector<std::size_t> factorizable_layers() const;
};

/// Checks that layer shapes chain. Throws ShapeError otherwise.
void validate(const ToyModel& model);

/// Dense layer with N(0, 1/in) weights and zero bias.
FactorizedLinear dense_layer(std::size_t out, std::size_t in, Rng& rng);

/// Dense MLP with widths[0] inputs and widths.back() outputs.
ToyModel dense_mlp(std::span<const std::size_t> widths, Rng& rng);

double gelu(double x) noexcept;
double gelu_grad(double x) noexcept;

struct ForwardCache {
    std::uint64_t revision = 0;
    std::vector<DenseMatrix> inputs;       ///< input of layer l (features × batch)
    std::vector<DenseMatrix> preacts;      ///< W·x + b of layer l
};

/// Logits (classes × batch) for a batch of column inputs.
DenseMatrix forward(const ToyModel& model, const DenseMatrix& x, ForwardCache* cache = nullptr);

/// Gradient buffers shaped like the model's parameters.
struct Gradients {
    std::vector<Factorization> weight;
    std::vector<std::vector<double>> bias;
};

Gradients zero_gradients(const ToyModel& model);

/// Reverse pass from ∂loss/∂logits. Gradients for frozen tensors are left zero.
/// Throws ArgumentError when the cache was produced for a different model
/// revision or shape.
Gradients backward(const ToyModel& model, const ForwardCache& cache, const DenseMatrix& dlogits);

/// Gradient of one layer's weight given its input and ∂loss/∂output; also
/// returns ∂loss/∂input through `dx` when non-null.
void linear_backward(const Factorization& w, const DenseMatrix& x, const DenseMatrix& dy,
                     Factorization& dw, DenseMatrix* dx);

struct LossResult {
    double loss = 0.0;       ///< mean cross-entropy over the batch
    DenseMatrix dlogits;     ///< ∂loss/∂logits
};

/// Softmax cross-entropy averaged over the batch columns.
LossResult softmax_cross_entropy(const DenseMatrix& logits, std::span<const std::size_t> labels);

/// Argmax over each logits column. NaN entries never win; ties go to the lower class.
std::vector<std::size_t> predict(const DenseMatrix& logits);

}  // namespace factorkit
