#include "factorkit/optim.hpp"

#include <cmath>
#include <string>

#include "factorkit/errors.hpp"

namespace factorkit {

std::string_view optimizer_name(OptimizerKind k) noexcept {
    return k == OptimizerKind::sgd ? "sgd" : "adamw";
}

OptimizerKind parse_optimizer(std::string_view name) {
    if (name == "sgd") return OptimizerKind::sgd;
    if (name == "adamw") return OptimizerKind::adamw;
    throw ArgumentError("unknown optimizer '" + std::string(name) + "' (expected sgd or adamw)");
}

void Optimizer::update(std::span<double> param, std::span<const double> grad, std::vector<double>& m,
                       std::vector<double>& v, std::size_t t, double lr, bool decay) const {
    if (m.size() != param.size()) m.assign(param.size(), 0.0);
    if (config_.kind == OptimizerKind::sgd) {
        if (config_.momentum == 0.0) {
            for (std::size_t i = 0; i < param.size(); ++i) param[i] -= lr * grad[i];
            return;
        }
        for (std::size_t i = 0; i < param.size(); ++i) {
            m[i] = config_.momentum * m[i] + grad[i];
            param[i] -= lr * m[i];
        }
        return;
    }
    if (v.size() != param.size()) v.assign(param.size(), 0.0);
    const double b1 = config_.beta1;
    const double b2 = config_.beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(t));
    const double shrink = decay ? 1.0 - lr * config_.weight_decay : 1.0;
    for (std::size_t i = 0; i < param.size(); ++i) {
        m[i] = b1 * m[i] + (1.0 - b1) * grad[i];
        v[i] = b2 * v[i] + (1.0 - b2) * grad[i] * grad[i];
        const double mhat = m[i] / c1;
        const double vhat = v[i] / c2;
        param[i] = param[i] * shrink - lr * mhat / (std::sqrt(vhat) + config_.epsilon);
    }
}

void Optimizer::step(ToyModel& model, const Gradients& grads, double lr) {
    const std::size_t n = model.layers.size();
    if (grads.weight.size() != n || grads.bias.size() != n)
        throw ShapeError("optimizer: gradient layer count does not match the model");
    if (slots_.size() != n) slots_.resize(n);

    for (std::size_t l = 0; l < n; ++l) {
        FactorizedLinear& layer = model.layers[l];
        auto params = parameter_spans(layer.weight);
        const auto gparams = parameter_spans(grads.weight[l]);
        if (gparams.size() != params.size() || grads.bias[l].size() != layer.bias.size())
            throw ShapeError("optimizer: gradient structure does not match layer " + std::to_string(l));

        std::vector<std::size_t> shape{layer.weight.index()};
        for (auto s : params) shape.push_back(s.size());
        Slot& slot = slots_[l];
        if (slot.shape != shape) {
            slot = Slot{};
            slot.shape = shape;
            slot.first.resize(params.size() + 1);
            slot.second.resize(params.size() + 1);
        }
        ++slot.count;
        for (std::size_t k = 0; k < params.size(); ++k) {
            if (gparams[k].size() != params[k].size())
                throw ShapeError("optimizer: gradient size mismatch in layer " + std::to_string(l));
            if (layer.train_weight)
                update(params[k], gparams[k], slot.first[k], slot.second[k], slot.count, lr, true);
        }
        if (layer.train_bias)
            update(layer.bias, grads.bias[l], slot.first.back(), slot.second.back(), slot.count, lr,
                   false);
    }
    ++steps_;
    model.touch();
}

}  // namespace factorkit
