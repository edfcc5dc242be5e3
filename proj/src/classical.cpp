#include "qrecover/classical.hpp"

#include <cmath>
#include <string>

namespace qrecover {

DenseLayer make_dense(int in_dim, int out_dim, bool has_bias, std::mt19937_64& rng) {
    DenseLayer l;
    l.in_dim = in_dim;
    l.out_dim = out_dim;
    l.has_bias = has_bias;
    const double bound = std::sqrt(1.0 / in_dim);
    std::uniform_real_distribution<double> dist(-bound, bound);
    l.weights.resize(static_cast<std::size_t>(out_dim) * in_dim);
    for (double& w : l.weights) w = dist(rng);
    if (has_bias) l.bias.assign(out_dim, 0.0);
    return l;
}

std::vector<double> dense_forward(const DenseLayer& layer, const std::vector<double>& x) {
    if (x.size() != static_cast<std::size_t>(layer.in_dim)) {
        throw ShapeError("dense_forward: input length " + std::to_string(x.size()) +
                         " != in_dim " + std::to_string(layer.in_dim));
    }
    std::vector<double> y(layer.out_dim, 0.0);
    for (int o = 0; o < layer.out_dim; ++o) {
        const double* row = layer.weights.data() + static_cast<std::size_t>(o) * layer.in_dim;
        double acc = layer.has_bias ? layer.bias[o] : 0.0;
        for (int i = 0; i < layer.in_dim; ++i) acc += row[i] * x[i];
        y[o] = acc;
    }
    return y;
}

void dense_backward_acc(const DenseLayer& layer, const std::vector<double>& x,
                        const std::vector<double>& upstream, std::span<double> d_weights,
                        std::span<double> d_bias, std::vector<double>& d_input) {
    if (upstream.size() != static_cast<std::size_t>(layer.out_dim) ||
        x.size() != static_cast<std::size_t>(layer.in_dim)) {
        throw ShapeError("dense_backward: shape mismatch");
    }
    d_input.assign(layer.in_dim, 0.0);
    for (int o = 0; o < layer.out_dim; ++o) {
        const double g = upstream[o];
        const double* row = layer.weights.data() + static_cast<std::size_t>(o) * layer.in_dim;
        double* drow = d_weights.data() + static_cast<std::size_t>(o) * layer.in_dim;
        for (int i = 0; i < layer.in_dim; ++i) {
            drow[i] += g * x[i];
            d_input[i] += g * row[i];
        }
        if (layer.has_bias) d_bias[o] += g;
    }
}

DenseGrads dense_backward(const DenseLayer& layer, const std::vector<double>& x,
                          const std::vector<double>& upstream) {
    DenseGrads g;
    g.d_weights.assign(layer.weights.size(), 0.0);
    g.d_bias.assign(layer.bias.size(), 0.0);
    dense_backward_acc(layer, x, upstream, g.d_weights, g.d_bias, g.d_input);
    return g;
}

std::vector<double> leaky_relu(const std::vector<double>& x, double slope) {
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] >= 0.0 ? x[i] : slope * x[i];
    return y;
}

std::vector<double> leaky_relu_backward(const std::vector<double>& x, double slope,
                                        const std::vector<double>& upstream) {
    if (x.size() != upstream.size()) throw ShapeError("leaky_relu_backward: shape mismatch");
    std::vector<double> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        g[i] = upstream[i] * (x[i] >= 0.0 ? 1.0 : slope);
    }
    return g;
}

AdamState AdamState::make(std::size_t n_params, double learning_rate) {
    AdamState s;
    s.learning_rate = learning_rate;
    s.m.assign(n_params, 0.0);
    s.v.assign(n_params, 0.0);
    return s;
}

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state) {
    if (params.size() != grads.size() || params.size() != state.m.size()) {
        throw ShapeError("adam_step: shape mismatch");
    }
    state.step_count += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step_count));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step_count));
    for (std::size_t i = 0; i < params.size(); ++i) {
        state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * grads[i];
        state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * grads[i] * grads[i];
        const double mhat = state.m[i] / bc1;
        const double vhat = state.v[i] / bc2;
        params[i] -= state.learning_rate * mhat / (std::sqrt(vhat) + state.eps);
    }
}

std::pair<double, double> mse_and_rmse(const std::vector<double>& preds,
                                       const std::vector<double>& targets) {
    if (preds.empty()) throw EmptyBatchError("mse_and_rmse: empty input");
    if (preds.size() != targets.size()) throw ShapeError("mse_and_rmse: length mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const double d = preds[i] - targets[i];
        acc += d * d;
    }
    const double mse = acc / static_cast<double>(preds.size());
    return {mse, std::sqrt(mse)};
}

}  // namespace qrecover
