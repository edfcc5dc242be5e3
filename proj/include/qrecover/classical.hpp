#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "qrecover/errors.hpp"

namespace qrecover {

struct DenseLayer {
    int in_dim = 0;
    int out_dim = 0;
    bool has_bias = true;
    std::vector<double> weights;  // [out][in], row-major
    std::vector<double> bias;     // [out] when has_bias

    std::size_t param_count() const {
        return weights.size() + bias.size();
    }
};

// uniform(-sqrt(1/fan_in), +sqrt(1/fan_in)) weights, zero bias.
DenseLayer make_dense(int in_dim, int out_dim, bool has_bias, std::mt19937_64& rng);

std::vector<double> dense_forward(const DenseLayer& layer, const std::vector<double>& x);

struct DenseGrads {
    std::vector<double> d_weights;
    std::vector<double> d_bias;
    std::vector<double> d_input;
};

DenseGrads dense_backward(const DenseLayer& layer, const std::vector<double>& x,
                          const std::vector<double>& upstream);
// Accumulating variant used by the batch loop.
void dense_backward_acc(const DenseLayer& layer, const std::vector<double>& x,
                        const std::vector<double>& upstream, std::span<double> d_weights,
                        std::span<double> d_bias, std::vector<double>& d_input);

// f(x) = x for x >= 0, slope*x otherwise; subgradient at 0 taken as 1.
std::vector<double> leaky_relu(const std::vector<double>& x, double slope);
std::vector<double> leaky_relu_backward(const std::vector<double>& x, double slope,
                                        const std::vector<double>& upstream);

struct AdamState {
    double learning_rate = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::int64_t step_count = 0;
    std::vector<double> m;
    std::vector<double> v;

    static AdamState make(std::size_t n_params, double learning_rate);
};

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state);

std::pair<double, double> mse_and_rmse(const std::vector<double>& preds,
                                       const std::vector<double>& targets);

}  // namespace qrecover
