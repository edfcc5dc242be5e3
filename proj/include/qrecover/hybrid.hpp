#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qrecover/classical.hpp"
#include "qrecover/dataset.hpp"
#include "qrecover/pqc.hpp"

namespace qrecover {

enum class ModelKind { FNN, QmlAngle, QmlAmplitude };

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& s);

struct ModelSpec {
    ModelKind kind = ModelKind::QmlAmplitude;
    int input_dim = 256;
    int hidden_dim = 256;
    int n_qubits = 8;
    int fnn_second_hidden = 8;
    int pqc_layers = 1;
    double leaky_slope = -0.3;
    std::uint64_t seed = 0;
};

// Layer stack of one of the three architectures. Unused members stay empty.
//   FNN:          hidden(+bias) LReLU -> second(+bias) LReLU -> output(+bias)
//   QmlAmplitude: hidden(+bias) LReLU -> amplitude encode -> PQC -> <Z> -> output(+bias)
//   QmlAngle:     hidden(+bias) LReLU -> aux(no bias) -> angle encode -> PQC -> <Z> -> output(+bias)
struct HybridModel {
    ModelSpec spec;
    DenseLayer hidden;
    DenseLayer fnn_second;  // FNN only
    DenseLayer aux;         // QmlAngle only, no bias
    PqcParams pqc;          // QML kinds only
    DenseLayer output;

    std::vector<double> flatten() const;
    void set_flat(const std::vector<double>& flat);
    std::size_t param_count() const;
};

HybridModel build_model(const ModelSpec& spec);
std::size_t count_params(const ModelSpec& spec);

double forward(const HybridModel& model, const std::vector<double>& x);

// Gradients of batch MSE with respect to every trainable parameter, laid out
// like HybridModel::flatten(). Also reports the batch predictions.
struct BatchGrads {
    std::vector<double> grads;
    std::vector<double> preds;
};
BatchGrads backward(const HybridModel& model, const std::vector<std::vector<double>>& X,
                    const std::vector<double>& y, int threads = 1);

struct TrainConfig {
    int epochs = 100;
    int batch_size = 64;
    double learning_rate = 0.001;
    std::uint64_t shuffle_seed = 0;
    int threads = 1;
};

struct TrainHistory {
    std::vector<double> train_rmse;   // per epoch
    std::vector<double> test_rmse;    // per epoch
    std::vector<double> seconds;      // per epoch wall clock
    std::vector<std::vector<double>> epoch_test_residuals;  // [epoch][test obs], pred - target
    std::vector<double> final_residuals() const {
        return epoch_test_residuals.empty() ? std::vector<double>{}
                                            : epoch_test_residuals.back();
    }
};

TrainHistory train(HybridModel& model, const Dataset& train_set, const Dataset& test_set,
                   const TrainConfig& config);

std::vector<double> predict_all(const HybridModel& model, const Dataset& ds, int threads = 1);

// Versioned JSON checkpoint: spec + parameter tensors + RNG state string.
void save_checkpoint(const HybridModel& model, const std::string& rng_state,
                     const std::string& path);
HybridModel load_checkpoint(const std::string& path, std::string* rng_state = nullptr);

}  // namespace qrecover
