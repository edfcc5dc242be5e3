#pragma once

#include <vector>

#include "qrecover/hybrid.hpp"
#include "qrecover/statesim.hpp"

namespace qrecover {

struct DensityMatrix {
    int n_qubits = 0;
    std::vector<cplx> rho;  // row-major [dim x dim]

    std::size_t dim() const { return std::size_t{1} << n_qubits; }
    cplx& at(std::size_t r, std::size_t c) { return rho[r * dim() + c]; }
    cplx at(std::size_t r, std::size_t c) const { return rho[r * dim() + c]; }
};

DensityMatrix density_from_state(const QuantumState& psi);
DensityMatrix zero_density(int n_qubits);

double trace_real(const DensityMatrix& rho);
double density_expval_z(const DensityMatrix& rho, int qubit);

// Channel probabilities mirroring the noisy-simulation config table; defaults
// are the Ankaa-3-derived values.
struct NoiseParams {
    double p_depol_1q = 0.0009;
    double p_depol_2q = 0.0142;
    double p_amp_damp = 0.00023;
    double p_dephase = 0.00037;
    double p_readout = 0.051;
    bool noisy_encoding = true;

    bool all_zero() const {
        return p_depol_1q == 0 && p_depol_2q == 0 && p_amp_damp == 0 && p_dephase == 0 &&
               p_readout == 0;
    }
};

enum class ChannelKind { Depol1Q, Depol2Q, AmpDamp, Dephase };

// One Kraus operator: 2x2 (k=1) or 4x4 (k=2) row-major.
struct KrausMat {
    int n_qubits = 1;
    std::vector<cplx> m;
};

std::vector<KrausMat> channel(ChannelKind kind, double p);

// rho -> sum_k K rho K^dag, embedded on the given 1 or 2 qubits. The set is
// checked for trace preservation (sum K^dag K = I within 1e-10).
void apply_kraus(DensityMatrix& rho, const std::vector<int>& qubits,
                 const std::vector<KrausMat>& kraus_set);

// Runs `circuit` on rho with the per-gate noise model: every 1q gate is
// followed by Depol1Q, AmpDamp, Dephase on its qubit; every CNOT by Depol2Q
// on the pair.
void run_noisy_circuit(DensityMatrix& rho, const Circuit& circuit, const NoiseParams& noise);

// <Z_i> of the PQC output under noise, scaled by (1 - 2 p_readout). When
// `encoding` is non-null the run starts from |0..0><0..0| and the encoding
// gates incur noise too; otherwise it starts from the given pure state.
std::vector<double> noisy_pqc_expvals(const QuantumState& input_state, const PqcParams& params,
                                      const NoiseParams& noise,
                                      const Circuit* encoding = nullptr);

// Batch-MSE gradients of a QML model under the noisy simulator: PQC angles by
// the parameter-shift rule, classical layers by central finite differences
// over the encoded vector. Density-matrix cost limits this to small qubit
// counts unless experimental_ok is set.
BatchGrads noisy_train_gradient(const HybridModel& model,
                                const std::vector<std::vector<double>>& X,
                                const std::vector<double>& y, const NoiseParams& noise,
                                bool experimental_ok = false);

// Noisy predictions of a QML model (used by noise-eval and the noisy trainer).
double noisy_forward(const HybridModel& model, const std::vector<double>& x,
                     const NoiseParams& noise);

// Mini-batch Adam loop mirroring train() but with noisy gradients and noisy
// per-epoch metrics.
TrainHistory noisy_train(HybridModel& model, const Dataset& train_set, const Dataset& test_set,
                         const TrainConfig& config, const NoiseParams& noise,
                         bool experimental_ok = false);

}  // namespace qrecover
