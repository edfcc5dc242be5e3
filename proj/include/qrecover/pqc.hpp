#pragma once

#include <functional>
#include <vector>

#include "qrecover/statesim.hpp"

namespace qrecover {

// Strongly-entangling ansatz parameters: one (alpha, beta, gamma) triple per
// qubit per layer, 3 * n_layers * n_qubits trainable angles total.
struct PqcParams {
    int n_qubits = 0;
    int n_layers = 1;
    std::vector<double> thetas;  // [layer][qubit][3], row-major

    static PqcParams zeros(int n_qubits, int n_layers);

    double& theta(int layer, int qubit, int k) {
        return thetas[(static_cast<std::size_t>(layer) * n_qubits + qubit) * 3 + k];
    }
    double theta(int layer, int qubit, int k) const {
        return thetas[(static_cast<std::size_t>(layer) * n_qubits + qubit) * 3 + k];
    }
    std::size_t count() const { return thetas.size(); }
};

// Per layer: ROT(a,b,g) on every qubit (compiled as Rz(a), Ry(b), Rz(g)),
// then the CNOT ring q -> (q+1) mod n in ascending q. Single-qubit circuits
// skip the ring. param_index on each rotation points into `thetas`.
Circuit pqc_circuit(const PqcParams& params);

QuantumState pqc_forward(QuantumState state, const PqcParams& params);

std::vector<double> measure_all_z(const QuantumState& state);

struct AdjointResult {
    std::vector<double> grad_thetas;   // same layout as PqcParams::thetas
    std::vector<cplx> grad_input;      // 2 * (U^dag Lambda U) |psi>
};

// Gradient of sum_i upstream[i] * <Z_i> by one forward pass and one reverse
// sweep over the gate tape; exact, no shift evaluations.
AdjointResult adjoint_gradient(const QuantumState& input_state, const PqcParams& params,
                               const std::vector<double>& upstream);

// Two-term shift rule, one +pi/2 / -pi/2 evaluation pair per parameter.
std::vector<double> parameter_shift_gradient(
    const std::function<double(const PqcParams&)>& eval_fn, const PqcParams& params);

}  // namespace qrecover
