#pragma once

#include <vector>

#include "qrecover/statesim.hpp"

namespace qrecover {

enum class Scheme { Amplitude, Angle };

// Level-order tree of uniformly-controlled Ry angles. Node t sits at level
// k = floor(log2(t+1)); level k is the multiplexed Ry on qubit k controlled
// by qubits 0..k-1, indexed by the control bitstring (qubit 0 most
// significant, matching the global bit ordering).
struct EncodingPlan {
    int n_qubits = 0;
    Scheme scheme = Scheme::Amplitude;
    std::vector<double> ry_angle_tree;  // length 2^n - 1 (Amplitude only)
};

// Pads `features` with zeros to 2^n, L2-normalizes, and returns the angle
// tree whose circuit prepares that vector from |0...0>. Real amplitudes of
// either sign; no Rz stage.
EncodingPlan amplitude_plan(const std::vector<double>& features, int n_qubits);

// Elementary-gate compilation of the plan (Ry rotations + CNOTs).
Circuit amplitude_circuit(const EncodingPlan& plan);

QuantumState amplitude_encode(const std::vector<double>& features, int n_qubits);

// Product state tensor_i Rx(xs[i]) |0>.
QuantumState angle_encode(const std::vector<double>& xs);
Circuit angle_circuit(const std::vector<double>& xs);

// d(normalized padded amplitude i) / d(feature j), row-major [2^n x len].
// Rows beyond len(features) are the zero padding block.
std::vector<std::vector<double>> amplitude_state_jacobian(const std::vector<double>& features,
                                                          int n_qubits);

// Normalize-then-pad without the circuit; identical amplitudes, used by the
// hybrid forward pass.
std::vector<double> padded_normalized(const std::vector<double>& features, int n_qubits);

}  // namespace qrecover
