#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "qrecover/errors.hpp"

namespace qrecover {

using cplx = std::complex<double>;

// Pure n-qubit state. Index i addresses basis ket |b1...bn> with qubit 0
// as the most significant bit, so the stride of qubit q is 2^(n-1-q).
struct QuantumState {
    int n_qubits = 0;
    std::vector<cplx> amps;

    std::size_t dim() const { return amps.size(); }
};

// Memory cap: 2^24 complex doubles = 256 MiB.
inline constexpr int kMaxQubits = 24;

struct Gate1Q {
    cplx m[2][2];
};

enum class RotKind { RX, RY, RZ, ROT };

QuantumState new_zero_state(int n_qubits);

// ROT(a,b,g) = Rz(g) * Ry(b) * Rz(a), Rz(a) applied first.
Gate1Q make_rotation(RotKind kind, const std::vector<double>& angles);

Gate1Q adjoint(const Gate1Q& g);

void apply_1q(QuantumState& state, int qubit, const Gate1Q& gate);
void apply_cnot(QuantumState& state, int control, int target);
double expval_z(const QuantumState& state, int qubit);

double norm(const QuantumState& state);

inline std::uint64_t qubit_stride(int n_qubits, int qubit) {
    return std::uint64_t{1} << (n_qubits - 1 - qubit);
}

// Raw kernels. The _serial variants are the reference implementations the
// tests and the benchmark compare the OpenMP versions against; the public
// apply_* entry points pick between them by state size.
namespace kernels {

void apply_1q_serial(cplx* amps, std::uint64_t dim, std::uint64_t stride, const Gate1Q& g);
void apply_1q_omp(cplx* amps, std::uint64_t dim, std::uint64_t stride, const Gate1Q& g);
void apply_cnot_serial(cplx* amps, std::uint64_t dim, std::uint64_t cstride,
                       std::uint64_t tstride);
void apply_cnot_omp(cplx* amps, std::uint64_t dim, std::uint64_t cstride, std::uint64_t tstride);
double expval_z_serial(const cplx* amps, std::uint64_t dim, std::uint64_t stride);
double expval_z_omp(const cplx* amps, std::uint64_t dim, std::uint64_t stride);

}  // namespace kernels

// Minimal circuit IR shared by the encoder, the PQC and the noise simulator.
enum class OpKind { RX, RY, RZ, CNOT };

struct GateOp {
    OpKind kind;
    int q0;             // target
    int q1 = -1;        // control (CNOT only)
    double angle = 0.0; // rotations only
    int param_index = -1;  // >=0 when the angle is a trainable parameter
};

using Circuit = std::vector<GateOp>;

Gate1Q gate_of(const GateOp& op);
void run_circuit(QuantumState& state, const Circuit& circuit);

}  // namespace qrecover
