#include "qrecover/pqc.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace qrecover {

PqcParams PqcParams::zeros(int n_qubits, int n_layers) {
    PqcParams p;
    p.n_qubits = n_qubits;
    p.n_layers = n_layers;
    p.thetas.assign(static_cast<std::size_t>(n_layers) * n_qubits * 3, 0.0);
    return p;
}

Circuit pqc_circuit(const PqcParams& params) {
    const int n = params.n_qubits;
    Circuit out;
    int pidx = 0;
    for (int l = 0; l < params.n_layers; ++l) {
        for (int q = 0; q < n; ++q) {
            out.push_back({OpKind::RZ, q, -1, params.theta(l, q, 0), pidx++});
            out.push_back({OpKind::RY, q, -1, params.theta(l, q, 1), pidx++});
            out.push_back({OpKind::RZ, q, -1, params.theta(l, q, 2), pidx++});
        }
        if (n > 1) {
            for (int q = 0; q < n; ++q) {
                out.push_back({OpKind::CNOT, (q + 1) % n, q});
            }
        }
    }
    return out;
}

QuantumState pqc_forward(QuantumState state, const PqcParams& params) {
    if (state.n_qubits != params.n_qubits) {
        throw ShapeError("pqc_forward: state has " + std::to_string(state.n_qubits) +
                         " qubits, params expect " + std::to_string(params.n_qubits));
    }
    run_circuit(state, pqc_circuit(params));
    return state;
}

std::vector<double> measure_all_z(const QuantumState& state) {
    std::vector<double> out(state.n_qubits);
    for (int q = 0; q < state.n_qubits; ++q) out[q] = expval_z(state, q);
    return out;
}

namespace {

// (-i/2) * Pauli generator of the rotation, applied in place.
void apply_half_generator(QuantumState& st, OpKind kind, int qubit) {
    const cplx half_mi{0.0, -0.5};
    switch (kind) {
        case OpKind::RX: {
            Gate1Q g{{{cplx{0, 0}, half_mi}, {half_mi, cplx{0, 0}}}};
            apply_1q(st, qubit, g);
            return;
        }
        case OpKind::RY: {
            Gate1Q g{{{cplx{0, 0}, cplx{-0.5, 0}}, {cplx{0.5, 0}, cplx{0, 0}}}};
            apply_1q(st, qubit, g);
            return;
        }
        case OpKind::RZ: {
            Gate1Q g{{{half_mi, cplx{0, 0}}, {cplx{0, 0}, -half_mi}}};
            apply_1q(st, qubit, g);
            return;
        }
        case OpKind::CNOT: break;
    }
    throw ShapeError("CNOT carries no parameter");
}

void apply_z_weighted(QuantumState& st, const std::vector<double>& weights) {
    const int n = st.n_qubits;
    const std::uint64_t dim = st.dim();
    for (std::uint64_t i = 0; i < dim; ++i) {
        double w = 0.0;
        for (int q = 0; q < n; ++q) {
            w += (i & qubit_stride(n, q)) ? -weights[q] : weights[q];
        }
        st.amps[i] *= w;
    }
}

}  // namespace

AdjointResult adjoint_gradient(const QuantumState& input_state, const PqcParams& params,
                               const std::vector<double>& upstream) {
    if (input_state.n_qubits != params.n_qubits ||
        upstream.size() != static_cast<std::size_t>(params.n_qubits)) {
        throw ShapeError("adjoint_gradient: shape mismatch");
    }
    const Circuit circuit = pqc_circuit(params);

    QuantumState ket = input_state;
    run_circuit(ket, circuit);

    QuantumState bra = ket;  // Lambda * U |psi>, Lambda = sum_i u_i Z_i
    apply_z_weighted(bra, upstream);

    AdjointResult res;
    res.grad_thetas.assign(params.count(), 0.0);

    for (auto it = circuit.rbegin(); it != circuit.rend(); ++it) {
        const GateOp& op = *it;
        if (op.kind == OpKind::CNOT) {
            apply_cnot(ket, op.q1, op.q0);  // self-inverse
            apply_cnot(bra, op.q1, op.q0);
            continue;
        }
        if (op.param_index >= 0) {
            // dG/dtheta = (-i P/2) G, so <bra| dG |phi_{j-1}> = <bra| (-iP/2) |ket>.
            QuantumState d = ket;
            apply_half_generator(d, op.kind, op.q0);
            cplx inner{0.0, 0.0};
            for (std::size_t i = 0; i < d.dim(); ++i) {
                inner += std::conj(bra.amps[i]) * d.amps[i];
            }
            res.grad_thetas[op.param_index] = 2.0 * inner.real();
        }
        const Gate1Q inv = adjoint(gate_of(op));
        apply_1q(ket, op.q0, inv);
        apply_1q(bra, op.q0, inv);
    }

    // bra is now U^dag Lambda U |psi>; grad w.r.t. the (real, imag) parts of
    // the input amplitudes is 2 * bra.
    res.grad_input.resize(bra.dim());
    for (std::size_t i = 0; i < bra.dim(); ++i) res.grad_input[i] = 2.0 * bra.amps[i];
    return res;
}

std::vector<double> parameter_shift_gradient(
    const std::function<double(const PqcParams&)>& eval_fn, const PqcParams& params) {
    constexpr double shift = std::numbers::pi / 2;
    std::vector<double> grad(params.count());
    PqcParams work = params;
    for (std::size_t i = 0; i < params.count(); ++i) {
        work.thetas[i] = params.thetas[i] + shift;
        const double plus = eval_fn(work);
        work.thetas[i] = params.thetas[i] - shift;
        const double minus = eval_fn(work);
        work.thetas[i] = params.thetas[i];
        grad[i] = 0.5 * (plus - minus);
    }
    return grad;
}

}  // namespace qrecover
