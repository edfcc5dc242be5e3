#include "qrecover/statesim.hpp"

#include <cmath>
#include <string>

namespace qrecover {

namespace {
// Below this size the OpenMP fork/join overhead dominates.
constexpr std::uint64_t kParallelThreshold = std::uint64_t{1} << 14;
}  // namespace

QuantumState new_zero_state(int n_qubits) {
    if (n_qubits < 1 || n_qubits > kMaxQubits) {
        throw CapacityError("n_qubits must be in [1, " + std::to_string(kMaxQubits) +
                            "], got " + std::to_string(n_qubits));
    }
    QuantumState st;
    st.n_qubits = n_qubits;
    st.amps.assign(std::uint64_t{1} << n_qubits, cplx{0.0, 0.0});
    st.amps[0] = cplx{1.0, 0.0};
    return st;
}

Gate1Q make_rotation(RotKind kind, const std::vector<double>& angles) {
    const std::size_t want = (kind == RotKind::ROT) ? 3 : 1;
    if (angles.size() != want) {
        throw ArityError("rotation expects " + std::to_string(want) + " angle(s), got " +
                         std::to_string(angles.size()));
    }
    auto rx = [](double t) {
        const double c = std::cos(t / 2), s = std::sin(t / 2);
        return Gate1Q{{{cplx{c, 0}, cplx{0, -s}}, {cplx{0, -s}, cplx{c, 0}}}};
    };
    auto ry = [](double t) {
        const double c = std::cos(t / 2), s = std::sin(t / 2);
        return Gate1Q{{{cplx{c, 0}, cplx{-s, 0}}, {cplx{s, 0}, cplx{c, 0}}}};
    };
    auto rz = [](double t) {
        return Gate1Q{{{std::exp(cplx{0, -t / 2}), cplx{0, 0}},
                       {cplx{0, 0}, std::exp(cplx{0, t / 2})}}};
    };
    auto mul = [](const Gate1Q& a, const Gate1Q& b) {
        Gate1Q r;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                r.m[i][j] = a.m[i][0] * b.m[0][j] + a.m[i][1] * b.m[1][j];
        return r;
    };
    switch (kind) {
        case RotKind::RX: return rx(angles[0]);
        case RotKind::RY: return ry(angles[0]);
        case RotKind::RZ: return rz(angles[0]);
        case RotKind::ROT: return mul(rz(angles[2]), mul(ry(angles[1]), rz(angles[0])));
    }
    throw ArityError("unknown rotation kind");
}

Gate1Q adjoint(const Gate1Q& g) {
    Gate1Q r;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) r.m[i][j] = std::conj(g.m[j][i]);
    return r;
}

namespace kernels {

void apply_1q_serial(cplx* amps, std::uint64_t dim, std::uint64_t stride, const Gate1Q& g) {
    const cplx m00 = g.m[0][0], m01 = g.m[0][1], m10 = g.m[1][0], m11 = g.m[1][1];
    for (std::uint64_t i = 0; i < dim; ++i) {
        if (i & stride) continue;
        const cplx a0 = amps[i], a1 = amps[i | stride];
        amps[i] = m00 * a0 + m01 * a1;
        amps[i | stride] = m10 * a0 + m11 * a1;
    }
}

void apply_1q_omp(cplx* amps, std::uint64_t dim, std::uint64_t stride, const Gate1Q& g) {
    const cplx m00 = g.m[0][0], m01 = g.m[0][1], m10 = g.m[1][0], m11 = g.m[1][1];
    const std::int64_t n = static_cast<std::int64_t>(dim);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        const std::uint64_t u = static_cast<std::uint64_t>(i);
        if (u & stride) continue;
        const cplx a0 = amps[u], a1 = amps[u | stride];
        amps[u] = m00 * a0 + m01 * a1;
        amps[u | stride] = m10 * a0 + m11 * a1;
    }
}

void apply_cnot_serial(cplx* amps, std::uint64_t dim, std::uint64_t cstride,
                       std::uint64_t tstride) {
    for (std::uint64_t i = 0; i < dim; ++i) {
        if ((i & cstride) && !(i & tstride)) std::swap(amps[i], amps[i | tstride]);
    }
}

void apply_cnot_omp(cplx* amps, std::uint64_t dim, std::uint64_t cstride, std::uint64_t tstride) {
    const std::int64_t n = static_cast<std::int64_t>(dim);
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
        const std::uint64_t u = static_cast<std::uint64_t>(i);
        if ((u & cstride) && !(u & tstride)) std::swap(amps[u], amps[u | tstride]);
    }
}

double expval_z_serial(const cplx* amps, std::uint64_t dim, std::uint64_t stride) {
    double acc = 0.0;
    for (std::uint64_t i = 0; i < dim; ++i) {
        const double p = std::norm(amps[i]);
        acc += (i & stride) ? -p : p;
    }
    return acc;
}

double expval_z_omp(const cplx* amps, std::uint64_t dim, std::uint64_t stride) {
    double acc = 0.0;
    const std::int64_t n = static_cast<std::int64_t>(dim);
#pragma omp parallel for schedule(static) reduction(+ : acc)
    for (std::int64_t i = 0; i < n; ++i) {
        const std::uint64_t u = static_cast<std::uint64_t>(i);
        const double p = std::norm(amps[u]);
        acc += (u & stride) ? -p : p;
    }
    return acc;
}

}  // namespace kernels

void apply_1q(QuantumState& state, int qubit, const Gate1Q& gate) {
    if (qubit < 0 || qubit >= state.n_qubits) {
        throw IndexError("qubit index " + std::to_string(qubit) + " out of range");
    }
    const std::uint64_t stride = qubit_stride(state.n_qubits, qubit);
    if (state.dim() >= kParallelThreshold) {
        kernels::apply_1q_omp(state.amps.data(), state.dim(), stride, gate);
    } else {
        kernels::apply_1q_serial(state.amps.data(), state.dim(), stride, gate);
    }
}

void apply_cnot(QuantumState& state, int control, int target) {
    if (control == target) throw IndexError("cnot control == target");
    if (control < 0 || control >= state.n_qubits || target < 0 || target >= state.n_qubits) {
        throw IndexError("cnot qubit index out of range");
    }
    const std::uint64_t cs = qubit_stride(state.n_qubits, control);
    const std::uint64_t ts = qubit_stride(state.n_qubits, target);
    if (state.dim() >= kParallelThreshold) {
        kernels::apply_cnot_omp(state.amps.data(), state.dim(), cs, ts);
    } else {
        kernels::apply_cnot_serial(state.amps.data(), state.dim(), cs, ts);
    }
}

double expval_z(const QuantumState& state, int qubit) {
    if (qubit < 0 || qubit >= state.n_qubits) {
        throw IndexError("qubit index " + std::to_string(qubit) + " out of range");
    }
    const std::uint64_t stride = qubit_stride(state.n_qubits, qubit);
    if (state.dim() >= kParallelThreshold) {
        return kernels::expval_z_omp(state.amps.data(), state.dim(), stride);
    }
    return kernels::expval_z_serial(state.amps.data(), state.dim(), stride);
}

double norm(const QuantumState& state) {
    double acc = 0.0;
    for (const cplx& a : state.amps) acc += std::norm(a);
    return std::sqrt(acc);
}

Gate1Q gate_of(const GateOp& op) {
    switch (op.kind) {
        case OpKind::RX: return make_rotation(RotKind::RX, {op.angle});
        case OpKind::RY: return make_rotation(RotKind::RY, {op.angle});
        case OpKind::RZ: return make_rotation(RotKind::RZ, {op.angle});
        case OpKind::CNOT: break;
    }
    throw IndexError("gate_of: CNOT has no 1q matrix");
}

void run_circuit(QuantumState& state, const Circuit& circuit) {
    for (const GateOp& op : circuit) {
        if (op.kind == OpKind::CNOT) {
            apply_cnot(state, op.q1, op.q0);
        } else {
            apply_1q(state, op.q0, gate_of(op));
        }
    }
}

}  // namespace qrecover
