#include "qrecover/encoders.hpp"

#include <cmath>
#include <string>

namespace qrecover {

namespace {

constexpr double kZeroNormFloor = 1e-12;

// Multiplexed Ry on `target` controlled by qubits [ctrl, ctrl+k), angle per
// control bitstring (qubit `ctrl` most significant). Standard recursive
// decomposition: k controls cost 2^k Ry rotations and 2^(k+1)-2 CNOTs.
void emit_ucry(Circuit& out, const std::vector<double>& angles, int ctrl, int k, int target) {
    if (k == 0) {
        out.push_back({OpKind::RY, target, -1, angles[0]});
        return;
    }
    const std::size_t h = angles.size() / 2;
    std::vector<double> sum(h), diff(h);
    for (std::size_t j = 0; j < h; ++j) {
        sum[j] = 0.5 * (angles[j] + angles[j + h]);
        diff[j] = 0.5 * (angles[j] - angles[j + h]);
    }
    emit_ucry(out, sum, ctrl + 1, k - 1, target);
    out.push_back({OpKind::CNOT, target, ctrl});
    emit_ucry(out, diff, ctrl + 1, k - 1, target);
    out.push_back({OpKind::CNOT, target, ctrl});
}

}  // namespace

std::vector<double> padded_normalized(const std::vector<double>& features, int n_qubits) {
    const std::size_t dim = std::size_t{1} << n_qubits;
    if (features.empty() || features.size() > dim) {
        throw EncodingError(EncodingError::Kind::Overflow,
                            "feature length " + std::to_string(features.size()) +
                                " does not fit in 2^" + std::to_string(n_qubits));
    }
    double nrm2 = 0.0;
    for (double v : features) nrm2 += v * v;
    const double nrm = std::sqrt(nrm2);
    if (nrm < kZeroNormFloor) {
        throw EncodingError(EncodingError::Kind::ZeroNorm, "zero-norm feature vector");
    }
    std::vector<double> out(dim, 0.0);
    for (std::size_t i = 0; i < features.size(); ++i) out[i] = features[i] / nrm;
    return out;
}

EncodingPlan amplitude_plan(const std::vector<double>& features, int n_qubits) {
    const int n = n_qubits;
    const std::vector<double> target = padded_normalized(features, n);
    const std::size_t dim = target.size();

    // Bottom-up subtree magnitudes; leaves keep their sign so the deepest
    // rotation level places it, all interior nodes are non-negative.
    std::vector<std::vector<double>> level(n + 1);
    level[n] = target;
    for (int k = n - 1; k >= 0; --k) {
        level[k].resize(std::size_t{1} << k);
        for (std::size_t j = 0; j < level[k].size(); ++j) {
            level[k][j] = std::hypot(level[k + 1][2 * j], level[k + 1][2 * j + 1]);
        }
    }

    EncodingPlan plan;
    plan.n_qubits = n;
    plan.scheme = Scheme::Amplitude;
    plan.ry_angle_tree.assign(dim - 1, 0.0);
    for (int k = 0; k < n; ++k) {
        for (std::size_t j = 0; j < (std::size_t{1} << k); ++j) {
            const double l = level[k + 1][2 * j], r = level[k + 1][2 * j + 1];
            const double theta = (level[k][j] > 0.0) ? 2.0 * std::atan2(r, l) : 0.0;
            plan.ry_angle_tree[(std::size_t{1} << k) - 1 + j] = theta;
        }
    }
    return plan;
}

Circuit amplitude_circuit(const EncodingPlan& plan) {
    Circuit out;
    for (int k = 0; k < plan.n_qubits; ++k) {
        const std::size_t base = (std::size_t{1} << k) - 1;
        std::vector<double> angles(plan.ry_angle_tree.begin() + base,
                                   plan.ry_angle_tree.begin() + base + (std::size_t{1} << k));
        emit_ucry(out, angles, 0, k, k);
    }
    return out;
}

QuantumState amplitude_encode(const std::vector<double>& features, int n_qubits) {
    const EncodingPlan plan = amplitude_plan(features, n_qubits);
    QuantumState st = new_zero_state(n_qubits);
    run_circuit(st, amplitude_circuit(plan));
    return st;
}

Circuit angle_circuit(const std::vector<double>& xs) {
    Circuit out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        out.push_back({OpKind::RX, static_cast<int>(i), -1, xs[i]});
    }
    return out;
}

QuantumState angle_encode(const std::vector<double>& xs) {
    QuantumState st = new_zero_state(static_cast<int>(xs.size()));
    run_circuit(st, angle_circuit(xs));
    return st;
}

std::vector<std::vector<double>> amplitude_state_jacobian(const std::vector<double>& features,
                                                          int n_qubits) {
    const std::size_t dim = std::size_t{1} << n_qubits;
    if (features.empty() || features.size() > dim) {
        throw EncodingError(EncodingError::Kind::Overflow, "feature length exceeds 2^n");
    }
    double nrm2 = 0.0;
    for (double v : features) nrm2 += v * v;
    const double nrm = std::sqrt(nrm2);
    if (nrm < kZeroNormFloor) {
        throw EncodingError(EncodingError::Kind::ZeroNorm, "zero-norm feature vector");
    }
    const std::size_t len = features.size();
    std::vector<std::vector<double>> jac(dim, std::vector<double>(len, 0.0));
    const double inv = 1.0 / nrm, inv3 = 1.0 / (nrm2 * nrm);
    for (std::size_t i = 0; i < len; ++i) {
        for (std::size_t j = 0; j < len; ++j) {
            jac[i][j] = (i == j ? inv : 0.0) - features[i] * features[j] * inv3;
        }
    }
    return jac;
}

}  // namespace qrecover
