#include "qrecover/noise.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "qrecover/encoders.hpp"

namespace qrecover {

DensityMatrix density_from_state(const QuantumState& psi) {
    DensityMatrix rho;
    rho.n_qubits = psi.n_qubits;
    const std::size_t d = psi.dim();
    rho.rho.resize(d * d);
    for (std::size_t r = 0; r < d; ++r) {
        for (std::size_t c = 0; c < d; ++c) {
            rho.rho[r * d + c] = psi.amps[r] * std::conj(psi.amps[c]);
        }
    }
    return rho;
}

DensityMatrix zero_density(int n_qubits) {
    return density_from_state(new_zero_state(n_qubits));
}

double trace_real(const DensityMatrix& rho) {
    double t = 0.0;
    const std::size_t d = rho.dim();
    for (std::size_t i = 0; i < d; ++i) t += rho.rho[i * d + i].real();
    return t;
}

double density_expval_z(const DensityMatrix& rho, int qubit) {
    const std::size_t d = rho.dim();
    const std::uint64_t stride = qubit_stride(rho.n_qubits, qubit);
    double acc = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        const double p = rho.rho[i * d + i].real();
        acc += (i & stride) ? -p : p;
    }
    return acc;
}

namespace {

const cplx I{0.0, 1.0};

KrausMat scaled_pauli_1q(int which, double scale) {
    // which: 0=I, 1=X, 2=Y, 3=Z
    KrausMat k;
    k.n_qubits = 1;
    switch (which) {
        case 0: k.m = {scale, 0, 0, scale}; break;
        case 1: k.m = {0, scale, scale, 0}; break;
        case 2: k.m = {0, -I * scale, I * scale, 0}; break;
        default: k.m = {scale, 0, 0, -scale}; break;
    }
    return k;
}

KrausMat kron_1q(const KrausMat& a, const KrausMat& b) {
    KrausMat k;
    k.n_qubits = 2;
    k.m.assign(16, cplx{0, 0});
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) {
            k.m[r * 4 + c] = a.m[(r / 2) * 2 + (c / 2)] * b.m[(r % 2) * 2 + (c % 2)];
        }
    }
    return k;
}

// Local-space index of a global index on the given qubits: qubits[0] is the
// most significant local bit.
void strides_of(const DensityMatrix& rho, const std::vector<int>& qubits,
                std::vector<std::uint64_t>& strides) {
    strides.clear();
    for (int q : qubits) {
        if (q < 0 || q >= rho.n_qubits) throw IndexError("apply_kraus: qubit out of range");
        strides.push_back(qubit_stride(rho.n_qubits, q));
    }
}

// out = K * rho_in on the row index (the ket side), embedded on `qubits`.
void left_mul(const DensityMatrix& in, DensityMatrix& out, const KrausMat& k,
              const std::vector<std::uint64_t>& strides) {
    const std::size_t d = in.dim();
    const int loc = 1 << k.n_qubits;
    std::fill(out.rho.begin(), out.rho.end(), cplx{0, 0});
    for (std::size_t r = 0; r < d; ++r) {
        int lr = 0;
        for (std::size_t b = 0; b < strides.size(); ++b) {
            lr = (lr << 1) | ((r & strides[b]) ? 1 : 0);
        }
        std::size_t base = r;
        for (std::size_t b = 0; b < strides.size(); ++b) base &= ~strides[b];
        for (int lc = 0; lc < loc; ++lc) {
            const cplx coef = k.m[lr * loc + lc];
            if (coef == cplx{0, 0}) continue;
            std::size_t src = base;
            for (std::size_t b = 0; b < strides.size(); ++b) {
                if (lc & (1 << (strides.size() - 1 - b))) src |= strides[b];
            }
            for (std::size_t c = 0; c < d; ++c) {
                out.rho[r * d + c] += coef * in.rho[src * d + c];
            }
        }
    }
}

// out = rho_in * K^dag on the column index (the bra side).
void right_mul_dag(const DensityMatrix& in, DensityMatrix& out, const KrausMat& k,
                   const std::vector<std::uint64_t>& strides) {
    const std::size_t d = in.dim();
    const int loc = 1 << k.n_qubits;
    std::fill(out.rho.begin(), out.rho.end(), cplx{0, 0});
    for (std::size_t c = 0; c < d; ++c) {
        int lc = 0;
        for (std::size_t b = 0; b < strides.size(); ++b) {
            lc = (lc << 1) | ((c & strides[b]) ? 1 : 0);
        }
        std::size_t base = c;
        for (std::size_t b = 0; b < strides.size(); ++b) base &= ~strides[b];
        for (int ls = 0; ls < loc; ++ls) {
            const cplx coef = std::conj(k.m[lc * loc + ls]);
            if (coef == cplx{0, 0}) continue;
            std::size_t src = base;
            for (std::size_t b = 0; b < strides.size(); ++b) {
                if (ls & (1 << (strides.size() - 1 - b))) src |= strides[b];
            }
            for (std::size_t r = 0; r < d; ++r) {
                out.rho[r * d + c] += in.rho[r * d + src] * coef;
            }
        }
    }
}

void check_complete(const std::vector<KrausMat>& ks) {
    if (ks.empty()) throw ChannelError("apply_kraus: empty Kraus set");
    const int loc = 1 << ks.front().n_qubits;
    std::vector<cplx> acc(static_cast<std::size_t>(loc) * loc, cplx{0, 0});
    for (const KrausMat& k : ks) {
        if ((1 << k.n_qubits) != loc) throw ChannelError("apply_kraus: mixed Kraus dims");
        for (int r = 0; r < loc; ++r) {
            for (int c = 0; c < loc; ++c) {
                cplx s{0, 0};
                for (int m = 0; m < loc; ++m) {
                    s += std::conj(k.m[m * loc + r]) * k.m[m * loc + c];
                }
                acc[r * loc + c] += s;
            }
        }
    }
    for (int r = 0; r < loc; ++r) {
        for (int c = 0; c < loc; ++c) {
            const cplx want = (r == c) ? cplx{1, 0} : cplx{0, 0};
            if (std::abs(acc[r * loc + c] - want) > 1e-10) {
                throw ChannelError("apply_kraus: Kraus set is not trace preserving");
            }
        }
    }
}

}  // namespace

std::vector<KrausMat> channel(ChannelKind kind, double p) {
    if (p < 0.0 || p > 1.0) throw ChannelError("channel: probability out of [0,1]");
    std::vector<KrausMat> ks;
    switch (kind) {
        case ChannelKind::Depol1Q: {
            ks.push_back(scaled_pauli_1q(0, std::sqrt(1.0 - p)));
            const double s = std::sqrt(p / 3.0);
            for (int w = 1; w < 4; ++w) ks.push_back(scaled_pauli_1q(w, s));
            return ks;
        }
        case ChannelKind::Depol2Q: {
            ks.push_back(kron_1q(scaled_pauli_1q(0, 1.0), scaled_pauli_1q(0, std::sqrt(1.0 - p))));
            const double s = std::sqrt(p / 15.0);
            for (int a = 0; a < 4; ++a) {
                for (int b = 0; b < 4; ++b) {
                    if (a == 0 && b == 0) continue;
                    ks.push_back(kron_1q(scaled_pauli_1q(a, 1.0), scaled_pauli_1q(b, s)));
                }
            }
            return ks;
        }
        case ChannelKind::AmpDamp: {
            KrausMat k0, k1;
            k0.m = {1, 0, 0, std::sqrt(1.0 - p)};
            k1.m = {0, std::sqrt(p), 0, 0};
            return {k0, k1};
        }
        case ChannelKind::Dephase: {
            ks.push_back(scaled_pauli_1q(0, std::sqrt(1.0 - p)));
            ks.push_back(scaled_pauli_1q(3, std::sqrt(p)));
            return ks;
        }
    }
    throw ChannelError("channel: unknown kind");
}

void apply_kraus(DensityMatrix& rho, const std::vector<int>& qubits,
                 const std::vector<KrausMat>& kraus_set) {
    if (qubits.empty() || qubits.size() > 2) {
        throw IndexError("apply_kraus: expects 1 or 2 qubits");
    }
    if (kraus_set.empty() || kraus_set.front().n_qubits != static_cast<int>(qubits.size())) {
        throw ChannelError("apply_kraus: Kraus dimension does not match qubit count");
    }
    if (qubits.size() == 2 && qubits[0] == qubits[1]) {
        throw IndexError("apply_kraus: duplicate qubit");
    }
    check_complete(kraus_set);

    std::vector<std::uint64_t> strides;
    strides_of(rho, qubits, strides);

    DensityMatrix acc = rho, tmp = rho, tmp2 = rho;
    std::fill(acc.rho.begin(), acc.rho.end(), cplx{0, 0});
    for (const KrausMat& k : kraus_set) {
        left_mul(rho, tmp, k, strides);
        right_mul_dag(tmp, tmp2, k, strides);
        for (std::size_t i = 0; i < acc.rho.size(); ++i) acc.rho[i] += tmp2.rho[i];
    }
    rho = std::move(acc);
}

namespace {

void apply_unitary_noisy(DensityMatrix& rho, const GateOp& op, const NoiseParams& noise) {
    if (op.kind == OpKind::CNOT) {
        KrausMat cnot;
        cnot.n_qubits = 2;
        cnot.m = {1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 0, 1, 0, 0, 1, 0};
        apply_kraus(rho, {op.q1, op.q0}, {cnot});
        if (noise.p_depol_2q > 0) {
            apply_kraus(rho, {op.q1, op.q0}, channel(ChannelKind::Depol2Q, noise.p_depol_2q));
        }
        return;
    }
    const Gate1Q g = gate_of(op);
    KrausMat u;
    u.n_qubits = 1;
    u.m = {g.m[0][0], g.m[0][1], g.m[1][0], g.m[1][1]};
    apply_kraus(rho, {op.q0}, {u});
    if (noise.p_depol_1q > 0) {
        apply_kraus(rho, {op.q0}, channel(ChannelKind::Depol1Q, noise.p_depol_1q));
    }
    if (noise.p_amp_damp > 0) {
        apply_kraus(rho, {op.q0}, channel(ChannelKind::AmpDamp, noise.p_amp_damp));
    }
    if (noise.p_dephase > 0) {
        apply_kraus(rho, {op.q0}, channel(ChannelKind::Dephase, noise.p_dephase));
    }
}

}  // namespace

void run_noisy_circuit(DensityMatrix& rho, const Circuit& circuit, const NoiseParams& noise) {
    for (const GateOp& op : circuit) apply_unitary_noisy(rho, op, noise);
}

std::vector<double> noisy_pqc_expvals(const QuantumState& input_state, const PqcParams& params,
                                      const NoiseParams& noise, const Circuit* encoding) {
    if (input_state.n_qubits != params.n_qubits) {
        throw ShapeError("noisy_pqc_expvals: qubit mismatch");
    }
    DensityMatrix rho;
    if (encoding) {
        rho = zero_density(params.n_qubits);
        run_noisy_circuit(rho, *encoding, noise);
    } else {
        rho = density_from_state(input_state);
    }
    run_noisy_circuit(rho, pqc_circuit(params), noise);
    const double scale = 1.0 - 2.0 * noise.p_readout;
    std::vector<double> z(params.n_qubits);
    for (int q = 0; q < params.n_qubits; ++q) z[q] = scale * density_expval_z(rho, q);
    return z;
}

namespace {

// <Z> vector as a function of the encoded vector. For the amplitude kind the
// map is extended linearly in rho: E(a) = |a|^2 * E(a / |a|), which is what
// the finite-difference input Jacobian differentiates.
std::vector<double> noisy_z_of_encoded(const HybridModel& m, const std::vector<double>& enc,
                                       const PqcParams& pqc, const NoiseParams& noise) {
    if (m.spec.kind == ModelKind::QmlAngle) {
        const QuantumState psi = angle_encode(enc);
        if (noise.noisy_encoding) {
            const Circuit c = angle_circuit(enc);
            return noisy_pqc_expvals(psi, pqc, noise, &c);
        }
        return noisy_pqc_expvals(psi, pqc, noise);
    }
    double nrm2 = 0.0;
    for (double v : enc) nrm2 += v * v;
    const int n = m.spec.n_qubits;
    std::vector<double> z;
    if (noise.noisy_encoding) {
        const EncodingPlan plan = amplitude_plan(enc, n);
        QuantumState zero = new_zero_state(n);
        const Circuit c = amplitude_circuit(plan);
        z = noisy_pqc_expvals(zero, pqc, noise, &c);
    } else {
        QuantumState psi = amplitude_encode(enc, n);
        z = noisy_pqc_expvals(psi, pqc, noise);
    }
    for (double& v : z) v *= nrm2;
    return z;
}

}  // namespace

double noisy_forward(const HybridModel& model, const std::vector<double>& x,
                     const NoiseParams& noise) {
    if (model.spec.kind == ModelKind::FNN) {
        throw SpecError("noisy_forward: FNN has no quantum stage");
    }
    const std::vector<double> h =
        leaky_relu(dense_forward(model.hidden, x), model.spec.leaky_slope);
    std::vector<double> enc;
    if (model.spec.kind == ModelKind::QmlAngle) {
        enc = dense_forward(model.aux, h);
    } else {
        enc = padded_normalized(h, model.spec.n_qubits);
    }
    const std::vector<double> z = noisy_z_of_encoded(model, enc, model.pqc, noise);
    return dense_forward(model.output, z)[0];
}

BatchGrads noisy_train_gradient(const HybridModel& model,
                                const std::vector<std::vector<double>>& X,
                                const std::vector<double>& y, const NoiseParams& noise,
                                bool experimental_ok) {
    if (model.spec.kind == ModelKind::FNN) {
        throw SpecError("noisy_train_gradient: FNN has no quantum stage");
    }
    if (model.spec.n_qubits > 4 && !experimental_ok) {
        throw SpecError("noisy_train_gradient: density-matrix training beyond 4 qubits is "
                        "experimental; pass experimental_ok");
    }
    if (X.empty() || X.size() != y.size()) {
        throw EmptyBatchError("noisy_train_gradient: empty or mismatched batch");
    }

    // Flat layout mirrors HybridModel::flatten().
    std::vector<double> flat_grads(model.param_count(), 0.0);
    std::size_t pos = 0;
    const std::size_t off_hidden_w = pos; pos += model.hidden.weights.size();
    const std::size_t off_hidden_b = pos; pos += model.hidden.bias.size();
    pos += model.fnn_second.weights.size() + model.fnn_second.bias.size();
    const std::size_t off_aux_w = pos; pos += model.aux.weights.size();
    const std::size_t off_pqc = pos; pos += model.pqc.count();
    const std::size_t off_out_w = pos; pos += model.output.weights.size();
    const std::size_t off_out_b = pos;

    BatchGrads out;
    out.preds.assign(X.size(), 0.0);
    const double B = static_cast<double>(X.size());
    constexpr double fd_step = 1e-6;
    std::span<double> fs(flat_grads);

    for (std::size_t s = 0; s < X.size(); ++s) {
        const std::vector<double> h_pre = dense_forward(model.hidden, X[s]);
        const std::vector<double> h = leaky_relu(h_pre, model.spec.leaky_slope);
        std::vector<double> enc;
        if (model.spec.kind == ModelKind::QmlAngle) {
            enc = dense_forward(model.aux, h);
        } else {
            enc = padded_normalized(h, model.spec.n_qubits);
        }
        const std::vector<double> z = noisy_z_of_encoded(model, enc, model.pqc, noise);
        const double pred = dense_forward(model.output, z)[0];
        out.preds[s] = pred;
        const double g = 2.0 * (pred - y[s]) / B;

        std::vector<double> u;  // dL/dz
        dense_backward_acc(model.output, z, {g}, fs.subspan(off_out_w), fs.subspan(off_out_b),
                           u);

        // PQC angles via the two-term shift rule under the noisy simulator.
        const std::vector<double> theta_grads = parameter_shift_gradient(
            [&](const PqcParams& p) {
                const std::vector<double> zz = noisy_z_of_encoded(model, enc, p, noise);
                double acc = 0.0;
                for (std::size_t i = 0; i < u.size(); ++i) acc += u[i] * zz[i];
                return acc;
            },
            model.pqc);
        for (std::size_t i = 0; i < theta_grads.size(); ++i) {
            flat_grads[off_pqc + i] += theta_grads[i];
        }

        // dL/d(encoded vector) by central finite differences.
        std::vector<double> d_enc(enc.size(), 0.0);
        std::vector<double> e = enc;
        for (std::size_t j = 0; j < enc.size(); ++j) {
            e[j] = enc[j] + fd_step;
            const std::vector<double> zp = noisy_z_of_encoded(model, e, model.pqc, noise);
            e[j] = enc[j] - fd_step;
            const std::vector<double> zm = noisy_z_of_encoded(model, e, model.pqc, noise);
            e[j] = enc[j];
            double acc = 0.0;
            for (std::size_t i = 0; i < u.size(); ++i) {
                acc += u[i] * (zp[i] - zm[i]) / (2.0 * fd_step);
            }
            d_enc[j] = acc;
        }

        std::vector<double> d_h;
        if (model.spec.kind == ModelKind::QmlAngle) {
            dense_backward_acc(model.aux, h, d_enc, fs.subspan(off_aux_w),
                               std::span<double>{}, d_h);
        } else {
            // Chain d_enc through the normalize-then-pad Jacobian.
            double nrm2 = 0.0, dot = 0.0;
            for (std::size_t j = 0; j < h.size(); ++j) {
                nrm2 += h[j] * h[j];
                dot += h[j] * d_enc[j];
            }
            const double nrm = std::sqrt(nrm2);
            d_h.resize(h.size());
            for (std::size_t j = 0; j < h.size(); ++j) {
                d_h[j] = d_enc[j] / nrm - h[j] * dot / (nrm2 * nrm);
            }
        }
        const std::vector<double> d_h_pre =
            leaky_relu_backward(h_pre, model.spec.leaky_slope, d_h);
        std::vector<double> d_x;
        dense_backward_acc(model.hidden, X[s], d_h_pre, fs.subspan(off_hidden_w),
                           fs.subspan(off_hidden_b), d_x);
    }

    out.grads = std::move(flat_grads);
    return out;
}

TrainHistory noisy_train(HybridModel& model, const Dataset& train_set, const Dataset& test_set,
                         const TrainConfig& config, const NoiseParams& noise,
                         bool experimental_ok) {
    if (train_set.n_obs == 0 || test_set.n_obs == 0) {
        throw EmptyBatchError("noisy_train: empty dataset");
    }
    std::vector<double> params = model.flatten();
    AdamState adam = AdamState::make(params.size(), config.learning_rate);
    std::mt19937_64 rng(config.shuffle_seed);
    std::vector<std::size_t> order(train_set.n_obs);
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    auto eval_rmse = [&](const Dataset& ds, std::vector<double>* residuals) {
        std::vector<double> preds(ds.n_obs);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(std::max(config.threads, 1))
#endif
        for (std::int64_t i = 0; i < static_cast<std::int64_t>(ds.n_obs); ++i) {
            preds[i] = noisy_forward(model, ds.row_vec(i), noise);
        }
        if (residuals) {
            residuals->resize(ds.n_obs);
            for (std::size_t i = 0; i < ds.n_obs; ++i) {
                (*residuals)[i] = preds[i] - ds.targets[i];
            }
        }
        return mse_and_rmse(preds, ds.targets).second;
    };

    TrainHistory hist;
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(config.batch_size)) {
            const std::size_t end =
                std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
            std::vector<std::vector<double>> X;
            std::vector<double> y;
            for (std::size_t k = start; k < end; ++k) {
                X.push_back(train_set.row_vec(order[k]));
                y.push_back(train_set.targets[order[k]]);
            }
            const BatchGrads bg = noisy_train_gradient(model, X, y, noise, experimental_ok);
            adam_step(params, bg.grads, adam);
            model.set_flat(params);
        }
        std::vector<double> resid;
        hist.train_rmse.push_back(eval_rmse(train_set, nullptr));
        hist.test_rmse.push_back(eval_rmse(test_set, &resid));
        hist.epoch_test_residuals.push_back(std::move(resid));
        hist.seconds.push_back(
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    return hist;
}

}  // namespace qrecover
