#include "qrecover/hybrid.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <json.hpp>

#include "qrecover/encoders.hpp"

namespace qrecover {

std::string to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::FNN: return "fnn";
        case ModelKind::QmlAngle: return "qml-angle";
        case ModelKind::QmlAmplitude: return "qml-amplitude";
    }
    return "?";
}

ModelKind model_kind_from_string(const std::string& s) {
    if (s == "fnn") return ModelKind::FNN;
    if (s == "qml-angle") return ModelKind::QmlAngle;
    if (s == "qml-amplitude") return ModelKind::QmlAmplitude;
    throw SpecError("unknown model kind '" + s + "'");
}

HybridModel build_model(const ModelSpec& spec) {
    if (spec.input_dim < 1 || spec.hidden_dim < 1 || spec.pqc_layers < 1) {
        throw SpecError("build_model: dimensions must be positive");
    }
    if (spec.kind == ModelKind::QmlAmplitude &&
        spec.hidden_dim > (1 << spec.n_qubits)) {
        throw SpecError("build_model: hidden_dim exceeds 2^n_qubits for amplitude encoding");
    }
    std::mt19937_64 rng(spec.seed);
    HybridModel m;
    m.spec = spec;
    m.hidden = make_dense(spec.input_dim, spec.hidden_dim, true, rng);
    int head_in = 0;
    switch (spec.kind) {
        case ModelKind::FNN:
            m.fnn_second = make_dense(spec.hidden_dim, spec.fnn_second_hidden, true, rng);
            head_in = spec.fnn_second_hidden;
            break;
        case ModelKind::QmlAngle:
            m.aux = make_dense(spec.hidden_dim, spec.n_qubits, false, rng);
            head_in = spec.n_qubits;
            break;
        case ModelKind::QmlAmplitude:
            head_in = spec.n_qubits;
            break;
    }
    if (spec.kind != ModelKind::FNN) {
        m.pqc = PqcParams::zeros(spec.n_qubits, spec.pqc_layers);
        std::uniform_real_distribution<double> full(0.0, 2.0 * std::numbers::pi);
        for (double& t : m.pqc.thetas) t = full(rng);
    }
    m.output = make_dense(head_in, 1, true, rng);
    return m;
}

std::size_t count_params(const ModelSpec& spec) {
    const std::size_t in = spec.input_dim, h = spec.hidden_dim;
    const std::size_t base = in * h + h;  // shared hidden layer
    switch (spec.kind) {
        case ModelKind::FNN: {
            const std::size_t s = spec.fnn_second_hidden;
            return base + (h * s + s) + (s + 1);
        }
        case ModelKind::QmlAngle: {
            const std::size_t n = spec.n_qubits;
            return base + h * n + 3ull * spec.pqc_layers * n + (n + 1);
        }
        case ModelKind::QmlAmplitude: {
            const std::size_t n = spec.n_qubits;
            return base + 3ull * spec.pqc_layers * n + (n + 1);
        }
    }
    throw SpecError("count_params: unknown kind");
}

std::size_t HybridModel::param_count() const {
    return hidden.param_count() + fnn_second.param_count() + aux.param_count() +
           pqc.count() + output.param_count();
}

namespace {

void append(std::vector<double>& out, const std::vector<double>& v) {
    out.insert(out.end(), v.begin(), v.end());
}

void take(const std::vector<double>& flat, std::size_t& pos, std::vector<double>& dst) {
    std::copy(flat.begin() + pos, flat.begin() + pos + dst.size(), dst.begin());
    pos += dst.size();
}

}  // namespace

std::vector<double> HybridModel::flatten() const {
    std::vector<double> flat;
    flat.reserve(param_count());
    append(flat, hidden.weights);
    append(flat, hidden.bias);
    append(flat, fnn_second.weights);
    append(flat, fnn_second.bias);
    append(flat, aux.weights);
    append(flat, pqc.thetas);
    append(flat, output.weights);
    append(flat, output.bias);
    return flat;
}

void HybridModel::set_flat(const std::vector<double>& flat) {
    if (flat.size() != param_count()) throw ShapeError("set_flat: size mismatch");
    std::size_t pos = 0;
    take(flat, pos, hidden.weights);
    take(flat, pos, hidden.bias);
    take(flat, pos, fnn_second.weights);
    take(flat, pos, fnn_second.bias);
    take(flat, pos, aux.weights);
    take(flat, pos, pqc.thetas);
    take(flat, pos, output.weights);
    take(flat, pos, output.bias);
}

namespace {

struct FlatLayout {
    std::size_t hidden_w, hidden_b, second_w, second_b, aux_w, pqc, out_w, out_b, total;
};

FlatLayout layout_of(const HybridModel& m) {
    FlatLayout L{};
    std::size_t pos = 0;
    L.hidden_w = pos; pos += m.hidden.weights.size();
    L.hidden_b = pos; pos += m.hidden.bias.size();
    L.second_w = pos; pos += m.fnn_second.weights.size();
    L.second_b = pos; pos += m.fnn_second.bias.size();
    L.aux_w = pos;    pos += m.aux.weights.size();
    L.pqc = pos;      pos += m.pqc.count();
    L.out_w = pos;    pos += m.output.weights.size();
    L.out_b = pos;    pos += m.output.bias.size();
    L.total = pos;
    return L;
}

QuantumState state_from_amplitudes(const std::vector<double>& a, int n_qubits) {
    QuantumState st;
    st.n_qubits = n_qubits;
    st.amps.resize(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) st.amps[i] = cplx{a[i], 0.0};
    return st;
}

struct ForwardCache {
    std::vector<double> h_pre, h;
    std::vector<double> s_pre, s;   // FNN
    std::vector<double> ang;        // QmlAngle
    QuantumState encoded;           // QML kinds, pre-PQC
    std::vector<double> z;          // QML kinds
    double pred = 0.0;
};

ForwardCache forward_cached(const HybridModel& m, const std::vector<double>& x) {
    ForwardCache c;
    c.h_pre = dense_forward(m.hidden, x);
    c.h = leaky_relu(c.h_pre, m.spec.leaky_slope);
    switch (m.spec.kind) {
        case ModelKind::FNN:
            c.s_pre = dense_forward(m.fnn_second, c.h);
            c.s = leaky_relu(c.s_pre, m.spec.leaky_slope);
            c.pred = dense_forward(m.output, c.s)[0];
            return c;
        case ModelKind::QmlAmplitude:
            // Mathematically identical to running the Mottonen circuit.
            c.encoded = state_from_amplitudes(padded_normalized(c.h, m.spec.n_qubits),
                                              m.spec.n_qubits);
            break;
        case ModelKind::QmlAngle:
            c.ang = dense_forward(m.aux, c.h);
            c.encoded = angle_encode(c.ang);
            break;
    }
    QuantumState out = pqc_forward(c.encoded, m.pqc);
    c.z = measure_all_z(out);
    c.pred = dense_forward(m.output, c.z)[0];
    return c;
}

// Accumulates one sample's gradient contribution (upstream dL/dpred = g).
void backward_sample(const HybridModel& m, const FlatLayout& L, const std::vector<double>& x,
                     const ForwardCache& c, double g, std::vector<double>& flat) {
    const int n = m.spec.n_qubits;
    std::span<double> fs(flat);

    const std::vector<double>& head_in =
        m.spec.kind == ModelKind::FNN ? c.s : c.z;
    std::vector<double> d_head;
    {
        std::vector<double> up{g};
        dense_backward_acc(m.output, head_in, up, fs.subspan(L.out_w),
                           fs.subspan(L.out_b), d_head);
    }

    std::vector<double> d_h;
    if (m.spec.kind == ModelKind::FNN) {
        const std::vector<double> d_s_pre =
            leaky_relu_backward(c.s_pre, m.spec.leaky_slope, d_head);
        dense_backward_acc(m.fnn_second, c.h, d_s_pre, fs.subspan(L.second_w),
                           fs.subspan(L.second_b), d_h);
    } else {
        const AdjointResult adj = adjoint_gradient(c.encoded, m.pqc, d_head);
        for (std::size_t i = 0; i < adj.grad_thetas.size(); ++i) {
            flat[L.pqc + i] += adj.grad_thetas[i];
        }
        if (m.spec.kind == ModelKind::QmlAmplitude) {
            // Chain through the normalize-then-pad Jacobian in closed form:
            // dh_j = gre_j/|v| - v_j (v . gre)/|v|^3 on the unpadded block.
            const std::vector<double>& v = c.h;
            double nrm2 = 0.0, dot = 0.0;
            for (std::size_t j = 0; j < v.size(); ++j) {
                nrm2 += v[j] * v[j];
                dot += v[j] * adj.grad_input[j].real();
            }
            const double nrm = std::sqrt(nrm2);
            d_h.resize(v.size());
            for (std::size_t j = 0; j < v.size(); ++j) {
                d_h[j] = adj.grad_input[j].real() / nrm - v[j] * dot / (nrm2 * nrm);
            }
        } else {
            // d<E>/d(angle_i) = Re <grad_input| (-i X_i / 2) |psi>.
            std::vector<double> d_ang(n, 0.0);
            const std::vector<cplx>& gi = adj.grad_input;
            const std::vector<cplx>& psi = c.encoded.amps;
            for (int q = 0; q < n; ++q) {
                const std::uint64_t s = qubit_stride(n, q);
                cplx acc{0.0, 0.0};
                for (std::uint64_t k = 0; k < psi.size(); ++k) {
                    acc += std::conj(gi[k]) * cplx{0.0, -0.5} * psi[k ^ s];
                }
                d_ang[q] = acc.real();
            }
            dense_backward_acc(m.aux, c.h, d_ang, fs.subspan(L.aux_w),
                               std::span<double>{}, d_h);
        }
    }

    const std::vector<double> d_h_pre = leaky_relu_backward(c.h_pre, m.spec.leaky_slope, d_h);
    std::vector<double> d_x;
    dense_backward_acc(m.hidden, x, d_h_pre, fs.subspan(L.hidden_w), fs.subspan(L.hidden_b),
                       d_x);
}

}  // namespace

double forward(const HybridModel& model, const std::vector<double>& x) {
    if (x.size() != static_cast<std::size_t>(model.spec.input_dim)) {
        throw ShapeError("forward: input length mismatch");
    }
    return forward_cached(model, x).pred;
}

BatchGrads backward(const HybridModel& model, const std::vector<std::vector<double>>& X,
                    const std::vector<double>& y, int threads) {
    if (X.empty() || X.size() != y.size()) {
        throw EmptyBatchError("backward: empty or mismatched batch");
    }
    const FlatLayout L = layout_of(model);
    const std::size_t B = X.size();
    BatchGrads out;
    out.preds.assign(B, 0.0);

    if (threads <= 1) {
        out.grads.assign(L.total, 0.0);
        for (std::size_t i = 0; i < B; ++i) {
            const ForwardCache c = forward_cached(model, X[i]);
            out.preds[i] = c.pred;
            const double g = 2.0 * (c.pred - y[i]) / static_cast<double>(B);
            backward_sample(model, L, X[i], c, g, out.grads);
        }
        return out;
    }

    // Per-thread accumulators merged in thread order: deterministic for a
    // fixed thread count, tolerance-reproducible across counts.
    std::vector<std::vector<double>> partial(threads, std::vector<double>(L.total, 0.0));
#pragma omp parallel for schedule(static) num_threads(threads)
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(B); ++i) {
#ifdef _OPENMP
        const std::size_t t = static_cast<std::size_t>(omp_get_thread_num());
#else
        const std::size_t t = 0;
#endif
        const ForwardCache c = forward_cached(model, X[i]);
        out.preds[i] = c.pred;
        const double g = 2.0 * (c.pred - y[i]) / static_cast<double>(B);
        backward_sample(model, L, X[i], c, g, partial[t]);
    }
    out.grads.assign(L.total, 0.0);
    for (const auto& p : partial) {
        for (std::size_t j = 0; j < L.total; ++j) out.grads[j] += p[j];
    }
    return out;
}

std::vector<double> predict_all(const HybridModel& model, const Dataset& ds, int threads) {
    std::vector<double> preds(ds.n_obs, 0.0);
#pragma omp parallel for schedule(static) num_threads(std::max(threads, 1))
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(ds.n_obs); ++i) {
        preds[i] = forward(model, ds.row_vec(i));
    }
    return preds;
}

TrainHistory train(HybridModel& model, const Dataset& train_set, const Dataset& test_set,
                   const TrainConfig& config) {
    if (train_set.n_obs == 0 || test_set.n_obs == 0) {
        throw EmptyBatchError("train: empty dataset");
    }
    if (train_set.n_features != static_cast<std::size_t>(model.spec.input_dim)) {
        throw ShapeError("train: feature dim does not match model input_dim");
    }
    if (config.epochs < 1 || config.batch_size < 1) {
        throw SpecError("train: epochs and batch_size must be >= 1");
    }

    std::vector<double> params = model.flatten();
    AdamState adam = AdamState::make(params.size(), config.learning_rate);
    std::mt19937_64 rng(config.shuffle_seed);

    std::vector<std::size_t> order(train_set.n_obs);
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    TrainHistory hist;
    hist.train_rmse.reserve(config.epochs);
    hist.test_rmse.reserve(config.epochs);
    hist.seconds.reserve(config.epochs);
    hist.epoch_test_residuals.reserve(config.epochs);

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        const auto t0 = std::chrono::steady_clock::now();
        std::shuffle(order.begin(), order.end(), rng);
        double sq_err = 0.0;  // running train MSE over the epoch's mini-batches
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(config.batch_size)) {
            const std::size_t end =
                std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
            std::vector<std::vector<double>> X;
            std::vector<double> y;
            X.reserve(end - start);
            y.reserve(end - start);
            for (std::size_t k = start; k < end; ++k) {
                X.push_back(train_set.row_vec(order[k]));
                y.push_back(train_set.targets[order[k]]);
            }
            const BatchGrads bg = backward(model, X, y, config.threads);
            for (std::size_t k = 0; k < y.size(); ++k) {
                const double d = bg.preds[k] - y[k];
                sq_err += d * d;
            }
            adam_step(params, bg.grads, adam);
            model.set_flat(params);
        }

        const std::vector<double> test_preds = predict_all(model, test_set, config.threads);
        hist.train_rmse.push_back(std::sqrt(sq_err / static_cast<double>(train_set.n_obs)));
        hist.test_rmse.push_back(mse_and_rmse(test_preds, test_set.targets).second);
        std::vector<double> resid(test_set.n_obs);
        for (std::size_t i = 0; i < test_set.n_obs; ++i) {
            resid[i] = test_preds[i] - test_set.targets[i];
        }
        hist.epoch_test_residuals.push_back(std::move(resid));
        hist.seconds.push_back(
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    return hist;
}

void save_checkpoint(const HybridModel& model, const std::string& rng_state,
                     const std::string& path) {
    nlohmann::json j;
    j["format_version"] = 1;
    j["spec"] = {{"kind", to_string(model.spec.kind)},
                 {"input_dim", model.spec.input_dim},
                 {"hidden_dim", model.spec.hidden_dim},
                 {"n_qubits", model.spec.n_qubits},
                 {"fnn_second_hidden", model.spec.fnn_second_hidden},
                 {"pqc_layers", model.spec.pqc_layers},
                 {"leaky_slope", model.spec.leaky_slope},
                 {"seed", model.spec.seed}};
    j["params"] = model.flatten();
    j["rng_state"] = rng_state;
    std::ofstream out(path);
    if (!out) throw MissingFile("cannot write checkpoint '" + path + "'");
    out << j.dump(2) << '\n';
}

HybridModel load_checkpoint(const std::string& path, std::string* rng_state) {
    std::ifstream in(path);
    if (!in) throw MissingFile("cannot open checkpoint '" + path + "'");
    nlohmann::json j;
    in >> j;
    if (j.value("format_version", 0) != 1) {
        throw SpecError("unsupported checkpoint format version");
    }
    ModelSpec spec;
    const auto& s = j.at("spec");
    spec.kind = model_kind_from_string(s.at("kind").get<std::string>());
    spec.input_dim = s.at("input_dim").get<int>();
    spec.hidden_dim = s.at("hidden_dim").get<int>();
    spec.n_qubits = s.at("n_qubits").get<int>();
    spec.fnn_second_hidden = s.at("fnn_second_hidden").get<int>();
    spec.pqc_layers = s.at("pqc_layers").get<int>();
    spec.leaky_slope = s.at("leaky_slope").get<double>();
    spec.seed = s.at("seed").get<std::uint64_t>();
    HybridModel m = build_model(spec);
    m.set_flat(j.at("params").get<std::vector<double>>());
    if (rng_state) *rng_state = j.value("rng_state", "");
    return m;
}

}  // namespace qrecover
