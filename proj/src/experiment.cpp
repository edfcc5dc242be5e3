#include "qrecover/experiment.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace fs = std::filesystem;

namespace qrecover {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

struct KvFile {
    // section -> key -> value, plus line numbers for diagnostics
    std::map<std::string, std::map<std::string, std::string>> sections;
};

KvFile parse_kv(const std::string& text, const std::string& origin) {
    KvFile kv;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw ConfigError(origin + ":" + std::to_string(lineno) +
                                  ": malformed section header '" + line + "'");
            }
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(origin + ":" + std::to_string(lineno) +
                              ": expected 'key = value', got '" + line + "'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
        }
        kv.sections[section][key] = val;
    }
    return kv;
}

class Reader {
  public:
    Reader(const KvFile& kv, const std::string& origin) : kv_(kv), origin_(origin) {}

    bool has(const std::string& sec, const std::string& key) const {
        auto s = kv_.sections.find(sec);
        return s != kv_.sections.end() && s->second.count(key) > 0;
    }
    std::string str(const std::string& sec, const std::string& key,
                    const std::string& fallback) const {
        auto s = kv_.sections.find(sec);
        if (s == kv_.sections.end()) return fallback;
        auto it = s->second.find(key);
        return it == s->second.end() ? fallback : it->second;
    }
    template <typename T>
    T num(const std::string& sec, const std::string& key, T fallback) const {
        if (!has(sec, key)) return fallback;
        const std::string v = str(sec, key, "");
        try {
            if constexpr (std::is_floating_point_v<T>) {
                std::size_t used = 0;
                const double d = std::stod(v, &used);
                if (used != v.size()) throw std::invalid_argument(v);
                return static_cast<T>(d);
            } else {
                std::size_t used = 0;
                const long long d = std::stoll(v, &used);
                if (used != v.size()) throw std::invalid_argument(v);
                return static_cast<T>(d);
            }
        } catch (const std::exception&) {
            throw ConfigError(origin_ + ": key [" + sec + "]." + key +
                              " has non-numeric value '" + v + "'");
        }
    }
    bool flag(const std::string& sec, const std::string& key, bool fallback) const {
        if (!has(sec, key)) return fallback;
        const std::string v = str(sec, key, "");
        if (v == "true" || v == "on" || v == "1" || v == "yes") return true;
        if (v == "false" || v == "off" || v == "0" || v == "no") return false;
        throw ConfigError(origin_ + ": key [" + sec + "]." + key + " has non-boolean value '" +
                          v + "'");
    }

  private:
    const KvFile& kv_;
    std::string origin_;
};

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw MissingFile("cannot write '" + path.string() + "'");
    out << text;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text, const std::string& origin) {
    const KvFile kv = parse_kv(text, origin);
    const Reader r(kv, origin);
    ExperimentConfig cfg;

    cfg.model.kind = model_kind_from_string(r.str("model", "kind", "qml-amplitude"));
    cfg.model.input_dim = r.num<int>("model", "input_dim", 256);
    cfg.model.hidden_dim = r.num<int>("model", "hidden_dim", cfg.model.input_dim);
    cfg.model.n_qubits = r.num<int>("model", "n_qubits", 8);
    cfg.model.fnn_second_hidden = r.num<int>("model", "fnn_second_hidden", 8);
    cfg.model.pqc_layers = r.num<int>("model", "pqc_layers", 1);
    cfg.model.leaky_slope = r.num<double>("model", "leaky_slope", -0.3);

    cfg.train.epochs = r.num<int>("train", "epochs", 100);
    cfg.train.batch_size = r.num<int>("train", "batch_size", 64);
    cfg.train.learning_rate = r.num<double>("train", "learning_rate", 0.001);
    cfg.train.threads = r.num<int>("train", "threads", 1);

    const std::string src = r.str("data", "source", "synth");
    if (src == "synth") {
        cfg.data.synthetic = true;
    } else if (src == "csv") {
        cfg.data.synthetic = false;
        cfg.data.csv_path = r.str("data", "csv_path", "");
        if (cfg.data.csv_path.empty()) {
            throw ConfigError(origin + ": [data].csv_path is required when source = csv");
        }
    } else {
        throw ConfigError(origin + ": [data].source must be synth or csv, got '" + src + "'");
    }
    cfg.data.target_column = r.str("data", "target_column", "recovery_rate");
    const std::string delim = r.str("data", "delimiter", ",");
    if (delim.size() != 1) throw ConfigError(origin + ": [data].delimiter must be one char");
    cfg.data.delimiter = delim[0];
    cfg.data.n_obs = r.num<long long>("data", "n_obs", 1725);
    cfg.data.n_features = r.num<long long>("data", "n_features", 256);
    cfg.data.scaling = scaling_from_string(r.str("data", "scaling", "zscore"));

    const std::string proto = r.str("protocol", "kind", "cv");
    if (proto == "cv") {
        cfg.protocol = Protocol::Cv;
    } else if (proto == "loocv") {
        cfg.protocol = Protocol::Loocv;
    } else {
        throw ConfigError(origin + ": [protocol].kind must be cv or loocv");
    }
    cfg.k = r.num<int>("protocol", "k", 4);
    cfg.dm_alpha = r.num<double>("protocol", "dm_alpha", 0.05);

    if (r.flag("noise", "enabled", false)) {
        NoiseParams np;
        np.p_depol_1q = r.num<double>("noise", "p_depol_1q", np.p_depol_1q);
        np.p_depol_2q = r.num<double>("noise", "p_depol_2q", np.p_depol_2q);
        np.p_amp_damp = r.num<double>("noise", "p_amp_damp", np.p_amp_damp);
        np.p_dephase = r.num<double>("noise", "p_dephase", np.p_dephase);
        np.p_readout = r.num<double>("noise", "p_readout", np.p_readout);
        np.noisy_encoding = r.flag("noise", "noisy_encoding", true);
        cfg.noise = np;
    }

    cfg.seed = r.num<long long>("experiment", "seed", 0);
    cfg.model.seed = cfg.seed;  // per-fold offsets are applied by the runner
    cfg.train.shuffle_seed = cfg.seed;
    cfg.output_dir = r.str("output", "dir", "");
    cfg.timing = r.flag("output", "timing", true);
    cfg.force = r.flag("output", "force", false);
    return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw MissingFile("MissingFile: cannot open config '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path);
}

std::string render_config(const ExperimentConfig& cfg) {
    std::ostringstream out;
    out << "[experiment]\nseed = " << cfg.seed << "\n\n";
    out << "[model]\nkind = " << to_string(cfg.model.kind)
        << "\ninput_dim = " << cfg.model.input_dim << "\nhidden_dim = " << cfg.model.hidden_dim
        << "\nn_qubits = " << cfg.model.n_qubits
        << "\nfnn_second_hidden = " << cfg.model.fnn_second_hidden
        << "\npqc_layers = " << cfg.model.pqc_layers
        << "\nleaky_slope = " << fmt(cfg.model.leaky_slope) << "\n\n";
    out << "[train]\nepochs = " << cfg.train.epochs << "\nbatch_size = " << cfg.train.batch_size
        << "\nlearning_rate = " << fmt(cfg.train.learning_rate)
        << "\nthreads = " << cfg.train.threads << "\n\n";
    out << "[data]\nsource = " << (cfg.data.synthetic ? "synth" : "csv") << "\n";
    if (!cfg.data.synthetic) out << "csv_path = " << cfg.data.csv_path << "\n";
    out << "target_column = " << cfg.data.target_column << "\nn_obs = " << cfg.data.n_obs
        << "\nn_features = " << cfg.data.n_features << "\nscaling = "
        << (cfg.data.scaling == Scaling::ZScore
                ? "zscore"
                : cfg.data.scaling == Scaling::MinMax ? "minmax" : "none")
        << "\n\n";
    out << "[protocol]\nkind = " << (cfg.protocol == Protocol::Cv ? "cv" : "loocv")
        << "\nk = " << cfg.k << "\ndm_alpha = " << fmt(cfg.dm_alpha) << "\n\n";
    out << "[noise]\nenabled = " << (cfg.noise ? "true" : "false") << "\n";
    if (cfg.noise) {
        out << "p_depol_1q = " << fmt(cfg.noise->p_depol_1q)
            << "\np_depol_2q = " << fmt(cfg.noise->p_depol_2q)
            << "\np_amp_damp = " << fmt(cfg.noise->p_amp_damp)
            << "\np_dephase = " << fmt(cfg.noise->p_dephase)
            << "\np_readout = " << fmt(cfg.noise->p_readout) << "\nnoisy_encoding = "
            << (cfg.noise->noisy_encoding ? "true" : "false") << "\n";
    }
    out << "\n[output]\ndir = " << cfg.output_dir << "\ntiming = "
        << (cfg.timing ? "on" : "off") << "\n";
    return out.str();
}

void apply_env_seed(ExperimentConfig& cfg) {
    if (const char* env = std::getenv("QRECOVER_SEED")) {
        try {
            cfg.seed = std::stoull(env);
        } catch (const std::exception&) {
            throw ConfigError("QRECOVER_SEED is not a valid integer: '" + std::string(env) +
                              "'");
        }
    }
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    Dataset raw;
    if (cfg.data.synthetic) {
        raw = synth_recovery(cfg.data.n_obs, cfg.data.n_features, cfg.seed);
    } else {
        raw = load_csv(cfg.data.csv_path, cfg.data.target_column, cfg.data.delimiter);
    }
    if (raw.n_features != static_cast<std::size_t>(cfg.model.input_dim)) {
        throw SpecError("dataset has " + std::to_string(raw.n_features) +
                        " features, model expects " + std::to_string(cfg.model.input_dim));
    }

    ExperimentResult res;
    res.plan = cfg.protocol == Protocol::Cv ? kfold_split(raw.n_obs, cfg.k, cfg.seed + 1)
                                            : loocv_plan(raw.n_obs);
    res.param_count = count_params(cfg.model);

    std::vector<std::vector<double>> curves;
    for (int f = 0; f < res.plan.k; ++f) {
        const std::vector<std::size_t> train_rows = res.plan.train_rows(f);
        const std::vector<std::size_t> test_rows = res.plan.test_rows(f);
        const Dataset scaled = apply_scaling(raw, train_rows, cfg.data.scaling);
        const Dataset train_set = scaled.subset(train_rows);
        const Dataset test_set = scaled.subset(test_rows);

        ModelSpec spec = cfg.model;
        spec.seed = cfg.seed + 100 + static_cast<std::uint64_t>(f);
        HybridModel model = build_model(spec);

        TrainConfig tc = cfg.train;
        tc.shuffle_seed = cfg.seed + 200 + static_cast<std::uint64_t>(f);

        FoldRun run;
        run.test_rows = test_rows;
        if (cfg.noise && cfg.model.kind != ModelKind::FNN) {
            run.history = noisy_train(model, train_set, test_set, tc, *cfg.noise);
        } else {
            run.history = train(model, train_set, test_set, tc);
        }
        curves.push_back(run.history.test_rmse);
        run.model = std::move(model);
        res.folds.push_back(std::move(run));
    }
    res.summary = aggregate_curves(curves);
    return res;
}

void write_reports(const ExperimentConfig& cfg, const ExperimentResult& res) {
    if (cfg.output_dir.empty()) throw ConfigError("[output].dir is required");
    const fs::path dir(cfg.output_dir);
    fs::create_directories(dir);
    const std::vector<std::string> names = {"rmse.csv", "residuals.csv", "summary.json",
                                            "config.txt"};
    if (!cfg.force) {
        for (const auto& n : names) {
            if (fs::exists(dir / n)) {
                throw std::runtime_error("refusing to overwrite existing report '" +
                                         (dir / n).string() + "' (use --force)");
            }
        }
    }

    std::ostringstream rmse;
    rmse << "fold,epoch,train_rmse,test_rmse,seconds\n";
    std::ostringstream resid;
    resid << "observation_id,fold,epoch,residual\n";
    for (std::size_t f = 0; f < res.folds.size(); ++f) {
        const FoldRun& run = res.folds[f];
        for (std::size_t e = 0; e < run.history.train_rmse.size(); ++e) {
            rmse << f << ',' << (e + 1) << ',' << fmt(run.history.train_rmse[e]) << ','
                 << fmt(run.history.test_rmse[e]) << ','
                 << fmt(cfg.timing ? run.history.seconds[e] : 0.0) << '\n';
            const std::vector<double>& r = run.history.epoch_test_residuals[e];
            for (std::size_t i = 0; i < r.size(); ++i) {
                resid << run.test_rows[i] << ',' << f << ',' << (e + 1) << ',' << fmt(r[i])
                      << '\n';
            }
        }
    }
    write_text(dir / "rmse.csv", rmse.str());
    write_text(dir / "residuals.csv", resid.str());

    nlohmann::json j;
    j["model_kind"] = to_string(cfg.model.kind);
    j["param_count"] = res.param_count;
    j["protocol"] = cfg.protocol == Protocol::Cv ? "cv" : "loocv";
    j["k"] = res.plan.k;
    j["epochs"] = cfg.train.epochs;
    j["best_avg_test_rmse"] = res.summary.best_mean_rmse;
    j["best_epoch"] = res.summary.best_epoch;
    j["std_at_best_epoch"] = res.summary.std_rmse[res.summary.best_epoch - 1];
    j["noise_enabled"] = static_cast<bool>(cfg.noise);
    j["seed"] = cfg.seed;
    write_text(dir / "summary.json", nlohmann::json(j).dump(2) + "\n");
    write_text(dir / "config.txt", render_config(cfg));

    for (std::size_t f = 0; f < res.folds.size(); ++f) {
        save_checkpoint(res.folds[f].model, "",
                        (dir / ("model_fold" + std::to_string(f) + ".json")).string());
    }
}

int cmd_run(const ExperimentConfig& cfg) {
    const ExperimentResult res = run_experiment(cfg);
    write_reports(cfg, res);
    return 0;
}

ResidualTable load_residuals_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw MissingFile("MissingFile: cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw EmptyFile("EmptyFile: '" + path + "'");
    ResidualTable t;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string obs, fold, epoch, r;
        if (!std::getline(ss, obs, ',') || !std::getline(ss, fold, ',') ||
            !std::getline(ss, epoch, ',') || !std::getline(ss, r)) {
            throw NonNumericCell(0, 0, "malformed residuals row '" + line + "'");
        }
        const std::size_t f = std::stoull(fold);
        const std::size_t e = std::stoull(epoch);  // 1-based
        if (t.per_fold_epoch.size() <= f) t.per_fold_epoch.resize(f + 1);
        if (t.per_fold_epoch[f].size() < e) t.per_fold_epoch[f].resize(e);
        t.per_fold_epoch[f][e - 1].push_back(std::stod(r));
    }
    return t;
}

int cmd_compare(const std::string& dir_a, const std::string& dir_b, double alpha,
                const std::string& out_dir) {
    const ResidualTable a = load_residuals_csv((fs::path(dir_a) / "residuals.csv").string());
    const ResidualTable b = load_residuals_csv((fs::path(dir_b) / "residuals.csv").string());
    if (a.per_fold_epoch.size() != b.per_fold_epoch.size()) {
        throw ProtocolMismatch("fold counts differ: " +
                               std::to_string(a.per_fold_epoch.size()) + " vs " +
                               std::to_string(b.per_fold_epoch.size()));
    }
    for (std::size_t f = 0; f < a.per_fold_epoch.size(); ++f) {
        if (a.per_fold_epoch[f].size() != b.per_fold_epoch[f].size()) {
            throw ProtocolMismatch("epoch counts differ in fold " + std::to_string(f));
        }
        for (std::size_t e = 0; e < a.per_fold_epoch[f].size(); ++e) {
            if (a.per_fold_epoch[f][e].size() != b.per_fold_epoch[f][e].size()) {
                throw ProtocolMismatch("test-set sizes differ at fold " + std::to_string(f) +
                                       ", epoch " + std::to_string(e + 1));
            }
        }
    }

    const auto grid = significance_grid(a.per_fold_epoch, b.per_fold_epoch);
    const fs::path dir = out_dir.empty() ? fs::path(dir_a) : fs::path(out_dir);
    fs::create_directories(dir);

    std::ostringstream csv;
    csv << "fold,epoch,dm,p,verdict\n";
    std::size_t n_a = 0, n_b = 0, n_ns = 0;
    for (std::size_t f = 0; f < grid.size(); ++f) {
        for (std::size_t e = 0; e < grid[f].size(); ++e) {
            const DmVerdict v = classify(grid[f][e], alpha);
            if (v == DmVerdict::ABetterSignificant) ++n_a;
            else if (v == DmVerdict::BBetterSignificant) ++n_b;
            else ++n_ns;
            csv << f << ',' << (e + 1) << ',' << fmt(grid[f][e].dm_statistic) << ','
                << fmt(grid[f][e].p_value) << ',' << to_string(v) << '\n';
        }
    }
    write_text(dir / "dm_grid.csv", csv.str());

    nlohmann::json j;
    j["alpha"] = alpha;
    j["cells_a_better_significant"] = n_a;
    j["cells_b_better_significant"] = n_b;
    j["cells_not_significant"] = n_ns;
    j["run_a"] = dir_a;
    j["run_b"] = dir_b;
    write_text(dir / "compare_summary.json", j.dump(2) + "\n");
    return 0;
}

}  // namespace qrecover
