#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "qrecover/experiment.hpp"

namespace fs = std::filesystem;
using namespace qrecover;

namespace {

int do_run(const std::string& config_path, const std::string& out_override, bool force,
           long long seed_override, bool has_seed, int threads_override, int timing_override) {
    ExperimentConfig cfg = parse_config_file(config_path);
    apply_env_seed(cfg);
    if (has_seed) cfg.seed = static_cast<std::uint64_t>(seed_override);
    if (!out_override.empty()) cfg.output_dir = out_override;
    if (force) cfg.force = true;
    if (threads_override > 0) cfg.train.threads = threads_override;
    if (timing_override >= 0) cfg.timing = timing_override != 0;
    return cmd_run(cfg);
}

void print_paramcount_table() {
    auto row = [](const ModelSpec& s, const std::string& label) {
        std::printf("%-22s %10zu\n", label.c_str(), count_params(s));
    };
    ModelSpec fnn;
    fnn.kind = ModelKind::FNN;
    for (int h : {8, 16, 128, 512, 2048, 8192}) {
        fnn.fnn_second_hidden = h;
        row(fnn, "fnn second=" + std::to_string(h));
    }
    ModelSpec ang;
    ang.kind = ModelKind::QmlAngle;
    for (int n : {6, 7, 8, 10, 12, 14}) {
        ang.n_qubits = n;
        row(ang, "qml-angle qubits=" + std::to_string(n));
    }
    ModelSpec amp;
    amp.kind = ModelKind::QmlAmplitude;
    row(amp, "qml-amplitude qubits=8");
}

int do_gen_data(const std::string& out_path, long long n_obs, long long n_features,
                long long seed) {
    const Dataset ds = synth_recovery(static_cast<std::size_t>(n_obs),
                                      static_cast<std::size_t>(n_features),
                                      static_cast<std::uint64_t>(seed));
    save_csv(ds, out_path, "recovery_rate");

    double mean = 0.0;
    for (double t : ds.targets) mean += t;
    mean /= static_cast<double>(ds.n_obs);
    double var = 0.0;
    for (double t : ds.targets) var += (t - mean) * (t - mean);
    var /= static_cast<double>(ds.n_obs);

    nlohmann::json j;
    j["seed"] = seed;
    j["n_obs"] = ds.n_obs;
    j["n_features"] = ds.n_features;
    j["target_mean"] = mean;
    j["target_std"] = std::sqrt(var);
    std::ofstream prov(out_path + ".provenance.json");
    if (!prov) throw MissingFile("cannot write provenance for '" + out_path + "'");
    prov << j.dump(2) << '\n';
    return 0;
}

int do_noise_eval(const std::string& checkpoint_path, const std::string& config_path,
                  const std::string& out_path, long long max_rows) {
    ExperimentConfig cfg = parse_config_file(config_path);
    apply_env_seed(cfg);
    const HybridModel model = load_checkpoint(checkpoint_path);
    NoiseParams noise = cfg.noise.value_or(NoiseParams{});

    Dataset ds = cfg.data.synthetic
                     ? synth_recovery(cfg.data.n_obs, cfg.data.n_features, cfg.seed)
                     : load_csv(cfg.data.csv_path, cfg.data.target_column, cfg.data.delimiter);
    std::vector<std::size_t> all(ds.n_obs);
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    ds = apply_scaling(ds, all, cfg.data.scaling);
    if (max_rows > 0 && static_cast<std::size_t>(max_rows) < ds.n_obs) {
        all.resize(static_cast<std::size_t>(max_rows));
        ds = ds.subset(all);
    }

    std::vector<double> noiseless(ds.n_obs), noisy(ds.n_obs);
    for (std::size_t i = 0; i < ds.n_obs; ++i) {
        noiseless[i] = forward(model, ds.row_vec(i));
        noisy[i] = noisy_forward(model, ds.row_vec(i), noise);
    }
    nlohmann::json j;
    j["checkpoint"] = checkpoint_path;
    j["n_obs"] = ds.n_obs;
    j["noiseless_rmse"] = mse_and_rmse(noiseless, ds.targets).second;
    j["noisy_rmse"] = mse_and_rmse(noisy, ds.targets).second;
    j["noise"] = {{"p_depol_1q", noise.p_depol_1q},   {"p_depol_2q", noise.p_depol_2q},
                  {"p_amp_damp", noise.p_amp_damp},   {"p_dephase", noise.p_dephase},
                  {"p_readout", noise.p_readout},     {"noisy_encoding", noise.noisy_encoding}};
    if (out_path.empty()) {
        std::cout << j.dump(2) << '\n';
    } else {
        std::ofstream out(out_path);
        if (!out) throw MissingFile("cannot write '" + out_path + "'");
        out << j.dump(2) << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hybrid quantum-classical recovery-rate regression engine"};
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "run a cross-validated training experiment");
    std::string run_config, run_out;
    bool run_force = false;
    long long run_seed = 0;
    int run_threads = 0, run_timing = -1;
    run->add_option("--config", run_config, "experiment config file")->required();
    run->add_option("--out", run_out, "output directory (overrides [output].dir)");
    run->add_flag("--force", run_force, "overwrite existing reports");
    auto* seed_opt = run->add_option("--seed", run_seed, "master seed override");
    run->add_option("--threads", run_threads, "batch-parallel thread count override");
    run->add_option("--timing", run_timing, "1/0: record wall-clock seconds in rmse.csv");

    // compare
    auto* cmp = app.add_subcommand("compare", "DM significance grid between two run dirs");
    std::string dir_a, dir_b, cmp_out;
    double alpha = 0.05;
    cmp->add_option("run_dir_a", dir_a)->required();
    cmp->add_option("run_dir_b", dir_b)->required();
    cmp->add_option("--alpha", alpha, "two-sided significance level");
    cmp->add_option("--out", cmp_out, "output directory (default: run_dir_a)");

    // paramcount
    auto* pc = app.add_subcommand("paramcount", "exact trainable-parameter count");
    std::string pc_kind = "qml-amplitude";
    int pc_qubits = 8, pc_second = 8, pc_layers = 1, pc_input = 256, pc_hidden = -1;
    bool pc_table = false;
    pc->add_option("--kind", pc_kind, "fnn | qml-angle | qml-amplitude");
    pc->add_option("--qubits", pc_qubits);
    pc->add_option("--second-hidden", pc_second);
    pc->add_option("--layers", pc_layers);
    pc->add_option("--input", pc_input);
    pc->add_option("--hidden", pc_hidden, "defaults to --input");
    pc->add_flag("--table", pc_table, "print the full regression table");

    // gen-data
    auto* gen = app.add_subcommand("gen-data", "write a synthetic recovery-rate CSV");
    std::string gen_out = "synth.csv";
    long long gen_obs = 1725, gen_feat = 256, gen_seed = 0;
    gen->add_option("--out", gen_out);
    gen->add_option("--n-obs", gen_obs);
    gen->add_option("--n-features", gen_feat);
    gen->add_option("--seed", gen_seed);

    // noise-eval
    auto* ne = app.add_subcommand("noise-eval", "noisy evaluation of a checkpoint");
    std::string ne_ckpt, ne_config, ne_out;
    long long ne_max_rows = 0;
    ne->add_option("--checkpoint", ne_ckpt)->required();
    ne->add_option("--config", ne_config)->required();
    ne->add_option("--out", ne_out, "output JSON path (default: stdout)");
    ne->add_option("--max-rows", ne_max_rows, "evaluate only the first N rows");

    try {
        app.parse(argc, argv);
        if (*run) {
            return do_run(run_config, run_out, run_force, run_seed, seed_opt->count() > 0,
                          run_threads, run_timing);
        }
        if (*cmp) return cmd_compare(dir_a, dir_b, alpha, cmp_out);
        if (*pc) {
            if (pc_table) {
                print_paramcount_table();
                return 0;
            }
            ModelSpec spec;
            spec.kind = model_kind_from_string(pc_kind);
            spec.n_qubits = pc_qubits;
            spec.fnn_second_hidden = pc_second;
            spec.pqc_layers = pc_layers;
            spec.input_dim = pc_input;
            spec.hidden_dim = pc_hidden > 0 ? pc_hidden : pc_input;
            std::printf("%zu\n", count_params(spec));
            return 0;
        }
        if (*gen) return do_gen_data(gen_out, gen_obs, gen_feat, gen_seed);
        if (*ne) return do_noise_eval(ne_ckpt, ne_config, ne_out, ne_max_rows);
        return 2;
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const MissingFile& e) {
        std::cerr << e.what() << '\n';
        return 2;
    } catch (const SpecError& e) {
        std::cerr << "invalid specification: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
