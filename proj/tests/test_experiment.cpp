#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "qrecover/experiment.hpp"

using namespace qrecover;
namespace fs = std::filesystem;

namespace {

const char* kToyConfig =
    "# toy experiment\n"
    "[experiment]\n"
    "seed = 11\n"
    "[model]\n"
    "kind = fnn\n"
    "input_dim = 8\n"
    "[train]\n"
    "epochs = 2\n"
    "batch_size = 16\n"
    "[data]\n"
    "source = synth\n"
    "n_obs = 60\n"
    "n_features = 8\n"
    "[protocol]\n"
    "kind = cv\n"
    "k = 3\n"
    "[output]\n"
    "dir = {DIR}\n"
    "timing = off\n";

std::string toy_config(const std::string& dir) {
    std::string s = kToyConfig;
    const auto pos = s.find("{DIR}");
    s.replace(pos, 5, dir);
    return s;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("config parsing: defaults, sections, comments") {
    const ExperimentConfig cfg = parse_config_text(toy_config("/tmp/x"), "inline");
    CHECK(cfg.seed == 11);
    CHECK(cfg.model.kind == ModelKind::FNN);
    CHECK(cfg.model.input_dim == 8);
    CHECK(cfg.model.hidden_dim == 8);  // defaults to input_dim
    CHECK(cfg.train.epochs == 2);
    CHECK(cfg.train.learning_rate == 0.001);  // default
    CHECK(cfg.data.synthetic);
    CHECK(cfg.data.n_obs == 60);
    CHECK(cfg.k == 3);
    CHECK(cfg.output_dir == "/tmp/x");
    CHECK(!cfg.timing);
    CHECK(!cfg.noise.has_value());
}

TEST_CASE("config parsing: diagnostics carry line numbers") {
    try {
        parse_config_text("[model\nkind = fnn\n", "bad.cfg");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("bad.cfg:1") != std::string::npos);
    }
    try {
        parse_config_text("[train]\nepochs pancakes\n", "bad.cfg");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find(":2") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_config_text("[train]\nepochs = soon\n", "x"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("[data]\nsource = csv\n", "x"), ConfigError);
    CHECK_THROWS_AS(parse_config_text("[protocol]\nkind = bootstrap\n", "x"), ConfigError);
    CHECK_THROWS_AS(parse_config_file("/nonexistent/cfg.txt"), MissingFile);
}

TEST_CASE("config render round-trips") {
    const ExperimentConfig cfg = parse_config_text(toy_config("/tmp/y"), "inline");
    const ExperimentConfig back = parse_config_text(render_config(cfg), "rendered");
    CHECK(back.seed == cfg.seed);
    CHECK(back.model.kind == cfg.model.kind);
    CHECK(back.model.input_dim == cfg.model.input_dim);
    CHECK(back.train.epochs == cfg.train.epochs);
    CHECK(back.data.n_obs == cfg.data.n_obs);
    CHECK(back.k == cfg.k);
    CHECK(back.timing == cfg.timing);
    CHECK(back.output_dir == cfg.output_dir);
}

TEST_CASE("QRECOVER_SEED overrides the config seed") {
    ExperimentConfig cfg = parse_config_text(toy_config("/tmp/z"), "inline");
    setenv("QRECOVER_SEED", "777", 1);
    apply_env_seed(cfg);
    unsetenv("QRECOVER_SEED");
    CHECK(cfg.seed == 777);

    setenv("QRECOVER_SEED", "not-a-number", 1);
    CHECK_THROWS_AS(apply_env_seed(cfg), ConfigError);
    unsetenv("QRECOVER_SEED");
}

TEST_CASE("run_experiment produces a full fold plan and summary") {
    TempDir tmp("qr_exp_run");
    const ExperimentConfig cfg = parse_config_text(toy_config(tmp.path.string()), "inline");
    const ExperimentResult res = run_experiment(cfg);
    REQUIRE(res.folds.size() == 3);
    CHECK(res.param_count == count_params(cfg.model));
    for (const auto& fold : res.folds) {
        CHECK(fold.history.train_rmse.size() == 2);
        CHECK(fold.history.test_rmse.size() == 2);
        CHECK(fold.history.epoch_test_residuals.size() == 2);
        CHECK(fold.test_rows.size() == fold.history.final_residuals().size());
    }
    CHECK(res.summary.mean_rmse.size() == 2);
    CHECK(res.summary.best_epoch >= 1);
}

TEST_CASE("write_reports emits the documented files and refuses overwrites") {
    TempDir tmp("qr_exp_reports");
    const ExperimentConfig cfg = parse_config_text(toy_config(tmp.path.string()), "inline");
    const ExperimentResult res = run_experiment(cfg);
    write_reports(cfg, res);

    for (const char* name : {"rmse.csv", "residuals.csv", "summary.json", "config.txt",
                             "model_fold0.json", "model_fold1.json", "model_fold2.json"}) {
        CHECK(fs::exists(tmp.path / name));
    }

    const std::string rmse = slurp(tmp.path / "rmse.csv");
    CHECK(rmse.rfind("fold,epoch,train_rmse,test_rmse,seconds\n", 0) == 0);
    // timing = off zeroes the seconds column
    std::istringstream lines(rmse);
    std::string line;
    std::getline(lines, line);
    while (std::getline(lines, line)) {
        CHECK(line.substr(line.rfind(',') + 1) == "0");
    }

    const std::string summary = slurp(tmp.path / "summary.json");
    CHECK(summary.find("\"param_count\"") != std::string::npos);
    CHECK(summary.find("\"best_epoch\"") != std::string::npos);

    // second write without force refuses
    CHECK_THROWS(write_reports(cfg, res));
    ExperimentConfig forced = cfg;
    forced.force = true;
    CHECK_NOTHROW(write_reports(forced, res));
}

TEST_CASE("reruns with timing off are byte identical") {
    TempDir a("qr_exp_det_a"), b("qr_exp_det_b");
    ExperimentConfig cfg_a = parse_config_text(toy_config(a.path.string()), "inline");
    ExperimentConfig cfg_b = cfg_a;
    cfg_b.output_dir = b.path.string();
    write_reports(cfg_a, run_experiment(cfg_a));
    write_reports(cfg_b, run_experiment(cfg_b));
    for (const char* name : {"rmse.csv", "residuals.csv", "summary.json"}) {
        CHECK(slurp(a.path / name) == slurp(b.path / name));
    }
}

TEST_CASE("cmd_compare: self comparison, doubled residuals, protocol mismatch") {
    TempDir run_a("qr_cmp_a"), run_b("qr_cmp_b"), out("qr_cmp_out");
    ExperimentConfig cfg = parse_config_text(toy_config(run_a.path.string()), "inline");
    write_reports(cfg, run_experiment(cfg));

    // self comparison: every verdict not-significant
    CHECK(cmd_compare(run_a.path.string(), run_a.path.string(), 0.05,
                      out.path.string()) == 0);
    {
        std::ifstream grid(out.path / "dm_grid.csv");
        std::string line;
        std::getline(grid, line);  // header
        int cells = 0;
        while (std::getline(grid, line)) {
            CHECK(line.find("not-significant") != std::string::npos);
            ++cells;
        }
        CHECK(cells == 3 * 2);  // k folds x epochs
    }

    // doubled residual magnitudes in run_b: a-better everywhere
    fs::create_directories(run_b.path);
    {
        std::ifstream in(run_a.path / "residuals.csv");
        std::ofstream outf(run_b.path / "residuals.csv");
        std::string line;
        std::getline(in, line);
        outf << line << '\n';
        while (std::getline(in, line)) {
            const auto pos = line.rfind(',');
            const double r = std::stod(line.substr(pos + 1));
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%.17g", 2.0 * r);
            outf << line.substr(0, pos + 1) << buf << '\n';
        }
    }
    CHECK(cmd_compare(run_a.path.string(), run_b.path.string(), 0.05,
                      out.path.string()) == 0);
    {
        std::ifstream grid(out.path / "dm_grid.csv");
        std::string line;
        std::getline(grid, line);
        while (std::getline(grid, line)) {
            CHECK(line.find("a-better-significant") != std::string::npos);
        }
    }

    // truncated epochs: ProtocolMismatch
    {
        std::ifstream in(run_a.path / "residuals.csv");
        std::ofstream outf(run_b.path / "residuals.csv");
        std::string line;
        std::getline(in, line);
        outf << line << '\n';
        while (std::getline(in, line)) {
            // keep epoch-1 rows only
            std::istringstream ss(line);
            std::string obs, fold, epoch;
            std::getline(ss, obs, ',');
            std::getline(ss, fold, ',');
            std::getline(ss, epoch, ',');
            if (epoch == "1") outf << line << '\n';
        }
    }
    CHECK_THROWS_AS(cmd_compare(run_a.path.string(), run_b.path.string(), 0.05,
                                out.path.string()),
                    ProtocolMismatch);
}

TEST_CASE("loocv protocol builds n folds") {
    std::string cfg_text = toy_config("/tmp/unused");
    const auto pos = cfg_text.find("kind = cv");
    cfg_text.replace(pos, 9, "kind = loocv");
    cfg_text.replace(cfg_text.find("n_obs = 60"), 10, "n_obs = 12");
    ExperimentConfig cfg = parse_config_text(cfg_text, "inline");
    cfg.train.epochs = 1;
    const ExperimentResult res = run_experiment(cfg);
    CHECK(res.folds.size() == 12);
    for (const auto& f : res.folds) CHECK(f.test_rows.size() == 1);
}
