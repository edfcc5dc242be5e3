// End-to-end tests of the command-line binary. CMake passes its path via the
// QRECOVER_CLI environment variable.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

std::string cli_path() {
    const char* p = std::getenv("QRECOVER_CLI");
    REQUIRE_MESSAGE(p != nullptr, "QRECOVER_CLI must point at the built binary");
    return p;
}

struct CmdResult {
    int exit_code;
    std::string output;  // stdout + stderr
};

CmdResult run_cmd(const std::string& args) {
    const std::string cmd = cli_path() + " " + args + " 2>&1";
    std::array<char, 4096> buf{};
    std::string out;
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    while (std::fgets(buf.data(), static_cast<int>(buf.size()), pipe)) out += buf.data();
    const int status = pclose(pipe);
    return {WEXITSTATUS(status), out};
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
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

void write_file(const fs::path& p, const std::string& content) {
    std::ofstream out(p);
    out << content;
}

std::string toy_config(const std::string& out_dir, const std::string& extra_train = "") {
    return "[experiment]\nseed = 5\n"
           "[model]\nkind = fnn\ninput_dim = 8\n"
           "[train]\nepochs = 2\nbatch_size = 16\n" + extra_train +
           "[data]\nsource = synth\nn_obs = 40\nn_features = 8\n"
           "[protocol]\nkind = cv\nk = 2\n"
           "[output]\ndir = " + out_dir + "\ntiming = off\n";
}

}  // namespace

TEST_CASE("paramcount reproduces every published row") {
    CHECK(run_cmd("paramcount --kind fnn --second-hidden 8").output == "67857\n");
    CHECK(run_cmd("paramcount --kind fnn --second-hidden 8192").output == "2179329\n");
    CHECK(run_cmd("paramcount --kind qml-angle --qubits 10").output == "68393\n");
    CHECK(run_cmd("paramcount --kind qml-amplitude --qubits 8").output == "65825\n");

    const CmdResult table = run_cmd("paramcount --table");
    CHECK(table.exit_code == 0);
    for (const char* v : {"67857", "69921", "98817", "197889", "594177", "2179329", "67353",
                          "67613", "67873", "68393", "68913", "69433", "65825"}) {
        CHECK_MESSAGE(table.output.find(v) != std::string::npos, "missing row ", v);
    }
}

TEST_CASE("usage errors exit with code 2") {
    CHECK(run_cmd("paramcount --kind hedgehog").exit_code == 2);
    CHECK(run_cmd("frobnicate").exit_code == 2);
    CHECK(run_cmd("run").exit_code == 2);  // --config is required
    CHECK(run_cmd("run --config /nonexistent/x.cfg").exit_code == 2);
}

TEST_CASE("missing csv path exits 2 with a MissingFile message") {
    TempDir tmp("qr_cli_csv");
    write_file(tmp.path / "exp.cfg",
               "[data]\nsource = csv\ncsv_path = /nonexistent/data.csv\n"
               "[model]\nkind = fnn\n"
               "[output]\ndir = " + (tmp.path / "out").string() + "\n");
    const CmdResult r = run_cmd("run --config " + (tmp.path / "exp.cfg").string());
    CHECK(r.exit_code == 2);
    CHECK(r.output.find("MissingFile") != std::string::npos);
}

TEST_CASE("gen-data writes csv + provenance and is seed deterministic") {
    TempDir tmp("qr_cli_gen");
    const std::string a = (tmp.path / "a.csv").string();
    const std::string b = (tmp.path / "b.csv").string();
    CHECK(run_cmd("gen-data --out " + a + " --n-obs 60 --n-features 16 --seed 3").exit_code ==
          0);
    CHECK(run_cmd("gen-data --out " + b + " --n-obs 60 --n-features 16 --seed 3").exit_code ==
          0);
    CHECK(slurp(a) == slurp(b));
    CHECK(fs::exists(a + ".provenance.json"));
    const std::string prov = slurp(a + ".provenance.json");
    CHECK(prov.find("\"seed\": 3") != std::string::npos);
    CHECK(prov.find("target_mean") != std::string::npos);

    // header + 60 rows, 16 features + target = 17 columns
    std::istringstream csv(slurp(a));
    std::string header;
    std::getline(csv, header);
    int commas = 0;
    for (char c : header) commas += c == ',';
    CHECK(commas == 16);
    int rows = 0;
    for (std::string line; std::getline(csv, line);) rows += !line.empty();
    CHECK(rows == 60);
}

TEST_CASE("run executes an experiment and honors --force") {
    TempDir tmp("qr_cli_run");
    const fs::path out = tmp.path / "out";
    write_file(tmp.path / "exp.cfg", toy_config(out.string()));

    const CmdResult first = run_cmd("run --config " + (tmp.path / "exp.cfg").string());
    CHECK(first.exit_code == 0);
    CHECK(fs::exists(out / "rmse.csv"));
    CHECK(fs::exists(out / "summary.json"));

    // rerun without --force refuses; with --force succeeds byte-identically
    const CmdResult refused = run_cmd("run --config " + (tmp.path / "exp.cfg").string());
    CHECK(refused.exit_code != 0);
    const std::string before = slurp(out / "rmse.csv");
    const CmdResult forced =
        run_cmd("run --config " + (tmp.path / "exp.cfg").string() + " --force");
    CHECK(forced.exit_code == 0);
    CHECK(slurp(out / "rmse.csv") == before);
}

TEST_CASE("lr=0 run reports identical RMSE across epochs") {
    TempDir tmp("qr_cli_lr0");
    const fs::path out = tmp.path / "out";
    write_file(tmp.path / "exp.cfg", toy_config(out.string(), "learning_rate = 0\n"));
    CHECK(run_cmd("run --config " + (tmp.path / "exp.cfg").string()).exit_code == 0);

    std::istringstream rmse(slurp(out / "rmse.csv"));
    std::string line;
    std::getline(rmse, line);  // header
    std::string fold0_epoch1_test, fold0_epoch2_test;
    while (std::getline(rmse, line)) {
        std::istringstream ss(line);
        std::string fold, epoch, train, test;
        std::getline(ss, fold, ',');
        std::getline(ss, epoch, ',');
        std::getline(ss, train, ',');
        std::getline(ss, test, ',');
        if (fold == "0" && epoch == "1") fold0_epoch1_test = test;
        if (fold == "0" && epoch == "2") fold0_epoch2_test = test;
    }
    CHECK(!fold0_epoch1_test.empty());
    CHECK(fold0_epoch1_test == fold0_epoch2_test);
}

TEST_CASE("QRECOVER_SEED env var overrides the config seed") {
    TempDir tmp("qr_cli_env");
    const fs::path out_a = tmp.path / "a", out_b = tmp.path / "b";
    write_file(tmp.path / "a.cfg", toy_config(out_a.string()));
    write_file(tmp.path / "b.cfg", toy_config(out_b.string()));
    CHECK(run_cmd("run --config " + (tmp.path / "a.cfg").string()).exit_code == 0);
    setenv("QRECOVER_SEED", "99", 1);
    CHECK(run_cmd("run --config " + (tmp.path / "b.cfg").string()).exit_code == 0);
    unsetenv("QRECOVER_SEED");
    CHECK(slurp(out_a / "rmse.csv") != slurp(out_b / "rmse.csv"));
    CHECK(slurp(out_b / "summary.json").find("\"seed\": 99") != std::string::npos);
}

TEST_CASE("compare on a run with itself is all not-significant") {
    TempDir tmp("qr_cli_cmp");
    const fs::path out = tmp.path / "out", cmp = tmp.path / "cmp";
    write_file(tmp.path / "exp.cfg", toy_config(out.string()));
    CHECK(run_cmd("run --config " + (tmp.path / "exp.cfg").string()).exit_code == 0);
    CHECK(run_cmd("compare " + out.string() + " " + out.string() + " --out " + cmp.string())
              .exit_code == 0);
    std::istringstream grid(slurp(cmp / "dm_grid.csv"));
    std::string line;
    std::getline(grid, line);
    int cells = 0;
    while (std::getline(grid, line)) {
        if (line.empty()) continue;
        CHECK(line.find("not-significant") != std::string::npos);
        ++cells;
    }
    CHECK(cells == 2 * 2);
}

TEST_CASE("noise-eval reports noisy vs noiseless RMSE for a checkpoint") {
    TempDir tmp("qr_cli_ne");
    const fs::path out = tmp.path / "out";
    // tiny 2-qubit amplitude model so the density-matrix path stays cheap
    write_file(tmp.path / "exp.cfg",
               "[experiment]\nseed = 5\n"
               "[model]\nkind = qml-amplitude\ninput_dim = 4\nhidden_dim = 4\nn_qubits = 2\n"
               "[train]\nepochs = 1\nbatch_size = 16\n"
               "[data]\nsource = synth\nn_obs = 30\nn_features = 4\n"
               "[protocol]\nkind = cv\nk = 2\n"
               "[output]\ndir = " + out.string() + "\ntiming = off\n");
    CHECK(run_cmd("run --config " + (tmp.path / "exp.cfg").string()).exit_code == 0);
    const CmdResult r = run_cmd("noise-eval --checkpoint " +
                                (out / "model_fold0.json").string() + " --config " +
                                (tmp.path / "exp.cfg").string() + " --max-rows 10");
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("noiseless_rmse") != std::string::npos);
    CHECK(r.output.find("noisy_rmse") != std::string::npos);
    CHECK(r.output.find("p_depol_1q") != std::string::npos);
}
