#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qrecover/dataset.hpp"
#include "qrecover/eval.hpp"
#include "qrecover/hybrid.hpp"
#include "qrecover/noise.hpp"

namespace qrecover {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Protocol { Cv, Loocv };

struct DataSource {
    bool synthetic = true;
    // csv
    std::string csv_path;
    std::string target_column = "recovery_rate";
    char delimiter = ',';
    // synth
    std::size_t n_obs = 1725;
    std::size_t n_features = 256;
    Scaling scaling = Scaling::ZScore;
};

struct ExperimentConfig {
    ModelSpec model;
    TrainConfig train;
    std::optional<NoiseParams> noise;
    DataSource data;
    Protocol protocol = Protocol::Cv;
    int k = 4;
    std::uint64_t seed = 0;  // master seed; fold/model/shuffle seeds derive from it
    std::string output_dir;
    bool timing = true;  // off zeroes the seconds column for byte-stable reruns
    bool force = false;
    double dm_alpha = 0.05;
};

// Flat key-value config file with [section] headers, '#' comments and
// key = value lines. Throws ConfigError with line diagnostics.
ExperimentConfig parse_config_file(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text, const std::string& origin);
std::string render_config(const ExperimentConfig& cfg);

// Applies the QRECOVER_SEED environment override, if set.
void apply_env_seed(ExperimentConfig& cfg);

struct FoldRun {
    TrainHistory history;
    std::vector<std::size_t> test_rows;  // original observation ids
    HybridModel model;                   // state after the final epoch
};

struct ExperimentResult {
    FoldPlan plan;
    std::vector<FoldRun> folds;
    CurveSummary summary;
    std::size_t param_count = 0;
};

ExperimentResult run_experiment(const ExperimentConfig& cfg);

// run_experiment + report files (rmse.csv, residuals.csv, summary.json,
// config.txt, one checkpoint per fold) under cfg.output_dir.
void write_reports(const ExperimentConfig& cfg, const ExperimentResult& res);
int cmd_run(const ExperimentConfig& cfg);

// Reads two run directories' residuals.csv, checks the protocols match, and
// writes dm_grid.csv plus compare_summary.json into dir_a.
int cmd_compare(const std::string& dir_a, const std::string& dir_b, double alpha = 0.05,
                const std::string& out_dir = "");

// Per-fold per-epoch residual sets in the residuals.csv layout.
struct ResidualTable {
    std::vector<std::vector<std::vector<double>>> per_fold_epoch;  // [fold][epoch][obs]
};
ResidualTable load_residuals_csv(const std::string& path);

}  // namespace qrecover
