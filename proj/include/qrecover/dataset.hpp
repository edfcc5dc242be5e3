#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qrecover/errors.hpp"

namespace qrecover {

struct Scaler {
    std::vector<double> mean;
    std::vector<double> std;  // constant features get std 1
};

struct Dataset {
    std::size_t n_obs = 0;
    std::size_t n_features = 0;
    std::vector<double> features;  // row-major [n_obs x n_features]
    std::vector<double> targets;
    std::vector<std::string> feature_names;
    std::optional<Scaler> scaler;

    const double* row(std::size_t i) const { return features.data() + i * n_features; }
    std::vector<double> row_vec(std::size_t i) const {
        return {row(i), row(i) + n_features};
    }
    Dataset subset(const std::vector<std::size_t>& rows) const;
};

Dataset load_csv(const std::string& path, const std::string& target_column,
                 char delimiter = ',');
void save_csv(const Dataset& ds, const std::string& path, const std::string& target_column,
              char delimiter = ',');

// Per-feature z-score with moments fitted on `train_rows` only, applied to
// every row. Constant features pass through (std := 1).
Dataset standardize(const Dataset& ds, const std::vector<std::size_t>& train_rows);

enum class Scaling { ZScore, MinMax, None };
Scaling scaling_from_string(const std::string& s);

// Dispatches on `scaling`; MinMax maps the train-row range to [0,1]
// (constant features pass through).
Dataset apply_scaling(const Dataset& ds, const std::vector<std::size_t>& train_rows,
                      Scaling scaling);

// Seeded synthetic recovery-rate dataset: correlated Gaussian feature blocks
// plus binary dummies; target is a bimodal Beta mixture (peaks near 0.1 and
// 1.0, capped at 1.1) whose mixing weight depends nonlinearly on >= 3-feature
// interactions.
Dataset synth_recovery(std::size_t n_obs, std::size_t n_features, std::uint64_t seed);

std::vector<double> pad_pow2(const std::vector<double>& x);

}  // namespace qrecover
