#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qrecover/errors.hpp"

namespace qrecover {

struct FoldPlan {
    std::size_t n_observations = 0;
    int k = 0;
    std::vector<int> assignments;  // fold index per observation

    std::vector<std::size_t> test_rows(int fold) const;
    std::vector<std::size_t> train_rows(int fold) const;
};

// Seeded shuffle, then contiguous chunks; fold sizes differ by at most one.
FoldPlan kfold_split(std::size_t n, int k, std::uint64_t seed);
FoldPlan loocv_plan(std::size_t n);

struct DmResult {
    double dm_statistic = 0.0;
    double p_value = 1.0;
    double mean_diff = 0.0;
    std::size_t n = 0;
};

// Two-sided DM test on d_i = |resid_a_i| - |resid_b_i| against a standard
// normal; negative statistic means model a is better.
DmResult dm_test(const std::vector<double>& residuals_a, const std::vector<double>& residuals_b);

enum class DmVerdict { ABetterSignificant, BBetterSignificant, NotSignificant };
DmVerdict classify(const DmResult& r, double alpha = 0.05);
std::string to_string(DmVerdict v);

// One DmResult per (fold, epoch) cell.
std::vector<std::vector<DmResult>> significance_grid(
    const std::vector<std::vector<std::vector<double>>>& residuals_a,
    const std::vector<std::vector<std::vector<double>>>& residuals_b);

struct CurveSummary {
    std::vector<double> mean_rmse;  // per epoch, across folds
    std::vector<double> std_rmse;   // population std
    double best_mean_rmse = 0.0;
    int best_epoch = 0;  // 1-based, as reported
};

CurveSummary aggregate_curves(const std::vector<std::vector<double>>& fold_rmse_curves);

}  // namespace qrecover
