#include "qrecover/eval.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace qrecover {

std::vector<std::size_t> FoldPlan::test_rows(int fold) const {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < assignments.size(); ++i) {
        if (assignments[i] == fold) rows.push_back(i);
    }
    return rows;
}

std::vector<std::size_t> FoldPlan::train_rows(int fold) const {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < assignments.size(); ++i) {
        if (assignments[i] != fold) rows.push_back(i);
    }
    return rows;
}

FoldPlan kfold_split(std::size_t n, int k, std::uint64_t seed) {
    if (k < 2 || n < static_cast<std::size_t>(k)) {
        throw SplitError("kfold_split: need k >= 2 and n >= k");
    }
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);

    FoldPlan plan;
    plan.n_observations = n;
    plan.k = k;
    plan.assignments.assign(n, 0);
    // Contiguous chunks over the shuffled order; the first n % k folds get
    // one extra observation.
    const std::size_t base = n / static_cast<std::size_t>(k);
    const std::size_t extra = n % static_cast<std::size_t>(k);
    std::size_t pos = 0;
    for (int f = 0; f < k; ++f) {
        const std::size_t size = base + (static_cast<std::size_t>(f) < extra ? 1 : 0);
        for (std::size_t j = 0; j < size; ++j) plan.assignments[order[pos++]] = f;
    }
    return plan;
}

FoldPlan loocv_plan(std::size_t n) {
    if (n < 2) throw SplitError("loocv_plan: need n >= 2");
    FoldPlan plan;
    plan.n_observations = n;
    plan.k = static_cast<int>(n);
    plan.assignments.resize(n);
    for (std::size_t i = 0; i < n; ++i) plan.assignments[i] = static_cast<int>(i);
    return plan;
}

DmResult dm_test(const std::vector<double>& residuals_a,
                 const std::vector<double>& residuals_b) {
    const std::size_t m = residuals_a.size();
    if (m < 2 || residuals_b.size() != m) {
        throw ShapeError("dm_test: need equal lengths >= 2");
    }
    std::vector<double> d(m);
    double mean = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        d[i] = std::abs(residuals_a[i]) - std::abs(residuals_b[i]);
        mean += d[i];
    }
    mean /= static_cast<double>(m);
    double s2 = 0.0;
    for (double di : d) s2 += (di - mean) * (di - mean);
    s2 /= static_cast<double>(m - 1);  // unbiased sample variance

    DmResult r;
    r.mean_diff = mean;
    r.n = m;
    if (s2 == 0.0) {
        if (mean == 0.0) {
            r.dm_statistic = 0.0;
            r.p_value = 1.0;
            return r;
        }
        throw DegenerateVariance("dm_test: zero variance with nonzero mean difference");
    }
    r.dm_statistic = mean / std::sqrt(s2 / static_cast<double>(m));
    r.p_value = std::erfc(std::abs(r.dm_statistic) / std::sqrt(2.0));
    return r;
}

DmVerdict classify(const DmResult& r, double alpha) {
    if (r.p_value >= alpha) return DmVerdict::NotSignificant;
    return r.dm_statistic < 0 ? DmVerdict::ABetterSignificant : DmVerdict::BBetterSignificant;
}

std::string to_string(DmVerdict v) {
    switch (v) {
        case DmVerdict::ABetterSignificant: return "a-better-significant";
        case DmVerdict::BBetterSignificant: return "b-better-significant";
        case DmVerdict::NotSignificant: return "not-significant";
    }
    return "?";
}

std::vector<std::vector<DmResult>> significance_grid(
    const std::vector<std::vector<std::vector<double>>>& residuals_a,
    const std::vector<std::vector<std::vector<double>>>& residuals_b) {
    if (residuals_a.size() != residuals_b.size() || residuals_a.empty()) {
        throw ShapeError("significance_grid: fold count mismatch");
    }
    std::vector<std::vector<DmResult>> grid(residuals_a.size());
    for (std::size_t f = 0; f < residuals_a.size(); ++f) {
        if (residuals_a[f].size() != residuals_b[f].size()) {
            throw ShapeError("significance_grid: epoch count mismatch in fold " +
                             std::to_string(f));
        }
        grid[f].reserve(residuals_a[f].size());
        for (std::size_t e = 0; e < residuals_a[f].size(); ++e) {
            grid[f].push_back(dm_test(residuals_a[f][e], residuals_b[f][e]));
        }
    }
    return grid;
}

CurveSummary aggregate_curves(const std::vector<std::vector<double>>& fold_rmse_curves) {
    if (fold_rmse_curves.empty() || fold_rmse_curves.front().empty()) {
        throw EmptyBatchError("aggregate_curves: no curves");
    }
    const std::size_t epochs = fold_rmse_curves.front().size();
    for (const auto& c : fold_rmse_curves) {
        if (c.size() != epochs) throw ShapeError("aggregate_curves: ragged epoch counts");
    }
    const double k = static_cast<double>(fold_rmse_curves.size());
    CurveSummary s;
    s.mean_rmse.assign(epochs, 0.0);
    s.std_rmse.assign(epochs, 0.0);
    for (std::size_t e = 0; e < epochs; ++e) {
        double mean = 0.0;
        for (const auto& c : fold_rmse_curves) mean += c[e];
        mean /= k;
        double var = 0.0;
        for (const auto& c : fold_rmse_curves) var += (c[e] - mean) * (c[e] - mean);
        s.mean_rmse[e] = mean;
        s.std_rmse[e] = std::sqrt(var / k);  // population std
    }
    auto best = std::min_element(s.mean_rmse.begin(), s.mean_rmse.end());
    s.best_mean_rmse = *best;
    s.best_epoch = static_cast<int>(best - s.mean_rmse.begin()) + 1;
    return s;
}

}  // namespace qrecover
