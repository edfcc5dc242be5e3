#include "qrecover/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

namespace qrecover {

Dataset Dataset::subset(const std::vector<std::size_t>& rows) const {
    Dataset out;
    out.n_obs = rows.size();
    out.n_features = n_features;
    out.feature_names = feature_names;
    out.scaler = scaler;
    out.features.reserve(rows.size() * n_features);
    out.targets.reserve(rows.size());
    for (std::size_t r : rows) {
        out.features.insert(out.features.end(), row(r), row(r) + n_features);
        out.targets.push_back(targets[r]);
    }
    return out;
}

namespace {

std::vector<std::string> split_line(const std::string& line, char delim) {
    std::vector<std::string> cells;
    std::string cur;
    std::istringstream ss(line);
    while (std::getline(ss, cur, delim)) cells.push_back(cur);
    if (!line.empty() && line.back() == delim) cells.emplace_back();
    return cells;
}

double parse_cell(const std::string& s, std::size_t row, std::size_t col) {
    const char* begin = s.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    // trailing whitespace is fine, anything else is not
    while (end && *end != '\0' && std::isspace(static_cast<unsigned char>(*end))) ++end;
    if (s.empty() || end == begin || *end != '\0' || !std::isfinite(v)) {
        throw NonNumericCell(row, col,
                             "non-numeric cell '" + s + "' at row " + std::to_string(row) +
                                 ", column " + std::to_string(col));
    }
    return v;
}

}  // namespace

Dataset load_csv(const std::string& path, const std::string& target_column, char delimiter) {
    std::ifstream in(path);
    if (!in) throw MissingFile("MissingFile: cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw EmptyFile("EmptyFile: '" + path + "' has no header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::vector<std::string> header = split_line(line, delimiter);
    std::size_t target_idx = header.size();
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == target_column) target_idx = i;
    }
    if (target_idx == header.size()) {
        throw MissingColumn("MissingColumn: no column named '" + target_column + "'");
    }

    Dataset ds;
    ds.n_features = header.size() - 1;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i != target_idx) ds.feature_names.push_back(header[i]);
    }

    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::vector<std::string> cells = split_line(line, delimiter);
        if (cells.size() != header.size()) {
            throw NonNumericCell(row, cells.size(),
                                 "row " + std::to_string(row) + " has " +
                                     std::to_string(cells.size()) + " cells, expected " +
                                     std::to_string(header.size()));
        }
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const double v = parse_cell(cells[c], row, c);
            if (c == target_idx) {
                ds.targets.push_back(v);
            } else {
                ds.features.push_back(v);
            }
        }
        ++row;
    }
    if (row == 0) throw EmptyFile("EmptyFile: '" + path + "' has no data rows");
    ds.n_obs = row;
    return ds;
}

void save_csv(const Dataset& ds, const std::string& path, const std::string& target_column,
              char delimiter) {
    std::ofstream out(path);
    if (!out) throw MissingFile("MissingFile: cannot write '" + path + "'");
    for (std::size_t i = 0; i < ds.n_features; ++i) {
        out << (i < ds.feature_names.size() ? ds.feature_names[i] : "f" + std::to_string(i))
            << delimiter;
    }
    out << target_column << '\n';
    char buf[32];
    for (std::size_t r = 0; r < ds.n_obs; ++r) {
        for (std::size_t c = 0; c < ds.n_features; ++c) {
            std::snprintf(buf, sizeof(buf), "%.17g", ds.row(r)[c]);
            out << buf << delimiter;
        }
        std::snprintf(buf, sizeof(buf), "%.17g", ds.targets[r]);
        out << buf << '\n';
    }
}

Dataset standardize(const Dataset& ds, const std::vector<std::size_t>& train_rows) {
    if (train_rows.empty()) throw EmptyBatchError("standardize: empty train row set");
    Scaler sc;
    sc.mean.assign(ds.n_features, 0.0);
    sc.std.assign(ds.n_features, 0.0);
    const double n = static_cast<double>(train_rows.size());
    for (std::size_t r : train_rows) {
        for (std::size_t c = 0; c < ds.n_features; ++c) sc.mean[c] += ds.row(r)[c];
    }
    for (double& m : sc.mean) m /= n;
    for (std::size_t r : train_rows) {
        for (std::size_t c = 0; c < ds.n_features; ++c) {
            const double d = ds.row(r)[c] - sc.mean[c];
            sc.std[c] += d * d;
        }
    }
    for (double& s : sc.std) {
        s = std::sqrt(s / n);
        if (s <= 0.0) s = 1.0;
    }
    Dataset out = ds;
    for (std::size_t r = 0; r < out.n_obs; ++r) {
        double* row = out.features.data() + r * out.n_features;
        for (std::size_t c = 0; c < out.n_features; ++c) {
            row[c] = (row[c] - sc.mean[c]) / sc.std[c];
        }
    }
    out.scaler = sc;
    return out;
}

Scaling scaling_from_string(const std::string& s) {
    if (s == "zscore") return Scaling::ZScore;
    if (s == "minmax") return Scaling::MinMax;
    if (s == "none") return Scaling::None;
    throw SpecError("unknown scaling '" + s + "' (expected zscore|minmax|none)");
}

Dataset apply_scaling(const Dataset& ds, const std::vector<std::size_t>& train_rows,
                      Scaling scaling) {
    switch (scaling) {
        case Scaling::ZScore: return standardize(ds, train_rows);
        case Scaling::None: return ds;
        case Scaling::MinMax: break;
    }
    if (train_rows.empty()) throw EmptyBatchError("apply_scaling: empty train row set");
    std::vector<double> lo(ds.n_features, std::numeric_limits<double>::infinity());
    std::vector<double> hi(ds.n_features, -std::numeric_limits<double>::infinity());
    for (std::size_t r : train_rows) {
        for (std::size_t c = 0; c < ds.n_features; ++c) {
            lo[c] = std::min(lo[c], ds.row(r)[c]);
            hi[c] = std::max(hi[c], ds.row(r)[c]);
        }
    }
    Dataset out = ds;
    Scaler sc;
    sc.mean = lo;
    sc.std.resize(ds.n_features);
    for (std::size_t c = 0; c < ds.n_features; ++c) {
        sc.std[c] = (hi[c] > lo[c]) ? hi[c] - lo[c] : 1.0;
        if (hi[c] <= lo[c]) sc.mean[c] = 0.0;  // constant feature passes through
    }
    for (std::size_t r = 0; r < out.n_obs; ++r) {
        double* row = out.features.data() + r * out.n_features;
        for (std::size_t c = 0; c < out.n_features; ++c) {
            row[c] = (row[c] - sc.mean[c]) / sc.std[c];
        }
    }
    out.scaler = sc;
    return out;
}

Dataset synth_recovery(std::size_t n_obs, std::size_t n_features, std::uint64_t seed) {
    if (n_obs < 10 || n_features < 2) {
        throw SpecError("synth_recovery: need n_obs >= 10 and n_features >= 2");
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    Dataset ds;
    ds.n_obs = n_obs;
    ds.n_features = n_features;
    ds.features.assign(n_obs * n_features, 0.0);
    ds.targets.assign(n_obs, 0.0);

    // Roughly the dummy share of the paper-style feature table; the rest are
    // continuous features in correlated blocks of eight.
    const std::size_t n_dummy = std::min<std::size_t>(n_features / 3, n_features - 2);
    const std::size_t n_cont = n_features - n_dummy;
    std::vector<double> dummy_p(n_dummy);
    for (double& p : dummy_p) p = 0.1 + 0.4 * unif(rng);
    for (std::size_t c = 0; c < n_cont; ++c) {
        ds.feature_names.push_back("x" + std::to_string(c));
    }
    for (std::size_t d = 0; d < n_dummy; ++d) {
        ds.feature_names.push_back("dummy" + std::to_string(d));
    }

    auto sample_beta = [&](double a, double b) {
        std::gamma_distribution<double> ga(a, 1.0), gb(b, 1.0);
        const double x = ga(rng), y = gb(rng);
        return x / (x + y);
    };

    constexpr std::size_t kBlock = 8;
    for (std::size_t r = 0; r < n_obs; ++r) {
        double* row = ds.features.data() + r * n_features;
        double factor = 0.0;
        for (std::size_t c = 0; c < n_cont; ++c) {
            if (c % kBlock == 0) factor = gauss(rng);
            row[c] = 0.9 * factor + 0.436 * gauss(rng);
        }
        for (std::size_t d = 0; d < n_dummy; ++d) {
            row[n_cont + d] = (unif(rng) < dummy_p[d]) ? 1.0 : 0.0;
        }

        // Mixing weight of the high-recovery component: a logit driven by
        // three-feature interactions so linear fits cannot recover it.
        const double x0 = row[0], x1 = row[1 % n_cont], x2 = row[2 % n_cont];
        const double x3 = row[3 % n_cont], x4 = row[4 % n_cont], x5 = row[5 % n_cont];
        const double d0 = n_dummy > 0 ? row[n_cont] : 0.0;
        double blk = 1.0;
        for (std::size_t c = 0; c < std::min<std::size_t>(kBlock, n_cont); ++c) {
            blk += row[c] * row[c];
        }
        const double u = (x0 + x1 + x2) / std::sqrt(blk);  // direction, not magnitude
        double logit = -17.0;
        logit += 20.0 * std::tanh(3.2 * u);
        logit += 16.0 * std::tanh(x3 * x4 * x5);
        logit += 14.0 * (2.0 * d0 - 1.0) * std::tanh(x0 * x3);
        const double w_high = 1.0 / (1.0 + std::exp(-logit));

        double y;
        if (unif(rng) < w_high) {
            y = 1.1 * sample_beta(19.0, 3.0);  // peak near 1.0
        } else {
            y = sample_beta(1.8, 6.0);  // peak near 0.1
        }
        ds.targets[r] = std::clamp(y, 0.0, 1.1);
    }
    return ds;
}

std::vector<double> pad_pow2(const std::vector<double>& x) {
    std::size_t p = 1;
    while (p < x.size()) p <<= 1;
    std::vector<double> out = x;
    out.resize(p, 0.0);
    return out;
}

}  // namespace qrecover
