#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "perturbench/error.hpp"
#include "perturbench/rng.hpp"

namespace perturbench {

enum class NormalizationState { raw, zscored };

/// Tabular numeric dataset: one row per record, one column per attribute,
/// plus an opaque string class label per record. Immutable by convention
/// after construction; every transform returns a new Dataset.
struct Dataset {
    Eigen::MatrixXd features;             // n_records x n_attrs
    std::vector<std::string> labels;      // length n_records
    std::vector<std::string> attr_names;  // length n_attrs
    std::string label_name = "class";
    std::string source_id;
    NormalizationState normalization_state = NormalizationState::raw;

    Eigen::Index n_records() const { return features.rows(); }
    Eigen::Index n_attrs() const { return features.cols(); }
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

// Locale-independent: '.' decimal point regardless of environment.
inline bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size() && std::isfinite(out);
}

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace detail

/// Loads a comma-separated file with a header row. The label column may be
/// named or given as a 0-based column index; all other cells must parse as
/// finite reals. Labels are kept verbatim as strings.
inline Dataset load_csv(const std::filesystem::path& path, const std::string& label_column) {
    std::ifstream in(path);
    require(in.good(), "load_csv: cannot open " + path.string());

    std::string line;
    require(static_cast<bool>(std::getline(in, line)), "load_csv: empty file " + path.string());
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::vector<std::string> header = detail::split_csv_line(line);
    require(!header.empty(), "load_csv: empty header in " + path.string());

    std::ptrdiff_t label_idx = -1;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == label_column) {
            label_idx = static_cast<std::ptrdiff_t>(i);
            break;
        }
    }
    if (label_idx < 0) {
        // fall back to a numeric column index
        try {
            const std::size_t pos_idx = std::stoul(label_column);
            require(pos_idx < header.size(), "load_csv: label column index out of range");
            label_idx = static_cast<std::ptrdiff_t>(pos_idx);
        } catch (const std::invalid_argument&) {
            throw Error("load_csv: label column '" + label_column + "' not found");
        } catch (const std::out_of_range&) {
            throw Error("load_csv: label column '" + label_column + "' not found");
        }
    }

    Dataset d;
    d.source_id = path.string();
    d.label_name = header[static_cast<std::size_t>(label_idx)];
    std::set<std::string> seen;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (static_cast<std::ptrdiff_t>(i) == label_idx) continue;
        require(seen.insert(header[i]).second, "load_csv: duplicate attribute name '" + header[i] + "'");
        d.attr_names.push_back(header[i]);
    }

    std::vector<std::vector<double>> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::vector<std::string> cells = detail::split_csv_line(line);
        require(cells.size() == header.size(),
                "load_csv: row " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                    " cells, expected " + std::to_string(header.size()));
        std::vector<double> row;
        row.reserve(header.size() - 1);
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (static_cast<std::ptrdiff_t>(i) == label_idx) {
                d.labels.push_back(cells[i]);
                continue;
            }
            double v = 0.0;
            require(detail::parse_double(cells[i], v),
                    "load_csv: unparseable cell '" + cells[i] + "' at row " + std::to_string(line_no) +
                        ", column '" + header[i] + "'");
            row.push_back(v);
        }
        rows.push_back(std::move(row));
    }

    require(rows.size() >= 2, "load_csv: need at least 2 records, got " + std::to_string(rows.size()));
    require(!d.attr_names.empty(), "load_csv: no feature columns");

    d.features.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d.attr_names.size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < rows[r].size(); ++c)
            d.features(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    return d;
}

/// Writes features + label column back out; doubles use %.17g, so
/// load_csv(write_csv(d)) round-trips exactly.
inline void write_csv(const Dataset& d, const std::filesystem::path& path) {
    std::ofstream out(path);
    require(out.good(), "write_csv: cannot open " + path.string());
    for (const auto& name : d.attr_names) out << name << ',';
    out << d.label_name << '\n';
    for (Eigen::Index r = 0; r < d.n_records(); ++r) {
        for (Eigen::Index c = 0; c < d.n_attrs(); ++c)
            out << detail::format_double(d.features(r, c)) << ',';
        out << d.labels[static_cast<std::size_t>(r)] << '\n';
    }
    require(out.good(), "write_csv: write failed for " + path.string());
}

inline double column_mean(const Eigen::VectorXd& v) { return v.mean(); }

/// Population standard deviation (divide by n).
inline double column_popstd(const Eigen::VectorXd& v) {
    const double mu = v.mean();
    return std::sqrt((v.array() - mu).square().sum() / static_cast<double>(v.size()));
}

/// Per-column (x - mean) / population-std. Constant columns become all
/// zeros. Applying it twice is a contract violation, not a no-op.
inline Dataset zscore_normalize(const Dataset& d) {
    require(d.normalization_state == NormalizationState::raw, "zscore_normalize: dataset already z-scored");
    Dataset out = d;
    for (Eigen::Index c = 0; c < d.n_attrs(); ++c) {
        const Eigen::VectorXd col = d.features.col(c);
        const double mu = col.mean();
        const double sd = column_popstd(col);
        if (sd == 0.0)
            out.features.col(c).setZero();
        else
            out.features.col(c) = (col.array() - mu) / sd;
    }
    out.normalization_state = NormalizationState::zscored;
    return out;
}

/// (x - min) / (max - min); a constant vector maps to all 0.5.
inline Eigen::VectorXd minmax_to_unit(const Eigen::VectorXd& v) {
    require(v.size() >= 1, "minmax_to_unit: empty vector");
    require(v.allFinite(), "minmax_to_unit: non-finite input");
    const double lo = v.minCoeff();
    const double hi = v.maxCoeff();
    if (hi == lo) return Eigen::VectorXd::Constant(v.size(), 0.5);
    return (v.array() - lo) / (hi - lo);
}

struct SplitPlan {
    std::vector<int> fold_assignments;  // length n_records, values in [0, n_folds)
    int n_folds = 0;
    std::uint64_t seed = 0;
};

/// Seeded stratified k-fold assignment: shuffles each class's records and
/// deals them round-robin, so per-class fold counts differ by at most one.
inline SplitPlan stratified_folds(const Dataset& d, int n_folds, std::uint64_t seed) {
    require(n_folds >= 1, "stratified_folds: n_folds must be >= 1");
    std::map<std::string, std::vector<Eigen::Index>> by_class;
    for (Eigen::Index i = 0; i < d.n_records(); ++i) by_class[d.labels[static_cast<std::size_t>(i)]].push_back(i);
    for (const auto& [label, members] : by_class)
        require(static_cast<int>(members.size()) >= n_folds,
                "stratified_folds: class '" + label + "' has " + std::to_string(members.size()) +
                    " members, fewer than " + std::to_string(n_folds) + " folds");

    SplitPlan plan;
    plan.n_folds = n_folds;
    plan.seed = seed;
    plan.fold_assignments.assign(static_cast<std::size_t>(d.n_records()), 0);

    std::uint64_t class_stream = 0;
    for (auto& [label, members] : by_class) {
        Rng rng(derive_stream(seed, class_stream++));
        // Fisher-Yates
        for (std::size_t i = members.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(rng.next_u64() % i);
            std::swap(members[i - 1], members[j]);
        }
        for (std::size_t i = 0; i < members.size(); ++i)
            plan.fold_assignments[static_cast<std::size_t>(members[i])] = static_cast<int>(i % static_cast<std::size_t>(n_folds));
    }
    return plan;
}

}  // namespace perturbench
