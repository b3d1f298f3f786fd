#pragma once

// Shared test fixtures: synthetic data generators, independent oracles, and
// a tiny process runner for the CLI tests. Oracles here intentionally avoid
// the library code paths they check.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "perturbench/dataset.hpp"
#include "perturbench/fis.hpp"
#include "perturbench/rng.hpp"

namespace testsupport {

inline std::filesystem::path data_dir() { return PERTURBENCH_DATA_DIR; }
inline std::filesystem::path cli_path() { return PERTURBENCH_CLI_PATH; }

inline std::filesystem::path scratch_dir(const std::string& name) {
    const std::filesystem::path dir = std::filesystem::path(PERTURBENCH_SCRATCH_DIR) / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

/// Two Gaussian blobs with centers `separation` apart along the first
/// coordinate, unit per-coordinate std, balanced classes "a"/"b".
inline perturbench::Dataset make_blobs(int n, int dims, double separation, std::uint64_t seed) {
    perturbench::Rng rng(seed);
    perturbench::Dataset d;
    d.features.resize(n, dims);
    d.labels.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const bool second = i % 2 == 1;
        for (int j = 0; j < dims; ++j) d.features(i, j) = rng.normal();
        if (second) d.features(i, 0) += separation;
        d.labels.push_back(second ? "b" : "a");
    }
    for (int j = 0; j < dims; ++j) d.attr_names.push_back("x" + std::to_string(j));
    d.source_id = "blobs";
    return d;
}

// --- independent oracle implementations ----------------------------------

inline double oracle_mean(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline double oracle_popstd(const std::vector<double>& v) {
    const double m = oracle_mean(v);
    double acc = 0.0;
    for (double x : v) acc += (x - m) * (x - m);
    return std::sqrt(acc / static_cast<double>(v.size()));
}

/// Histogram entropy computed from scratch with map-based bins.
inline double oracle_entropy(std::vector<double> v, double bw) {
    const double lo = *std::min_element(v.begin(), v.end());
    const double hi = *std::max_element(v.begin(), v.end());
    const int n_bins = static_cast<int>(std::ceil(1.0 / bw));
    std::map<int, int> counts;
    for (double& x : v) {
        double unit = hi == lo ? 0.5 : (x - lo) / (hi - lo);
        int bin = static_cast<int>(unit / bw);
        if (bin >= n_bins) bin = n_bins - 1;
        counts[bin] += 1;
    }
    double h = 0.0;
    for (const auto& [bin, count] : counts) {
        const double p = static_cast<double>(count) / static_cast<double>(v.size());
        h -= p * std::log2(p);
    }
    return h;
}

inline std::vector<double> to_vec(const Eigen::VectorXd& v) {
    return {v.data(), v.data() + v.size()};
}

/// Hand-unrolled privacy pipeline: per attribute, entropy of the original,
/// the perturbed copy and the noise, mutual information, loss, and the
/// residual privacy; returns the minimum over attributes.
inline double oracle_min_privacy(const Eigen::MatrixXd& original, const Eigen::MatrixXd& perturbed,
                                 double bw) {
    double minimum = std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < original.cols(); ++c) {
        const double h_a = oracle_entropy(to_vec(original.col(c)), bw);
        const double h_b = oracle_entropy(to_vec(perturbed.col(c)), bw);
        const double h_n = oracle_entropy(to_vec(perturbed.col(c) - original.col(c)), bw);
        double info = h_b - h_n;
        if (info < 0.0) info = 0.0;
        const double loss = 1.0 - std::pow(2.0, -info);
        const double residual = std::pow(2.0, h_a) * (1.0 - loss);
        minimum = std::min(minimum, residual);
    }
    return minimum;
}

inline double laplace_cdf(double x, double scale) {
    return x < 0.0 ? 0.5 * std::exp(x / scale) : 1.0 - 0.5 * std::exp(-x / scale);
}

/// Two-sided Kolmogorov-Smirnov statistic against a continuous CDF.
inline double ks_statistic(std::vector<double> samples, double scale) {
    std::sort(samples.begin(), samples.end());
    const auto n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = laplace_cdf(samples[i], scale);
        d = std::max(d, std::abs(f - static_cast<double>(i) / n));
        d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
    }
    return d;
}

/// Asymptotic KS critical value at significance alpha = 0.01.
inline double ks_critical_001(std::size_t n) { return 1.62762 / std::sqrt(static_cast<double>(n)); }

/// Independent fine-grid quadrature for the clipped-aggregate centroid,
/// using midpoint sampling rather than the implementation's endpoint grid.
inline double oracle_cog_quadrature(const std::array<double, 3>& heights,
                                    const perturbench::VariableMfs& output, int n_points) {
    double weighted = 0.0;
    double mass = 0.0;
    for (int i = 0; i < n_points; ++i) {
        const double x = (static_cast<double>(i) + 0.5) / static_cast<double>(n_points);
        double mu = 0.0;
        for (std::size_t l = 0; l < 3; ++l)
            mu = std::max(mu, std::min(heights[l], output.levels[l](x)));
        weighted += mu * x;
        mass += mu;
    }
    if (mass == 0.0) return 0.5;
    return weighted / mass;
}

// --- process helper -------------------------------------------------------

struct RunResult {
    int exit_code = -1;
    std::string stdout_text;
};

/// Runs a command line, capturing stdout; stderr goes to the test log.
inline RunResult run_command(const std::string& command_line, const std::filesystem::path& scratch) {
    const std::filesystem::path out_file = scratch / "stdout.txt";
    const std::string full = command_line + " > " + out_file.string() + " 2> " + (scratch / "stderr.txt").string();
    const int status = std::system(full.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(out_file);
    r.stdout_text.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
    return r;
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace testsupport
