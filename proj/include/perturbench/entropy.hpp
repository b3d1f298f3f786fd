#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "perturbench/dataset.hpp"
#include "perturbench/error.hpp"

namespace perturbench {

inline constexpr double kDefaultBinWidth = 0.01;

struct EntropyEstimate {
    double h = 0.0;        // bits
    double bin_width = 0.0;
    int n_bins = 0;
    int n_samples = 0;
};

/// Histogram entropy of a data series: min-max normalize to [0,1], bin into
/// ceil(1/bw) equal-width bins (1.0 falls in the top bin), and take the
/// Shannon entropy of the bin probabilities in bits.
inline EntropyEstimate inherent_uncertainty(const Eigen::VectorXd& x, double bw = kDefaultBinWidth) {
    require(x.size() >= 1, "inherent_uncertainty: empty vector");
    require(bw > 0.0 && bw <= 1.0, "inherent_uncertainty: bin width must be in (0, 1]");
    require(x.allFinite(), "inherent_uncertainty: non-finite input");

    const int n_bins = static_cast<int>(std::ceil(1.0 / bw));
    const Eigen::VectorXd unit = minmax_to_unit(x);
    std::vector<int> counts(static_cast<std::size_t>(n_bins), 0);
    for (Eigen::Index i = 0; i < unit.size(); ++i) {
        int bin = static_cast<int>(unit[i] / bw);
        bin = std::min(bin, n_bins - 1);
        ++counts[static_cast<std::size_t>(bin)];
    }

    const double n = static_cast<double>(unit.size());
    double h = 0.0;
    for (int count : counts) {
        if (count == 0) continue;
        const double p = static_cast<double>(count) / n;
        h -= p * std::log2(p);
    }
    return {h, bw, n_bins, static_cast<int>(x.size())};
}

/// Fraction of an attribute's privacy lost by releasing its perturbed form:
/// 1 - 2^{-I} with I = h(perturbed) - h(perturbed - original), clamped so a
/// negative finite-sample I never produces a loss outside [0, 1].
inline double privacy_loss(const Eigen::VectorXd& x, const Eigen::VectorXd& xp, double bw = kDefaultBinWidth) {
    require(x.size() == xp.size(), "privacy_loss: length mismatch");
    const Eigen::VectorXd noise = xp - x;
    const double mutual_info = inherent_uncertainty(xp, bw).h - inherent_uncertainty(noise, bw).h;
    const double loss = 1.0 - std::exp2(-std::max(mutual_info, 0.0));
    return std::clamp(loss, 0.0, 1.0);
}

struct PrivacyGuarantee {
    std::vector<double> per_attribute;  // residual privacy 2^{h} * (1 - loss) per attribute
    double minimum = 0.0;
    double scaled_minimum = 0.0;  // filled in by pool-level scaling
};

/// Per attribute i: residual privacy 2^{h(X_i)} * (1 - loss_i); the weakest
/// attribute's value is the dataset's minimum empirical privacy guarantee.
inline PrivacyGuarantee min_privacy_guarantee(const Eigen::MatrixXd& original,
                                              const Eigen::MatrixXd& perturbed,
                                              double bw = kDefaultBinWidth) {
    require(original.rows() == perturbed.rows() && original.cols() == perturbed.cols(),
            "min_privacy_guarantee: shape mismatch");
    PrivacyGuarantee g;
    g.per_attribute.reserve(static_cast<std::size_t>(original.cols()));
    for (Eigen::Index c = 0; c < original.cols(); ++c) {
        const double inherent = std::exp2(inherent_uncertainty(original.col(c), bw).h);
        const double loss = privacy_loss(original.col(c), perturbed.col(c), bw);
        g.per_attribute.push_back(inherent * (1.0 - loss));
    }
    g.minimum = *std::min_element(g.per_attribute.begin(), g.per_attribute.end());
    return g;
}

/// Scales a pool of minimum privacy guarantees by the pool maximum.
inline std::vector<double> scale_privacy(const std::vector<double>& pool_minimums) {
    require(!pool_minimums.empty(), "scale_privacy: empty pool");
    for (double v : pool_minimums) require(v > 0.0, "scale_privacy: values must be > 0");
    const double top = *std::max_element(pool_minimums.begin(), pool_minimums.end());
    std::vector<double> scaled;
    scaled.reserve(pool_minimums.size());
    for (double v : pool_minimums) scaled.push_back(v / top);
    return scaled;
}

}  // namespace perturbench
