#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "perturbench/attack.hpp"
#include "perturbench/dataset.hpp"
#include "perturbench/error.hpp"

namespace perturbench {

/// Population variance of the element-wise difference xr - x; high values
/// mean the reconstruction missed.
inline double var_p(const Eigen::VectorXd& x, const Eigen::VectorXd& xr) {
    require(x.size() == xr.size(), "var_p: length mismatch");
    require(x.size() >= 2, "var_p: need at least 2 samples");
    const Eigen::VectorXd diff = xr - x;
    const double mean = diff.mean();
    return (diff.array() - mean).square().sum() / static_cast<double>(diff.size());
}

/// The most successfully reconstructed (most vulnerable) attribute.
inline double min_var_over_attributes(const Dataset& d, const ReconstructionResult& r) {
    require(d.features.rows() == r.reconstructed.rows() && d.features.cols() == r.reconstructed.cols(),
            "min_var_over_attributes: shape mismatch");
    double lowest = std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < d.n_attrs(); ++c)
        lowest = std::min(lowest, var_p(d.features.col(c), r.reconstructed.col(c)));
    return lowest;
}

inline double min_var_over_attacks(const std::vector<double>& per_attack) {
    require(!per_attack.empty(), "min_var_over_attacks: empty");
    return *std::min_element(per_attack.begin(), per_attack.end());
}

struct ScaledResistance {
    std::vector<double> values;
    bool degenerate = false;  // true when the whole pool was zero
};

/// Scales pool minimum standard deviations (sqrt of the minimum variances)
/// by the pool maximum.
inline ScaledResistance scale_resistance(const std::vector<double>& pool_min_stds) {
    require(!pool_min_stds.empty(), "scale_resistance: empty pool");
    for (double v : pool_min_stds) require(v >= 0.0, "scale_resistance: values must be >= 0");
    const double top = *std::max_element(pool_min_stds.begin(), pool_min_stds.end());
    ScaledResistance out;
    out.values.reserve(pool_min_stds.size());
    if (top == 0.0) {
        out.values.assign(pool_min_stds.size(), 0.0);
        out.degenerate = true;
        return out;
    }
    for (double v : pool_min_stds) out.values.push_back(v / top);
    return out;
}

struct ResistanceGuarantee {
    std::map<std::string, double> per_attack_min_std;  // attack name -> sqrt(min var)
    double overall_min_std = 0.0;
    double scaled = 0.0;  // filled in by pool-level scaling
};

/// Collapses a set of reconstructions into the instance's minimum guarantee
/// of attack resistance (as a standard deviation in z-scored units).
inline ResistanceGuarantee resistance_guarantee(const Dataset& d,
                                                const std::vector<ReconstructionResult>& results) {
    require(!results.empty(), "resistance_guarantee: no reconstructions");
    ResistanceGuarantee g;
    std::vector<double> mins;
    mins.reserve(results.size());
    for (const auto& r : results) {
        const double v = min_var_over_attributes(d, r);
        mins.push_back(v);
        g.per_attack_min_std[to_string(r.attack)] = std::sqrt(v);
    }
    g.overall_min_std = std::sqrt(min_var_over_attacks(mins));
    return g;
}

}  // namespace perturbench
