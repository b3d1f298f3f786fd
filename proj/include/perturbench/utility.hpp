#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "perturbench/classify.hpp"
#include "perturbench/dataset.hpp"
#include "perturbench/error.hpp"

namespace perturbench {

/// Fraction of exact label matches. For binary problems this is
/// (TP+TN)/(TP+FP+FN+TN); multi-class uses the same match fraction.
inline double accuracy(const std::vector<std::string>& predictions, const std::vector<std::string>& truth) {
    require(predictions.size() == truth.size(), "accuracy: length mismatch");
    require(!truth.empty(), "accuracy: empty input");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < truth.size(); ++i)
        if (predictions[i] == truth[i]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(truth.size());
}

/// Mean held-out-fold accuracy under the given split plan. Deterministic for
/// a fixed (features, labels, classifier, plan).
inline double cross_validated_accuracy(const Eigen::MatrixXd& features, const std::vector<std::string>& labels,
                                       const Classifier& c, const SplitPlan& plan) {
    require(plan.n_folds >= 2, "cross_validated_accuracy: plan must have >= 2 folds");
    require(plan.fold_assignments.size() == static_cast<std::size_t>(features.rows()),
            "cross_validated_accuracy: plan does not cover all records");
    require(labels.size() == static_cast<std::size_t>(features.rows()),
            "cross_validated_accuracy: label count mismatch");

    double total = 0.0;
    for (int fold = 0; fold < plan.n_folds; ++fold) {
        std::vector<Eigen::Index> train_rows, test_rows;
        for (std::size_t i = 0; i < plan.fold_assignments.size(); ++i)
            (plan.fold_assignments[i] == fold ? test_rows : train_rows).push_back(static_cast<Eigen::Index>(i));
        require(!test_rows.empty() && !train_rows.empty(), "cross_validated_accuracy: empty fold");

        Eigen::MatrixXd train_x(static_cast<Eigen::Index>(train_rows.size()), features.cols());
        Eigen::MatrixXd test_x(static_cast<Eigen::Index>(test_rows.size()), features.cols());
        std::vector<std::string> train_y, test_y;
        train_y.reserve(train_rows.size());
        test_y.reserve(test_rows.size());
        for (std::size_t i = 0; i < train_rows.size(); ++i) {
            train_x.row(static_cast<Eigen::Index>(i)) = features.row(train_rows[i]);
            train_y.push_back(labels[static_cast<std::size_t>(train_rows[i])]);
        }
        for (std::size_t i = 0; i < test_rows.size(); ++i) {
            test_x.row(static_cast<Eigen::Index>(i)) = features.row(test_rows[i]);
            test_y.push_back(labels[static_cast<std::size_t>(test_rows[i])]);
        }
        total += accuracy(predict(c, train_x, train_y, test_x), test_y);
    }
    return total / static_cast<double>(plan.n_folds);
}

struct UtilityResult {
    std::map<std::string, double> per_classifier_accuracy;
    double minimum = 0.0;
    int folds = 0;
    std::uint64_t seed = 0;
};

/// Cross-validated accuracy per pool classifier plus the minimum guarantee.
inline UtilityResult min_utility_guarantee(const Eigen::MatrixXd& features,
                                           const std::vector<std::string>& labels,
                                           const std::vector<Classifier>& pool, const SplitPlan& plan) {
    require(!pool.empty(), "min_utility_guarantee: empty classifier pool");
    UtilityResult u;
    u.folds = plan.n_folds;
    u.seed = plan.seed;
    u.minimum = 1.0;
    for (const auto& c : pool) {
        const double acc = cross_validated_accuracy(features, labels, c, plan);
        u.per_classifier_accuracy[c.name()] = acc;
        u.minimum = std::min(u.minimum, acc);
    }
    return u;
}

}  // namespace perturbench
