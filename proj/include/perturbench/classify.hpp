#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include "perturbench/error.hpp"

namespace perturbench {

enum class ClassifierKind { knn, gaussian_nb, decision_tree };

inline const char* to_string(ClassifierKind k) {
    switch (k) {
        case ClassifierKind::knn: return "knn";
        case ClassifierKind::gaussian_nb: return "gaussian_nb";
        case ClassifierKind::decision_tree: return "decision_tree";
    }
    return "unknown";
}

inline ClassifierKind classifier_kind_from_string(const std::string& s) {
    if (s == "knn") return ClassifierKind::knn;
    if (s == "gaussian_nb") return ClassifierKind::gaussian_nb;
    if (s == "decision_tree") return ClassifierKind::decision_tree;
    throw Error("unknown classifier '" + s + "'");
}

struct Classifier {
    ClassifierKind kind = ClassifierKind::knn;
    int k = 1;                // knn
    int max_depth = 12;       // decision_tree
    int min_leaf = 2;         // decision_tree
    double var_floor = 1e-9;  // gaussian_nb

    std::string name() const {
        if (kind == ClassifierKind::knn) return std::string("knn_k") + std::to_string(k);
        return to_string(kind);
    }

    void validate() const {
        if (kind == ClassifierKind::knn) require(k >= 1, "knn: k must be >= 1");
        if (kind == ClassifierKind::decision_tree) {
            require(max_depth >= 1, "decision_tree: max_depth must be >= 1");
            require(min_leaf >= 1, "decision_tree: min_leaf must be >= 1");
        }
        if (kind == ClassifierKind::gaussian_nb) require(var_floor > 0.0, "gaussian_nb: var_floor must be > 0");
    }
};

namespace detail {

// Class ids in sorted label order so predictions are deterministic.
struct LabelIndex {
    std::vector<std::string> classes;
    std::vector<int> ids;  // per training record

    explicit LabelIndex(const std::vector<std::string>& labels) {
        classes = labels;
        std::sort(classes.begin(), classes.end());
        classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
        ids.reserve(labels.size());
        for (const auto& l : labels)
            ids.push_back(static_cast<int>(std::lower_bound(classes.begin(), classes.end(), l) - classes.begin()));
    }
};

inline int majority_class(const std::vector<int>& counts) {
    int best = 0;
    for (std::size_t c = 1; c < counts.size(); ++c)
        if (counts[c] > counts[static_cast<std::size_t>(best)]) best = static_cast<int>(c);
    return best;
}

inline std::vector<std::string> knn_predict(int k, const Eigen::MatrixXd& train_x, const LabelIndex& idx,
                                            const Eigen::MatrixXd& test_x) {
    const Eigen::Index n_train = train_x.rows();
    const int kk = std::min<int>(k, static_cast<int>(n_train));
    std::vector<std::string> out;
    out.reserve(static_cast<std::size_t>(test_x.rows()));
    std::vector<std::pair<double, Eigen::Index>> dist(static_cast<std::size_t>(n_train));
    for (Eigen::Index t = 0; t < test_x.rows(); ++t) {
        for (Eigen::Index i = 0; i < n_train; ++i)
            dist[static_cast<std::size_t>(i)] = {(train_x.row(i) - test_x.row(t)).squaredNorm(), i};
        std::partial_sort(dist.begin(), dist.begin() + kk, dist.end());
        std::vector<int> votes(idx.classes.size(), 0);
        for (int j = 0; j < kk; ++j) ++votes[static_cast<std::size_t>(idx.ids[static_cast<std::size_t>(dist[static_cast<std::size_t>(j)].second)])];
        out.push_back(idx.classes[static_cast<std::size_t>(majority_class(votes))]);
    }
    return out;
}

inline std::vector<std::string> gaussian_nb_predict(double var_floor, const Eigen::MatrixXd& train_x,
                                                    const LabelIndex& idx, const Eigen::MatrixXd& test_x) {
    const auto n_classes = idx.classes.size();
    const Eigen::Index d = train_x.cols();
    std::vector<double> log_prior(n_classes, -std::numeric_limits<double>::infinity());
    std::vector<Eigen::VectorXd> mean(n_classes, Eigen::VectorXd::Zero(d));
    std::vector<Eigen::VectorXd> var(n_classes, Eigen::VectorXd::Zero(d));
    std::vector<int> count(n_classes, 0);

    for (Eigen::Index i = 0; i < train_x.rows(); ++i) {
        const auto c = static_cast<std::size_t>(idx.ids[static_cast<std::size_t>(i)]);
        ++count[c];
        mean[c] += train_x.row(i).transpose();
    }
    for (std::size_t c = 0; c < n_classes; ++c)
        if (count[c] > 0) mean[c] /= static_cast<double>(count[c]);
    for (Eigen::Index i = 0; i < train_x.rows(); ++i) {
        const auto c = static_cast<std::size_t>(idx.ids[static_cast<std::size_t>(i)]);
        var[c] += (train_x.row(i).transpose() - mean[c]).array().square().matrix();
    }
    for (std::size_t c = 0; c < n_classes; ++c) {
        if (count[c] == 0) continue;  // class absent from this training fold
        var[c] = (var[c] / static_cast<double>(count[c])).cwiseMax(var_floor);
        log_prior[c] = std::log(static_cast<double>(count[c]) / static_cast<double>(train_x.rows()));
    }

    std::vector<std::string> out;
    out.reserve(static_cast<std::size_t>(test_x.rows()));
    for (Eigen::Index t = 0; t < test_x.rows(); ++t) {
        double best_score = -std::numeric_limits<double>::infinity();
        std::size_t best_c = 0;
        for (std::size_t c = 0; c < n_classes; ++c) {
            if (count[c] == 0) continue;
            double score = log_prior[c];
            for (Eigen::Index j = 0; j < d; ++j) {
                const double diff = test_x(t, j) - mean[c][j];
                score += -0.5 * (std::log(2.0 * M_PI * var[c][j]) + diff * diff / var[c][j]);
            }
            if (score > best_score) {
                best_score = score;
                best_c = c;
            }
        }
        out.push_back(idx.classes[best_c]);
    }
    return out;
}

// CART-style binary tree on Gini impurity; splits scan features in order and
// thresholds at midpoints between consecutive distinct values.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    int leaf_class = -1;
    std::unique_ptr<TreeNode> left, right;
};

inline double gini(const std::vector<int>& counts, int total) {
    if (total == 0) return 0.0;
    double g = 1.0;
    for (int c : counts) {
        const double p = static_cast<double>(c) / static_cast<double>(total);
        g -= p * p;
    }
    return g;
}

inline std::unique_ptr<TreeNode> grow_tree(const Eigen::MatrixXd& x, const std::vector<int>& ids,
                                           std::vector<Eigen::Index>& rows, std::size_t n_classes,
                                           int depth, int max_depth, int min_leaf) {
    auto node = std::make_unique<TreeNode>();
    std::vector<int> counts(n_classes, 0);
    for (Eigen::Index r : rows) ++counts[static_cast<std::size_t>(ids[static_cast<std::size_t>(r)])];
    const int total = static_cast<int>(rows.size());
    node->leaf_class = majority_class(counts);

    const bool pure = std::any_of(counts.begin(), counts.end(), [&](int c) { return c == total; });
    if (pure || depth >= max_depth || total < 2 * min_leaf) return node;

    double best_impurity = gini(counts, total);
    int best_feature = -1;
    double best_threshold = 0.0;
    std::vector<std::pair<double, int>> column(rows.size());

    for (Eigen::Index f = 0; f < x.cols(); ++f) {
        for (std::size_t i = 0; i < rows.size(); ++i)
            column[i] = {x(rows[i], f), ids[static_cast<std::size_t>(rows[i])]};
        std::sort(column.begin(), column.end());

        std::vector<int> left_counts(n_classes, 0);
        int left_total = 0;
        for (std::size_t i = 0; i + 1 < column.size(); ++i) {
            ++left_counts[static_cast<std::size_t>(column[i].second)];
            ++left_total;
            if (column[i].first == column[i + 1].first) continue;
            const int right_total = total - left_total;
            if (left_total < min_leaf || right_total < min_leaf) continue;
            std::vector<int> right_counts(n_classes, 0);
            for (std::size_t c = 0; c < n_classes; ++c) right_counts[c] = counts[c] - left_counts[c];
            const double impurity = (static_cast<double>(left_total) * gini(left_counts, left_total) +
                                     static_cast<double>(right_total) * gini(right_counts, right_total)) /
                                    static_cast<double>(total);
            if (impurity + 1e-12 < best_impurity) {
                best_impurity = impurity;
                best_feature = static_cast<int>(f);
                best_threshold = 0.5 * (column[i].first + column[i + 1].first);
            }
        }
    }

    if (best_feature < 0) return node;

    std::vector<Eigen::Index> left_rows, right_rows;
    for (Eigen::Index r : rows)
        (x(r, best_feature) <= best_threshold ? left_rows : right_rows).push_back(r);
    if (left_rows.empty() || right_rows.empty()) return node;

    node->feature = best_feature;
    node->threshold = best_threshold;
    node->left = grow_tree(x, ids, left_rows, n_classes, depth + 1, max_depth, min_leaf);
    node->right = grow_tree(x, ids, right_rows, n_classes, depth + 1, max_depth, min_leaf);
    return node;
}

inline std::vector<std::string> tree_predict(int max_depth, int min_leaf, const Eigen::MatrixXd& train_x,
                                             const LabelIndex& idx, const Eigen::MatrixXd& test_x) {
    std::vector<Eigen::Index> rows(static_cast<std::size_t>(train_x.rows()));
    std::iota(rows.begin(), rows.end(), 0);
    const auto root = grow_tree(train_x, idx.ids, rows, idx.classes.size(), 0, max_depth, min_leaf);

    std::vector<std::string> out;
    out.reserve(static_cast<std::size_t>(test_x.rows()));
    for (Eigen::Index t = 0; t < test_x.rows(); ++t) {
        const TreeNode* node = root.get();
        while (node->feature >= 0)
            node = test_x(t, node->feature) <= node->threshold ? node->left.get() : node->right.get();
        out.push_back(idx.classes[static_cast<std::size_t>(node->leaf_class)]);
    }
    return out;
}

}  // namespace detail

/// Trains the classifier on (train_x, train_y) and predicts labels for test_x.
inline std::vector<std::string> predict(const Classifier& c, const Eigen::MatrixXd& train_x,
                                        const std::vector<std::string>& train_y,
                                        const Eigen::MatrixXd& test_x) {
    c.validate();
    require(train_x.rows() == static_cast<Eigen::Index>(train_y.size()), "predict: train size mismatch");
    require(train_x.rows() >= 1, "predict: empty training set");
    require(train_x.cols() == test_x.cols(), "predict: feature count mismatch");
    const detail::LabelIndex idx(train_y);
    switch (c.kind) {
        case ClassifierKind::knn: return detail::knn_predict(c.k, train_x, idx, test_x);
        case ClassifierKind::gaussian_nb: return detail::gaussian_nb_predict(c.var_floor, train_x, idx, test_x);
        case ClassifierKind::decision_tree: return detail::tree_predict(c.max_depth, c.min_leaf, train_x, idx, test_x);
    }
    throw Error("predict: unknown classifier kind");
}

}  // namespace perturbench
