#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "perturbench/dataset.hpp"
#include "perturbench/error.hpp"
#include "perturbench/perturb.hpp"
#include "perturbench/rng.hpp"

namespace perturbench {

enum class AttackKind { naive, known_io, ica };

inline const char* to_string(AttackKind a) {
    switch (a) {
        case AttackKind::naive: return "naive";
        case AttackKind::known_io: return "known_io";
        case AttackKind::ica: return "ica";
    }
    return "unknown";
}

inline AttackKind attack_kind_from_string(const std::string& s) {
    if (s == "naive") return AttackKind::naive;
    if (s == "known_io") return AttackKind::known_io;
    if (s == "ica") return AttackKind::ica;
    throw Error("unknown attack '" + s + "'");
}

/// An attack's estimate of the original matrix, with the side knowledge it
/// assumed recorded for the report.
struct ReconstructionResult {
    Eigen::MatrixXd reconstructed;
    AttackKind attack = AttackKind::naive;
    std::map<std::string, std::string> assumptions;
};

/// Zero-knowledge estimate: the perturbed data itself, re-standardized per
/// column to look like z-scored originals.
inline ReconstructionResult naive_estimation(const PerturbedInstance& p) {
    ReconstructionResult r;
    r.attack = AttackKind::naive;
    r.reconstructed = p.features;
    for (Eigen::Index c = 0; c < r.reconstructed.cols(); ++c) {
        const Eigen::VectorXd col = r.reconstructed.col(c);
        const double sd = column_popstd(col);
        if (sd == 0.0)
            r.reconstructed.col(c).setZero();
        else
            r.reconstructed.col(c) = (col.array() - col.mean()) / sd;
    }
    return r;
}

struct KnownPairs {
    std::vector<Eigen::Index> indices;  // rows the adversary holds
    Eigen::MatrixXd original_rows;      // |indices| x n_attrs
};

/// Deterministic choice of the adversary's known records: the first
/// ceil(fraction * n) entries of a seeded shuffle.
inline KnownPairs sample_known_pairs(const Dataset& original, double fraction, std::uint64_t seed) {
    require(fraction > 0.0 && fraction <= 1.0, "sample_known_pairs: fraction must be in (0, 1]");
    const Eigen::Index n = original.n_records();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    Rng rng(seed);
    for (std::size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[static_cast<std::size_t>(rng.next_u64() % i)]);

    const auto k = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n)));
    KnownPairs kp;
    kp.indices.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
    kp.original_rows.resize(static_cast<Eigen::Index>(k), original.n_attrs());
    for (std::size_t i = 0; i < k; ++i) kp.original_rows.row(static_cast<Eigen::Index>(i)) = original.features.row(kp.indices[i]);
    return kp;
}

/// Fits the affine map (M, b) minimizing sum ||M y_i + b - x_i||^2 over the
/// known pairs (ridge-regularized), then applies it to every record.
inline ReconstructionResult known_io_attack(const PerturbedInstance& p, const KnownPairs& known,
                                            double ridge = 1e-8) {
    const Eigen::Index d = p.features.cols();
    const auto k = static_cast<Eigen::Index>(known.indices.size());
    require(k >= d, "known_io_attack: " + std::to_string(k) + " known pairs underdetermine " +
                        std::to_string(d) + " attributes");
    require(ridge >= 0.0, "known_io_attack: ridge must be >= 0");
    require(known.original_rows.rows() == k && known.original_rows.cols() == d,
            "known_io_attack: known rows shape mismatch");
    for (Eigen::Index i : known.indices)
        require(i >= 0 && i < p.features.rows(), "known_io_attack: known index out of range");

    Eigen::MatrixXd design(k, d + 1);  // [Y_known | 1]
    for (Eigen::Index i = 0; i < k; ++i) {
        design.row(i).head(d) = p.features.row(known.indices[static_cast<std::size_t>(i)]);
        design(i, d) = 1.0;
    }

    Eigen::MatrixXd normal = design.transpose() * design;
    normal.diagonal().array() += ridge;
    const Eigen::FullPivLU<Eigen::MatrixXd> lu(normal);
    require(lu.isInvertible(), "known_io_attack: singular normal equations (try ridge > 0)");
    const Eigen::MatrixXd weights = lu.solve(design.transpose() * known.original_rows);

    ReconstructionResult r;
    r.attack = AttackKind::known_io;
    Eigen::MatrixXd full(p.features.rows(), d + 1);
    full.leftCols(d) = p.features;
    full.col(d).setOnes();
    r.reconstructed = full * weights;
    r.assumptions["known_count"] = std::to_string(k);
    r.assumptions["ridge"] = detail::format_double(ridge);
    return r;
}

namespace detail {

inline double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    const double sa = column_popstd(a);
    const double sb = column_popstd(b);
    if (sa == 0.0 || sb == 0.0) return 0.0;
    const double cov = ((a.array() - a.mean()) * (b.array() - b.mean())).mean();
    return cov / (sa * sb);
}

}  // namespace detail

/// Symmetric FastICA with tanh nonlinearity. The perturbed matrix alone
/// drives extraction; the original enters only in the alignment step, where
/// each component is matched to the attribute with the largest |Pearson
/// correlation| and rescaled to that attribute's mean/std. This evaluates
/// the most-favorable-to-attacker case, so the resulting resistance figure
/// is a worst-case bound.
inline ReconstructionResult ica_attack(const PerturbedInstance& p, const Dataset& original_for_alignment,
                                       int max_iter = 200, double tol = 1e-10) {
    const Eigen::Index n = p.features.rows();
    const Eigen::Index d = p.features.cols();
    require(d >= 2, "ica_attack: need at least 2 attributes");
    require(n > d, "ica_attack: need more records than attributes");
    require(original_for_alignment.features.rows() == n && original_for_alignment.features.cols() == d,
            "ica_attack: original shape mismatch");
    require(max_iter >= 1 && tol > 0.0, "ica_attack: bad iteration settings");

    // Center and whiten.
    Eigen::MatrixXd y = p.features;
    const Eigen::RowVectorXd mean = y.colwise().mean();
    y.rowwise() -= mean;
    const Eigen::MatrixXd cov = (y.transpose() * y) / static_cast<double>(n);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    require(eig.info() == Eigen::Success, "ica_attack: covariance eigendecomposition failed");
    constexpr double kEigFloor = 1e-12;
    const Eigen::VectorXd inv_sqrt = eig.eigenvalues().cwiseMax(kEigFloor).cwiseSqrt().cwiseInverse();
    const Eigen::MatrixXd whitener = inv_sqrt.asDiagonal() * eig.eigenvectors().transpose();
    const Eigen::MatrixXd z = y * whitener.transpose();  // n x d, identity covariance

    // Fixed-point iteration from the identity; deterministic, and the
    // alignment step absorbs whatever sign/permutation it converges to.
    Eigen::MatrixXd w = Eigen::MatrixXd::Identity(d, d);
    auto symmetric_decorrelate = [&](Eigen::MatrixXd& m) {
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m * m.transpose());
        const Eigen::VectorXd isq = es.eigenvalues().cwiseMax(kEigFloor).cwiseSqrt().cwiseInverse();
        m = es.eigenvectors() * isq.asDiagonal() * es.eigenvectors().transpose() * m;
    };
    symmetric_decorrelate(w);

    bool converged = false;
    int iterations_used = max_iter;
    for (int it = 0; it < max_iter; ++it) {
        const Eigen::MatrixXd projections = z * w.transpose();          // n x d
        const Eigen::MatrixXd g = projections.array().tanh();           // tanh(w^T z)
        const Eigen::ArrayXXd g_prime = 1.0 - g.array().square();
        Eigen::MatrixXd w_new = (g.transpose() * z) / static_cast<double>(n);
        for (Eigen::Index j = 0; j < d; ++j)
            w_new.row(j) -= g_prime.col(j).mean() * w.row(j);
        symmetric_decorrelate(w_new);

        double delta = 0.0;
        for (Eigen::Index j = 0; j < d; ++j)
            delta = std::max(delta, std::abs(1.0 - std::abs(w_new.row(j).dot(w.row(j)))));
        w = std::move(w_new);
        if (delta < tol) {
            converged = true;
            iterations_used = it + 1;
            break;
        }
    }

    const Eigen::MatrixXd sources = z * w.transpose();  // n x d, unit variance

    // Greedy |correlation| matching of components to original attributes.
    Eigen::MatrixXd corr(d, d);
    for (Eigen::Index j = 0; j < d; ++j)
        for (Eigen::Index i = 0; i < d; ++i)
            corr(j, i) = detail::pearson(sources.col(j), original_for_alignment.features.col(i));

    std::vector<bool> comp_used(static_cast<std::size_t>(d), false);
    std::vector<bool> attr_used(static_cast<std::size_t>(d), false);
    ReconstructionResult r;
    r.attack = AttackKind::ica;
    r.reconstructed.resize(n, d);
    for (Eigen::Index step = 0; step < d; ++step) {
        Eigen::Index best_j = -1, best_i = -1;
        double best_abs = -1.0;
        for (Eigen::Index j = 0; j < d; ++j) {
            if (comp_used[static_cast<std::size_t>(j)]) continue;
            for (Eigen::Index i = 0; i < d; ++i) {
                if (attr_used[static_cast<std::size_t>(i)]) continue;
                if (std::abs(corr(j, i)) > best_abs) {
                    best_abs = std::abs(corr(j, i));
                    best_j = j;
                    best_i = i;
                }
            }
        }
        comp_used[static_cast<std::size_t>(best_j)] = true;
        attr_used[static_cast<std::size_t>(best_i)] = true;

        const Eigen::VectorXd comp = sources.col(best_j);
        const double comp_sd = column_popstd(comp);
        const Eigen::VectorXd target = original_for_alignment.features.col(best_i);
        const double target_sd = column_popstd(target);
        const double sign = corr(best_j, best_i) < 0.0 ? -1.0 : 1.0;
        if (comp_sd == 0.0)
            r.reconstructed.col(best_i).setConstant(target.mean());
        else
            r.reconstructed.col(best_i) =
                target.mean() + (target_sd * sign / comp_sd) * (comp.array() - comp.mean());
    }

    r.assumptions["converged"] = converged ? "true" : "false";
    r.assumptions["iterations"] = std::to_string(iterations_used);
    r.assumptions["max_iter"] = std::to_string(max_iter);
    r.assumptions["tol"] = detail::format_double(tol);
    return r;
}

struct AttackConfig {
    AttackKind kind = AttackKind::naive;
    double known_fraction = 0.10;  // known_io
    double ridge = 1e-8;           // known_io
    int max_iter = 200;            // ica
    double tol = 1e-10;            // ica
};

/// Runs every configured attack against one perturbed instance; order is the
/// config order and failures are rethrown tagged with the attack name.
inline std::vector<ReconstructionResult> run_attack_pool(const PerturbedInstance& p,
                                                         const Dataset& original,
                                                         const std::vector<AttackConfig>& pool) {
    require(!pool.empty(), "run_attack_pool: empty attack pool");
    std::vector<ReconstructionResult> results;
    results.reserve(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) {
        const AttackConfig& cfg = pool[i];
        try {
            switch (cfg.kind) {
                case AttackKind::naive:
                    results.push_back(naive_estimation(p));
                    break;
                case AttackKind::known_io: {
                    const KnownPairs kp =
                        sample_known_pairs(original, cfg.known_fraction, derive_stream(p.seed, 0xA77ACull + i));
                    auto r = known_io_attack(p, kp, cfg.ridge);
                    r.assumptions["known_fraction"] = detail::format_double(cfg.known_fraction);
                    results.push_back(std::move(r));
                    break;
                }
                case AttackKind::ica:
                    results.push_back(ica_attack(p, original, cfg.max_iter, cfg.tol));
                    break;
            }
        } catch (const Error& e) {
            throw Error(std::string("attack '") + to_string(cfg.kind) + "' failed: " + e.what());
        }
    }
    return results;
}

}  // namespace perturbench
