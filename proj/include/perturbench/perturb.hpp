#pragma once

#include <Eigen/Dense>
#include <Eigen/QR>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "perturbench/dataset.hpp"
#include "perturbench/entropy.hpp"
#include "perturbench/error.hpp"
#include "perturbench/rng.hpp"

namespace perturbench {

struct OrthogonalMatrix {
    Eigen::MatrixXd entries;  // d x d, R^T R = I
};

/// Random rotation via Householder QR of a seeded Gaussian matrix, with the
/// usual sign fix (columns scaled by sign of diag(R)) so the distribution is
/// Haar and the result is a deterministic function of the seed.
inline OrthogonalMatrix random_orthogonal(Eigen::Index d, std::uint64_t seed) {
    require(d >= 1, "random_orthogonal: dimension must be >= 1");
    Rng rng(seed);
    Eigen::MatrixXd g(d, d);
    for (Eigen::Index r = 0; r < d; ++r)
        for (Eigen::Index c = 0; c < d; ++c) g(r, c) = rng.normal();
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ();
    const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index c = 0; c < d; ++c)
        if (r(c, c) < 0.0) q.col(c) = -q.col(c);
    return {std::move(q)};
}

enum class PerturbAlgo { additive_noise, rotation, geometric, laplace_ldp };

inline const char* to_string(PerturbAlgo a) {
    switch (a) {
        case PerturbAlgo::additive_noise: return "additive_noise";
        case PerturbAlgo::rotation: return "rotation";
        case PerturbAlgo::geometric: return "geometric";
        case PerturbAlgo::laplace_ldp: return "laplace_ldp";
    }
    return "unknown";
}

inline PerturbAlgo perturb_algo_from_string(const std::string& s) {
    if (s == "additive_noise") return PerturbAlgo::additive_noise;
    if (s == "rotation") return PerturbAlgo::rotation;
    if (s == "geometric") return PerturbAlgo::geometric;
    if (s == "laplace_ldp") return PerturbAlgo::laplace_ldp;
    throw Error("unknown perturbation algorithm '" + s + "'");
}

/// A perturbed copy of a dataset plus the provenance that reproduces it:
/// (algorithm, params, seed) fully determine the output for a given source.
struct PerturbedInstance {
    Eigen::MatrixXd features;
    std::string source_id;
    PerturbAlgo algorithm = PerturbAlgo::additive_noise;
    std::map<std::string, double> params;
    std::uint64_t seed = 0;
};

inline PrivacyGuarantee min_privacy_guarantee(const Dataset& d, const PerturbedInstance& p,
                                              double bw = kDefaultBinWidth) {
    require(d.normalization_state == NormalizationState::zscored,
            "min_privacy_guarantee: dataset must be z-scored");
    return min_privacy_guarantee(d.features, p.features, bw);
}

namespace detail {

inline void check_zscored(const Dataset& d, const char* op) {
    require(d.normalization_state == NormalizationState::zscored,
            std::string(op) + ": dataset must be z-scored first");
}

// Stream ids within one perturbation call. Candidate streams are derived
// from (seed, offset) only, never from the iteration budget, so candidate t
// is the same matrix whether 1 or 10 candidates are drawn.
enum : std::uint64_t { kRotationStream = 1, kTranslationStream = 2, kNoiseStream = 3 };

inline std::uint64_t candidate_seed(std::uint64_t seed, int offset, std::uint64_t stream) {
    return derive_stream(derive_stream(seed, static_cast<std::uint64_t>(offset)), stream);
}

}  // namespace detail

/// The rotation candidate `offset` would use for this seed; exposed so tests
/// and attacks can recover the exact transform from provenance.
inline OrthogonalMatrix rotation_candidate(Eigen::Index d, std::uint64_t seed, int offset) {
    return random_orthogonal(d, detail::candidate_seed(seed, offset, detail::kRotationStream));
}

struct GeometricComponents {
    OrthogonalMatrix rotation;
    Eigen::VectorXd translation;  // per-attribute, uniform in [-1, 1]
};

inline GeometricComponents geometric_candidate(Eigen::Index d, std::uint64_t seed, int offset) {
    GeometricComponents gc;
    gc.rotation = rotation_candidate(d, seed, offset);
    Rng rng(detail::candidate_seed(seed, offset, detail::kTranslationStream));
    gc.translation.resize(d);
    for (Eigen::Index i = 0; i < d; ++i) gc.translation[i] = rng.uniform(-1.0, 1.0);
    return gc;
}

/// Element-wise i.i.d. Gaussian(0, sigma^2) noise addition.
inline PerturbedInstance additive_noise(const Dataset& d, double sigma, std::uint64_t seed) {
    detail::check_zscored(d, "additive_noise");
    require(sigma > 0.0, "additive_noise: sigma must be > 0");
    Rng rng(derive_stream(seed, detail::kNoiseStream));
    PerturbedInstance p;
    p.features = d.features;
    for (Eigen::Index r = 0; r < p.features.rows(); ++r)
        for (Eigen::Index c = 0; c < p.features.cols(); ++c) p.features(r, c) += rng.normal(0.0, sigma);
    p.source_id = d.source_id;
    p.algorithm = PerturbAlgo::additive_noise;
    p.params = {{"sigma", sigma}};
    p.seed = seed;
    return p;
}

/// Multidimensional rotation in attribute space: draws `iterations` candidate
/// rotations and keeps the one with the largest minimum privacy guarantee.
inline PerturbedInstance rotation_perturb(const Dataset& d, int iterations, std::uint64_t seed,
                                          double bw = kDefaultBinWidth) {
    detail::check_zscored(d, "rotation_perturb");
    require(d.n_attrs() >= 2, "rotation_perturb: need at least 2 attributes");
    require(iterations >= 1, "rotation_perturb: iterations must be >= 1");

    Eigen::MatrixXd best;
    double best_guarantee = -1.0;
    int best_offset = 0;
    for (int t = 0; t < iterations; ++t) {
        const OrthogonalMatrix rot = rotation_candidate(d.n_attrs(), seed, t);
        Eigen::MatrixXd candidate = d.features * rot.entries.transpose();
        const double guarantee = min_privacy_guarantee(d.features, candidate, bw).minimum;
        if (guarantee > best_guarantee) {
            best_guarantee = guarantee;
            best = std::move(candidate);
            best_offset = t;
        }
    }

    PerturbedInstance p;
    p.features = std::move(best);
    p.source_id = d.source_id;
    p.algorithm = PerturbAlgo::rotation;
    p.params = {{"iterations", static_cast<double>(iterations)}, {"seed_offset", static_cast<double>(best_offset)}};
    p.seed = seed;
    return p;
}

/// Rotation + random translation + Gaussian noise, best of `iterations`
/// candidates by minimum privacy guarantee.
inline PerturbedInstance geometric_perturb(const Dataset& d, int iterations, double sigma,
                                           std::uint64_t seed, double bw = kDefaultBinWidth) {
    detail::check_zscored(d, "geometric_perturb");
    require(d.n_attrs() >= 2, "geometric_perturb: need at least 2 attributes");
    require(sigma > 0.0, "geometric_perturb: sigma must be > 0");
    require(iterations >= 1, "geometric_perturb: iterations must be >= 1");

    Eigen::MatrixXd best;
    double best_guarantee = -1.0;
    int best_offset = 0;
    for (int t = 0; t < iterations; ++t) {
        const GeometricComponents gc = geometric_candidate(d.n_attrs(), seed, t);
        Eigen::MatrixXd candidate = d.features * gc.rotation.entries.transpose();
        candidate.rowwise() += gc.translation.transpose();
        Rng rng(detail::candidate_seed(seed, t, detail::kNoiseStream));
        for (Eigen::Index r = 0; r < candidate.rows(); ++r)
            for (Eigen::Index c = 0; c < candidate.cols(); ++c) candidate(r, c) += rng.normal(0.0, sigma);
        const double guarantee = min_privacy_guarantee(d.features, candidate, bw).minimum;
        if (guarantee > best_guarantee) {
            best_guarantee = guarantee;
            best = std::move(candidate);
            best_offset = t;
        }
    }

    PerturbedInstance p;
    p.features = std::move(best);
    p.source_id = d.source_id;
    p.algorithm = PerturbAlgo::geometric;
    p.params = {{"iterations", static_cast<double>(iterations)},
                {"sigma", sigma},
                {"seed_offset", static_cast<double>(best_offset)}};
    p.seed = seed;
    return p;
}

/// Rescales each column into [-1, 1] by its max-abs value, then adds
/// Laplace(2/epsilon) noise per cell; range width 2 is the sensitivity.
inline PerturbedInstance laplace_perturb(const Dataset& d, double epsilon, std::uint64_t seed) {
    detail::check_zscored(d, "laplace_perturb");
    require(epsilon > 0.0, "laplace_perturb: epsilon must be > 0");

    constexpr double kSensitivity = 2.0;
    const double scale = kSensitivity / epsilon;

    PerturbedInstance p;
    p.features = d.features;
    for (Eigen::Index c = 0; c < p.features.cols(); ++c) {
        const double max_abs = p.features.col(c).cwiseAbs().maxCoeff();
        if (max_abs > 0.0) p.features.col(c) /= max_abs;
        p.features.col(c) = p.features.col(c).cwiseMax(-1.0).cwiseMin(1.0);
    }
    Rng rng(derive_stream(seed, detail::kNoiseStream));
    for (Eigen::Index r = 0; r < p.features.rows(); ++r)
        for (Eigen::Index c = 0; c < p.features.cols(); ++c) p.features(r, c) += rng.laplace(scale);

    p.source_id = d.source_id;
    p.algorithm = PerturbAlgo::laplace_ldp;
    p.params = {{"epsilon", epsilon}};
    p.seed = seed;
    return p;
}

}  // namespace perturbench
