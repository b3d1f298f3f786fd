#include "perturbench/perturb.hpp"

#include <gtest/gtest.h>

#include "support.hpp"

using namespace perturbench;

namespace {

TEST(RandomOrthogonal, OneDimensionalIsSign) {
    const OrthogonalMatrix r = random_orthogonal(1, 3);
    EXPECT_NEAR(std::abs(r.entries(0, 0)), 1.0, 1e-12);
}

TEST(RandomOrthogonal, DefiningProperty) {
    for (std::uint64_t seed : {1ull, 7ull, 1234ull}) {
        const OrthogonalMatrix r = random_orthogonal(3, seed);
        const Eigen::MatrixXd gram = r.entries.transpose() * r.entries;
        EXPECT_LT((gram - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-9);
        EXPECT_NEAR(std::abs(r.entries.determinant()), 1.0, 1e-9);
    }
}

TEST(RandomOrthogonal, DeterministicPerSeed) {
    const OrthogonalMatrix a = random_orthogonal(5, 99);
    const OrthogonalMatrix b = random_orthogonal(5, 99);
    EXPECT_EQ((a.entries - b.entries).cwiseAbs().maxCoeff(), 0.0);
    const OrthogonalMatrix c = random_orthogonal(5, 100);
    EXPECT_GT((a.entries - c.entries).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(AdditiveNoise, VanishingSigmaIsIdentity) {
    const Dataset d = zscore_normalize(testsupport::make_blobs(50, 3, 6.0, 1));
    const PerturbedInstance p = additive_noise(d, 1e-12, 5);
    EXPECT_LT((p.features - d.features).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(AdditiveNoise, EmpiricalNoiseStdMatchesSigma) {
    const Dataset d = zscore_normalize(testsupport::make_blobs(10000, 5, 6.0, 2));
    const PerturbedInstance p = additive_noise(d, 0.3, 5);
    for (Eigen::Index c = 0; c < d.n_attrs(); ++c) {
        const double sd = column_popstd(p.features.col(c) - d.features.col(c));
        EXPECT_GT(sd, 0.29);
        EXPECT_LT(sd, 0.31);
    }
}

TEST(AdditiveNoise, DeterministicPerSeed) {
    const Dataset d = zscore_normalize(testsupport::make_blobs(30, 2, 6.0, 3));
    const PerturbedInstance a = additive_noise(d, 0.3, 7);
    const PerturbedInstance b = additive_noise(d, 0.3, 7);
    EXPECT_EQ((a.features - b.features).cwiseAbs().maxCoeff(), 0.0);
}

TEST(AdditiveNoise, RejectsNonPositiveSigma) {
    const Dataset d = zscore_normalize(testsupport::make_blobs(10, 2, 6.0, 3));
    EXPECT_THROW(additive_noise(d, 0.0, 1), Error);
    EXPECT_THROW(additive_noise(d, -0.1, 1), Error);
}

TEST(RotationPerturb, PreservesRecordNormsAndPairwiseDistances) {
    const Dataset d = zscore_normalize(testsupport::make_blobs(60, 4, 6.0, 4));
    const PerturbedInstance p = rotation_perturb(d, 3, 17);
    for (Eigen::Index r = 0; r < d.n_records(); ++r)
        EXPECT_NEAR(p.features.row(r).norm(), d.features.row(r).norm(), 1e-9);
    for (Eigen::Index i = 0; i < 10; ++i)
        for (Eigen::Index j = i + 1; j < 10; ++j)
            EXPECT_NEAR((p.features.row(i) - p.features.row(j)).norm(),
                        (d.features.row(i) - d.features.row(j)).norm(), 1e-9);
}

TEST(RotationPerturb, MoreIterationsNeverHurtThePrivacyObjective) {
    const Dataset d = zscore_normalize(testsupport::make_blobs(80, 3, 6.0, 5));
    const PerturbedInstance ten = rotation_perturb(d, 10, 21);
    const PerturbedInstance one = rotation_perturb(d, 1, 21);
    EXPECT_GE(min_privacy_guarantee(d, ten).minimum, min_privacy_guarantee(d, one).minimum);
}

TEST(RotationPerturb, DeterministicAndProvenanceComplete) {
    const Dataset d = zscore_normalize(testsupport::make_blobs(40, 3, 6.0, 6));
    const PerturbedInstance a = rotation_perturb(d, 5, 9);
    const PerturbedInstance b = rotation_perturb(d, 5, 9);
    EXPECT_EQ((a.features - b.features).cwiseAbs().maxCoeff(), 0.0);
    ASSERT_TRUE(a.params.contains("seed_offset"));
    // The chosen candidate is recoverable from (seed, seed_offset).
    const OrthogonalMatrix r = rotation_candidate(d.n_attrs(), 9, static_cast<int>(a.params.at("seed_offset")));
    EXPECT_LT((a.features - d.features * r.entries.transpose()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(RotationPerturb, RejectsSingleAttribute) {
    const Dataset d = zscore_normalize(testsupport::make_blobs(20, 1, 6.0, 3));
    EXPECT_THROW(rotation_perturb(d, 1, 3), Error);
}

TEST(GeometricPerturb, ReducesToRotationWhenNoiseVanishes) {
    const Dataset d = zscore_normalize(testsupport::make_blobs(50, 3, 6.0, 7));
    const PerturbedInstance p = geometric_perturb(d, 1, 1e-12, 13);
    const GeometricComponents gc = geometric_candidate(d.n_attrs(), 13, 0);
    // Subtracting the known translation leaves a pure rotation.
    Eigen::MatrixXd detranslated = p.features;
    detranslated.rowwise() -= gc.translation.transpose();
    for (Eigen::Index i = 0; i < 10; ++i)
        for (Eigen::Index j = i + 1; j < 10; ++j)
            EXPECT_NEAR((detranslated.row(i) - detranslated.row(j)).norm(),
                        (d.features.row(i) - d.features.row(j)).norm(), 1e-6);
}

TEST(GeometricPerturb, ResidualNoiseRecoveredFromStoredComponents) {
    const Dataset d = zscore_normalize(testsupport::make_blobs(5000, 3, 6.0, 8));
    const PerturbedInstance p = geometric_perturb(d, 2, 0.3, 31);
    const int offset = static_cast<int>(p.params.at("seed_offset"));
    const GeometricComponents gc = geometric_candidate(d.n_attrs(), 31, offset);
    Eigen::MatrixXd residual = p.features - d.features * gc.rotation.entries.transpose();
    residual.rowwise() -= gc.translation.transpose();
    for (Eigen::Index c = 0; c < residual.cols(); ++c) {
        const double sd = column_popstd(residual.col(c));
        EXPECT_GT(sd, 0.29);
        EXPECT_LT(sd, 0.31);
    }
}

TEST(GeometricPerturb, DeterministicPerSeed) {
    const Dataset d = zscore_normalize(testsupport::make_blobs(40, 3, 6.0, 9));
    const PerturbedInstance a = geometric_perturb(d, 4, 0.3, 15);
    const PerturbedInstance b = geometric_perturb(d, 4, 0.3, 15);
    EXPECT_EQ((a.features - b.features).cwiseAbs().maxCoeff(), 0.0);
}

TEST(GeometricPerturb, ContractErrors) {
    const Dataset d = zscore_normalize(testsupport::make_blobs(20, 2, 6.0, 3));
    EXPECT_THROW(geometric_perturb(d, 1, 0.0, 3), Error);
    const Dataset one = zscore_normalize(testsupport::make_blobs(20, 1, 6.0, 3));
    EXPECT_THROW(geometric_perturb(one, 1, 0.3, 3), Error);
}

Eigen::MatrixXd clamped_rescale(const Eigen::MatrixXd& features) {
    Eigen::MatrixXd out = features;
    for (Eigen::Index c = 0; c < out.cols(); ++c) {
        const double max_abs = out.col(c).cwiseAbs().maxCoeff();
        if (max_abs > 0.0) out.col(c) /= max_abs;
        out.col(c) = out.col(c).cwiseMax(-1.0).cwiseMin(1.0);
    }
    return out;
}

TEST(LaplacePerturb, HugeEpsilonLeavesClampedInput) {
    const Dataset d = zscore_normalize(testsupport::make_blobs(60, 3, 6.0, 10));
    const PerturbedInstance p = laplace_perturb(d, 1e12, 3);
    const Eigen::MatrixXd expected = clamped_rescale(d.features);
    EXPECT_LT((p.features - expected).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(LaplacePerturb, NoiseDistributionAtUnitEpsilon) {
    // 100000 noise draws through the mechanism itself.
    Dataset d;
    d.features = Eigen::MatrixXd::Zero(100000, 1);
    for (int i = 0; i < 100000; ++i) d.features(i, 0) = (i % 2 == 0) ? 1.0 : -1.0;
    d.features.array() -= d.features.mean();
    d.features /= column_popstd(d.features.col(0));
    d.labels.assign(100000, "x");
    d.attr_names = {"a"};
    d.normalization_state = NormalizationState::zscored;

    const PerturbedInstance p = laplace_perturb(d, 1.0, 8);
    const Eigen::VectorXd noise = p.features.col(0) - clamped_rescale(d.features).col(0);

    // Scale = sensitivity / epsilon = 2. Median of |noise| sits at 2 ln 2.
    const std::vector<double> samples = testsupport::to_vec(noise);
    int below = 0;
    for (double v : samples)
        if (std::abs(v) <= 2.0 * std::log(2.0)) ++below;
    const double frac = static_cast<double>(below) / static_cast<double>(samples.size());
    EXPECT_GT(frac, 0.49);
    EXPECT_LT(frac, 0.51);

    const double ks = testsupport::ks_statistic(samples, 2.0);
    EXPECT_LT(ks, testsupport::ks_critical_001(samples.size()));
}

TEST(LaplacePerturb, EmpiricalDensityRatioRespectsEpsilonBound) {
    // Randomizer outputs for the two extreme clamped inputs (-1 and +1, the
    // farthest pair after rescaling) may differ in density by at most a
    // factor e^epsilon.
    const int n = 200000;
    Dataset d;
    d.features.resize(n, 1);
    for (int i = 0; i < n; ++i) d.features(i, 0) = (i % 2 == 0) ? 1.0 : -1.0;
    d.labels.assign(n, "x");
    d.attr_names = {"a"};
    d.normalization_state = NormalizationState::zscored;

    const double epsilon = 1.0;
    const PerturbedInstance p = laplace_perturb(d, epsilon, 12);

    const double lo = -8.0, hi = 8.0, width = 0.5;
    const int n_bins = static_cast<int>((hi - lo) / width);
    std::vector<int> count_pos(static_cast<std::size_t>(n_bins), 0);
    std::vector<int> count_neg(static_cast<std::size_t>(n_bins), 0);
    for (int i = 0; i < n; ++i) {
        const double out = p.features(i, 0);
        if (out < lo || out >= hi) continue;
        const auto bin = static_cast<std::size_t>((out - lo) / width);
        (d.features(i, 0) > 0 ? count_pos : count_neg)[bin] += 1;
    }
    const double bound = std::exp(epsilon);
    int compared = 0;
    for (int b = 0; b < n_bins; ++b) {
        const int cp = count_pos[static_cast<std::size_t>(b)];
        const int cn = count_neg[static_cast<std::size_t>(b)];
        if (cp < 300 || cn < 300) continue;  // skip noisy tail bins
        const double ratio = static_cast<double>(cp) / static_cast<double>(cn);
        EXPECT_LT(ratio, bound * 1.3) << "bin " << b;
        EXPECT_GT(ratio, 1.0 / (bound * 1.3)) << "bin " << b;
        ++compared;
    }
    EXPECT_GE(compared, 10);
}

TEST(LaplacePerturb, DeterministicPerSeedAndRejectsBadEpsilon) {
    const Dataset d = zscore_normalize(testsupport::make_blobs(30, 2, 6.0, 11));
    const PerturbedInstance a = laplace_perturb(d, 1.0, 6);
    const PerturbedInstance b = laplace_perturb(d, 1.0, 6);
    EXPECT_EQ((a.features - b.features).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_THROW(laplace_perturb(d, 0.0, 1), Error);
}

TEST(PoolMembers, OutputShapeMatchesInputAndStaysFinite) {
    const Dataset d = zscore_normalize(testsupport::make_blobs(45, 3, 6.0, 12));
    const PerturbedInstance instances[] = {
        additive_noise(d, 0.3, 1),
        rotation_perturb(d, 2, 2),
        geometric_perturb(d, 2, 0.3, 3),
        laplace_perturb(d, 1.0, 4),
    };
    for (const auto& p : instances) {
        EXPECT_EQ(p.features.rows(), d.n_records());
        EXPECT_EQ(p.features.cols(), d.n_attrs());
        EXPECT_TRUE(p.features.allFinite());
        EXPECT_EQ(p.source_id, d.source_id);
    }
}

}  // namespace
