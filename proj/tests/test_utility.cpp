#include "perturbench/utility.hpp"

#include <gtest/gtest.h>

#include "perturbench/perturb.hpp"
#include "support.hpp"

using namespace perturbench;

namespace {

TEST(Accuracy, AllCorrect) {
    const std::vector<std::string> y = {"a", "b", "a"};
    EXPECT_DOUBLE_EQ(accuracy(y, y), 1.0);
}

TEST(Accuracy, BinaryConfusionCounts) {
    // TP=3, TN=5, FP=1, FN=1 out of 10.
    std::vector<std::string> truth, pred;
    for (int i = 0; i < 3; ++i) { truth.push_back("pos"); pred.push_back("pos"); }   // TP
    for (int i = 0; i < 5; ++i) { truth.push_back("neg"); pred.push_back("neg"); }   // TN
    truth.push_back("neg"); pred.push_back("pos");                                   // FP
    truth.push_back("pos"); pred.push_back("neg");                                   // FN
    EXPECT_DOUBLE_EQ(accuracy(pred, truth), 0.8);
}

TEST(Accuracy, MultiClassMatchFraction) {
    const std::vector<std::string> truth = {"a", "b", "c", "a"};
    const std::vector<std::string> pred = {"a", "c", "c", "b"};
    EXPECT_DOUBLE_EQ(accuracy(pred, truth), 0.5);
}

TEST(Accuracy, ContractErrors) {
    EXPECT_THROW(accuracy({"a"}, {"a", "b"}), Error);
    EXPECT_THROW(accuracy({}, {}), Error);
}

struct Pools {
    std::vector<Classifier> all = {
        {ClassifierKind::knn, 1},
        {ClassifierKind::gaussian_nb},
        {ClassifierKind::decision_tree},
    };
};

TEST(CrossValidatedAccuracy, SeparableBlobsAreEasyForEveryClassifier) {
    const Dataset d = zscore_normalize(testsupport::make_blobs(400, 4, 6.0, 1));
    const SplitPlan plan = stratified_folds(d, 5, 7);
    for (const Classifier& c : Pools{}.all) {
        const double acc = cross_validated_accuracy(d.features, d.labels, c, plan);
        EXPECT_GE(acc, 0.98) << c.name();
        EXPECT_LE(acc, 1.0);
    }
}

TEST(CrossValidatedAccuracy, ShuffledLabelsFallToChance) {
    Dataset d = zscore_normalize(testsupport::make_blobs(400, 4, 6.0, 2));
    Rng rng(3);
    for (std::size_t i = d.labels.size(); i > 1; --i)
        std::swap(d.labels[i - 1], d.labels[static_cast<std::size_t>(rng.next_u64() % i)]);
    const SplitPlan plan = stratified_folds(d, 5, 7);
    for (const Classifier& c : Pools{}.all) {
        const double acc = cross_validated_accuracy(d.features, d.labels, c, plan);
        EXPECT_NEAR(acc, 0.5, 0.1) << c.name();
    }
}

TEST(CrossValidatedAccuracy, SingleFoldPlanRejected) {
    const Dataset d = zscore_normalize(testsupport::make_blobs(20, 2, 6.0, 3));
    SplitPlan plan;
    plan.n_folds = 1;
    plan.fold_assignments.assign(20, 0);
    EXPECT_THROW(cross_validated_accuracy(d.features, d.labels, {ClassifierKind::knn, 1}, plan), Error);
}

TEST(CrossValidatedAccuracy, DeterministicForFixedPlan) {
    const Dataset d = zscore_normalize(testsupport::make_blobs(120, 3, 6.0, 4));
    const SplitPlan plan = stratified_folds(d, 4, 11);
    for (const Classifier& c : Pools{}.all) {
        const double a = cross_validated_accuracy(d.features, d.labels, c, plan);
        const double b = cross_validated_accuracy(d.features, d.labels, c, plan);
        EXPECT_EQ(a, b);
    }
}

TEST(CrossValidatedAccuracy, TrainingFoldMissingAClassStillPredicts) {
    // A deliberately non-stratified plan: fold 1's training data is pure "a".
    Dataset d = zscore_normalize(testsupport::make_blobs(40, 2, 6.0, 5));
    SplitPlan plan;
    plan.n_folds = 2;
    plan.fold_assignments.assign(40, 0);
    for (std::size_t i = 0; i < 40; ++i)
        if (d.labels[i] == "b") plan.fold_assignments[i] = 1;  // all "b" in fold 1
    for (const Classifier& c : Pools{}.all)
        EXPECT_NO_THROW(cross_validated_accuracy(d.features, d.labels, c, plan)) << c.name();
}

TEST(KnnRotationInvariance, AccuracyShiftStaysSmall) {
    const Dataset d = zscore_normalize(testsupport::make_blobs(400, 4, 6.0, 6));
    const SplitPlan plan = stratified_folds(d, 5, 13);
    const Classifier knn{ClassifierKind::knn, 1};
    const double base = cross_validated_accuracy(d.features, d.labels, knn, plan);
    const PerturbedInstance rotated = rotation_perturb(d, 3, 17);
    const double after = cross_validated_accuracy(rotated.features, d.labels, knn, plan);
    EXPECT_LT(std::abs(after - base), 0.02);
}

TEST(MinUtilityGuarantee, ThreeClassifiersThreeAccuraciesPlusMin) {
    const Dataset d = zscore_normalize(testsupport::make_blobs(150, 3, 6.0, 7));
    const SplitPlan plan = stratified_folds(d, 5, 19);
    const UtilityResult u = min_utility_guarantee(d.features, d.labels, Pools{}.all, plan);
    ASSERT_EQ(u.per_classifier_accuracy.size(), 3u);
    for (const auto& [name, acc] : u.per_classifier_accuracy) {
        EXPECT_GE(acc, 0.0);
        EXPECT_LE(acc, 1.0);
        EXPECT_LE(u.minimum, acc);
    }
    EXPECT_EQ(u.folds, 5);
    EXPECT_THROW(min_utility_guarantee(d.features, d.labels, {}, plan), Error);
}

TEST(MinUtilityGuarantee, NoiseDegradesUtilityMonotonically) {
    double mild_total = 0.0, harsh_total = 0.0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Dataset d = zscore_normalize(testsupport::make_blobs(400, 4, 6.0, 100 + seed));
        const SplitPlan plan = stratified_folds(d, 5, seed);
        const PerturbedInstance mild = additive_noise(d, 0.3, seed);
        const PerturbedInstance harsh = additive_noise(d, 3.0, seed);
        mild_total += min_utility_guarantee(mild.features, d.labels, Pools{}.all, plan).minimum;
        harsh_total += min_utility_guarantee(harsh.features, d.labels, Pools{}.all, plan).minimum;
    }
    EXPECT_GT(mild_total / 5.0, harsh_total / 5.0);
}

}  // namespace
