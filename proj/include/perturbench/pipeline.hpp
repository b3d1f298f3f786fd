#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "perturbench/attack.hpp"
#include "perturbench/classify.hpp"
#include "perturbench/dataset.hpp"
#include "perturbench/entropy.hpp"
#include "perturbench/error.hpp"
#include "perturbench/fis.hpp"
#include "perturbench/perturb.hpp"
#include "perturbench/resistance.hpp"
#include "perturbench/utility.hpp"

namespace perturbench {

struct PerturbatorConfig {
    PerturbAlgo algorithm = PerturbAlgo::additive_noise;
    std::map<std::string, double> params;

    std::string name() const { return to_string(algorithm); }
};

enum class UtilityMode { pool_min, single };

struct PoolConfig {
    std::vector<PerturbatorConfig> perturbators;
    std::vector<AttackConfig> attacks;
    std::vector<Classifier> classifiers;
    FISModel fis = default_fis_model();
    double fi_threshold = 0.8;
    int max_rounds = 3;
    std::uint64_t seed = 0;
    int folds = 5;
    double bin_width = kDefaultBinWidth;
    UtilityMode utility_mode = UtilityMode::pool_min;
    std::string utility_classifier;                  // used when utility_mode == single
    std::vector<double> param_ladder{1.0, 0.75, 1.25};  // noise-parameter rescale per round

    void validate() const {
        require(!perturbators.empty(), "pool config: no perturbators");
        require(!attacks.empty(), "pool config: no attacks");
        require(!classifiers.empty(), "pool config: no classifiers");
        // Thresholds above 1 are allowed and simply never release.
        require(fi_threshold >= 0.0, "pool config: fi_threshold must be >= 0");
        require(max_rounds >= 1, "pool config: max_rounds must be >= 1");
        require(folds >= 2, "pool config: folds must be >= 2");
        require(bin_width > 0.0 && bin_width <= 1.0, "pool config: bin_width must be in (0, 1]");
        require(!param_ladder.empty(), "pool config: empty param ladder");
        for (const auto& c : classifiers) c.validate();
        if (utility_mode == UtilityMode::single) {
            const bool found = std::any_of(classifiers.begin(), classifiers.end(), [&](const Classifier& c) {
                return c.name() == utility_classifier;
            });
            require(found, "pool config: utility_classifier '" + utility_classifier + "' not in pool");
        }
    }
};

/// The default evaluation pool: four perturbators, three reconstruction
/// attacks, three classifiers.
inline PoolConfig default_pool_config(std::uint64_t seed) {
    PoolConfig cfg;
    cfg.seed = seed;
    cfg.perturbators = {
        {PerturbAlgo::additive_noise, {{"sigma", 0.3}}},
        {PerturbAlgo::rotation, {{"iterations", 10.0}}},
        {PerturbAlgo::geometric, {{"iterations", 10.0}, {"sigma", 0.3}}},
        {PerturbAlgo::laplace_ldp, {{"epsilon", 1.0}}},
    };
    cfg.attacks = {
        {AttackKind::naive},
        {AttackKind::known_io, 0.10, 1e-8},
        {AttackKind::ica, 0.0, 0.0, 200, 1e-10},
    };
    cfg.classifiers = {
        {ClassifierKind::knn, 1},
        {ClassifierKind::gaussian_nb},
        {ClassifierKind::decision_tree},
    };
    return cfg;
}

/// Everything recorded about one perturbed instance in a report.
struct InstanceEvaluation {
    int round = 0;
    int pool_index = 0;
    std::string algorithm;
    std::map<std::string, double> params;  // effective (post-ladder) parameters
    std::uint64_t seed = 0;
    PrivacyGuarantee privacy;
    ResistanceGuarantee resistance;
    UtilityResult utility;
    double fi = 0.0;
    bool fi_degenerate = false;
    std::map<std::string, double> fi_per_classifier;
    std::string error;  // empty when the instance evaluated cleanly

    bool ok() const { return error.empty(); }
};

struct EvaluationReport {
    std::vector<InstanceEvaluation> per_instance;
    int winner_index = -1;  // into per_instance; -1 when nothing evaluated cleanly
    int rounds_used = 0;
    bool released = false;
    double fi_opt = 0.0;
    std::string source_id;
    Eigen::Index n_records = 0;
    Eigen::Index n_attrs = 0;
    std::uint64_t seed = 0;
    double fi_threshold = 0.0;
};

/// Highest-FI instance; ties break toward the earlier pool position.
inline int select_best(const EvaluationReport& report) {
    require(!report.per_instance.empty(), "select_best: empty report");
    int best = -1;
    for (std::size_t i = 0; i < report.per_instance.size(); ++i) {
        const auto& inst = report.per_instance[i];
        if (!inst.ok()) continue;
        if (best < 0 || inst.fi > report.per_instance[static_cast<std::size_t>(best)].fi)
            best = static_cast<int>(i);
    }
    return best;
}

namespace detail {

inline PerturbedInstance make_instance(const Dataset& d, const PerturbatorConfig& pc,
                                       const std::map<std::string, double>& params, std::uint64_t seed,
                                       double bw) {
    auto get = [&](const char* key, double fallback) {
        const auto it = params.find(key);
        return it == params.end() ? fallback : it->second;
    };
    switch (pc.algorithm) {
        case PerturbAlgo::additive_noise:
            return additive_noise(d, get("sigma", 0.3), seed);
        case PerturbAlgo::rotation:
            return rotation_perturb(d, static_cast<int>(get("iterations", 10.0)), seed, bw);
        case PerturbAlgo::geometric:
            return geometric_perturb(d, static_cast<int>(get("iterations", 10.0)), get("sigma", 0.3), seed, bw);
        case PerturbAlgo::laplace_ldp:
            return laplace_perturb(d, get("epsilon", 1.0), seed);
    }
    throw Error("make_instance: unknown algorithm");
}

struct RoundResult {
    std::vector<InstanceEvaluation> evaluations;
    std::vector<std::optional<PerturbedInstance>> instances;  // parallel to evaluations
};

inline RoundResult run_round(const Dataset& d, const PoolConfig& cfg, int round, const SplitPlan& plan) {
    RoundResult rr;
    const double ladder = cfg.param_ladder[static_cast<std::size_t>(round) % cfg.param_ladder.size()];

    for (std::size_t idx = 0; idx < cfg.perturbators.size(); ++idx) {
        const PerturbatorConfig& pc = cfg.perturbators[idx];
        InstanceEvaluation ev;
        ev.round = round;
        ev.pool_index = static_cast<int>(idx);
        ev.algorithm = pc.name();
        ev.seed = derive_stream(cfg.seed + static_cast<std::uint64_t>(round), idx);

        std::map<std::string, double> params = pc.params;
        for (const char* key : {"sigma", "epsilon"}) {
            const auto it = params.find(key);
            if (it != params.end()) it->second *= ladder;
        }

        std::string stage = "perturb";
        std::optional<PerturbedInstance> instance;
        try {
            instance = make_instance(d, pc, params, ev.seed, cfg.bin_width);
            ev.params = instance->params;

            stage = "privacy";
            ev.privacy = min_privacy_guarantee(d, *instance, cfg.bin_width);

            stage = "attacks";
            const auto reconstructions = run_attack_pool(*instance, d, cfg.attacks);
            ev.resistance = resistance_guarantee(d, reconstructions);

            stage = "utility";
            ev.utility = min_utility_guarantee(instance->features, d.labels, cfg.classifiers, plan);
        } catch (const std::exception& e) {
            ev.error = stage + ": " + e.what();
            instance.reset();
        }
        rr.evaluations.push_back(std::move(ev));
        rr.instances.push_back(std::move(instance));
    }

    // Pool-level scaling happens within the round, then the FIS scores each
    // surviving instance.
    std::vector<double> privacy_mins, resistance_stds;
    for (const auto& ev : rr.evaluations) {
        if (!ev.ok()) continue;
        privacy_mins.push_back(ev.privacy.minimum);
        resistance_stds.push_back(ev.resistance.overall_min_std);
    }
    if (privacy_mins.empty()) return rr;

    const std::vector<double> scaled_privacy = scale_privacy(privacy_mins);
    const ScaledResistance scaled_resistance = scale_resistance(resistance_stds);

    std::size_t ok_idx = 0;
    for (auto& ev : rr.evaluations) {
        if (!ev.ok()) continue;
        ev.privacy.scaled_minimum = scaled_privacy[ok_idx];
        ev.resistance.scaled = scaled_resistance.values[ok_idx];
        ++ok_idx;

        double utility_input = ev.utility.minimum;
        if (cfg.utility_mode == UtilityMode::single)
            utility_input = ev.utility.per_classifier_accuracy.at(cfg.utility_classifier);

        const FuzzyIndex fi = fuzzy_index(ev.privacy.scaled_minimum, ev.resistance.scaled, utility_input, cfg.fis);
        ev.fi = fi.value;
        ev.fi_degenerate = fi.degenerate;
        for (const auto& [cname, acc] : ev.utility.per_classifier_accuracy)
            ev.fi_per_classifier[cname] =
                fuzzy_index(ev.privacy.scaled_minimum, ev.resistance.scaled, acc, cfg.fis).value;
    }
    return rr;
}

}  // namespace detail

/// One evaluation round over the full perturbator pool: perturb, attack,
/// score privacy/resistance/utility, scale within the pool, rank by FI.
/// A failing instance is recorded with its failing stage; the pool proceeds.
inline EvaluationReport evaluate_pool(const Dataset& d, const PoolConfig& cfg) {
    require(d.normalization_state == NormalizationState::zscored, "evaluate_pool: dataset must be z-scored");
    cfg.validate();

    EvaluationReport report;
    report.source_id = d.source_id;
    report.n_records = d.n_records();
    report.n_attrs = d.n_attrs();
    report.seed = cfg.seed;
    report.fi_threshold = cfg.fi_threshold;

    const SplitPlan plan = stratified_folds(d, cfg.folds, cfg.seed);
    auto rr = detail::run_round(d, cfg, 0, plan);
    report.per_instance = std::move(rr.evaluations);
    report.rounds_used = 1;
    report.winner_index = select_best(report);
    if (report.winner_index >= 0)
        report.fi_opt = report.per_instance[static_cast<std::size_t>(report.winner_index)].fi;
    report.released = report.winner_index >= 0 && report.fi_opt >= cfg.fi_threshold;
    return report;
}

struct ReleaseOutcome {
    EvaluationReport report;
    std::optional<PerturbedInstance> released;  // present only when the threshold was met
    std::optional<PerturbedInstance> best;      // best-so-far regardless of threshold
};

/// The release loop: evaluate the pool, and while the best FI stays below
/// the threshold, re-run with fresh seeds and rescaled noise parameters.
/// Candidates accumulate across rounds, so the winner is the best over the
/// whole run.
inline ReleaseOutcome release_loop(const Dataset& d, const PoolConfig& cfg) {
    require(d.normalization_state == NormalizationState::zscored, "release_loop: dataset must be z-scored");
    cfg.validate();

    ReleaseOutcome outcome;
    EvaluationReport& report = outcome.report;
    report.source_id = d.source_id;
    report.n_records = d.n_records();
    report.n_attrs = d.n_attrs();
    report.seed = cfg.seed;
    report.fi_threshold = cfg.fi_threshold;

    const SplitPlan plan = stratified_folds(d, cfg.folds, cfg.seed);

    for (int round = 0; round < cfg.max_rounds; ++round) {
        auto rr = detail::run_round(d, cfg, round, plan);
        for (std::size_t i = 0; i < rr.evaluations.size(); ++i) {
            const auto& ev = rr.evaluations[i];
            const bool better = ev.ok() && (report.winner_index < 0 ||
                                            ev.fi > report.per_instance[static_cast<std::size_t>(report.winner_index)].fi);
            report.per_instance.push_back(ev);
            if (better) {
                report.winner_index = static_cast<int>(report.per_instance.size()) - 1;
                outcome.best = std::move(rr.instances[i]);
            }
        }
        report.rounds_used = round + 1;
        if (report.winner_index >= 0) {
            report.fi_opt = report.per_instance[static_cast<std::size_t>(report.winner_index)].fi;
            if (report.fi_opt >= cfg.fi_threshold) {
                report.released = true;
                break;
            }
        }
    }
    if (report.released) outcome.released = outcome.best;
    return outcome;
}

}  // namespace perturbench
