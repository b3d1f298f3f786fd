#pragma once

#include <cstdint>
#include <string>

#include <nlohmann/json.hpp>

#include "perturbench/pipeline.hpp"
#include "perturbench/version.hpp"

namespace perturbench {

/// FNV-1a over the canonical config dump; stable across platforms and runs,
/// recorded in every report so a run can be replayed exactly.
inline std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char b : bytes) {
        hash ^= b;
        hash *= 0x100000001b3ULL;
    }
    char buf[19];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

inline nlohmann::json to_json(const PrivacyGuarantee& g) {
    return {{"per_attribute", g.per_attribute},
            {"minimum", g.minimum},
            {"scaled_minimum", g.scaled_minimum}};
}

inline nlohmann::json to_json(const ResistanceGuarantee& g) {
    return {{"per_attack_min_std", g.per_attack_min_std},
            {"overall_min_std", g.overall_min_std},
            {"scaled", g.scaled}};
}

inline nlohmann::json to_json(const UtilityResult& u) {
    return {{"per_classifier_accuracy", u.per_classifier_accuracy},
            {"minimum", u.minimum},
            {"folds", u.folds},
            {"seed", u.seed}};
}

inline nlohmann::json provenance_json(const PerturbedInstance& p) {
    return {{"algorithm", to_string(p.algorithm)},
            {"params", p.params},
            {"seed", p.seed},
            {"source_id", p.source_id}};
}

inline nlohmann::json to_json(const InstanceEvaluation& ev) {
    nlohmann::json j{{"round", ev.round},
                     {"pool_index", ev.pool_index},
                     {"provenance", {{"algorithm", ev.algorithm}, {"params", ev.params}, {"seed", ev.seed}}}};
    if (!ev.ok()) {
        j["error"] = ev.error;
        return j;
    }
    j["privacy"] = to_json(ev.privacy);
    j["resistance"] = to_json(ev.resistance);
    j["utility"] = to_json(ev.utility);
    j["fi"] = ev.fi;
    j["fi_degenerate"] = ev.fi_degenerate;
    j["fi_per_classifier"] = ev.fi_per_classifier;
    return j;
}

inline nlohmann::json to_json(const EvaluationReport& report, const std::string& config_hash) {
    nlohmann::json per_instance = nlohmann::json::array();
    for (const auto& ev : report.per_instance) per_instance.push_back(to_json(ev));
    nlohmann::json j{{"version", kVersion},
                     {"config_hash", config_hash},
                     {"dataset", {{"source_id", report.source_id},
                                  {"n_records", report.n_records},
                                  {"n_attrs", report.n_attrs}}},
                     {"seed", report.seed},
                     {"fi_threshold", report.fi_threshold},
                     {"rounds_used", report.rounds_used},
                     {"released", report.released},
                     {"fi_opt", report.fi_opt},
                     {"winner_index", report.winner_index},
                     {"per_instance", per_instance}};
    if (report.winner_index >= 0) {
        const auto& w = report.per_instance[static_cast<std::size_t>(report.winner_index)];
        j["winner"] = {{"round", w.round}, {"pool_index", w.pool_index}, {"algorithm", w.algorithm}};
    }
    return j;
}

// --- PoolConfig <-> JSON -------------------------------------------------

inline nlohmann::json to_json(const PoolConfig& cfg) {
    nlohmann::json pool = nlohmann::json::array();
    for (const auto& pc : cfg.perturbators) {
        nlohmann::json entry{{"algorithm", pc.name()}};
        for (const auto& [k, v] : pc.params) entry[k] = v;
        pool.push_back(entry);
    }
    nlohmann::json attacks = nlohmann::json::array();
    for (const auto& ac : cfg.attacks) {
        nlohmann::json entry{{"attack", to_string(ac.kind)}};
        if (ac.kind == AttackKind::known_io) {
            entry["known_fraction"] = ac.known_fraction;
            entry["ridge"] = ac.ridge;
        } else if (ac.kind == AttackKind::ica) {
            entry["max_iter"] = ac.max_iter;
            entry["tol"] = ac.tol;
        }
        attacks.push_back(entry);
    }
    nlohmann::json classifiers = nlohmann::json::array();
    for (const auto& c : cfg.classifiers) {
        nlohmann::json entry{{"kind", to_string(c.kind)}};
        if (c.kind == ClassifierKind::knn) entry["k"] = c.k;
        if (c.kind == ClassifierKind::decision_tree) {
            entry["max_depth"] = c.max_depth;
            entry["min_leaf"] = c.min_leaf;
        }
        classifiers.push_back(entry);
    }
    nlohmann::json j{{"pool", pool},
                     {"attacks", attacks},
                     {"classifiers", classifiers},
                     {"fi_threshold", cfg.fi_threshold},
                     {"max_rounds", cfg.max_rounds},
                     {"seed", cfg.seed},
                     {"folds", cfg.folds},
                     {"bin_width", cfg.bin_width},
                     {"utility_mode", cfg.utility_mode == UtilityMode::pool_min ? "pool_min" : "single"},
                     {"param_ladder", cfg.param_ladder}};
    if (cfg.utility_mode == UtilityMode::single) j["utility_classifier"] = cfg.utility_classifier;
    return j;
}

inline PerturbatorConfig perturbator_from_json(const nlohmann::json& j) {
    require(j.is_object() && j.contains("algorithm"), "config: pool entry needs an 'algorithm'");
    PerturbatorConfig pc;
    pc.algorithm = perturb_algo_from_string(j.at("algorithm").get<std::string>());
    for (const auto& [k, v] : j.items()) {
        if (k == "algorithm") continue;
        require(v.is_number(), "config: pool parameter '" + k + "' must be numeric");
        pc.params[k] = v.get<double>();
    }
    return pc;
}

inline AttackConfig attack_from_json(const nlohmann::json& j) {
    require(j.is_object() && j.contains("attack"), "config: attack entry needs an 'attack'");
    AttackConfig ac;
    ac.kind = attack_kind_from_string(j.at("attack").get<std::string>());
    ac.known_fraction = j.value("known_fraction", ac.known_fraction);
    ac.ridge = j.value("ridge", ac.ridge);
    ac.max_iter = j.value("max_iter", ac.max_iter);
    ac.tol = j.value("tol", ac.tol);
    return ac;
}

inline Classifier classifier_from_json(const nlohmann::json& j) {
    require(j.is_object() && j.contains("kind"), "config: classifier entry needs a 'kind'");
    Classifier c;
    c.kind = classifier_kind_from_string(j.at("kind").get<std::string>());
    c.k = j.value("k", c.k);
    c.max_depth = j.value("max_depth", c.max_depth);
    c.min_leaf = j.value("min_leaf", c.min_leaf);
    c.var_floor = j.value("var_floor", c.var_floor);
    return c;
}

/// Reads a PoolConfig from JSON, starting from defaults so partial documents
/// are fine.
inline PoolConfig pool_config_from_json(const nlohmann::json& doc, std::uint64_t default_seed = 0) {
    PoolConfig cfg = default_pool_config(default_seed);
    if (doc.is_null()) return cfg;
    require(doc.is_object(), "config: top level must be an object");

    if (doc.contains("pool")) {
        cfg.perturbators.clear();
        for (const auto& entry : doc.at("pool")) cfg.perturbators.push_back(perturbator_from_json(entry));
    }
    if (doc.contains("attacks")) {
        cfg.attacks.clear();
        for (const auto& entry : doc.at("attacks")) cfg.attacks.push_back(attack_from_json(entry));
    }
    if (doc.contains("classifiers")) {
        cfg.classifiers.clear();
        for (const auto& entry : doc.at("classifiers")) cfg.classifiers.push_back(classifier_from_json(entry));
    }
    if (doc.contains("fis")) cfg.fis = load_fis_config(doc.at("fis"));
    cfg.fi_threshold = doc.value("fi_threshold", cfg.fi_threshold);
    cfg.max_rounds = doc.value("max_rounds", cfg.max_rounds);
    cfg.seed = doc.value("seed", cfg.seed);
    cfg.folds = doc.value("folds", cfg.folds);
    cfg.bin_width = doc.value("bin_width", cfg.bin_width);
    if (doc.contains("utility_mode")) {
        const std::string mode = doc.at("utility_mode").get<std::string>();
        if (mode == "pool_min")
            cfg.utility_mode = UtilityMode::pool_min;
        else if (mode == "single")
            cfg.utility_mode = UtilityMode::single;
        else
            throw Error("config: unknown utility_mode '" + mode + "'");
    }
    cfg.utility_classifier = doc.value("utility_classifier", cfg.utility_classifier);
    if (doc.contains("param_ladder")) cfg.param_ladder = doc.at("param_ladder").get<std::vector<double>>();
    return cfg;
}

inline std::string config_hash(const PoolConfig& cfg) { return fnv1a_hex(to_json(cfg).dump()); }

}  // namespace perturbench
