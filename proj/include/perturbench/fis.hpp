#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "perturbench/error.hpp"

namespace perturbench {

enum class MfShape { gaussian, triangular, trapezoidal };

/// A membership function over the [0,1] universe of discourse.
struct MembershipFunction {
    MfShape shape = MfShape::gaussian;
    // gaussian: p[0]=center, p[1]=sigma; triangular: p[0..2]=a,b,c;
    // trapezoidal: p[0..3]=a,b,c,d
    std::array<double, 4> p{};

    static MembershipFunction gaussian(double center, double sigma) {
        require(sigma > 0.0, "gaussian mf: sigma must be > 0");
        return {MfShape::gaussian, {center, sigma, 0.0, 0.0}};
    }
    static MembershipFunction triangular(double a, double b, double c) {
        require(a <= b && b <= c, "triangular mf: need a <= b <= c");
        return {MfShape::triangular, {a, b, c, 0.0}};
    }
    static MembershipFunction trapezoidal(double a, double b, double c, double d) {
        require(a <= b && b <= c && c <= d, "trapezoidal mf: need a <= b <= c <= d");
        return {MfShape::trapezoidal, {a, b, c, d}};
    }

    double operator()(double x) const {
        switch (shape) {
            case MfShape::gaussian: {
                const double z = (x - p[0]) / p[1];
                return std::exp(-0.5 * z * z);
            }
            case MfShape::triangular: {
                if (x <= p[0] || x >= p[2]) return x == p[1] ? 1.0 : 0.0;
                if (x == p[1]) return 1.0;
                return x < p[1] ? (x - p[0]) / (p[1] - p[0]) : (p[2] - x) / (p[2] - p[1]);
            }
            case MfShape::trapezoidal: {
                if (x >= p[1] && x <= p[2]) return 1.0;
                if (x <= p[0] || x >= p[3]) return 0.0;
                return x < p[1] ? (x - p[0]) / (p[1] - p[0]) : (p[3] - x) / (p[3] - p[2]);
            }
        }
        return 0.0;
    }
};

enum class Level { low = 0, medium = 1, high = 2 };

inline const char* to_string(Level l) {
    switch (l) {
        case Level::low: return "LOW";
        case Level::medium: return "MEDIUM";
        case Level::high: return "HIGH";
    }
    return "?";
}

inline Level level_from_string(const std::string& s) {
    if (s == "LOW") return Level::low;
    if (s == "MEDIUM") return Level::medium;
    if (s == "HIGH") return Level::high;
    throw Error("unknown fuzzy level '" + s + "' (expected LOW, MEDIUM, or HIGH)");
}

enum class FisVariable { privacy = 0, attack_resistance = 1, utility = 2 };

inline const char* to_string(FisVariable v) {
    switch (v) {
        case FisVariable::privacy: return "privacy";
        case FisVariable::attack_resistance: return "attack_resistance";
        case FisVariable::utility: return "utility";
    }
    return "?";
}

inline FisVariable fis_variable_from_string(const std::string& s) {
    if (s == "privacy") return FisVariable::privacy;
    if (s == "attack_resistance") return FisVariable::attack_resistance;
    if (s == "utility") return FisVariable::utility;
    throw Error("unknown FIS variable '" + s + "'");
}

/// LOW/MEDIUM/HIGH membership functions for one variable.
struct VariableMfs {
    std::array<MembershipFunction, 3> levels;  // indexed by Level

    const MembershipFunction& operator[](Level l) const { return levels[static_cast<std::size_t>(l)]; }
    MembershipFunction& operator[](Level l) { return levels[static_cast<std::size_t>(l)]; }
};

struct Rule {
    // Antecedents joined by AND; a missing variable simply does not
    // constrain the rule (the single-antecedent rules use this).
    std::vector<std::pair<FisVariable, Level>> antecedents;
    Level consequent = Level::low;
};

struct RuleBase {
    std::vector<Rule> rules;
};

struct FISModel {
    std::array<VariableMfs, 3> inputs;  // indexed by FisVariable
    VariableMfs output;
    RuleBase rulebase;
    int output_resolution = 1001;

    const VariableMfs& input(FisVariable v) const { return inputs[static_cast<std::size_t>(v)]; }
    VariableMfs& input(FisVariable v) { return inputs[static_cast<std::size_t>(v)]; }
};

/// Default model: Gaussian LOW(0, 0.15) / MEDIUM(0.5, 0.15) / HIGH(1, 0.15)
/// on every variable, and the eleven balance rules — FI goes LOW whenever
/// any single input is LOW, and reaches HIGH only when at least two inputs
/// are HIGH with the rest at least MEDIUM.
inline FISModel default_fis_model() {
    FISModel m;
    VariableMfs mfs;
    mfs[Level::low] = MembershipFunction::gaussian(0.0, 0.15);
    mfs[Level::medium] = MembershipFunction::gaussian(0.5, 0.15);
    mfs[Level::high] = MembershipFunction::gaussian(1.0, 0.15);
    m.inputs = {mfs, mfs, mfs};
    m.output = mfs;
    m.output_resolution = 1001;

    using V = FisVariable;
    using L = Level;
    auto rule = [](std::vector<std::pair<V, L>> ants, L conseq) { return Rule{std::move(ants), conseq}; };
    m.rulebase.rules = {
        rule({{V::privacy, L::low}}, L::low),
        rule({{V::attack_resistance, L::low}}, L::low),
        rule({{V::utility, L::low}}, L::low),
        rule({{V::privacy, L::medium}, {V::attack_resistance, L::medium}, {V::utility, L::medium}}, L::medium),
        rule({{V::privacy, L::medium}, {V::attack_resistance, L::medium}, {V::utility, L::high}}, L::medium),
        rule({{V::privacy, L::medium}, {V::attack_resistance, L::high}, {V::utility, L::medium}}, L::medium),
        rule({{V::privacy, L::medium}, {V::attack_resistance, L::high}, {V::utility, L::high}}, L::high),
        rule({{V::privacy, L::high}, {V::attack_resistance, L::medium}, {V::utility, L::medium}}, L::medium),
        rule({{V::privacy, L::high}, {V::attack_resistance, L::medium}, {V::utility, L::high}}, L::high),
        rule({{V::privacy, L::high}, {V::attack_resistance, L::high}, {V::utility, L::medium}}, L::high),
        rule({{V::privacy, L::high}, {V::attack_resistance, L::high}, {V::utility, L::high}}, L::high),
    };
    return m;
}

/// Degree of membership in each level; inputs outside [0,1] are clamped.
inline std::array<double, 3> fuzzify(double x, const VariableMfs& mfs) {
    const double clamped = std::clamp(x, 0.0, 1.0);
    return {mfs[Level::low](clamped), mfs[Level::medium](clamped), mfs[Level::high](clamped)};
}

/// MAX-MIN inference: each rule fires at the MIN of its antecedent degrees,
/// and each output level is clipped at the MAX over its firing rules.
inline std::array<double, 3> evaluate_rules(const std::array<std::array<double, 3>, 3>& degrees,
                                            const RuleBase& rb) {
    require(!rb.rules.empty(), "evaluate_rules: empty rule base");
    std::array<double, 3> heights{0.0, 0.0, 0.0};
    for (const Rule& rule : rb.rules) {
        require(!rule.antecedents.empty(), "evaluate_rules: rule with no antecedents");
        double strength = 1.0;
        for (const auto& [var, level] : rule.antecedents)
            strength = std::min(strength, degrees[static_cast<std::size_t>(var)][static_cast<std::size_t>(level)]);
        auto& h = heights[static_cast<std::size_t>(rule.consequent)];
        h = std::max(h, strength);
    }
    return heights;
}

struct Defuzzified {
    double value = 0.0;
    bool degenerate = false;  // no rule fired; value falls back to 0.5
};

/// Center of gravity of the aggregated output shape: clip each level's
/// membership function at its height, take the pointwise max, and integrate
/// on a uniform midpoint grid over [0, 1].
inline Defuzzified defuzzify_cog(const std::array<double, 3>& heights, const VariableMfs& output,
                                 int resolution) {
    require(resolution >= 101, "defuzzify_cog: resolution must be >= 101");
    double weighted = 0.0;
    double mass = 0.0;
    const double step = 1.0 / static_cast<double>(resolution);
    for (int i = 0; i < resolution; ++i) {
        const double x = (static_cast<double>(i) + 0.5) * step;
        double mu = 0.0;
        for (std::size_t l = 0; l < 3; ++l)
            mu = std::max(mu, std::min(heights[l], output.levels[l](x)));
        weighted += mu * x;
        mass += mu;
    }
    if (mass <= 0.0) return {0.5, true};
    return {weighted / mass, false};
}

struct FuzzyIndex {
    double value = 0.0;
    bool degenerate = false;
};

/// Fuzzify, run the rule base, defuzzify: the complete inference pass from
/// the three scaled guarantees to the fuzzy index.
inline FuzzyIndex fuzzy_index(double privacy, double resistance, double utility, const FISModel& model) {
    const std::array<std::array<double, 3>, 3> degrees = {
        fuzzify(privacy, model.input(FisVariable::privacy)),
        fuzzify(resistance, model.input(FisVariable::attack_resistance)),
        fuzzify(utility, model.input(FisVariable::utility)),
    };
    const auto heights = evaluate_rules(degrees, model.rulebase);
    const auto cog = defuzzify_cog(heights, model.output, model.output_resolution);
    return {cog.value, cog.degenerate};
}

namespace detail {

inline MembershipFunction mf_from_json(const nlohmann::json& j, const std::string& path) {
    require(j.is_object(), path + ": membership function must be an object");
    const std::string shape = j.value("shape", "gaussian");
    try {
        if (shape == "gaussian") return MembershipFunction::gaussian(j.at("center").get<double>(), j.at("sigma").get<double>());
        if (shape == "triangular") return MembershipFunction::triangular(j.at("a").get<double>(), j.at("b").get<double>(), j.at("c").get<double>());
        if (shape == "trapezoidal")
            return MembershipFunction::trapezoidal(j.at("a").get<double>(), j.at("b").get<double>(), j.at("c").get<double>(), j.at("d").get<double>());
    } catch (const nlohmann::json::exception& e) {
        throw Error(path + ": " + e.what());
    } catch (const Error& e) {
        throw Error(path + ": " + e.what());
    }
    throw Error(path + ": unknown shape '" + shape + "'");
}

inline void apply_variable_overrides(VariableMfs& mfs, const nlohmann::json& j, const std::string& path) {
    require(j.is_object(), path + ": expected an object of levels");
    for (const auto& [key, value] : j.items()) {
        const Level level = level_from_string(key);
        mfs[level] = mf_from_json(value, path + "." + key);
    }
}

}  // namespace detail

/// Builds a model from a JSON document; omitted pieces keep their defaults,
/// so an empty document is exactly the default model. Validation failures
/// name the offending path.
inline FISModel load_fis_config(const nlohmann::json& doc) {
    require(doc.is_object() || doc.is_null(), "fis config: top level must be an object");
    FISModel m = default_fis_model();
    if (doc.is_null()) return m;

    if (doc.contains("variables")) {
        const auto& vars = doc.at("variables");
        require(vars.is_object(), "fis config: 'variables' must be an object");
        for (const auto& [name, mfs_json] : vars.items()) {
            const std::string path = "variables." + name;
            if (name == "fi") {
                detail::apply_variable_overrides(m.output, mfs_json, path);
            } else {
                const FisVariable v = fis_variable_from_string(name);
                detail::apply_variable_overrides(m.input(v), mfs_json, path);
            }
        }
    }

    if (doc.contains("rules")) {
        const auto& rules = doc.at("rules");
        require(rules.is_array() && !rules.empty(), "fis config: 'rules' must be a nonempty array");
        RuleBase rb;
        for (std::size_t i = 0; i < rules.size(); ++i) {
            const std::string path = "rules[" + std::to_string(i) + "]";
            const auto& rj = rules[i];
            require(rj.is_object() && rj.contains("if") && rj.contains("then"), path + ": need 'if' and 'then'");
            Rule rule;
            for (const auto& [var, level] : rj.at("if").items())
                rule.antecedents.emplace_back(fis_variable_from_string(var), level_from_string(level.get<std::string>()));
            require(!rule.antecedents.empty(), path + ": empty antecedents");
            rule.consequent = level_from_string(rj.at("then").get<std::string>());
            rb.rules.push_back(std::move(rule));
        }
        m.rulebase = std::move(rb);
    }

    if (doc.contains("resolution")) {
        m.output_resolution = doc.at("resolution").get<int>();
        require(m.output_resolution >= 101, "fis config: resolution must be >= 101");
    }
    return m;
}

}  // namespace perturbench
