// Command-line driver for the perturbation evaluation pipeline.
//
// Exit codes: 0 = released, 2 = fuzzy-index threshold not met, 1 = error.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "perturbench/perturbench.hpp"

namespace fs = std::filesystem;
using namespace perturbench;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitThresholdMiss = 2;

std::vector<std::string> split_list(const std::string& csv) {
    std::vector<std::string> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

nlohmann::json load_json_file(const fs::path& path) {
    std::ifstream in(path);
    require(in.good(), "cannot open config file " + path.string());
    nlohmann::json doc;
    in >> doc;
    return doc;
}

void write_text_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path);
    require(out.good(), "cannot open " + path.string() + " for writing");
    out << text;
    require(out.good(), "write failed for " + path.string());
}

fs::path default_out_dir() {
    if (const char* env = std::getenv("PERTURBENCH_OUT_DIR")) return env;
    return "perturbench_out";
}

Dataset dataset_from_instance(const PerturbedInstance& p, const Dataset& source) {
    Dataset out = source;
    out.features = p.features;
    out.source_id = p.source_id;
    return out;
}

std::string rank_table_csv(const EvaluationReport& report) {
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < report.per_instance.size(); ++i)
        if (report.per_instance[i].ok()) order.push_back(i);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return report.per_instance[a].fi > report.per_instance[b].fi;
    });

    std::ostringstream out;
    out << "rank,algorithm,round,fi,privacy_scaled,resistance_scaled,utility_min\n";
    int rank = 1;
    for (std::size_t i : order) {
        const auto& ev = report.per_instance[i];
        out << rank++ << ',' << ev.algorithm << ',' << ev.round << ',' << detail::format_double(ev.fi) << ','
            << detail::format_double(ev.privacy.scaled_minimum) << ','
            << detail::format_double(ev.resistance.scaled) << ','
            << detail::format_double(ev.utility.minimum) << '\n';
    }
    for (const auto& ev : report.per_instance)
        if (!ev.ok()) out << "-," << ev.algorithm << ',' << ev.round << ",error: " << ev.error << ",,,\n";
    return out.str();
}

struct EvaluateArgs {
    std::string input;
    std::string label = "class";
    std::string config_path;
    std::string out_dir;
    std::optional<double> fi_threshold;
    std::optional<int> max_rounds;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> pool;
    std::optional<std::string> attacks;
    std::optional<std::string> classifiers;
    std::optional<double> bin_width;
    std::optional<double> known_fraction;
};

PoolConfig resolve_pool_config(const EvaluateArgs& args) {
    nlohmann::json doc;
    if (!args.config_path.empty()) doc = load_json_file(args.config_path);
    PoolConfig cfg = pool_config_from_json(doc, 0);

    // Flags win over the config file.
    if (args.seed) cfg.seed = *args.seed;
    if (args.fi_threshold) cfg.fi_threshold = *args.fi_threshold;
    if (args.max_rounds) cfg.max_rounds = *args.max_rounds;
    if (args.bin_width) cfg.bin_width = *args.bin_width;
    if (args.pool) {
        const PoolConfig defaults = default_pool_config(cfg.seed);
        cfg.perturbators.clear();
        for (const auto& name : split_list(*args.pool)) {
            const PerturbAlgo algo = perturb_algo_from_string(name);
            for (const auto& pc : defaults.perturbators)
                if (pc.algorithm == algo) cfg.perturbators.push_back(pc);
        }
    }
    if (args.attacks) {
        const PoolConfig defaults = default_pool_config(cfg.seed);
        cfg.attacks.clear();
        for (const auto& name : split_list(*args.attacks)) {
            const AttackKind kind = attack_kind_from_string(name);
            for (const auto& ac : defaults.attacks)
                if (ac.kind == kind) cfg.attacks.push_back(ac);
        }
    }
    if (args.classifiers) {
        cfg.classifiers.clear();
        for (const auto& name : split_list(*args.classifiers)) {
            Classifier c;
            c.kind = classifier_kind_from_string(name);
            cfg.classifiers.push_back(c);
        }
    }
    if (args.known_fraction)
        for (auto& ac : cfg.attacks)
            if (ac.kind == AttackKind::known_io) ac.known_fraction = *args.known_fraction;
    return cfg;
}

int cmd_evaluate(const EvaluateArgs& args) {
    const Dataset raw = load_csv(args.input, args.label);
    const Dataset data = zscore_normalize(raw);
    const PoolConfig cfg = resolve_pool_config(args);

    const fs::path out_dir = args.out_dir.empty() ? default_out_dir() : fs::path(args.out_dir);
    fs::create_directories(out_dir);

    const ReleaseOutcome outcome = release_loop(data, cfg);
    const EvaluationReport& report = outcome.report;

    write_text_file(out_dir / "report.json", to_json(report, config_hash(cfg)).dump(2) + "\n");
    const std::string rank = rank_table_csv(report);
    write_text_file(out_dir / "rank.csv", rank);
    std::cout << rank;

    if (outcome.released) {
        const fs::path released_path = out_dir / "released.csv";
        write_csv(dataset_from_instance(*outcome.released, data), released_path);
        write_text_file(out_dir / "released.provenance.json", provenance_json(*outcome.released).dump(2) + "\n");
        std::cout << "released: " << released_path.string() << " (fi_opt=" << report.fi_opt
                  << " >= " << cfg.fi_threshold << ")\n";
        return kExitOk;
    }
    std::cout << "not released: fi_opt=" << report.fi_opt << " < threshold " << cfg.fi_threshold
              << " after " << report.rounds_used << " round(s)\n";
    return kExitThresholdMiss;
}

struct PerturbArgs {
    std::string input;
    std::string label = "class";
    std::string algo = "additive_noise";
    double sigma = 0.3;
    double epsilon = 1.0;
    int iterations = 10;
    std::uint64_t seed = 0;
    std::string out_dir;
    double bin_width = kDefaultBinWidth;
};

int cmd_perturb(const PerturbArgs& args) {
    const Dataset data = zscore_normalize(load_csv(args.input, args.label));
    PerturbedInstance inst;
    switch (perturb_algo_from_string(args.algo)) {
        case PerturbAlgo::additive_noise: inst = additive_noise(data, args.sigma, args.seed); break;
        case PerturbAlgo::rotation: inst = rotation_perturb(data, args.iterations, args.seed, args.bin_width); break;
        case PerturbAlgo::geometric:
            inst = geometric_perturb(data, args.iterations, args.sigma, args.seed, args.bin_width);
            break;
        case PerturbAlgo::laplace_ldp: inst = laplace_perturb(data, args.epsilon, args.seed); break;
    }

    const fs::path out_dir = args.out_dir.empty() ? default_out_dir() : fs::path(args.out_dir);
    fs::create_directories(out_dir);
    const fs::path csv_path = out_dir / "perturbed.csv";
    write_csv(dataset_from_instance(inst, data), csv_path);
    write_text_file(out_dir / "perturbed.provenance.json", provenance_json(inst).dump(2) + "\n");
    std::cout << "perturbed: " << csv_path.string() << "\n";
    return kExitOk;
}

struct AttackArgs {
    std::string original;
    std::string label = "class";
    std::string perturbed;
    std::string attack = "naive";
    double known_fraction = 0.10;
    double ridge = 1e-8;
    int max_iter = 200;
    double tol = 1e-10;
    std::uint64_t seed = 0;
    std::string out_dir;
};

int cmd_attack(const AttackArgs& args) {
    const Dataset original = zscore_normalize(load_csv(args.original, args.label));
    const Dataset perturbed_csv = load_csv(args.perturbed, args.label);
    require(perturbed_csv.n_records() == original.n_records() && perturbed_csv.n_attrs() == original.n_attrs(),
            "attack: perturbed and original shapes differ");

    PerturbedInstance inst;
    inst.features = perturbed_csv.features;
    inst.source_id = original.source_id;
    inst.seed = args.seed;

    AttackConfig cfg;
    cfg.kind = attack_kind_from_string(args.attack);
    cfg.known_fraction = args.known_fraction;
    cfg.ridge = args.ridge;
    cfg.max_iter = args.max_iter;
    cfg.tol = args.tol;
    const auto results = run_attack_pool(inst, original, {cfg});
    const ReconstructionResult& r = results.front();

    nlohmann::json stats{{"version", kVersion},
                         {"seed", args.seed},
                         {"attack", to_string(r.attack)},
                         {"assumptions", r.assumptions}};
    std::vector<double> per_attribute;
    for (Eigen::Index c = 0; c < original.n_attrs(); ++c)
        per_attribute.push_back(var_p(original.features.col(c), r.reconstructed.col(c)));
    const double var_min = min_var_over_attributes(original, r);
    stats["var_p_per_attribute"] = per_attribute;
    stats["var_p_min"] = var_min;
    stats["sqrt_var_p_min"] = std::sqrt(var_min);

    const fs::path out_dir = args.out_dir.empty() ? default_out_dir() : fs::path(args.out_dir);
    fs::create_directories(out_dir);
    Dataset recon = original;
    recon.features = r.reconstructed;
    write_csv(recon, out_dir / "reconstruction.csv");
    write_text_file(out_dir / "attack_stats.json", stats.dump(2) + "\n");

    std::printf("var_p_min=%.17g sqrt_var_p_min=%.17g\n", var_min, std::sqrt(var_min));
    return kExitOk;
}

struct FisArgs {
    double privacy = 0.0;
    double resistance = 0.0;
    double utility = 0.0;
    std::string config_path;
};

int cmd_fis(const FisArgs& args) {
    FISModel model = default_fis_model();
    if (!args.config_path.empty()) model = load_fis_config(load_json_file(args.config_path));
    for (double v : {args.privacy, args.resistance, args.utility})
        if (v < 0.0 || v > 1.0) {
            std::cerr << "warning: input " << v << " outside [0, 1], clamped\n";
            break;
        }
    const FuzzyIndex fi = fuzzy_index(args.privacy, args.resistance, args.utility, model);
    std::printf("fi=%.6f%s\n", fi.value, fi.degenerate ? " (degenerate: no rule fired)" : "");
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Pool-based data perturbation evaluation and release"};
    app.require_subcommand(1);

    EvaluateArgs eval_args;
    auto* eval = app.add_subcommand("evaluate", "Run the full perturb/attack/score/release pipeline");
    eval->add_option("--input", eval_args.input, "Input CSV path")->required();
    eval->add_option("--label", eval_args.label, "Label column name or index");
    eval->add_option("--config", eval_args.config_path, "JSON config file (flags win)");
    eval->add_option("--out-dir", eval_args.out_dir, "Output directory");
    eval->add_option("--fi-threshold", eval_args.fi_threshold, "Release threshold on the fuzzy index");
    eval->add_option("--max-rounds", eval_args.max_rounds, "Maximum re-application rounds");
    eval->add_option("--seed", eval_args.seed, "Master seed");
    eval->add_option("--pool", eval_args.pool, "Comma list of perturbators");
    eval->add_option("--attacks", eval_args.attacks, "Comma list of attacks");
    eval->add_option("--classifiers", eval_args.classifiers, "Comma list of classifiers");
    eval->add_option("--bin-width", eval_args.bin_width, "Entropy histogram bin width");
    eval->add_option("--known-fraction", eval_args.known_fraction, "Known fraction for the known-I/O attack");

    PerturbArgs perturb_args;
    auto* perturb = app.add_subcommand("perturb", "Apply one perturbation algorithm");
    perturb->add_option("--input", perturb_args.input)->required();
    perturb->add_option("--label", perturb_args.label);
    perturb->add_option("--algo", perturb_args.algo, "additive_noise|rotation|geometric|laplace_ldp");
    perturb->add_option("--sigma", perturb_args.sigma);
    perturb->add_option("--epsilon", perturb_args.epsilon);
    perturb->add_option("--iterations", perturb_args.iterations);
    perturb->add_option("--seed", perturb_args.seed);
    perturb->add_option("--out-dir", perturb_args.out_dir);
    perturb->add_option("--bin-width", perturb_args.bin_width);

    AttackArgs attack_args;
    auto* attack = app.add_subcommand("attack", "Run one reconstruction attack against a perturbed CSV");
    attack->add_option("--original", attack_args.original)->required();
    attack->add_option("--label", attack_args.label);
    attack->add_option("--perturbed", attack_args.perturbed)->required();
    attack->add_option("--attack", attack_args.attack, "naive|known_io|ica");
    attack->add_option("--known-fraction", attack_args.known_fraction);
    attack->add_option("--ridge", attack_args.ridge);
    attack->add_option("--max-iter", attack_args.max_iter);
    attack->add_option("--tol", attack_args.tol);
    attack->add_option("--seed", attack_args.seed);
    attack->add_option("--out-dir", attack_args.out_dir);

    FisArgs fis_args;
    auto* fis = app.add_subcommand("fis", "Evaluate the fuzzy index for a manual input triple");
    fis->add_option("privacy", fis_args.privacy)->required();
    fis->add_option("resistance", fis_args.resistance)->required();
    fis->add_option("utility", fis_args.utility)->required();
    fis->add_option("--config", fis_args.config_path, "FIS config JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitError;
    }

    try {
        if (eval->parsed()) return cmd_evaluate(eval_args);
        if (perturb->parsed()) return cmd_perturb(perturb_args);
        if (attack->parsed()) return cmd_attack(attack_args);
        if (fis->parsed()) return cmd_fis(fis_args);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}
