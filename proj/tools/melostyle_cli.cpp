#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "melostyle/melostyle.hpp"

namespace fs = std::filesystem;
using namespace melostyle;

namespace {

struct Common {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::vector<std::string> overrides;
};

RunConfig resolve_config(const Common& c) {
    RunConfig cfg = c.config_path.empty() ? RunConfig{} : load_config(c.config_path);
    for (const auto& kv : c.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
        cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (c.seed) cfg.seed = *c.seed;
    cfg.validate();
    return cfg;
}

void emit(const Common& c, const std::string& text) {
    if (c.out.empty()) std::cout << text;
    else csv::write_text(c.out, text);
}

std::string require_out(const Common& c, const std::string& cmd) {
    if (c.out.empty()) throw ArgumentError(cmd + " needs --out");
    return c.out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Melodic and timbral style features, classification and listener agreement"};
    app.require_subcommand(1);
    app.fallthrough();
    Common common;
    app.add_option("--config", common.config_path, "key=value config file");
    app.add_option("--seed", common.seed, "random seed (overrides config)");
    app.add_option("--out", common.out, "output file or directory");
    app.add_option("--set", common.overrides, "override a config key, key=value (repeatable)");

    // gen
    auto* gen = app.add_subcommand("gen", "generate a synthetic corpus and its manifest");
    std::string gen_style = "all";
    std::size_t gen_count = 60;
    double gen_duration = 30.0;
    bool gen_audio = false;
    gen->add_option("--style", gen_style, "H, C, T or all");
    gen->add_option("--count", gen_count, "clips per style");
    gen->add_option("--duration", gen_duration, "clip length in seconds (>= 10)");
    gen->add_flag("--audio", gen_audio, "also render WAV audio");

    // extract
    auto* extract = app.add_subcommand("extract", "extract the feature table for a manifest");
    std::string manifest;
    unsigned workers = 1;
    extract->add_option("manifest", manifest, "manifest CSV")->required();
    extract->add_option("--workers", workers, "parallel extraction threads");

    // rank
    auto* rank = app.add_subcommand("rank", "rank features by information gain");
    std::string rank_table;
    rank->add_option("table", rank_table, "feature table CSV")->required();

    // crossval
    auto* crossval = app.add_subcommand("crossval", "stratified cross-validation of a classifier");
    std::string cv_table, classifier = "quadratic", subset = "A";
    crossval->add_option("table", cv_table, "feature table CSV")->required();
    crossval->add_option("--classifier", classifier, "quadratic or knn");
    crossval->add_option("--subset", subset, "A, B, C, all, melodic, timbre or melodic+timbre");

    // agree
    auto* agree = app.add_subcommand("agree", "compare classifier labels with listener judgments");
    std::string predictions_path, responses_path;
    bool anova = false;
    agree->add_option("predictions", predictions_path, "predictions CSV from crossval")->required();
    agree->add_option("responses", responses_path, "listener responses CSV")->required();
    agree->add_flag("--anova", anova, "two-way ANOVA (not supported)");

    // synth
    auto* synth = app.add_subcommand("synth", "resynthesize a pitch/energy pair as a 3-harmonic stimulus");
    std::string synth_pitch, synth_energy;
    double synth_tonic = 0.0;
    synth->add_option("pitch", synth_pitch, "pitch CSV")->required();
    synth->add_option("energy", synth_energy, "energy CSV")->required();
    synth->add_option("--tonic", synth_tonic, "tonic in Hz")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        const RunConfig cfg = resolve_config(common);

        if (*gen) {
            std::vector<Style> styles;
            if (gen_style == "all") {
                styles.assign(kStyles.begin(), kStyles.end());
            } else {
                const auto s = parse_style(gen_style);
                if (!s) throw ArgumentError("unknown style '" + gen_style + "'");
                styles.push_back(*s);
            }
            const auto dir = require_out(common, "gen");
            const auto clips = generate_corpus(dir, styles, gen_count, gen_duration, cfg.seed, gen_audio);
            std::cout << "wrote " << clips.size() << " clips and " << (fs::path(dir) / "manifest.csv").string() << "\n";
        } else if (*extract) {
            const auto clips = load_dataset(manifest);
            const auto res = extract_dataset(clips, cfg.extraction(), workers);
            for (const auto& w : res.warnings) std::cerr << "warning: " << w << "\n";
            if (!res.errors.empty()) {
                for (const auto& e : res.errors) std::cerr << "error: " << e << "\n";
                return res.worst_exit_code ? res.worst_exit_code : 2;
            }
            emit(common, format_feature_table(res.table));
        } else if (*rank) {
            const auto table = load_feature_table(rank_table);
            std::vector<std::string> cols;
            for (const auto& name : table.names) {
                bool complete = true;
                for (const auto& row : table.rows) complete = complete && row.get(name).has_value();
                if (complete) cols.push_back(name);
                else std::cerr << "warning: " << name << " has missing values; not ranked\n";
            }
            emit(common, format_ranking(rank_features(to_matrix(table, cols), cfg.bins)));
        } else if (*crossval) {
            ClassifierSpec spec;
            if (classifier == "quadratic") spec.kind = ClassifierKind::Quadratic;
            else if (classifier == "knn") spec.kind = ClassifierKind::Knn;
            else throw ArgumentError("unknown classifier '" + classifier + "' (expected quadratic or knn)");
            spec.k = cfg.k;
            spec.ridge = cfg.ridge;
            const auto table = load_feature_table(cv_table);
            const auto m = to_matrix(table, feature_subset(subset));
            const auto rep = cross_validate(m, spec, cfg.folds, cfg.seed);
            const fs::path dir = require_out(common, "crossval");
            fs::create_directories(dir);
            csv::write_text((dir / "accuracy.csv").string(), format_accuracy(rep));
            csv::write_text((dir / "confusion.csv").string(), format_confusion(rep));
            csv::write_text((dir / "predictions.csv").string(), format_predictions(rep));
            std::cout << classifier << " subset " << subset << ": accuracy " << csv::fixed(rep.accuracy(), 4) << " ("
                      << rep.correct() << "/" << rep.total() << ")\n";
        } else if (*agree) {
            if (anova)
                std::cerr << "note: two-way ANOVA is not available; its input table and outlier handling are "
                             "under-specified. Reporting the correlation test only.\n";
            const auto rep = build_agreement(load_predictions(predictions_path), load_responses(responses_path));
            for (const auto& r : rep.rows)
                if (r.listeners.tie_broken)
                    std::cerr << "warning: listener majority tied for clip " << r.listeners.clip_id << "; chose "
                              << style_code(r.listeners.label) << "\n";
            emit(common, format_agreement(rep));
        } else if (*synth) {
            const auto pitch = load_pitch_track(synth_pitch);
            const auto energy = align_energy(load_energy(synth_energy), pitch);
            write_wav(require_out(common, "synth"), synthesize_stimulus(to_cents(pitch, synth_tonic), energy));
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
