// botdetect: command-line front end for the botnet-detection pipeline.
//
//   botdetect run   --config cfg.json --seed 7 [--out report.txt] [--trace-out trace.csv]
//   botdetect tune  --config cfg.json [--out trace.csv]
//   botdetect eval  --config cfg.json [--max-depth 12 ...] [--tree-out tree.txt]
//   botdetect pca   --config cfg.json [--out pca.csv]
//   botdetect bench --config cfg.json --sizes 1000,2000
//   botdetect synth --attack 10000 --normal 100 --seed 1 --out flows.csv

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "botdetect/pipeline.hpp"
#include "botdetect/synthetic.hpp"

using namespace botdetect;

namespace {

struct Overrides {
    std::string config_path;
    std::optional<std::string> data;
    std::optional<std::string> label_column;
    std::optional<std::string> positive_label;
    std::optional<std::string> negative_label;
    std::vector<std::string> features;
    std::optional<double> test_fraction;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> attack_sample;
    std::optional<std::size_t> smote_k;
    std::optional<double> smote_ratio;
    std::optional<std::size_t> budget;
    std::optional<std::size_t> n_init;
    std::optional<std::size_t> cv_folds;
    std::optional<unsigned> threads;
    std::vector<std::string> space;

    void attach(CLI::App& app) {
        app.add_option("--config", config_path, "JSON pipeline config");
        app.add_option("--data", data, "Input CSV");
        app.add_option("--label-column", label_column);
        app.add_option("--positive-label", positive_label, "Label value marking attack rows");
        app.add_option("--negative-label", negative_label, "Label value marking normal rows");
        app.add_option("--features", features, "Feature include-list")->delimiter(',');
        app.add_option("--test-fraction", test_fraction);
        app.add_option("--seed", seed);
        app.add_option("--attack-sample", attack_sample, "Keep this many attack rows (0 keeps all)");
        app.add_option("--smote-k", smote_k);
        app.add_option("--smote-ratio", smote_ratio);
        app.add_option("--budget", budget, "Bayesian optimization trials");
        app.add_option("--n-init", n_init, "Initial design size");
        app.add_option("--cv-folds", cv_folds);
        app.add_option("--threads", threads);
        app.add_option("--space", space, "Search dimension name:integer|continuous:lower:upper (repeatable)");
    }

    PipelineConfig resolve() const {
        PipelineConfig cfg = config_path.empty() ? PipelineConfig{} : load_config(config_path);
        if (data) cfg.data_path = *data;
        if (label_column) cfg.load.label_column = *label_column;
        if (positive_label) cfg.load.positive_label = *positive_label;
        if (negative_label) cfg.load.negative_label = *negative_label;
        if (!features.empty()) cfg.load.include = features;
        if (test_fraction) cfg.test_fraction = *test_fraction;
        if (seed) cfg.seed = *seed;
        if (attack_sample) cfg.attack_sample = *attack_sample;
        if (smote_k) cfg.smote.k = *smote_k;
        if (smote_ratio) cfg.smote.target_ratio = *smote_ratio;
        if (budget) cfg.budget = *budget;
        if (n_init) cfg.n_init = *n_init;
        if (cv_folds) cfg.cv_folds = *cv_folds;
        if (threads) cfg.threads = *threads;
        if (!space.empty()) {
            cfg.space.dims.clear();
            for (const auto& entry : space) {
                std::vector<std::string> parts;
                std::stringstream ss(entry);
                for (std::string part; std::getline(ss, part, ':');) parts.push_back(part);
                if (parts.size() != 4) throw std::invalid_argument("--space expects name:kind:lower:upper, got '" + entry + "'");
                if (parts[1] != "integer" && parts[1] != "continuous") {
                    throw std::invalid_argument("--space kind must be integer or continuous, got '" + parts[1] + "'");
                }
                const auto kind = parts[1] == "integer" ? DimKind::integer : DimKind::continuous;
                cfg.space.dims.push_back({parts[0], kind, std::stod(parts[2]), std::stod(parts[3])});
            }
        }
        cfg.validate();
        return cfg;
    }
};

// Writes to `path`, or stdout when empty.
template <typename F>
void emit(const std::string& path, F&& write) {
    if (path.empty()) {
        write(std::cout);
        return;
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    write(out);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"IoT botnet detection: min-max + SMOTE + decision tree tuned by GP Bayesian optimization"};
    app.require_subcommand(1);

    Overrides run_opts, tune_opts, eval_opts, pca_opts, bench_opts;
    std::string run_out, run_trace_out, tune_out, eval_out, eval_tree_out, eval_prov_out, pca_out, bench_out, synth_out;

    auto* run = app.add_subcommand("run", "Full pipeline: split, normalize, tune, fit, evaluate");
    run_opts.attach(*run);
    run->get_option("--seed")->required();
    run->add_option("--out", run_out, "Report file (default stdout)");
    run->add_option("--trace-out", run_trace_out, "Tuning trace CSV");

    auto* tune_cmd = app.add_subcommand("tune", "Bayesian optimization only; emits the trial trace");
    tune_opts.attach(*tune_cmd);
    tune_cmd->add_option("--out", tune_out, "Trace CSV (default stdout)");

    HyperParams hp;
    auto* eval = app.add_subcommand("eval", "Fit one hyperparameter setting and report test metrics");
    eval_opts.attach(*eval);
    eval->add_option("--max-depth", hp.max_depth);
    eval->add_option("--min-samples-split", hp.min_samples_split);
    eval->add_option("--min-samples-leaf", hp.min_samples_leaf);
    eval->add_option("--max-features-fraction", hp.max_features_fraction);
    eval->add_option("--out", eval_out, "Metrics file (default stdout)");
    eval->add_option("--tree-out", eval_tree_out, "Indented tree dump");
    eval->add_option("--provenance-out", eval_prov_out, "SMOTE provenance CSV");

    auto* pca = app.add_subcommand("pca", "Two-component PCA of the normalized data");
    pca_opts.attach(*pca);
    pca->add_option("--out", pca_out, "CSV of pc1,pc2,label (default stdout)");

    std::vector<std::size_t> sizes;
    auto* bench = app.add_subcommand("bench", "Per-stage wall-clock time over subsample sizes");
    bench_opts.attach(*bench);
    bench->add_option("--sizes", sizes, "Ascending row counts")->delimiter(',')->required();
    bench->add_option("--out", bench_out, "CSV (default stdout)");

    std::size_t n_attack = 10000, n_normal = 100;
    std::uint64_t synth_seed = 0;
    auto* synth = app.add_subcommand("synth", "Write a seeded two-cluster imbalanced dataset");
    synth->add_option("--attack", n_attack);
    synth->add_option("--normal", n_normal);
    synth->add_option("--seed", synth_seed);
    synth->add_option("--out", synth_out, "CSV (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            const auto cfg = run_opts.resolve();
            const auto report = run_pipeline(cfg);
            emit(run_out, [&](std::ostream& o) { write_report(o, report); });
            if (!run_trace_out.empty()) emit(run_trace_out, [&](std::ostream& o) { write_trace(o, cfg.space, report.trace); });
        } else if (*tune_cmd) {
            const auto cfg = tune_opts.resolve();
            const auto data = prepare(cfg, load_flows(cfg.data_path, cfg.load));
            const auto trace = tune(cfg, data.split.train);
            emit(tune_out, [&](std::ostream& o) { write_trace(o, cfg.space, trace); });
        } else if (*eval) {
            const auto cfg = eval_opts.resolve();
            hp.validate();
            const auto data = prepare(cfg, load_flows(cfg.data_path, cfg.load));
            const auto result = evaluate(cfg, data, hp);
            emit(eval_out, [&](std::ostream& o) { write_metrics(o, "eval", result.metrics); });
            if (!eval_tree_out.empty()) {
                emit(eval_tree_out, [&](std::ostream& o) { result.tree.dump(o, data.split.train.feature_names); });
            }
            if (!eval_prov_out.empty()) emit(eval_prov_out, [&](std::ostream& o) { write_provenance(o, result.provenance); });
        } else if (*pca) {
            const auto cfg = pca_opts.resolve();
            const auto d = load_flows(cfg.data_path, cfg.load);
            const auto p = pca2(apply_minmax(fit_minmax(d), d.features));
            emit(pca_out, [&](std::ostream& o) { write_pca(o, p, d.labels); });
            std::cerr << "explained variance: " << p.explained_variance[0] << ", " << p.explained_variance[1] << '\n';
        } else if (*bench) {
            const auto cfg = bench_opts.resolve();
            const auto table = benchmark_scaling(cfg, sizes);
            emit(bench_out, [&](std::ostream& o) {
                o << "rows,stage,seconds\n";
                for (const auto& row : table) o << row.rows << ',' << row.stage << ',' << row.seconds << '\n';
            });
        } else if (*synth) {
            const auto d = make_gaussian_clusters(n_attack, n_normal, synth_seed);
            emit(synth_out, [&](std::ostream& o) { write_flows(o, d, "attack", "1", "0"); });
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
