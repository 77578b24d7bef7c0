#include "botdetect/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "botdetect/random.hpp"

namespace botdetect {

namespace {

using json = nlohmann::json;

class StageClock {
public:
    explicit StageClock(std::vector<StageTiming>& sink) : sink_(sink) {}

    template <typename F>
    auto operator()(const std::string& stage, F&& body) {
        const auto start = std::chrono::steady_clock::now();
        const auto finish = [&] {
            const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - start;
            sink_.push_back({stage, dt.count()});
        };
        try {
            if constexpr (std::is_void_v<decltype(body())>) {
                body();
                finish();
            } else {
                auto result = body();
                finish();
                return result;
            }
        } catch (const PipelineError&) {
            throw;
        } catch (const std::exception& e) {
            throw PipelineError(stage, e.what());
        }
    }

private:
    std::vector<StageTiming>& sink_;
};

void check_disjoint(std::span<const std::size_t> a, std::span<const std::size_t> b, const char* what) {
    std::vector<std::size_t> x(a.begin(), a.end());
    std::vector<std::size_t> y(b.begin(), b.end());
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    std::vector<std::size_t> common;
    std::set_intersection(x.begin(), x.end(), y.begin(), y.end(), std::back_inserter(common));
    if (!common.empty()) throw std::logic_error(std::string("leakage guard: ") + what + " share rows");
}

std::uint64_t derive(std::uint64_t seed, std::uint64_t tag) { return splitmix64(seed ^ splitmix64(tag)); }

// Distinct stream tags per stochastic stage.
enum : std::uint64_t { kSplitTag = 1, kSampleTag, kTuneTag, kSmoteTag, kTreeTag, kFoldTag };

SmoteConfig with_seed(SmoteConfig cfg, std::uint64_t seed) {
    cfg.seed = seed;
    return cfg;
}

DimKind parse_kind(const std::string& s) {
    if (s == "integer") return DimKind::integer;
    if (s == "continuous") return DimKind::continuous;
    throw std::invalid_argument("unknown dimension kind '" + s + "'");
}

}  // namespace

SearchSpace default_tree_space() {
    return SearchSpace{{
        {"max_depth", DimKind::integer, 1, 50},
        {"min_samples_split", DimKind::integer, 2, 100},
        {"min_samples_leaf", DimKind::integer, 1, 50},
        {"max_features_fraction", DimKind::continuous, 0.05, 1.0},
    }};
}

HyperParams hyperparams_from(const Config& c) {
    HyperParams hp;
    const auto get = [&](const char* key, auto& field) {
        if (const auto it = c.find(key); it != c.end()) {
            field = static_cast<std::remove_reference_t<decltype(field)>>(it->second);
        }
    };
    get("max_depth", hp.max_depth);
    get("min_samples_split", hp.min_samples_split);
    get("min_samples_leaf", hp.min_samples_leaf);
    get("max_features_fraction", hp.max_features_fraction);
    return hp;
}

void PipelineConfig::validate() const {
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) throw std::invalid_argument("test_fraction must lie in (0, 1)");
    smote.validate();
    space.validate();
    if (cv_folds < 2) throw std::invalid_argument("cv_folds must be at least 2");
    const std::size_t n_init_eff = n_init > 0 ? n_init : std::max<std::size_t>(5, 2 * space.size());
    if (budget < n_init_eff) throw std::invalid_argument("budget must be at least n_init");
    if (load.label_column.empty()) throw std::invalid_argument("label column is empty");
}

PipelineConfig parse_config(const std::string& json_text) {
    const json j = json::parse(json_text);
    PipelineConfig cfg;
    cfg.data_path = j.value("data", cfg.data_path);
    cfg.load.label_column = j.value("label_column", cfg.load.label_column);
    cfg.load.positive_label = j.value("positive_label", cfg.load.positive_label);
    if (j.contains("negative_label")) cfg.load.negative_label = j.at("negative_label").get<std::string>();
    cfg.load.include = j.value("features", cfg.load.include);
    cfg.test_fraction = j.value("test_fraction", cfg.test_fraction);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.attack_sample = j.value("attack_sample", cfg.attack_sample);
    cfg.budget = j.value("budget", cfg.budget);
    cfg.n_init = j.value("n_init", cfg.n_init);
    cfg.cv_folds = j.value("cv_folds", cfg.cv_folds);
    cfg.threads = j.value("threads", cfg.threads);
    if (j.contains("smote")) {
        const auto& s = j.at("smote");
        cfg.smote.k = s.value("k", cfg.smote.k);
        cfg.smote.target_ratio = s.value("target_ratio", cfg.smote.target_ratio);
    }
    if (j.contains("space")) {
        cfg.space.dims.clear();
        for (const auto& d : j.at("space")) {
            cfg.space.dims.push_back({d.at("name").get<std::string>(), parse_kind(d.value("kind", "continuous")),
                                      d.at("lower").get<double>(), d.at("upper").get<double>()});
        }
    }
    return cfg;
}

PipelineConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

PreparedData prepare(const PipelineConfig& cfg, const Dataset& source) {
    source.validate();
    PreparedData out;
    out.source_counts = class_counts(source);
    out.split = stratified_split(source, cfg.test_fraction, derive(cfg.seed, kSplitTag));
    check_disjoint(out.split.train_index, out.split.test_index, "train and test split");
    out.scaler = fit_minmax(out.split.train);
    out.split.train = apply_minmax(out.scaler, out.split.train);
    out.split.test = apply_minmax(out.scaler, out.split.test);
    return out;
}

double cv_macro_f(const Dataset& train, const HyperParams& hp, const SmoteConfig& smote_cfg, std::size_t folds,
                  std::uint64_t seed, unsigned threads) {
    const auto fold_of = stratified_folds(train.labels, folds, derive(seed, kFoldTag));
    double total = 0.0;
    for (std::size_t f = 0; f < folds; ++f) {
        std::vector<std::size_t> fit_rows;
        std::vector<std::size_t> val_rows;
        for (std::size_t i = 0; i < fold_of.size(); ++i) (fold_of[i] == f ? val_rows : fit_rows).push_back(i);
        check_disjoint(fit_rows, val_rows, "training and validation folds");

        const auto augmented = smote(subset(train, fit_rows), with_seed(smote_cfg, derive(seed, kSmoteTag + 16 * f)));
        const auto tree = fit_tree(augmented.data, hp, derive(seed, kTreeTag + 16 * f), threads);
        const auto val = subset(train, val_rows);
        total += compute_metrics(confusion(val.labels, tree.predict(val.features))).macro_f_score;
    }
    return total / static_cast<double>(folds);
}

Trace tune(const PipelineConfig& cfg, const Dataset& train) {
    BoOptions options;
    options.budget = cfg.budget;
    options.n_init = cfg.n_init;
    options.seed = derive(cfg.seed, kTuneTag);
    const auto objective = [&](const Config& c) {
        return cv_macro_f(train, hyperparams_from(c), cfg.smote, cfg.cv_folds, cfg.seed, cfg.threads);
    };
    return optimize(objective, cfg.space, options);
}

EvalResult evaluate(const PipelineConfig& cfg, const PreparedData& data, const HyperParams& hp) {
    const auto augmented = smote(data.split.train, with_seed(cfg.smote, derive(cfg.seed, kSmoteTag)));
    EvalResult out{hp, {}, fit_tree(augmented.data, hp, derive(cfg.seed, kTreeTag), cfg.threads),
                   augmented.provenance};
    out.metrics = compute_metrics(confusion(data.split.test.labels, out.tree.predict(data.split.test.features)));
    return out;
}

RunReport run_pipeline(const PipelineConfig& cfg, const Dataset& loaded) {
    cfg.validate();
    RunReport r;
    r.seed = cfg.seed;
    r.space = cfg.space;
    StageClock clock(r.timings);

    const Dataset source = clock("sample", [&] {
        return cfg.attack_sample > 0 ? sample_class(loaded, kAttack, cfg.attack_sample, derive(cfg.seed, kSampleTag))
                                     : loaded;
    });
    const PreparedData data = clock("split_normalize", [&] { return prepare(cfg, source); });
    r.source_counts = data.source_counts;
    r.train_counts = class_counts(data.split.train);
    r.test_counts = class_counts(data.split.test);

    // Tuning and SMOTE only ever see data.split.train; the test rows are
    // touched once, in the evaluate stage.
    r.trace = clock("tune", [&] { return tune(cfg, data.split.train); });
    r.chosen = hyperparams_from(r.trace.best().config);

    const auto augmented =
        clock("smote", [&] { return smote(data.split.train, with_seed(cfg.smote, derive(cfg.seed, kSmoteTag))); });
    r.train_counts_after_smote = class_counts(augmented.data);

    const auto tree_seed = derive(cfg.seed, kTreeTag);
    const auto baseline = clock("fit_baseline", [&] { return fit_tree(augmented.data, r.baseline_params, tree_seed, cfg.threads); });
    const auto optimized = clock("fit_optimized", [&] { return fit_tree(augmented.data, r.chosen, tree_seed, cfg.threads); });

    clock("evaluate", [&] {
        const auto& test = data.split.test;
        r.baseline = compute_metrics(confusion(test.labels, baseline.predict(test.features)));
        r.optimized = compute_metrics(confusion(test.labels, optimized.predict(test.features)));
    });
    return r;
}

RunReport run_pipeline(const PipelineConfig& cfg) {
    std::vector<StageTiming> load_time;
    StageClock clock(load_time);
    const Dataset d = clock("load", [&] { return load_flows(cfg.data_path, cfg.load); });
    RunReport r = run_pipeline(cfg, d);
    r.timings.insert(r.timings.begin(), load_time.front());
    return r;
}

void write_report(std::ostream& out, const RunReport& r, bool include_timings) {
    const auto counts = [&](const char* key, const ClassCounts& c) {
        for (const auto& [cls, n] : c) out << "counts." << key << '.' << (cls == kAttack ? "attack" : "normal") << " = " << n << '\n';
    };
    const auto params = [&](const char* key, const HyperParams& hp) {
        out << key << ".max_depth = " << hp.max_depth << '\n'
            << key << ".min_samples_split = " << hp.min_samples_split << '\n'
            << key << ".min_samples_leaf = " << hp.min_samples_leaf << '\n'
            << key << ".max_features_fraction = " << hp.max_features_fraction << '\n';
    };
    const auto old = out.precision(10);
    out << "seed = " << r.seed << '\n';
    counts("source", r.source_counts);
    counts("train", r.train_counts);
    counts("test", r.test_counts);
    counts("train_after_smote", r.train_counts_after_smote);
    out << "tuning.trials = " << r.trace.trials.size() << '\n'
        << "tuning.best_index = " << r.trace.best_index << '\n'
        << "tuning.best_objective = " << r.trace.best().objective << '\n';
    params("params.baseline", r.baseline_params);
    params("params.optimized", r.chosen);
    write_metrics(out, "baseline", r.baseline);
    write_metrics(out, "optimized", r.optimized);
    out << "# published reference values, reported as-is and not recomputed\n";
    for (const auto& row : kPublishedRows) {
        out << "published." << row.name << ".accuracy_percent = " << row.accuracy_percent << '\n'
            << "published." << row.name << ".precision = " << row.precision << '\n'
            << "published." << row.name << ".recall = " << row.recall << '\n'
            << "published." << row.name << ".f_score = " << row.f_score << '\n';
    }
    if (include_timings) {
        for (const auto& t : r.timings) out << "seconds." << t.stage << " = " << t.seconds << '\n';
    }
    out.precision(old);
}

std::vector<BenchRow> benchmark_scaling(const PipelineConfig& cfg, const Dataset& source,
                                        std::span<const std::size_t> sizes) {
    if (!std::is_sorted(sizes.begin(), sizes.end())) throw std::invalid_argument("benchmark sizes must be ascending");
    std::vector<BenchRow> table;
    for (std::size_t m : sizes) {
        const Dataset sample = m < source.rows()
                                   ? stratified_split(source, static_cast<double>(m) / static_cast<double>(source.rows()),
                                                      derive(cfg.seed, kSampleTag + m)).test
                                   : source;
        PipelineConfig local = cfg;
        local.attack_sample = 0;
        const RunReport r = run_pipeline(local, sample);
        for (const auto& t : r.timings) table.push_back({m, t.stage, t.seconds});
    }
    return table;
}

std::vector<BenchRow> benchmark_scaling(const PipelineConfig& cfg, std::span<const std::size_t> sizes) {
    if (sizes.empty()) return {};
    return benchmark_scaling(cfg, load_flows(cfg.data_path, cfg.load), sizes);
}

}  // namespace botdetect
