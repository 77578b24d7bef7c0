#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "botdetect/bayesopt.hpp"
#include "botdetect/dtree.hpp"
#include "botdetect/ingest.hpp"
#include "botdetect/metrics.hpp"
#include "botdetect/preprocess.hpp"

namespace botdetect {

/// Carries the name of the stage that failed.
class PipelineError : public std::runtime_error {
public:
    PipelineError(std::string stage, const std::string& what)
        : std::runtime_error("stage '" + stage + "': " + what), stage_(std::move(stage)) {}
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

/// max_depth [1,50], min_samples_split [2,100], min_samples_leaf [1,50]
/// (integers) and max_features_fraction [0.05,1] (continuous).
SearchSpace default_tree_space();

/// Reads the four tree hyperparameters from a config; absent keys keep
/// their HyperParams defaults.
HyperParams hyperparams_from(const Config& c);

struct PipelineConfig {
    std::string data_path;
    LoadOptions load{"attack", "1", std::nullopt, {}};
    double test_fraction = 0.2;
    std::uint64_t seed = 0;
    std::size_t attack_sample = 0;  // keep this many attack rows; 0 keeps all
    SmoteConfig smote;
    SearchSpace space = default_tree_space();
    std::size_t budget = 30;
    std::size_t n_init = 0;  // 0 selects max(5, 2 d)
    std::size_t cv_folds = 3;
    unsigned threads = 1;

    void validate() const;
};

/// JSON config; missing keys keep their defaults.
PipelineConfig parse_config(const std::string& json_text);
PipelineConfig load_config(const std::string& path);

/// Normalized split ready for tuning and evaluation.
struct PreparedData {
    SplitPair split;  // features already min-max scaled with train extrema
    Scaler scaler;
    ClassCounts source_counts;
};

PreparedData prepare(const PipelineConfig& cfg, const Dataset& source);

/// Mean macro F-score over stratified folds of `train`; SMOTE is applied
/// to each training fold only.
double cv_macro_f(const Dataset& train, const HyperParams& hp, const SmoteConfig& smote, std::size_t folds,
                  std::uint64_t seed, unsigned threads = 1);

Trace tune(const PipelineConfig& cfg, const Dataset& train);

struct EvalResult {
    HyperParams params;
    MetricsReport metrics;
    TreeModel tree;
    std::vector<SmoteProvenance> provenance;
};

/// Fits `hp` on the SMOTE-augmented training rows and scores the test rows.
EvalResult evaluate(const PipelineConfig& cfg, const PreparedData& data, const HyperParams& hp);

struct StageTiming {
    std::string stage;
    double seconds = 0.0;
};

struct RunReport {
    std::uint64_t seed = 0;
    ClassCounts source_counts;
    ClassCounts train_counts;
    ClassCounts test_counts;
    ClassCounts train_counts_after_smote;
    SearchSpace space;
    Trace trace;
    HyperParams baseline_params;
    HyperParams chosen;
    MetricsReport baseline;
    MetricsReport optimized;
    std::vector<StageTiming> timings;
};

RunReport run_pipeline(const PipelineConfig& cfg);
RunReport run_pipeline(const PipelineConfig& cfg, const Dataset& source);

/// `key = value` lines. Timings are optional so reports can be diffed.
void write_report(std::ostream& out, const RunReport& r, bool include_timings = true);

struct BenchRow {
    std::size_t rows;
    std::string stage;
    double seconds;
};

/// Runs the pipeline on stratified subsamples of each size and records
/// per-stage wall-clock time. Sizes must be ascending.
std::vector<BenchRow> benchmark_scaling(const PipelineConfig& cfg, const Dataset& source,
                                        std::span<const std::size_t> sizes);
std::vector<BenchRow> benchmark_scaling(const PipelineConfig& cfg, std::span<const std::size_t> sizes);

/// Published comparison rows, reported verbatim and never recomputed.
struct ReferenceRow {
    const char* name;
    double accuracy_percent;
    double precision;
    double recall;
    double f_score;
};

inline constexpr ReferenceRow kPublishedRows[] = {
    {"default_dt", 99.82, 0.53, 0.91, 0.56},
    {"svm", 88.37, 1.00, 0.88, 0.94},
    {"optimized_dt", 99.99, 0.99, 1.00, 1.00},
};

}  // namespace botdetect
