#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace botdetect {

inline constexpr int kNormal = 0;
inline constexpr int kAttack = 1;

/// Raised for malformed input files: bad cells, unknown labels, missing columns.
class IngestError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Labeled M x N feature matrix. Label 0 is normal traffic, 1 is attack.
struct Dataset {
    Eigen::MatrixXd features;
    std::vector<int> labels;
    std::vector<std::string> feature_names;

    std::size_t rows() const { return labels.size(); }
    std::size_t cols() const { return static_cast<std::size_t>(features.cols()); }

    /// Throws std::invalid_argument when shape or finiteness invariants fail.
    void validate() const;
};

using ClassCounts = std::map<int, std::size_t>;

struct LoadOptions {
    std::string label_column;
    std::string positive_label;
    // When set, any label other than positive/negative is rejected.
    // When unset, every non-empty value other than positive maps to normal.
    std::optional<std::string> negative_label;
    // Columns to keep as features, in this order. Empty keeps every
    // non-label column, all of which must then be numeric.
    std::vector<std::string> include;
};

Dataset load_flows(const std::string& path, const LoadOptions& options);
Dataset load_flows(const std::string& path, const std::string& label_column,
                   const std::string& positive_label);
Dataset read_flows(std::istream& in, const LoadOptions& options);

/// Writes a header plus one row per instance. With no precision the
/// shortest round-trip representation is used, so reloading is exact.
void write_flows(std::ostream& out, const Dataset& d, const std::string& label_column,
                 const std::string& positive_label, const std::string& negative_label,
                 std::optional<int> precision = std::nullopt);

ClassCounts class_counts(std::span<const int> labels);
ClassCounts class_counts(const Dataset& d);

/// Rows of `d` selected by `indices`, in the given order.
Dataset subset(const Dataset& d, std::span<const std::size_t> indices);

struct SplitPair {
    Dataset train;
    Dataset test;
    std::vector<std::size_t> train_index;  // source row ids, ascending
    std::vector<std::size_t> test_index;
    std::uint64_t seed = 0;
};

SplitPair stratified_split(const Dataset& d, double test_fraction, std::uint64_t seed);

/// Assigns each row a fold id in [0, folds) so every class is dealt
/// round-robin after a seeded shuffle.
std::vector<std::size_t> stratified_folds(std::span<const int> labels, std::size_t folds,
                                          std::uint64_t seed);

/// Keeps every row of other classes and a seeded sample of `keep` rows of
/// `cls`. Row order of the source is preserved.
Dataset sample_class(const Dataset& d, int cls, std::size_t keep, std::uint64_t seed);

}  // namespace botdetect
