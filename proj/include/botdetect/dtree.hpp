#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "botdetect/ingest.hpp"

namespace botdetect {

struct HyperParams {
    std::size_t max_depth = 50;
    std::size_t min_samples_split = 2;
    std::size_t min_samples_leaf = 1;
    double max_features_fraction = 1.0;

    void validate() const;
    bool operator==(const HyperParams&) const = default;
};

/// Splits whose impurity decrease does not exceed this are rejected; it
/// absorbs rounding noise in children that mirror the parent's class mix.
inline constexpr double kMinImpurityDecrease = 1e-14;

/// 1 - sum (c_i / total)^2. Throws on an all-zero vector.
double gini(std::span<const std::size_t> counts);

struct Split {
    std::size_t feature;
    double threshold;  // rows with value <= threshold go left
    double decrease;   // parent impurity minus size-weighted child impurity
};

/// Best Gini split of `rows` over the allowed `features`. Candidate
/// thresholds are midpoints between consecutive distinct values; ties go
/// to the lower feature index, then the lower threshold.
std::optional<Split> best_split(const Eigen::MatrixXd& X, std::span<const int> y,
                                std::span<const std::size_t> rows, const HyperParams& hp,
                                std::span<const std::size_t> features, unsigned threads = 1);

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    std::vector<std::size_t> counts;  // training rows per class reaching this node
    int majority = 0;
    std::size_t depth = 0;

    bool is_leaf() const { return feature < 0; }
};

class TreeModel {
public:
    const std::vector<TreeNode>& nodes() const { return nodes_; }
    std::size_t depth() const { return depth_; }
    std::size_t n_features() const { return n_features_; }
    std::size_t n_classes() const { return n_classes_; }
    std::size_t leaf_count() const;

    int predict(std::span<const double> row) const;
    std::vector<int> predict(const Eigen::MatrixXd& X) const;

    /// One line per node, indented by depth.
    void dump(std::ostream& out, std::span<const std::string> feature_names) const;

private:
    friend class TreeBuilder;
    std::vector<TreeNode> nodes_;
    std::size_t depth_ = 0;
    std::size_t n_features_ = 0;
    std::size_t n_classes_ = 2;
};

/// Grows a CART tree depth-first. The per-node feature subset is drawn
/// from a generator seeded once per fit, in pre-order; `threads` only
/// affects how the split search is scheduled, never the result.
TreeModel fit_tree(const Dataset& train, const HyperParams& hp, std::uint64_t seed, unsigned threads = 1);

int predict(const TreeModel& t, std::span<const double> row);

}  // namespace botdetect
