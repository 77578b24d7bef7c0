#include "botdetect/dtree.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "botdetect/random.hpp"

namespace botdetect {

namespace {

using RowList = std::vector<std::uint32_t>;

// Below this many (row, feature) pairs a node is scanned serially.
constexpr std::size_t kParallelWork = 20000;

double gini_of(std::span<const std::size_t> counts, std::size_t total) {
    double sum_sq = 0.0;
    for (std::size_t c : counts) {
        const double p = static_cast<double>(c) / static_cast<double>(total);
        sum_sq += p * p;
    }
    return 1.0 - sum_sq;
}

double split_threshold(double a, double b) {
    const double mid = 0.5 * (a + b);
    return mid < b ? mid : a;
}

std::size_t class_count(std::span<const int> y) {
    int hi = 1;
    for (int v : y) {
        if (v < 0) throw std::invalid_argument("class labels must be non-negative");
        hi = std::max(hi, v);
    }
    return static_cast<std::size_t>(hi) + 1;
}

// Sweeps one feature whose node rows are sorted by value.
std::optional<Split> scan_feature(const Eigen::MatrixXd& X, std::span<const int> y, std::size_t feature,
                                  const RowList& sorted, std::span<const std::size_t> parent,
                                  std::size_t min_leaf) {
    const std::size_t n = sorted.size();
    const double parent_gini = gini_of(parent, n);
    const auto col = X.col(static_cast<Eigen::Index>(feature));
    std::vector<std::size_t> left(parent.size(), 0);
    std::vector<std::size_t> right(parent.begin(), parent.end());

    std::optional<Split> best;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const auto cls = static_cast<std::size_t>(y[sorted[i]]);
        ++left[cls];
        --right[cls];
        const double a = col(sorted[i]);
        const double b = col(sorted[i + 1]);
        if (!(a < b)) continue;
        const std::size_t nl = i + 1;
        const std::size_t nr = n - nl;
        if (nl < min_leaf || nr < min_leaf) continue;
        const double decrease = parent_gini -
                                (static_cast<double>(nl) / static_cast<double>(n)) * gini_of(left, nl) -
                                (static_cast<double>(nr) / static_cast<double>(n)) * gini_of(right, nr);
        if (decrease > kMinImpurityDecrease && (!best || decrease > best->decrease)) {
            best = Split{feature, split_threshold(a, b), decrease};
        }
    }
    return best;
}

// Evaluates each allowed feature independently, then reduces in ascending
// feature order so the winner is the same however the work was scheduled.
std::optional<Split> search(const Eigen::MatrixXd& X, std::span<const int> y,
                            const std::vector<RowList>& sorted, std::span<const std::size_t> features,
                            std::span<const std::size_t> parent, std::size_t min_leaf, unsigned threads) {
    std::vector<std::optional<Split>> per_feature(features.size());
    const std::size_t n = sorted.empty() ? 0 : sorted[features.front()].size();
    const auto work = [&](std::size_t begin, std::size_t step) {
        for (std::size_t i = begin; i < features.size(); i += step) {
            per_feature[i] = scan_feature(X, y, features[i], sorted[features[i]], parent, min_leaf);
        }
    };
    const std::size_t n_threads = std::min<std::size_t>(threads, features.size());
    if (n_threads > 1 && n * features.size() >= kParallelWork) {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(work, t, n_threads);
    } else {
        work(0, 1);
    }

    std::optional<Split> best;
    for (const auto& cand : per_feature) {
        if (cand && (!best || cand->decrease > best->decrease)) best = cand;
    }
    return best;
}

RowList sorted_rows(const Eigen::MatrixXd& X, std::span<const std::size_t> rows, std::size_t feature) {
    RowList out(rows.begin(), rows.end());
    const auto col = X.col(static_cast<Eigen::Index>(feature));
    std::sort(out.begin(), out.end(), [&](std::uint32_t a, std::uint32_t b) {
        return col(a) < col(b) || (col(a) == col(b) && a < b);
    });
    return out;
}

}  // namespace

void HyperParams::validate() const {
    if (max_depth < 1) throw std::invalid_argument("max_depth must be at least 1");
    if (min_samples_split < 2) throw std::invalid_argument("min_samples_split must be at least 2");
    if (min_samples_leaf < 1) throw std::invalid_argument("min_samples_leaf must be at least 1");
    if (!(max_features_fraction > 0.0 && max_features_fraction <= 1.0)) {
        throw std::invalid_argument("max_features_fraction must lie in (0, 1]");
    }
}

double gini(std::span<const std::size_t> counts) {
    const std::size_t total = std::accumulate(counts.begin(), counts.end(), std::size_t{0});
    if (total == 0) throw std::invalid_argument("gini: all counts are zero");
    return gini_of(counts, total);
}

std::optional<Split> best_split(const Eigen::MatrixXd& X, std::span<const int> y,
                                std::span<const std::size_t> rows, const HyperParams& hp,
                                std::span<const std::size_t> features, unsigned threads) {
    if (rows.size() < hp.min_samples_split || features.empty()) return std::nullopt;
    std::vector<std::size_t> parent(class_count(y), 0);
    for (std::size_t r : rows) ++parent[static_cast<std::size_t>(y[r])];
    std::vector<RowList> sorted(static_cast<std::size_t>(X.cols()));
    for (std::size_t f : features) {
        if (f >= sorted.size()) throw std::out_of_range("best_split: feature index out of range");
        sorted[f] = sorted_rows(X, rows, f);
    }
    return search(X, y, sorted, features, parent, hp.min_samples_leaf, threads);
}

class TreeBuilder {
public:
    TreeBuilder(const Dataset& train, const HyperParams& hp, std::uint64_t seed, unsigned threads)
        : X_(train.features), y_(train.labels), hp_(hp), rng_(seed), threads_(std::max(1u, threads)),
          goes_left_(train.rows(), 0) {
        model_.n_features_ = train.cols();
        model_.n_classes_ = class_count(train.labels);
        const auto n_features = train.cols();
        subset_size_ = std::clamp<std::size_t>(
            static_cast<std::size_t>(std::ceil(hp.max_features_fraction * static_cast<double>(n_features))), 1,
            n_features);
    }

    TreeModel build() {
        std::vector<std::size_t> all(y_.size());
        std::iota(all.begin(), all.end(), std::size_t{0});
        std::vector<RowList> sorted(model_.n_features_);
        for (std::size_t f = 0; f < model_.n_features_; ++f) sorted[f] = sorted_rows(X_, all, f);
        grow(std::move(sorted), 0);
        return std::move(model_);
    }

private:
    std::vector<std::size_t> draw_features() {
        std::vector<std::size_t> features(model_.n_features_);
        std::iota(features.begin(), features.end(), std::size_t{0});
        if (subset_size_ < features.size()) {
            for (std::size_t i = 0; i < subset_size_; ++i) {
                std::swap(features[i], features[i + uniform_index(rng_, features.size() - i)]);
            }
            features.resize(subset_size_);
            std::sort(features.begin(), features.end());
        }
        return features;
    }

    int grow(std::vector<RowList> sorted, std::size_t depth) {
        const RowList& rows = sorted.front();
        TreeNode node;
        node.depth = depth;
        node.counts.assign(model_.n_classes_, 0);
        for (std::uint32_t r : rows) ++node.counts[static_cast<std::size_t>(y_[r])];
        node.majority = static_cast<int>(std::max_element(node.counts.begin(), node.counts.end()) - node.counts.begin());
        const bool pure = std::count_if(node.counts.begin(), node.counts.end(), [](std::size_t c) { return c > 0; }) <= 1;

        const int id = static_cast<int>(model_.nodes_.size());
        model_.nodes_.push_back(node);
        model_.depth_ = std::max(model_.depth_, depth);
        if (depth >= hp_.max_depth || rows.size() < hp_.min_samples_split || pure) return id;

        const auto features = draw_features();
        const auto split = search(X_, y_, sorted, features, node.counts, hp_.min_samples_leaf, threads_);
        if (!split) return id;

        const auto col = X_.col(static_cast<Eigen::Index>(split->feature));
        for (std::uint32_t r : rows) goes_left_[r] = col(r) <= split->threshold ? 1 : 0;
        std::vector<RowList> left(sorted.size());
        std::vector<RowList> right(sorted.size());
        for (std::size_t f = 0; f < sorted.size(); ++f) {
            for (std::uint32_t r : sorted[f]) (goes_left_[r] ? left[f] : right[f]).push_back(r);
        }
        sorted.clear();
        sorted.shrink_to_fit();

        model_.nodes_[static_cast<std::size_t>(id)].feature = static_cast<int>(split->feature);
        model_.nodes_[static_cast<std::size_t>(id)].threshold = split->threshold;
        const int l = grow(std::move(left), depth + 1);
        const int r = grow(std::move(right), depth + 1);
        model_.nodes_[static_cast<std::size_t>(id)].left = l;
        model_.nodes_[static_cast<std::size_t>(id)].right = r;
        return id;
    }

    const Eigen::MatrixXd& X_;
    std::span<const int> y_;
    HyperParams hp_;
    Engine rng_;
    unsigned threads_;
    std::size_t subset_size_ = 1;
    std::vector<char> goes_left_;
    TreeModel model_;
};

TreeModel fit_tree(const Dataset& train, const HyperParams& hp, std::uint64_t seed, unsigned threads) {
    hp.validate();
    if (train.rows() == 0) throw std::invalid_argument("fit_tree: empty training set");
    if (train.rows() > std::numeric_limits<std::uint32_t>::max()) {
        throw std::invalid_argument("fit_tree: too many rows");
    }
    return TreeBuilder(train, hp, seed, threads).build();
}

std::size_t TreeModel::leaf_count() const {
    return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

int TreeModel::predict(std::span<const double> row) const {
    if (row.size() != n_features_) throw std::invalid_argument("predict: row dimension mismatch");
    if (nodes_.empty()) throw std::logic_error("predict: empty tree");
    const TreeNode* node = &nodes_.front();
    while (!node->is_leaf()) {
        const auto next = row[static_cast<std::size_t>(node->feature)] <= node->threshold ? node->left : node->right;
        node = &nodes_[static_cast<std::size_t>(next)];
    }
    return node->majority;
}

std::vector<int> TreeModel::predict(const Eigen::MatrixXd& X) const {
    std::vector<int> out(static_cast<std::size_t>(X.rows()));
    std::vector<double> row(static_cast<std::size_t>(X.cols()));
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        for (Eigen::Index j = 0; j < X.cols(); ++j) row[static_cast<std::size_t>(j)] = X(i, j);
        out[static_cast<std::size_t>(i)] = predict(row);
    }
    return out;
}

void TreeModel::dump(std::ostream& out, std::span<const std::string> feature_names) const {
    const auto counts_str = [](const TreeNode& n) {
        std::string s = "[";
        for (std::size_t c = 0; c < n.counts.size(); ++c) s += (c ? "," : "") + std::to_string(n.counts[c]);
        return s + "]";
    };
    const auto visit = [&](const auto& self, int id) -> void {
        const auto& n = nodes_[static_cast<std::size_t>(id)];
        out << std::string(2 * n.depth, ' ');
        if (n.is_leaf()) {
            out << "leaf class=" << n.majority << " counts=" << counts_str(n) << '\n';
            return;
        }
        const auto f = static_cast<std::size_t>(n.feature);
        out << (f < feature_names.size() ? feature_names[f] : "f" + std::to_string(f)) << " <= " << n.threshold
            << " counts=" << counts_str(n) << '\n';
        self(self, n.left);
        self(self, n.right);
    };
    if (!nodes_.empty()) visit(visit, 0);
}

int predict(const TreeModel& t, std::span<const double> row) { return t.predict(row); }

}  // namespace botdetect
