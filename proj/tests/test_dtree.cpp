#include <gtest/gtest.h>

#include <numeric>
#include <sstream>

#include "botdetect/dtree.hpp"
#include "botdetect/random.hpp"
#include "botdetect/synthetic.hpp"
#include "oracles.hpp"

using namespace botdetect;

namespace {

Dataset make(const Eigen::MatrixXd& x, std::vector<int> y) {
    Dataset d;
    d.features = x;
    d.labels = std::move(y);
    for (Eigen::Index j = 0; j < x.cols(); ++j) d.feature_names.push_back("f" + std::to_string(j));
    return d;
}

// Values on a coarse grid so ties between rows are common.
Dataset random_dataset(Engine& rng, std::size_t m, std::size_t n) {
    Eigen::MatrixXd x(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
    std::vector<int> y(m);
    for (std::size_t i = 0; i < m; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double v = static_cast<double>(uniform_index(rng, 20)) / 4.0;
            x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
            s += v;
        }
        y[i] = (s / static_cast<double>(n) + unit_double(rng) > 3.0) ? 1 : 0;
    }
    return make(x, y);
}

std::vector<std::size_t> iota(std::size_t n) {
    std::vector<std::size_t> v(n);
    std::iota(v.begin(), v.end(), std::size_t{0});
    return v;
}

void expect_same_tree(const TreeModel& t, const std::vector<oracle::RefNode>& ref) {
    ASSERT_EQ(t.nodes().size(), ref.size());
    for (std::size_t i = 0; i < ref.size(); ++i) {
        const auto& a = t.nodes()[i];
        EXPECT_EQ(a.feature, ref[i].feature) << "node " << i;
        EXPECT_EQ(a.threshold, ref[i].threshold) << "node " << i;
        EXPECT_EQ(a.counts, ref[i].counts) << "node " << i;
        EXPECT_EQ(a.depth, ref[i].depth) << "node " << i;
    }
}

}  // namespace

TEST(Gini, WorkedValues) {
    EXPECT_DOUBLE_EQ(gini(std::vector<std::size_t>{5, 5}), 0.5);
    EXPECT_DOUBLE_EQ(gini(std::vector<std::size_t>{10, 0}), 0.0);
    EXPECT_NEAR(gini(std::vector<std::size_t>{1, 2, 3}), 11.0 / 18.0, 1e-15);
    EXPECT_THROW(gini(std::vector<std::size_t>{0, 0}), std::invalid_argument);
}

TEST(BestSplit, OneDimensionalMidpoint) {
    Eigen::MatrixXd x(4, 1);
    x << 1, 2, 0, 3;
    const std::vector<int> y = {0, 1, 0, 1};
    const auto rows = iota(4);
    const auto s = best_split(x, y, rows, {}, std::vector<std::size_t>{0});
    ASSERT_TRUE(s);
    EXPECT_EQ(s->feature, 0u);
    EXPECT_EQ(s->threshold, 1.5);
    EXPECT_DOUBLE_EQ(s->decrease, 0.5);
}

TEST(BestSplit, PureOrConstantHasNoSplit) {
    Eigen::MatrixXd x(3, 1);
    x << 1, 2, 3;
    EXPECT_FALSE(best_split(x, std::vector<int>{1, 1, 1}, iota(3), {}, std::vector<std::size_t>{0}));
    Eigen::MatrixXd c(3, 1);
    c << 4, 4, 4;
    EXPECT_FALSE(best_split(c, std::vector<int>{0, 1, 1}, iota(3), {}, std::vector<std::size_t>{0}));
}

TEST(BestSplit, TieGoesToLowerFeatureThenThreshold) {
    // Both features separate perfectly; feature 0 wins.
    Eigen::MatrixXd x(4, 2);
    x << 0, 10, 0, 10, 1, 20, 1, 20;
    const auto s = best_split(x, std::vector<int>{0, 0, 1, 1}, iota(4), {}, std::vector<std::size_t>{0, 1});
    ASSERT_TRUE(s);
    EXPECT_EQ(s->feature, 0u);
    EXPECT_EQ(s->threshold, 0.5);
}

TEST(BestSplit, MatchesBruteForceOnRandomRows) {
    Engine rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        const auto d = random_dataset(rng, 20, 3);
        HyperParams hp;
        hp.min_samples_leaf = 1 + uniform_index(rng, 4);
        const auto features = iota(3);
        const auto got = best_split(d.features, d.labels, iota(20), hp, features);
        const auto ref = oracle::brute_force_split(d.features, d.labels, iota(20), features, hp.min_samples_leaf,
                                                   kMinImpurityDecrease);
        ASSERT_EQ(got.has_value(), ref.has_value()) << "trial " << trial;
        if (!got) continue;
        EXPECT_EQ(got->feature, ref->feature) << "trial " << trial;
        EXPECT_EQ(got->threshold, ref->threshold) << "trial " << trial;
        EXPECT_NEAR(got->decrease, ref->decrease, 1e-15) << "trial " << trial;
    }
}

TEST(FitTree, SeparableStump) {
    Eigen::MatrixXd x(6, 2);
    x << 0, 5, 1, 3, 2, 4, 7, 5, 8, 3, 9, 4;
    const auto t = fit_tree(make(x, {0, 0, 0, 1, 1, 1}), {}, 0);
    ASSERT_EQ(t.nodes().size(), 3u);
    EXPECT_EQ(t.nodes()[0].feature, 0);
    EXPECT_EQ(t.nodes()[0].threshold, 4.5);
    EXPECT_EQ(t.depth(), 1u);
    EXPECT_EQ(t.leaf_count(), 2u);
}

TEST(FitTree, DepthLimitGivesStump) {
    Engine rng(4);
    const auto d = random_dataset(rng, 100, 3);
    HyperParams hp;
    hp.max_depth = 1;
    const auto t = fit_tree(d, hp, 0);
    EXPECT_LE(t.nodes().size(), 3u);
    EXPECT_LE(t.depth(), 1u);
}

TEST(FitTree, MatchesReferenceTreeNodeForNode) {
    const auto d = make_gaussian_clusters(150, 50, 3);
    oracle::RefTreeParams p{50, 2, 1, kMinImpurityDecrease};
    std::vector<oracle::RefNode> ref;
    oracle::reference_tree(d.features, d.labels, iota(d.rows()), p, 0, ref);
    expect_same_tree(fit_tree(d, {}, 17), ref);

    Engine rng(12);
    for (int trial = 0; trial < 10; ++trial) {
        const auto r = random_dataset(rng, 120, 4);
        HyperParams hp;
        hp.max_depth = 2 + uniform_index(rng, 6);
        hp.min_samples_split = 2 + uniform_index(rng, 8);
        hp.min_samples_leaf = 1 + uniform_index(rng, 4);
        std::vector<oracle::RefNode> rt;
        oracle::reference_tree(r.features, r.labels, iota(r.rows()),
                               {hp.max_depth, hp.min_samples_split, hp.min_samples_leaf, kMinImpurityDecrease}, 0, rt);
        expect_same_tree(fit_tree(r, hp, 0), rt);
    }
}

TEST(FitTree, MemorizesDistinctRows) {
    Engine rng(8);
    Eigen::MatrixXd x(80, 3);
    for (auto& v : x.reshaped()) v = unit_double(rng);
    std::vector<int> y(80);
    for (auto& v : y) v = static_cast<int>(uniform_index(rng, 2));
    const auto d = make(x, y);
    const auto t = fit_tree(d, {}, 1);
    EXPECT_EQ(t.predict(d.features), d.labels);
}

TEST(FitTree, FeatureSubsetIsSeededAndBounded) {
    Engine rng(6);
    const auto d = random_dataset(rng, 150, 5);
    HyperParams hp;
    hp.max_features_fraction = 0.4;
    const auto a = fit_tree(d, hp, 10);
    const auto b = fit_tree(d, hp, 10);
    ASSERT_EQ(a.nodes().size(), b.nodes().size());
    for (std::size_t i = 0; i < a.nodes().size(); ++i) {
        EXPECT_EQ(a.nodes()[i].feature, b.nodes()[i].feature);
        EXPECT_EQ(a.nodes()[i].threshold, b.nodes()[i].threshold);
    }
}

TEST(FitTree, ThreadsDoNotChangeTheTree) {
    // 5000 rows x 5 features crosses the parallel threshold at the root.
    Engine rng(21);
    const auto d = random_dataset(rng, 5000, 5);
    HyperParams hp;
    hp.max_depth = 8;
    hp.max_features_fraction = 0.8;
    const auto serial = fit_tree(d, hp, 3, 1);
    const auto parallel = fit_tree(d, hp, 3, 4);
    ASSERT_EQ(serial.nodes().size(), parallel.nodes().size());
    for (std::size_t i = 0; i < serial.nodes().size(); ++i) {
        EXPECT_EQ(serial.nodes()[i].feature, parallel.nodes()[i].feature);
        EXPECT_EQ(serial.nodes()[i].threshold, parallel.nodes()[i].threshold);
        EXPECT_EQ(serial.nodes()[i].counts, parallel.nodes()[i].counts);
    }
}

TEST(FitTree, StructuralInvariants) {
    Engine rng(30);
    for (int trial = 0; trial < 20; ++trial) {
        const auto d = random_dataset(rng, 60 + uniform_index(rng, 100), 1 + uniform_index(rng, 4));
        HyperParams hp;
        hp.max_depth = 1 + uniform_index(rng, 8);
        hp.min_samples_leaf = 1 + uniform_index(rng, 5);
        const auto t = fit_tree(d, hp, static_cast<std::uint64_t>(trial));
        EXPECT_LE(t.depth(), hp.max_depth);
        for (const auto& n : t.nodes()) {
            const auto total = std::accumulate(n.counts.begin(), n.counts.end(), std::size_t{0});
            EXPECT_GE(total, hp.min_samples_leaf);
            if (n.is_leaf()) continue;
            const auto& l = t.nodes()[static_cast<std::size_t>(n.left)];
            const auto& r = t.nodes()[static_cast<std::size_t>(n.right)];
            for (std::size_t c = 0; c < n.counts.size(); ++c) EXPECT_EQ(l.counts[c] + r.counts[c], n.counts[c]);
        }
    }
}

TEST(Predict, BoundaryGoesLeftAndMajorityTieIsClassZero) {
    Eigen::MatrixXd x(4, 1);
    x << 0, 1, 2, 3;
    const auto t = fit_tree(make(x, {0, 0, 1, 1}), {}, 0);
    EXPECT_EQ(predict(t, std::vector<double>{1.5}), 0);
    EXPECT_EQ(predict(t, std::vector<double>{1.5000001}), 1);
    EXPECT_THROW(predict(t, std::vector<double>{1.0, 2.0}), std::invalid_argument);

    Eigen::MatrixXd same(2, 1);
    same << 1, 1;
    const auto tie = fit_tree(make(same, {1, 0}), {}, 0);
    EXPECT_EQ(tie.nodes().size(), 1u);
    EXPECT_EQ(predict(tie, std::vector<double>{1.0}), 0);
}

TEST(HyperParams, Validation) {
    EXPECT_NO_THROW(HyperParams{}.validate());
    EXPECT_THROW((HyperParams{0, 2, 1, 1.0}.validate()), std::invalid_argument);
    EXPECT_THROW((HyperParams{5, 1, 1, 1.0}.validate()), std::invalid_argument);
    EXPECT_THROW((HyperParams{5, 2, 0, 1.0}.validate()), std::invalid_argument);
    EXPECT_THROW((HyperParams{5, 2, 1, 0.0}.validate()), std::invalid_argument);
    EXPECT_THROW((HyperParams{5, 2, 1, 1.5}.validate()), std::invalid_argument);
}

TEST(Dump, IndentsByDepth) {
    Eigen::MatrixXd x(4, 1);
    x << 0, 1, 2, 3;
    const auto t = fit_tree(make(x, {0, 0, 1, 1}), {}, 0);
    std::ostringstream out;
    const std::vector<std::string> names = {"bytes"};
    t.dump(out, names);
    EXPECT_EQ(out.str(), "bytes <= 1.5 counts=[2,2]\n  leaf class=0 counts=[2,0]\n  leaf class=1 counts=[0,2]\n");
}
