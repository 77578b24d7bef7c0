#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "botdetect/gp.hpp"
#include "botdetect/random.hpp"
#include "oracles.hpp"

using namespace botdetect;

namespace {

Eigen::MatrixXd random_points(Engine& rng, Eigen::Index t, Eigen::Index d) {
    Eigen::MatrixXd X(t, d);
    for (auto& v : X.reshaped()) v = unit_double(rng);
    return X;
}

Eigen::VectorXd random_vector(Engine& rng, Eigen::Index n) {
    Eigen::VectorXd y(n);
    for (auto& v : y) v = 2.0 * unit_double(rng) - 1.0;
    return y;
}

double standard_normal(Engine& rng) {
    const double u1 = 1.0 - unit_double(rng);
    const double u2 = unit_double(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace

TEST(Kernel, ZeroDistanceAndUnitLengthscale) {
    const KernelParams p{2.0, 0.7};
    const Eigen::Vector2d a(0.3, -1.0);
    EXPECT_DOUBLE_EQ(kernel_eval(p, a, a), 2.0);

    const KernelParams unit{1.0, 0.5};
    EXPECT_NEAR(kernel_eval(unit, Eigen::Vector2d(0, 0), Eigen::Vector2d(0.3, 0.4)), std::exp(-0.5), 1e-15);
    EXPECT_NEAR(std::exp(-0.5), 0.6065, 1e-4);
    EXPECT_THROW(kernel_eval(p, Eigen::Vector2d(0, 0), Eigen::Vector3d(0, 0, 0)), std::invalid_argument);
}

TEST(Kernel, MatchesScalarReimplementationAndIsSymmetric) {
    Engine rng(3);
    for (int i = 0; i < 100; ++i) {
        const Eigen::VectorXd a = random_vector(rng, 3), b = random_vector(rng, 3);
        const KernelParams p{0.1 + unit_double(rng), 0.1 + unit_double(rng)};
        EXPECT_NEAR(kernel_eval(p, a, b), oracle::rbf(p.signal_variance, p.lengthscale, a, b), 1e-15);
        EXPECT_EQ(kernel_eval(p, a, b), kernel_eval(p, b, a));
    }
}

TEST(GpFit, OnePointCase) {
    const auto m = gp_fit(Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Ones(1), {1.0, 1.0}, 0.0);
    EXPECT_DOUBLE_EQ(m.chol(0, 0), 1.0);
    EXPECT_DOUBLE_EQ(m.alpha(0), 1.0);
    EXPECT_EQ(m.jitter, 0.0);
}

TEST(GpFit, DuplicateRowsTakeJitterPath) {
    Eigen::MatrixXd X(2, 1);
    X << 0.5, 0.5;
    const auto m = gp_fit(X, Eigen::Vector2d(1.0, 1.0), {1.0, 1.0}, 0.0);
    EXPECT_GT(m.jitter, 0.0);
    EXPECT_LE(m.jitter, 1e-4);
    Eigen::MatrixXd K = kernel_matrix(m.kernel, X);
    K.diagonal().array() += m.jitter;
    EXPECT_LT((m.chol * m.chol.transpose() - K).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(GpFit, ReconstructsKernelMatrix) {
    Engine rng(8);
    for (int trial = 0; trial < 20; ++trial) {
        const auto X = random_points(rng, 5, 2);
        const auto m = gp_fit(X, random_vector(rng, 5), {1.3, 0.4}, 1e-6);
        const Eigen::MatrixXd K = oracle::gram(1.3, 0.4, X, 1e-6 + m.jitter);
        EXPECT_LT((m.chol * m.chol.transpose() - K).cwiseAbs().maxCoeff(), 1e-8);
        EXPECT_TRUE(m.chol.isLowerTriangular());
    }
}

TEST(GpFit, RejectsBadInput) {
    EXPECT_THROW(gp_fit(Eigen::MatrixXd(0, 1), Eigen::VectorXd(0), {}, 0.0), std::invalid_argument);
    EXPECT_THROW(gp_fit(Eigen::MatrixXd::Zero(2, 1), Eigen::VectorXd::Zero(3), {}, 0.0), std::invalid_argument);
    EXPECT_THROW(gp_fit(Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Zero(1), {0.0, 1.0}, 0.0), std::invalid_argument);
    EXPECT_THROW(gp_fit(Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Zero(1), {}, -1.0), std::invalid_argument);
}

TEST(GpPredict, InterpolatesTrainingPointsWithoutNoise) {
    Eigen::MatrixXd X(3, 1);
    X << 0.0, 0.4, 1.0;
    const Eigen::Vector3d y(0.5, -1.0, 2.0);
    const auto m = gp_fit(X, y, {1.0, 0.3}, 0.0);
    for (Eigen::Index i = 0; i < 3; ++i) {
        const auto p = gp_predict(m, X.row(i).transpose());
        EXPECT_NEAR(p.mean, y(i), 1e-8);
        EXPECT_LT(p.variance, 1e-8);
    }
}

TEST(GpPredict, RevertsToPriorFarFromData) {
    Eigen::MatrixXd X(2, 2);
    X << 0, 0, 0.1, 0.2;
    const auto m = gp_fit(X, Eigen::Vector2d(3.0, -2.0), {1.7, 0.25}, 1e-6);
    const auto p = gp_predict(m, Eigen::Vector2d(2.5, 2.5));  // > 10 lengthscales away
    EXPECT_NEAR(p.mean, 0.0, 1e-6);
    EXPECT_NEAR(p.variance, 1.7, 1e-6);
    EXPECT_THROW(gp_predict(m, Eigen::Vector3d(0, 0, 0)), std::invalid_argument);
}

TEST(GpPredict, MatchesDirectInverseOnThreePoints) {
    Engine rng(21);
    const auto X = random_points(rng, 3, 2);
    const auto y = random_vector(rng, 3);
    const auto m = gp_fit(X, y, {0.9, 0.6}, 1e-4);
    for (int i = 0; i < 20; ++i) {
        const Eigen::VectorXd q = random_vector(rng, 2);
        const auto p = gp_predict(m, q);
        const auto ref = oracle::gp_predict(0.9, 0.6, 1e-4, X, y, q);
        EXPECT_NEAR(p.mean, ref.mean, 1e-8);
        EXPECT_NEAR(p.variance, ref.variance, 1e-8);
    }
}

TEST(GpPredict, VarianceNonNegativeAndMonotoneInData) {
    Engine rng(4);
    for (int trial = 0; trial < 30; ++trial) {
        const auto X = random_points(rng, 6, 2);
        const auto y = random_vector(rng, 6);
        const KernelParams p{1.0, 0.2 + unit_double(rng)};
        const auto fewer = gp_fit(X.topRows(5), y.head(5), p, 1e-6);
        const auto more = gp_fit(X, y, p, 1e-6);
        for (int q = 0; q < 10; ++q) {
            const Eigen::VectorXd point = random_points(rng, 1, 2).transpose();
            const double v5 = gp_predict(fewer, point).variance;
            const double v6 = gp_predict(more, point).variance;
            EXPECT_GE(v5, 0.0);
            EXPECT_LE(v6, v5 + 1e-10);
        }
    }
}

TEST(LogMarginalLikelihood, OnePointZeroTarget) {
    const auto m = gp_fit(Eigen::MatrixXd::Zero(1, 1), Eigen::VectorXd::Zero(1), {1.0, 1.0}, 0.0);
    EXPECT_NEAR(log_marginal_likelihood(m), -0.5 * std::log(2.0 * std::numbers::pi), 1e-15);
    EXPECT_NEAR(log_marginal_likelihood(m), -0.9189, 1e-4);
}

TEST(LogMarginalLikelihood, ZeroTargetsLeaveOnlyComplexityTerms) {
    Engine rng(2);
    const auto X = random_points(rng, 4, 2);
    const auto m = gp_fit(X, Eigen::VectorXd::Zero(4), {1.0, 0.5}, 1e-6);
    const double expected = -m.chol.diagonal().array().log().sum() - 2.0 * std::log(2.0 * std::numbers::pi);
    EXPECT_DOUBLE_EQ(log_marginal_likelihood(m), expected);
}

TEST(LogMarginalLikelihood, MatchesDenseDeterminantOracle) {
    Engine rng(12);
    const auto X = random_points(rng, 4, 3);
    const auto y = random_vector(rng, 4);
    const auto m = gp_fit(X, y, {1.2, 0.8}, 1e-3);
    EXPECT_NEAR(log_marginal_likelihood(m), oracle::log_evidence(1.2, 0.8, 1e-3, X, y), 1e-8);
}

TEST(TuneKernel, SingletonAndTieRule) {
    Engine rng(1);
    const auto X = random_points(rng, 5, 1);
    const auto y = random_vector(rng, 5);
    const std::vector<KernelParams> one = {{0.5, 0.3}};
    EXPECT_EQ(tune_kernel(X, y, one, 1e-6), one.front());

    const std::vector<KernelParams> dup = {{0.5, 0.3, KernelKind::rbf}, {0.5, 0.3, KernelKind::rbf}, {4.0, 9.0}};
    const auto pick = tune_kernel(X, y, dup, 1e-6);
    EXPECT_EQ(pick, dup.front());
    EXPECT_THROW(tune_kernel(X, y, std::vector<KernelParams>{}, 1e-6), std::invalid_argument);
}

TEST(TuneKernel, RecoversGeneratingLengthscale) {
    // 40 points on [0, 4] with y drawn from a unit-variance GP, lengthscale 0.5.
    Engine rng(2024);
    Eigen::MatrixXd X(40, 1);
    for (Eigen::Index i = 0; i < 40; ++i) X(i, 0) = 4.0 * unit_double(rng);
    const Eigen::MatrixXd K = oracle::gram(1.0, 0.5, X, 1e-8);
    const Eigen::MatrixXd L = K.llt().matrixL();
    Eigen::VectorXd z(40);
    for (auto& v : z) v = standard_normal(rng);
    const Eigen::VectorXd y = L * z;

    const std::vector<KernelParams> grid = {{1.0, 0.1}, {1.0, 0.5}, {1.0, 2.5}};
    const double e01 = oracle::log_evidence(1.0, 0.1, 1e-6, X, y);
    const double e05 = oracle::log_evidence(1.0, 0.5, 1e-6, X, y);
    const double e25 = oracle::log_evidence(1.0, 2.5, 1e-6, X, y);
    ASSERT_GT(e05, e01);
    ASSERT_GT(e05, e25);
    EXPECT_EQ(tune_kernel(X, y, grid, 1e-6), grid[1]);
}

TEST(TuneKernel, DefaultGridShape) {
    const auto grid = default_kernel_grid();
    ASSERT_EQ(grid.size(), 45u);
    EXPECT_EQ(grid.front().lengthscale, 1.0 / 16.0);
    EXPECT_EQ(grid.front().signal_variance, 0.25);
    EXPECT_EQ(grid.back().lengthscale, 16.0);
    EXPECT_EQ(grid.back().signal_variance, 4.0);
}
