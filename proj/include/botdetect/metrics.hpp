#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>

#include <Eigen/Core>

#include "botdetect/ingest.hpp"

namespace botdetect {

struct ConfusionMatrix {
    std::size_t tp = 0;
    std::size_t tn = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    int positive_class = kAttack;

    std::size_t total() const { return tp + tn + fp + fn; }
    /// Same counts read with the other class as positive.
    ConfusionMatrix swapped() const;
};

/// Accuracy, precision, recall and F-score for one positive-class convention.
struct ClassMetrics {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f_score = 0.0;
};

struct MetricsReport {
    ConfusionMatrix cm;
    double accuracy = 0.0;
    double precision = 0.0;  // with cm.positive_class as positive
    double recall = 0.0;
    double f_score = 0.0;
    ClassMetrics negative;   // with the other class as positive
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    double macro_f_score = 0.0;
};

ConfusionMatrix confusion(std::span<const int> y_true, std::span<const int> y_pred, int positive_class = kAttack);

/// Zero denominators yield 0 rather than NaN.
ClassMetrics class_metrics(const ConfusionMatrix& cm);
MetricsReport compute_metrics(const ConfusionMatrix& cm);

/// Writes `prefix.key = value` lines.
void write_metrics(std::ostream& out, const std::string& prefix, const MetricsReport& m);

struct Pca2 {
    Eigen::MatrixXd projections;  // M x 2
    Eigen::MatrixXd components;   // 2 x N, orthonormal rows
    std::array<double, 2> explained_variance{};
};

/// Projection of the centred rows onto the top two eigenvectors of the
/// sample covariance. Each component's largest-magnitude entry is positive.
Pca2 pca2(const Eigen::MatrixXd& m);

/// CSV with columns pc1, pc2, label.
void write_pca(std::ostream& out, const Pca2& p, std::span<const int> labels);

}  // namespace botdetect
