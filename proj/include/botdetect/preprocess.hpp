#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "botdetect/ingest.hpp"

namespace botdetect {

/// Per-feature extrema of the training matrix.
struct Scaler {
    Eigen::VectorXd mins;
    Eigen::VectorXd maxs;
};

Scaler fit_minmax(const Dataset& train);

/// (x - min) / (max - min) per column; constant columns map to 0. Values
/// outside the fitted range are not clamped.
Eigen::MatrixXd apply_minmax(const Scaler& s, const Eigen::MatrixXd& m);
Dataset apply_minmax(const Scaler& s, const Dataset& d);

struct SmoteConfig {
    std::size_t k = 5;
    double target_ratio = 1.0;  // minority / majority after augmentation
    std::uint64_t seed = 0;

    void validate() const;
};

/// Audit record for one synthetic row: row = seed + lambda * (neighbor - seed).
struct SmoteProvenance {
    std::size_t synthetic_row;  // row index in the augmented dataset
    std::size_t seed_row;       // row index in the input dataset
    std::size_t neighbor_row;   // row index in the input dataset
    double lambda;
};

struct SmoteResult {
    Dataset data;  // input rows first, synthetic minority rows appended
    std::vector<SmoteProvenance> provenance;
    int minority_class = kNormal;
    std::size_t k_used = 0;
};

/// Oversamples the minority class until it holds
/// ceil(target_ratio * majority) rows. Synthetic row s uses minority point
/// s mod M_min as its seed and draws neighbour and lambda from its own
/// stream, so output does not depend on evaluation order.
SmoteResult smote(const Dataset& d, const SmoteConfig& cfg);

/// Indices (into `points`) of the k nearest rows of `points` to row `i`,
/// excluding i itself, ordered by (distance, index).
std::vector<std::size_t> nearest_neighbors(const Eigen::MatrixXd& points, std::size_t i, std::size_t k);

void write_provenance(std::ostream& out, std::span<const SmoteProvenance> records);

}  // namespace botdetect
