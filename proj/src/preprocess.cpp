#include "botdetect/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <stdexcept>

#include "botdetect/random.hpp"

namespace botdetect {

Scaler fit_minmax(const Dataset& train) {
    if (train.rows() == 0) throw std::invalid_argument("fit_minmax: empty training set");
    return Scaler{train.features.colwise().minCoeff().transpose(),
                  train.features.colwise().maxCoeff().transpose()};
}

Eigen::MatrixXd apply_minmax(const Scaler& s, const Eigen::MatrixXd& m) {
    if (m.cols() != s.mins.size()) {
        throw std::invalid_argument("apply_minmax: matrix has " + std::to_string(m.cols()) +
                                    " columns, scaler expects " + std::to_string(s.mins.size()));
    }
    Eigen::MatrixXd out(m.rows(), m.cols());
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        const double range = s.maxs(j) - s.mins(j);
        if (range > 0.0) {
            out.col(j) = (m.col(j).array() - s.mins(j)) / range;
        } else {
            out.col(j).setZero();
        }
    }
    return out;
}

Dataset apply_minmax(const Scaler& s, const Dataset& d) {
    Dataset out = d;
    out.features = apply_minmax(s, d.features);
    return out;
}

void SmoteConfig::validate() const {
    if (k < 1) throw std::invalid_argument("smote: k must be at least 1");
    if (!(target_ratio > 0.0 && target_ratio <= 1.0)) {
        throw std::invalid_argument("smote: target_ratio must lie in (0, 1]");
    }
}

std::vector<std::size_t> nearest_neighbors(const Eigen::MatrixXd& points, std::size_t i, std::size_t k) {
    const auto n = static_cast<std::size_t>(points.rows());
    std::vector<std::pair<double, std::size_t>> dist;
    dist.reserve(n);
    for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        dist.emplace_back((points.row(static_cast<Eigen::Index>(j)) - points.row(static_cast<Eigen::Index>(i))).squaredNorm(), j);
    }
    k = std::min(k, dist.size());
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
    std::vector<std::size_t> out(k);
    for (std::size_t r = 0; r < k; ++r) out[r] = dist[r].second;
    return out;
}

SmoteResult smote(const Dataset& d, const SmoteConfig& cfg) {
    cfg.validate();
    const auto counts = class_counts(d);
    const std::size_t n_normal = counts.contains(kNormal) ? counts.at(kNormal) : 0;
    const std::size_t n_attack = counts.contains(kAttack) ? counts.at(kAttack) : 0;
    const int minority = n_normal <= n_attack ? kNormal : kAttack;
    const std::size_t n_min = std::min(n_normal, n_attack);
    const std::size_t n_maj = std::max(n_normal, n_attack);
    if (n_min == 0) throw std::invalid_argument("smote: minority class is empty");

    SmoteResult result;
    result.minority_class = minority;
    const auto target = static_cast<std::size_t>(std::ceil(cfg.target_ratio * static_cast<double>(n_maj)));
    if (n_min >= target) {
        result.data = d;
        return result;
    }
    const std::size_t n_synth = target - n_min;

    std::vector<std::size_t> members;
    members.reserve(n_min);
    for (std::size_t i = 0; i < d.rows(); ++i) {
        if (d.labels[i] == minority) members.push_back(i);
    }
    Eigen::MatrixXd pts(static_cast<Eigen::Index>(n_min), d.features.cols());
    for (std::size_t r = 0; r < n_min; ++r) {
        pts.row(static_cast<Eigen::Index>(r)) = d.features.row(static_cast<Eigen::Index>(members[r]));
    }

    result.k_used = std::min(cfg.k, n_min - 1);
    if (result.k_used == 0) {
        std::clog << "warning: smote: single minority instance, emitting duplicates\n";
    }
    const std::size_t n_seeds = std::min(n_min, n_synth);
    std::vector<std::vector<std::size_t>> neighbors(n_seeds);
    for (std::size_t r = 0; r < n_seeds; ++r) neighbors[r] = nearest_neighbors(pts, r, result.k_used);

    result.data.feature_names = d.feature_names;
    result.data.features.resize(static_cast<Eigen::Index>(d.rows() + n_synth), d.features.cols());
    result.data.features.topRows(static_cast<Eigen::Index>(d.rows())) = d.features;
    result.data.labels = d.labels;
    result.data.labels.resize(d.rows() + n_synth, minority);
    result.provenance.reserve(n_synth);

    for (std::size_t s = 0; s < n_synth; ++s) {
        Engine rng = stream_engine(cfg.seed, s);
        const std::size_t seed_local = s % n_min;
        std::size_t nb_local = seed_local;
        double lambda = 0.0;
        if (result.k_used > 0) {
            nb_local = neighbors[seed_local][uniform_index(rng, result.k_used)];
            lambda = unit_double(rng);
        }
        const auto out_row = static_cast<Eigen::Index>(d.rows() + s);
        const auto x = pts.row(static_cast<Eigen::Index>(seed_local));
        const auto nb = pts.row(static_cast<Eigen::Index>(nb_local));
        result.data.features.row(out_row) = x + lambda * (nb - x);
        result.provenance.push_back({d.rows() + s, members[seed_local], members[nb_local], lambda});
    }
    return result;
}

void write_provenance(std::ostream& out, std::span<const SmoteProvenance> records) {
    out << "synthetic_row,seed_row,neighbor_row,lambda\n";
    const auto old = out.precision(17);
    for (const auto& r : records) {
        out << r.synthetic_row << ',' << r.seed_row << ',' << r.neighbor_row << ',' << r.lambda << '\n';
    }
    out.precision(old);
}

}  // namespace botdetect
