#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "botdetect/gp.hpp"

namespace botdetect {

enum class DimKind { integer, continuous };

struct Dimension {
    std::string name;
    DimKind kind = DimKind::continuous;
    double lower = 0.0;
    double upper = 1.0;
};

using Config = std::map<std::string, double>;

/// Box-bounded hyperparameter space. The optimizer works in the unit cube;
/// integer dimensions are rounded when mapped back to native values.
struct SearchSpace {
    std::vector<Dimension> dims;

    std::size_t size() const { return dims.size(); }
    void validate() const;
    bool contains(const Config& c) const;

    Eigen::VectorXd to_unit(const Config& c) const;
    Config from_unit(const Eigen::VectorXd& u) const;
    /// Native values in dimension order; used as the duplicate-detection key.
    std::vector<double> key(const Config& c) const;
};

struct Trial {
    Config config;
    double objective = 0.0;
    std::size_t index = 0;
    bool failed = false;  // objective threw; value is a penalty
    bool cached = false;  // value reused from an earlier identical config
};

struct Trace {
    std::vector<Trial> trials;
    std::size_t best_index = 0;

    const Trial& best() const { return trials.at(best_index); }
    /// max objective over trials[0..i] for every i.
    std::vector<double> running_best() const;
};

/// EI for maximization: (mu - best - xi) Phi(z) + sd phi(z). Zero when sd = 0.
double expected_improvement(double mean, double std_dev, double best_so_far, double xi);

struct Proposal {
    Config config;
    Eigen::VectorXd unit_point;  // winning candidate before rounding
    double ei = 0.0;
};

/// Scores n_candidates seeded uniform points of the unit cube by EI and
/// keeps the first maximizer.
Proposal propose(const GPModel& m, const SearchSpace& space, double best_so_far, std::uint64_t seed,
                 std::size_t n_candidates, double xi = 0.01);

Config propose_next(const GPModel& m, const SearchSpace& space, double best_so_far, std::uint64_t seed,
                    std::size_t n_candidates);

/// n stratified points per dimension, each row one point in [0, 1)^d.
Eigen::MatrixXd latin_hypercube(std::size_t n, std::size_t d, std::uint64_t seed);

struct BoOptions {
    std::size_t budget = 30;
    std::size_t n_init = 0;  // 0 selects max(5, 2 d)
    std::uint64_t seed = 0;
    std::size_t n_candidates = 1000;
    double xi = 0.01;
    double noise = 1e-6;
    std::size_t retune_every = 5;
};

using Objective = std::function<double(const Config&)>;

Trace optimize(const Objective& objective, const SearchSpace& space, const BoOptions& options);
Trace optimize(const Objective& objective, const SearchSpace& space, std::size_t budget,
               std::size_t n_init, std::uint64_t seed);

/// CSV: index, one column per dimension, objective, running_best, failed.
void write_trace(std::ostream& out, const SearchSpace& space, const Trace& trace);

}  // namespace botdetect
