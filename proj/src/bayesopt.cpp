#include "botdetect/bayesopt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <stdexcept>

#include "botdetect/random.hpp"

namespace botdetect {

namespace {

constexpr std::size_t kFreshCandidateAttempts = 64;

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }
double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

Eigen::VectorXd random_unit_point(Engine& rng, std::size_t d) {
    Eigen::VectorXd u(static_cast<Eigen::Index>(d));
    for (auto& v : u) v = unit_double(rng);
    return u;
}

}  // namespace

void SearchSpace::validate() const {
    if (dims.empty()) throw std::invalid_argument("search space has no dimensions");
    for (const auto& dim : dims) {
        if (!(dim.lower <= dim.upper)) {
            throw std::invalid_argument("dimension '" + dim.name + "': lower bound exceeds upper bound");
        }
        if (dim.kind == DimKind::integer &&
            (std::floor(dim.lower) != dim.lower || std::floor(dim.upper) != dim.upper)) {
            throw std::invalid_argument("dimension '" + dim.name + "': integer bounds must be integral");
        }
    }
}

bool SearchSpace::contains(const Config& c) const {
    if (c.size() != dims.size()) return false;
    for (const auto& dim : dims) {
        const auto it = c.find(dim.name);
        if (it == c.end()) return false;
        const double v = it->second;
        if (v < dim.lower || v > dim.upper) return false;
        if (dim.kind == DimKind::integer && std::floor(v) != v) return false;
    }
    return true;
}

Eigen::VectorXd SearchSpace::to_unit(const Config& c) const {
    Eigen::VectorXd u(static_cast<Eigen::Index>(dims.size()));
    for (std::size_t j = 0; j < dims.size(); ++j) {
        const auto& dim = dims[j];
        const double width = dim.upper - dim.lower;
        u(static_cast<Eigen::Index>(j)) = width > 0.0 ? (c.at(dim.name) - dim.lower) / width : 0.0;
    }
    return u;
}

Config SearchSpace::from_unit(const Eigen::VectorXd& u) const {
    Config c;
    for (std::size_t j = 0; j < dims.size(); ++j) {
        const auto& dim = dims[j];
        const double t = std::clamp(u(static_cast<Eigen::Index>(j)), 0.0, 1.0);
        double v = dim.lower + t * (dim.upper - dim.lower);
        if (dim.kind == DimKind::integer) v = std::round(v);
        c[dim.name] = std::clamp(v, dim.lower, dim.upper);
    }
    return c;
}

std::vector<double> SearchSpace::key(const Config& c) const {
    std::vector<double> k;
    k.reserve(dims.size());
    for (const auto& dim : dims) k.push_back(c.at(dim.name));
    return k;
}

std::vector<double> Trace::running_best() const {
    std::vector<double> out;
    out.reserve(trials.size());
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& t : trials) {
        best = std::max(best, t.objective);
        out.push_back(best);
    }
    return out;
}

double expected_improvement(double mean, double std_dev, double best_so_far, double xi) {
    if (!(std_dev > 0.0)) return 0.0;
    const double gain = mean - best_so_far - xi;
    const double z = gain / std_dev;
    return std::max(gain * normal_cdf(z) + std_dev * normal_pdf(z), 0.0);
}

Proposal propose(const GPModel& m, const SearchSpace& space, double best_so_far, std::uint64_t seed,
                 std::size_t n_candidates, double xi) {
    if (n_candidates == 0) throw std::invalid_argument("propose: need at least one candidate");
    Engine rng(seed);
    Proposal best;
    best.ei = -1.0;
    for (std::size_t i = 0; i < n_candidates; ++i) {
        Eigen::VectorXd u = random_unit_point(rng, space.size());
        const auto pred = gp_predict(m, u);
        const double ei = expected_improvement(pred.mean, std::sqrt(pred.variance), best_so_far, xi);
        if (ei > best.ei) {
            best.ei = ei;
            best.unit_point = std::move(u);
        }
    }
    best.config = space.from_unit(best.unit_point);
    return best;
}

Config propose_next(const GPModel& m, const SearchSpace& space, double best_so_far, std::uint64_t seed,
                    std::size_t n_candidates) {
    return propose(m, space, best_so_far, seed, n_candidates).config;
}

Eigen::MatrixXd latin_hypercube(std::size_t n, std::size_t d, std::uint64_t seed) {
    Engine rng(seed);
    Eigen::MatrixXd pts(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    std::vector<std::size_t> strata(n);
    for (std::size_t j = 0; j < d; ++j) {
        for (std::size_t i = 0; i < n; ++i) strata[i] = i;
        shuffle(std::span(strata), rng);
        for (std::size_t i = 0; i < n; ++i) {
            pts(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                (static_cast<double>(strata[i]) + unit_double(rng)) / static_cast<double>(n);
        }
    }
    return pts;
}

Trace optimize(const Objective& objective, const SearchSpace& space, const BoOptions& options) {
    space.validate();
    const std::size_t d = space.size();
    const std::size_t n_init = options.n_init > 0 ? options.n_init : std::max<std::size_t>(5, 2 * d);
    if (options.budget < n_init) throw std::invalid_argument("optimize: budget smaller than n_init");

    Trace trace;
    std::map<std::vector<double>, double> cache;
    std::vector<Eigen::VectorXd> xs;  // GP inputs: unit coordinates of evaluated configs
    std::vector<double> ys;
    Engine fresh = stream_engine(options.seed, 0);

    auto record = [&](Config config) {
        Trial trial;
        trial.index = trace.trials.size();
        auto hit = cache.find(space.key(config));
        for (std::size_t a = 0; hit != cache.end() && a < kFreshCandidateAttempts; ++a) {
            Config alt = space.from_unit(random_unit_point(fresh, d));
            if (!cache.contains(space.key(alt))) {
                config = std::move(alt);
                hit = cache.end();
            }
        }
        if (hit != cache.end()) {
            trial.objective = hit->second;
            trial.cached = true;
        } else {
            try {
                trial.objective = objective(config);
                if (!std::isfinite(trial.objective)) throw std::domain_error("non-finite objective");
            } catch (const std::exception&) {
                const double worst = trace.trials.empty()
                                         ? 0.0
                                         : std::min_element(trace.trials.begin(), trace.trials.end(),
                                                            [](const Trial& a, const Trial& b) {
                                                                return a.objective < b.objective;
                                                            })->objective;
                trial.objective = worst - 1.0;
                trial.failed = true;
            }
            cache.emplace(space.key(config), trial.objective);
            xs.push_back(space.to_unit(config));
            ys.push_back(trial.objective);
        }
        trial.config = std::move(config);
        if (trace.trials.empty() || trial.objective > trace.best().objective) trace.best_index = trial.index;
        trace.trials.push_back(std::move(trial));
    };

    const Eigen::MatrixXd design = latin_hypercube(n_init, d, splitmix64(options.seed));
    for (std::size_t i = 0; i < n_init; ++i) record(space.from_unit(design.row(static_cast<Eigen::Index>(i)).transpose()));

    const auto grid = default_kernel_grid();
    std::optional<KernelParams> kernel;
    std::size_t tuned_at = 0;
    for (std::size_t it = n_init; it < options.budget; ++it) {
        const auto t = static_cast<Eigen::Index>(xs.size());
        Eigen::MatrixXd X(t, static_cast<Eigen::Index>(d));
        Eigen::VectorXd y(t);
        for (Eigen::Index i = 0; i < t; ++i) {
            X.row(i) = xs[static_cast<std::size_t>(i)].transpose();
            y(i) = ys[static_cast<std::size_t>(i)];
        }
        const double mu = y.mean();
        const double sd = std::sqrt((y.array() - mu).square().sum() / static_cast<double>(t));
        const Eigen::VectorXd ystd = (y.array() - mu) / (sd > 0.0 ? sd : 1.0);

        if (!kernel || xs.size() >= tuned_at + options.retune_every) {
            kernel = tune_kernel(X, ystd, grid, options.noise);
            tuned_at = xs.size();
        }
        const GPModel model = gp_fit(X, ystd, *kernel, options.noise);
        const auto step_seed = splitmix64(options.seed ^ splitmix64(0xB0 + it));
        record(propose(model, space, ystd.maxCoeff(), step_seed, options.n_candidates, options.xi).config);
    }
    return trace;
}

Trace optimize(const Objective& objective, const SearchSpace& space, std::size_t budget, std::size_t n_init,
               std::uint64_t seed) {
    BoOptions options;
    options.budget = budget;
    options.n_init = n_init;
    options.seed = seed;
    return optimize(objective, space, options);
}

void write_trace(std::ostream& out, const SearchSpace& space, const Trace& trace) {
    out << "index";
    for (const auto& dim : space.dims) out << ',' << dim.name;
    out << ",objective,running_best,failed\n";
    const auto old = out.precision(17);
    const auto best = trace.running_best();
    for (std::size_t i = 0; i < trace.trials.size(); ++i) {
        const auto& t = trace.trials[i];
        out << t.index;
        for (const auto& dim : space.dims) out << ',' << t.config.at(dim.name);
        out << ',' << t.objective << ',' << best[i] << ',' << (t.failed ? 1 : 0) << '\n';
    }
    out.precision(old);
}

}  // namespace botdetect
