#include "botdetect/synthetic.hpp"

#include <cmath>
#include <numbers>

#include "botdetect/random.hpp"

namespace botdetect {

namespace {

double standard_normal(Engine& rng) {
    const double u1 = 1.0 - unit_double(rng);  // (0, 1]
    const double u2 = unit_double(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace

Dataset make_gaussian_clusters(std::size_t n_attack, std::size_t n_normal, std::uint64_t seed) {
    Engine rng(seed);
    Dataset d;
    d.feature_names = {"x0", "x1"};
    d.features.resize(static_cast<Eigen::Index>(n_attack + n_normal), 2);
    d.labels.reserve(n_attack + n_normal);
    for (std::size_t i = 0; i < n_attack + n_normal; ++i) {
        const bool attack = i < n_attack;
        const double centre = attack ? 0.0 : 3.0;
        const double spread = attack ? 1.0 : 0.6;
        for (Eigen::Index j = 0; j < 2; ++j) {
            d.features(static_cast<Eigen::Index>(i), j) = centre + spread * standard_normal(rng);
        }
        d.labels.push_back(attack ? kAttack : kNormal);
    }
    return d;
}

}  // namespace botdetect
