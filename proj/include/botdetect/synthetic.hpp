#pragma once

#include <cstddef>
#include <cstdint>

#include "botdetect/ingest.hpp"

namespace botdetect {

/// Two isotropic Gaussian clusters in 2-D: attack rows around (0, 0) with
/// unit spread, normal rows around (3, 3) with spread 0.6. Attack rows come
/// first. Sampling uses Box-Muller over the portable generator, so a seed
/// gives the same data on every platform.
Dataset make_gaussian_clusters(std::size_t n_attack, std::size_t n_normal, std::uint64_t seed);

}  // namespace botdetect
