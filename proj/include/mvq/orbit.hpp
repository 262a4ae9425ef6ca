#pragma once

#include <cstdint>
#include <vector>

#include "mvq/point_measure.hpp"

namespace mvq {

// One trajectory of the planar recurrence
//   x' = x + r*y*(1-y) mod 1,   y' = y + r*x'*(1-x') mod 1
// started uniformly at random in [0,1]^2. The trajectory shape depends
// strongly on r, which is what the classification benchmark exploits.
struct OrbitSpec {
    double r = 3.5;
    std::size_t n_iterations = 1000;
    std::uint64_t seed = 0;
};

struct OrbitDatasetSpec {
    std::vector<double> parameters{2.5, 3.5, 4.0, 4.1, 4.3};
    std::size_t orbits_per_class = 1000;
    std::size_t n_iterations = 1000;
    std::uint64_t master_seed = 0;
};

// All n_iterations points including the initial one, unit weights,
// coordinates in [0,1).
PointMeasure generate_orbit(const OrbitSpec& spec);

// orbit_seeds[i] identifies orbit i independently of its position: it is
// derived from (master_seed, class, index within class), so regeneration
// and content-keyed splits are stable under reordering.
struct OrbitDataset {
    MeasureCollection collection;  // labeled by parameter index
    std::vector<std::uint64_t> orbit_seeds;
};

OrbitDataset generate_dataset(const OrbitDatasetSpec& spec);

// Seed of one orbit given its class and index; what generate_dataset uses.
std::uint64_t orbit_seed(const OrbitDatasetSpec& spec, std::size_t class_index,
                         std::size_t orbit_index);

}  // namespace mvq
