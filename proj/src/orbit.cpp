#include "mvq/orbit.hpp"

#include <cmath>
#include <stdexcept>

#include "mvq/rng.hpp"

namespace mvq {

namespace {

constexpr std::uint64_t kOrbitStream = 0x44;

// x - floor(x), clamped so the result stays in [0,1) even when rounding
// pushes the subtraction to exactly 1.
double mod1(double v) {
    double r = v - std::floor(v);
    return r < 1.0 ? r : 0.0;
}

}  // namespace

PointMeasure generate_orbit(const OrbitSpec& spec) {
    if (spec.n_iterations < 1) throw std::invalid_argument("orbit: n_iterations must be >= 1");
    if (!(spec.r > 0.0)) throw std::invalid_argument("orbit: r must be > 0");

    SplitMix64 rng(spec.seed);
    double x = rng.next_double();
    double y = rng.next_double();

    std::vector<double> coords;
    coords.reserve(spec.n_iterations * 2);
    coords.push_back(x);
    coords.push_back(y);
    for (std::size_t n = 1; n < spec.n_iterations; ++n) {
        x = mod1(x + spec.r * y * (1.0 - y));  // y' below uses the updated x
        y = mod1(y + spec.r * x * (1.0 - x));
        coords.push_back(x);
        coords.push_back(y);
    }
    return PointMeasure::diracs(2, std::move(coords));
}

std::uint64_t orbit_seed(const OrbitDatasetSpec& spec, std::size_t class_index,
                         std::size_t orbit_index) {
    return derive_seed(derive_seed(derive_seed(spec.master_seed, kOrbitStream), class_index),
                       orbit_index);
}

OrbitDataset generate_dataset(const OrbitDatasetSpec& spec) {
    if (spec.parameters.empty()) throw std::invalid_argument("orbit dataset: no parameters");
    for (std::size_t i = 0; i < spec.parameters.size(); ++i) {
        for (std::size_t j = i + 1; j < spec.parameters.size(); ++j) {
            if (spec.parameters[i] == spec.parameters[j])
                throw std::invalid_argument("orbit dataset: duplicate parameter values");
        }
    }
    if (spec.orbits_per_class < 1)
        throw std::invalid_argument("orbit dataset: orbits_per_class must be >= 1");

    std::vector<PointMeasure> measures;
    std::vector<int> labels;
    std::vector<std::uint64_t> seeds;
    measures.reserve(spec.parameters.size() * spec.orbits_per_class);
    for (std::size_t c = 0; c < spec.parameters.size(); ++c) {
        for (std::size_t k = 0; k < spec.orbits_per_class; ++k) {
            std::uint64_t seed = orbit_seed(spec, c, k);
            measures.push_back(generate_orbit({spec.parameters[c], spec.n_iterations, seed}));
            labels.push_back(static_cast<int>(c));
            seeds.push_back(seed);
        }
    }
    return {MeasureCollection(std::move(measures), std::move(labels)), std::move(seeds)};
}

}  // namespace mvq
