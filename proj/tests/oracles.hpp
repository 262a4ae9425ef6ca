#pragma once

// Test-only reference implementations, independent of the library code
// paths they check.

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "mvq/quantizer.hpp"
#include "mvq/rng.hpp"

namespace mvq::testing {

// Nearest center by linear scan with explicit smallest-index tie-break on
// exact distance equality.
inline std::size_t naive_nearest(std::span<const double> x, std::span<const double> centers,
                                 std::size_t dim) {
    const std::size_t b = centers.size() / dim;
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_idx = 0;
    for (std::size_t i = 0; i < b; ++i) {
        double sq = 0.0;
        for (std::size_t k = 0; k < dim; ++k) {
            double diff = x[k] - centers[i * dim + k];
            sq += diff * diff;
        }
        if (sq < best) {
            best = sq;
            best_idx = i;
        }
    }
    return best_idx;
}

// Globally optimal k-means cost on a small weighted point set: enumerate
// every assignment of points to at most b cells, score each partition by
// its within-cell weighted squared deviation from the cell centroid.
inline double brute_force_optimal_distortion(const WeightedPoints& support, std::size_t b) {
    const std::size_t n = support.size();
    const std::size_t dim = support.dim;
    std::size_t combos = 1;
    for (std::size_t i = 0; i < n; ++i) combos *= b;

    double best = std::numeric_limits<double>::infinity();
    std::vector<double> sums(b * dim);
    std::vector<double> masses(b);
    std::vector<std::size_t> assign(n);
    for (std::size_t code = 0; code < combos; ++code) {
        std::size_t c = code;
        for (std::size_t i = 0; i < n; ++i) {
            assign[i] = c % b;
            c /= b;
        }
        std::fill(sums.begin(), sums.end(), 0.0);
        std::fill(masses.begin(), masses.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double w = support.weights[i];
            masses[assign[i]] += w;
            for (std::size_t k = 0; k < dim; ++k)
                sums[assign[i] * dim + k] += w * support.coords[i * dim + k];
        }
        double cost = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t j = assign[i];
            double sq = 0.0;
            for (std::size_t k = 0; k < dim; ++k) {
                double centroid = sums[j * dim + k] / masses[j];
                double diff = support.coords[i * dim + k] - centroid;
                sq += diff * diff;
            }
            cost += support.weights[i] * sq;
        }
        if (cost < best) best = cost;
    }
    return best;
}

// Best distortion reachable by Lloyd when started from every b-subset of
// the support points.
inline double multistart_lloyd_distortion(const WeightedPoints& support, std::size_t b,
                                          const QuantizerConfig& cfg) {
    const std::size_t n = support.size();
    std::vector<std::size_t> pick(b);
    double best = std::numeric_limits<double>::infinity();
    // Enumerate b-subsets via odometer.
    for (std::size_t i = 0; i < b; ++i) pick[i] = i;
    while (true) {
        std::vector<double> init;
        for (std::size_t i : pick) {
            auto p = support.point(i);
            init.insert(init.end(), p.begin(), p.end());
        }
        Codebook cb = lloyd_fit_from(support, std::move(init), cfg);
        double d = distortion(cb.centers, cb.dim, support);
        if (d < best) best = d;

        std::size_t k = b;
        while (k > 0 && pick[k - 1] == n - b + k - 1) --k;
        if (k == 0) break;
        ++pick[k - 1];
        for (std::size_t i = k; i < b; ++i) pick[i] = pick[i - 1] + 1;
    }
    return best;
}

// Random small instance: up to max_points distinct support points in
// [-1,1]^dim with weights in [0.25, 2).
inline WeightedPoints random_small_support(std::uint64_t seed, std::size_t dim,
                                           std::size_t n_points) {
    SplitMix64 rng(seed);
    WeightedPoints support;
    support.dim = dim;
    for (std::size_t i = 0; i < n_points; ++i) {
        for (std::size_t k = 0; k < dim; ++k)
            support.coords.push_back(rng.next_in(-1.0, 1.0));
        support.weights.push_back(rng.next_in(0.25, 2.0));
    }
    return support;
}

}  // namespace mvq::testing
