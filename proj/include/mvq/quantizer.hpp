#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mvq/point_measure.hpp"

namespace mvq {

// b centers in R^d, flat row-major. sigmas stays empty until the vectorizer
// fills per-center bandwidths.
struct Codebook {
    std::size_t dim = 0;
    std::vector<double> centers;
    std::vector<double> sigmas;

    std::size_t size() const { return dim == 0 ? 0 : centers.size() / dim; }
    std::span<const double> center(std::size_t i) const { return {centers.data() + i * dim, dim}; }
    bool has_sigmas() const { return !sigmas.empty(); }
};

enum class QuantizerMode { batch_lloyd, minibatch_macqueen };

struct QuantizerConfig {
    std::size_t budget = 10;
    std::uint64_t seed = 0;
    std::size_t max_iterations = 300;
    double relative_tolerance = 1e-9;
    QuantizerMode mode = QuantizerMode::batch_lloyd;
    std::size_t minibatch_size = 1024;  // atoms per minibatch in macqueen mode
};

// Index of the cell containing x: nearest center, ties broken toward the
// smallest index. Deterministic.
std::size_t voronoi_assign(std::span<const double> x, std::span<const double> centers,
                           std::size_t dim);
std::size_t voronoi_assign(std::span<const double> x, const Codebook& codebook);

// The mean measure with coordinate-duplicate atoms merged and zero-weight
// atoms dropped: the distinct support the fitters and oracles work on.
struct WeightedPoints {
    std::size_t dim = 0;
    std::vector<double> coords;
    std::vector<double> weights;

    std::size_t size() const { return weights.size(); }
    std::span<const double> point(std::size_t k) const { return {coords.data() + k * dim, dim}; }
};
WeightedPoints mean_measure_support(const MeasureCollection& collection);

// Per-iteration record of a Lloyd run; distortion is non-increasing.
struct FitTrace {
    std::vector<double> distortion_per_iteration;
    std::size_t iterations = 0;
};

// Batch Lloyd iteration on the empirical mean measure. Initial centers are
// a weight-proportional sample of the support without replacement; empty
// cells are reseeded at the support point with the largest weighted squared
// distance to its assigned center. Stops on an exactly unchanged codebook,
// on relative center movement <= relative_tolerance, or at max_iterations.
Codebook lloyd_fit(const MeasureCollection& collection, const QuantizerConfig& cfg,
                   FitTrace* trace = nullptr);

// Lloyd from caller-supplied initial centers (multi-start runs, oracles).
Codebook lloyd_fit_from(const WeightedPoints& support, std::vector<double> initial_centers,
                        const QuantizerConfig& cfg, FitTrace* trace = nullptr);

// Single pass over the measures in a seeded random order, atoms grouped
// into minibatches. Assignments within one batch are taken against the
// codebook frozen at batch start; updates move each center by
// w/(n+w) toward the atom, with mass counters n starting at zero.
Codebook macqueen_fit(const MeasureCollection& collection, const QuantizerConfig& cfg);

// Dispatch on cfg.mode.
Codebook fit_codebook(const MeasureCollection& collection, const QuantizerConfig& cfg);

// k-means objective of the codebook against the empirical mean measure:
// integral of min_i ||x - c_i||^2.
double distortion(const Codebook& codebook, const MeasureCollection& collection);
double distortion(std::span<const double> centers, std::size_t dim, const WeightedPoints& support);

}  // namespace mvq
