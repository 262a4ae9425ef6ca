#include "mvq/quantizer.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "mvq/rng.hpp"

namespace mvq {

namespace {

constexpr std::uint64_t kInitStream = 0x11;
constexpr std::uint64_t kOrderStream = 0x22;

double sq_dist(std::span<const double> a, const double* b, std::size_t dim) {
    double acc = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
        double diff = a[i] - b[i];
        acc += diff * diff;
    }
    return acc;
}

void validate_config(const QuantizerConfig& cfg) {
    if (cfg.budget < 1) throw std::invalid_argument("quantizer: budget must be >= 1");
    if (cfg.max_iterations < 1) throw std::invalid_argument("quantizer: max_iterations must be >= 1");
    if (cfg.relative_tolerance < 0.0)
        throw std::invalid_argument("quantizer: relative_tolerance must be >= 0");
    if (cfg.minibatch_size < 1) throw std::invalid_argument("quantizer: minibatch_size must be >= 1");
}

std::vector<double> sample_initial_centers(const WeightedPoints& support, std::size_t budget,
                                           std::uint64_t seed) {
    SplitMix64 rng(derive_seed(seed, kInitStream));
    auto picked = sample_weighted_without_replacement(support.weights, budget, rng);
    std::vector<double> centers;
    centers.reserve(budget * support.dim);
    for (std::size_t idx : picked) {
        auto p = support.point(idx);
        centers.insert(centers.end(), p.begin(), p.end());
    }
    return centers;
}

// Index of the support point with the largest weighted squared distance to
// its nearest center, skipping points already claimed as reseed targets.
// Returns support.size() if every point is claimed.
std::size_t farthest_support_point(const WeightedPoints& support, std::span<const double> centers,
                                   const std::vector<bool>& claimed) {
    const std::size_t dim = support.dim;
    const std::size_t b = centers.size() / dim;
    double best = -1.0;
    std::size_t best_idx = support.size();
    for (std::size_t k = 0; k < support.size(); ++k) {
        if (claimed[k]) continue;
        auto x = support.point(k);
        double nearest = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < b; ++i) {
            double d = sq_dist(x, centers.data() + i * dim, dim);
            if (d < nearest) nearest = d;
        }
        double contribution = support.weights[k] * nearest;
        if (contribution > best) {
            best = contribution;
            best_idx = k;
        }
    }
    return best_idx;
}

// Replace exact duplicate centers (keeping the first occurrence) with
// far-out support points; Eq-style adaptive bandwidths need pairwise
// distinct centers.
void dedupe_centers(std::vector<double>& centers, std::size_t dim, const WeightedPoints& support) {
    const std::size_t b = centers.size() / dim;
    std::vector<bool> claimed(support.size(), false);
    for (std::size_t j = 1; j < b; ++j) {
        bool duplicate = true;
        while (duplicate) {
            duplicate = false;
            for (std::size_t i = 0; i < j; ++i) {
                if (std::equal(centers.begin() + i * dim, centers.begin() + (i + 1) * dim,
                               centers.begin() + j * dim)) {
                    duplicate = true;
                    break;
                }
            }
            if (duplicate) {
                std::size_t k = farthest_support_point(
                    support, std::span<const double>(centers), claimed);
                if (k == support.size()) return;  // support exhausted; cannot happen when b <= support
                claimed[k] = true;
                auto p = support.point(k);
                std::copy(p.begin(), p.end(), centers.begin() + j * dim);
            }
        }
    }
}

}  // namespace

std::size_t voronoi_assign(std::span<const double> x, std::span<const double> centers,
                           std::size_t dim) {
    if (centers.empty() || dim == 0) throw std::invalid_argument("voronoi_assign: no centers");
    if (x.size() != dim) throw std::invalid_argument("voronoi_assign: dimension mismatch");
    const std::size_t b = centers.size() / dim;
    std::size_t best = 0;
    double best_dist = sq_dist(x, centers.data(), dim);
    for (std::size_t i = 1; i < b; ++i) {
        double d = sq_dist(x, centers.data() + i * dim, dim);
        if (d < best_dist) {  // strict: ties stay with the smaller index
            best_dist = d;
            best = i;
        }
    }
    return best;
}

std::size_t voronoi_assign(std::span<const double> x, const Codebook& codebook) {
    return voronoi_assign(x, codebook.centers, codebook.dim);
}

WeightedPoints mean_measure_support(const MeasureCollection& collection) {
    PointMeasure mean = empirical_mean_support(collection).merged();
    WeightedPoints support;
    support.dim = mean.dim();
    support.coords.reserve(mean.coords().size());
    support.weights.reserve(mean.size());
    for (std::size_t k = 0; k < mean.size(); ++k) {
        if (mean.weight(k) == 0.0) continue;
        auto p = mean.point(k);
        support.coords.insert(support.coords.end(), p.begin(), p.end());
        support.weights.push_back(mean.weight(k));
    }
    return support;
}

double distortion(std::span<const double> centers, std::size_t dim, const WeightedPoints& support) {
    const std::size_t b = centers.size() / dim;
    double total = 0.0;
    for (std::size_t k = 0; k < support.size(); ++k) {
        auto x = support.point(k);
        double nearest = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < b; ++i) {
            double d = sq_dist(x, centers.data() + i * dim, dim);
            if (d < nearest) nearest = d;
        }
        total += support.weights[k] * nearest;
    }
    return total;
}

double distortion(const Codebook& codebook, const MeasureCollection& collection) {
    WeightedPoints support = mean_measure_support(collection);
    if (support.dim != codebook.dim)
        throw std::invalid_argument("distortion: dimension mismatch");
    return distortion(codebook.centers, codebook.dim, support);
}

Codebook lloyd_fit_from(const WeightedPoints& support, std::vector<double> initial_centers,
                        const QuantizerConfig& cfg, FitTrace* trace) {
    validate_config(cfg);
    const std::size_t dim = support.dim;
    const std::size_t b = initial_centers.size() / dim;
    if (b == 0 || initial_centers.size() != b * dim)
        throw std::invalid_argument("lloyd_fit_from: bad initial centers");

    std::vector<double> centers = std::move(initial_centers);
    if (trace) {
        trace->distortion_per_iteration.clear();
        trace->distortion_per_iteration.push_back(distortion(centers, dim, support));
        trace->iterations = 0;
    }

    std::vector<double> sums(b * dim);
    std::vector<double> masses(b);
    std::vector<std::size_t> assignment(support.size());

    for (std::size_t iter = 0; iter < cfg.max_iterations; ++iter) {
        std::fill(sums.begin(), sums.end(), 0.0);
        std::fill(masses.begin(), masses.end(), 0.0);
        for (std::size_t k = 0; k < support.size(); ++k) {
            auto x = support.point(k);
            std::size_t j = voronoi_assign(x, centers, dim);
            assignment[k] = j;
            double w = support.weights[k];
            masses[j] += w;
            double* s = sums.data() + j * dim;
            for (std::size_t i = 0; i < dim; ++i) s[i] += w * x[i];
        }

        std::vector<double> updated(centers);
        std::vector<std::size_t> empty_cells;
        for (std::size_t j = 0; j < b; ++j) {
            if (masses[j] > 0.0) {
                for (std::size_t i = 0; i < dim; ++i) updated[j * dim + i] = sums[j * dim + i] / masses[j];
            } else {
                empty_cells.push_back(j);
            }
        }
        // Reseed each empty cell at the support point contributing most to
        // the distortion of the already-updated codebook.
        if (!empty_cells.empty()) {
            std::vector<bool> claimed(support.size(), false);
            for (std::size_t j : empty_cells) {
                std::size_t k = farthest_support_point(support, updated, claimed);
                if (k == support.size()) break;
                claimed[k] = true;
                auto p = support.point(k);
                std::copy(p.begin(), p.end(), updated.begin() + j * dim);
            }
        }

        bool exact_equal = std::equal(centers.begin(), centers.end(), updated.begin());
        double max_move = 0.0;
        if (!exact_equal) {
            for (std::size_t j = 0; j < b; ++j) {
                double move_sq = 0.0;
                double norm_sq = 0.0;
                for (std::size_t i = 0; i < dim; ++i) {
                    double diff = updated[j * dim + i] - centers[j * dim + i];
                    move_sq += diff * diff;
                    norm_sq += centers[j * dim + i] * centers[j * dim + i];
                }
                double rel = std::sqrt(move_sq) / (1.0 + std::sqrt(norm_sq));
                if (rel > max_move) max_move = rel;
            }
        }

        centers = std::move(updated);
        if (trace) {
            trace->distortion_per_iteration.push_back(distortion(centers, dim, support));
            trace->iterations = iter + 1;
        }
        // A reseeded cell shows up as a large movement, so repairs never
        // trip the tolerance stop by accident.
        if (exact_equal || max_move <= cfg.relative_tolerance) break;
    }

    dedupe_centers(centers, dim, support);
    Codebook cb;
    cb.dim = dim;
    cb.centers = std::move(centers);
    return cb;
}

Codebook lloyd_fit(const MeasureCollection& collection, const QuantizerConfig& cfg,
                   FitTrace* trace) {
    validate_config(cfg);
    WeightedPoints support = mean_measure_support(collection);
    if (support.size() < cfg.budget) throw std::invalid_argument("budget exceeds support");
    auto init = sample_initial_centers(support, cfg.budget, cfg.seed);
    return lloyd_fit_from(support, std::move(init), cfg, trace);
}

Codebook macqueen_fit(const MeasureCollection& collection, const QuantizerConfig& cfg) {
    validate_config(cfg);
    WeightedPoints support = mean_measure_support(collection);
    if (support.size() < cfg.budget) throw std::invalid_argument("budget exceeds support");
    const std::size_t dim = support.dim;
    const std::size_t b = cfg.budget;

    std::vector<double> centers = sample_initial_centers(support, b, cfg.seed);
    std::vector<double> mass(b, 0.0);

    std::vector<std::size_t> order(collection.size());
    std::iota(order.begin(), order.end(), 0);
    SplitMix64 order_rng(derive_seed(cfg.seed, kOrderStream));
    shuffle(order, order_rng);

    // Assignments within a batch are taken against the codebook as of batch
    // start; updates then apply sequentially in stream order.
    std::vector<double> batch_coords;
    std::vector<double> batch_weights;
    std::vector<std::size_t> batch_assign;
    auto flush = [&]() {
        const std::size_t n = batch_weights.size();
        batch_assign.resize(n);
        for (std::size_t k = 0; k < n; ++k) {
            std::span<const double> x(batch_coords.data() + k * dim, dim);
            batch_assign[k] = voronoi_assign(x, centers, dim);
        }
        for (std::size_t k = 0; k < n; ++k) {
            std::size_t j = batch_assign[k];
            double w = batch_weights[k];
            double* c = centers.data() + j * dim;
            const double* x = batch_coords.data() + k * dim;
            double step = w / (mass[j] + w);
            for (std::size_t i = 0; i < dim; ++i) c[i] += step * (x[i] - c[i]);
            mass[j] += w;
        }
        batch_coords.clear();
        batch_weights.clear();
    };

    for (std::size_t idx : order) {
        const PointMeasure& m = collection[idx];
        for (std::size_t k = 0; k < m.size(); ++k) {
            double w = m.weight(k);
            if (w == 0.0) continue;  // integration-neutral atoms must not move centers
            auto x = m.point(k);
            batch_coords.insert(batch_coords.end(), x.begin(), x.end());
            batch_weights.push_back(w);
            if (batch_weights.size() == cfg.minibatch_size) flush();
        }
    }
    if (!batch_weights.empty()) flush();

    dedupe_centers(centers, dim, support);
    Codebook cb;
    cb.dim = dim;
    cb.centers = std::move(centers);
    return cb;
}

Codebook fit_codebook(const MeasureCollection& collection, const QuantizerConfig& cfg) {
    return cfg.mode == QuantizerMode::batch_lloyd ? lloyd_fit(collection, cfg)
                                                  : macqueen_fit(collection, cfg);
}

}  // namespace mvq
