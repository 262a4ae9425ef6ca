#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mvq/matrix.hpp"
#include "mvq/point_measure.hpp"
#include "mvq/quantizer.hpp"

namespace mvq {

enum class ContrastFamily { laplacian, gaussian };

std::string to_string(ContrastFamily family);
ContrastFamily contrast_family_from_string(const std::string& name);

// Adaptive per-center bandwidths: half the distance from each center to its
// nearest other center. Needs b >= 2 and pairwise distinct centers.
std::vector<double> compute_sigmas(std::span<const double> centers, std::size_t dim);
std::vector<double> compute_sigmas(const Codebook& codebook);

// How calibration fills the codebook bandwidths.
struct BandwidthSpec {
    enum class Kind { adaptive, constant };
    Kind kind = Kind::adaptive;
    double sigma = 0.0;  // constant mode only

    static BandwidthSpec adaptive() { return {}; }
    static BandwidthSpec constant(double sigma) { return {Kind::constant, sigma}; }
};

// A frozen codebook with strictly positive bandwidths plus a contrast
// family: the map sending a measure to its b integrated contrast values.
class VectorizationMap {
public:
    VectorizationMap(Codebook codebook, ContrastFamily family);

    const Codebook& codebook() const { return codebook_; }
    ContrastFamily family() const { return family_; }
    std::size_t budget() const { return codebook_.size(); }
    std::size_t dim() const { return codebook_.dim; }

    // exp(-||x-c_i||/sigma_i) or exp(-||x-c_i||^2/sigma_i^2); equals 1 only
    // at the center itself.
    double contrast(std::size_t i, std::span<const double> x) const;

    // Component i = sum_k w_k * contrast_i(x_k). Empty measure -> zeros.
    std::vector<double> transform(const PointMeasure& m) const;
    void transform_into(const PointMeasure& m, std::span<double> out) const;

private:
    Codebook codebook_;
    ContrastFamily family_;
};

VectorizationMap make_map_adaptive(Codebook codebook, ContrastFamily family);
VectorizationMap make_map_constant(Codebook codebook, double sigma, ContrastFamily family);

// The measure-level subsample calibrate() uses: ceil(fraction*n) indices,
// seeded, returned in ascending order.
std::vector<std::size_t> calibration_subsample(std::size_t n, double fraction,
                                               std::uint64_t seed);

// Unsupervised calibration: seeded measure-level subsample -> quantizer fit
// (cfg.mode) -> bandwidths. Labels on the collection are never read.
VectorizationMap calibrate(const MeasureCollection& collection, const QuantizerConfig& cfg,
                           ContrastFamily family, double calibration_fraction,
                           const BandwidthSpec& bandwidth = BandwidthSpec::adaptive());

std::vector<double> transform(const VectorizationMap& map, const PointMeasure& m);

// Row i = transform(measure i); row-parallel runs give bitwise-identical
// results to the sequential loop.
FeatureMatrix transform_batch(const VectorizationMap& map, const MeasureCollection& collection,
                              std::size_t threads = 1);

// One map per measure channel; the output is the concatenation of the
// per-channel vectors.
class MultiChannelMap {
public:
    explicit MultiChannelMap(std::vector<VectorizationMap> channels);

    std::size_t channel_count() const { return channels_.size(); }
    std::size_t total_budget() const;
    const VectorizationMap& channel(std::size_t i) const { return channels_[i]; }

    std::vector<double> transform_multi(const std::vector<PointMeasure>& channel_measures) const;

private:
    std::vector<VectorizationMap> channels_;
};

// Equal split of a total budget over channels, remainder going to the
// earliest channels.
std::vector<std::size_t> split_budget(std::size_t total, std::size_t channels);

// Feature CSV: header measure_id,v1,...,vb, one row per measure.
void save_features_csv(const FeatureMatrix& features, const std::string& path);

}  // namespace mvq
