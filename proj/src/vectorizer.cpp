#include "mvq/vectorizer.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "mvq/measure_io.hpp"
#include "mvq/parallel.hpp"
#include "mvq/rng.hpp"

namespace mvq {

namespace {
constexpr std::uint64_t kSubsampleStream = 0x33;
}

std::string to_string(ContrastFamily family) {
    return family == ContrastFamily::laplacian ? "laplacian" : "gaussian";
}

ContrastFamily contrast_family_from_string(const std::string& name) {
    if (name == "laplacian") return ContrastFamily::laplacian;
    if (name == "gaussian") return ContrastFamily::gaussian;
    throw std::invalid_argument("unknown contrast family: '" + name + "'");
}

std::vector<double> compute_sigmas(std::span<const double> centers, std::size_t dim) {
    const std::size_t b = dim == 0 ? 0 : centers.size() / dim;
    if (b < 2) throw std::invalid_argument("adaptive bandwidth undefined for b=1");
    std::vector<double> sigmas(b);
    for (std::size_t i = 0; i < b; ++i) {
        double nearest_sq = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < b; ++j) {
            if (j == i) continue;
            double d = 0.0;
            for (std::size_t k = 0; k < dim; ++k) {
                double diff = centers[i * dim + k] - centers[j * dim + k];
                d += diff * diff;
            }
            if (d < nearest_sq) nearest_sq = d;
        }
        if (nearest_sq == 0.0) throw std::invalid_argument("duplicate centers");
        sigmas[i] = std::sqrt(nearest_sq) / 2.0;
    }
    return sigmas;
}

std::vector<double> compute_sigmas(const Codebook& codebook) {
    return compute_sigmas(codebook.centers, codebook.dim);
}

VectorizationMap::VectorizationMap(Codebook codebook, ContrastFamily family)
    : codebook_(std::move(codebook)), family_(family) {
    if (codebook_.size() == 0) throw std::invalid_argument("VectorizationMap: empty codebook");
    if (codebook_.sigmas.size() != codebook_.size())
        throw std::invalid_argument("VectorizationMap: sigmas not set");
    for (double s : codebook_.sigmas) {
        if (!(s > 0.0)) throw std::invalid_argument("VectorizationMap: sigmas must be positive");
    }
}

double VectorizationMap::contrast(std::size_t i, std::span<const double> x) const {
    if (x.size() != codebook_.dim)
        throw std::invalid_argument("contrast: dimension mismatch");
    const double* c = codebook_.centers.data() + i * codebook_.dim;
    double sq = 0.0;
    for (std::size_t k = 0; k < codebook_.dim; ++k) {
        double diff = x[k] - c[k];
        sq += diff * diff;
    }
    double sigma = codebook_.sigmas[i];
    if (family_ == ContrastFamily::laplacian) return std::exp(-std::sqrt(sq) / sigma);
    return std::exp(-sq / (sigma * sigma));
}

void VectorizationMap::transform_into(const PointMeasure& m, std::span<double> out) const {
    if (m.dim() != codebook_.dim)
        throw std::invalid_argument("transform: dimension mismatch");
    const std::size_t b = codebook_.size();
    const std::size_t dim = codebook_.dim;
    std::fill(out.begin(), out.end(), 0.0);
    const bool laplacian = family_ == ContrastFamily::laplacian;
    for (std::size_t k = 0; k < m.size(); ++k) {
        const double w = m.weight(k);
        auto x = m.point(k);
        for (std::size_t i = 0; i < b; ++i) {
            const double* c = codebook_.centers.data() + i * dim;
            double sq = 0.0;
            for (std::size_t t = 0; t < dim; ++t) {
                double diff = x[t] - c[t];
                sq += diff * diff;
            }
            double sigma = codebook_.sigmas[i];
            double v = laplacian ? std::exp(-std::sqrt(sq) / sigma)
                                 : std::exp(-sq / (sigma * sigma));
            out[i] += w * v;
        }
    }
}

std::vector<double> VectorizationMap::transform(const PointMeasure& m) const {
    std::vector<double> out(codebook_.size());
    transform_into(m, out);
    return out;
}

VectorizationMap make_map_adaptive(Codebook codebook, ContrastFamily family) {
    codebook.sigmas = compute_sigmas(codebook);
    return {std::move(codebook), family};
}

VectorizationMap make_map_constant(Codebook codebook, double sigma, ContrastFamily family) {
    if (!(sigma > 0.0)) throw std::invalid_argument("constant bandwidth must be positive");
    codebook.sigmas.assign(codebook.size(), sigma);
    return {std::move(codebook), family};
}

std::vector<std::size_t> calibration_subsample(std::size_t n, double fraction,
                                               std::uint64_t seed) {
    if (!(fraction > 0.0) || fraction > 1.0)
        throw std::invalid_argument("calibration fraction must be in (0,1]");
    if (n == 0) throw std::invalid_argument("empty collection");
    auto m = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n)));
    if (m < 1) m = 1;
    if (m > n) m = n;
    std::vector<std::size_t> indices(n);
    std::iota(indices.begin(), indices.end(), 0);
    SplitMix64 rng(derive_seed(seed, kSubsampleStream));
    shuffle(indices, rng);
    indices.resize(m);
    std::sort(indices.begin(), indices.end());
    return indices;
}

VectorizationMap calibrate(const MeasureCollection& collection, const QuantizerConfig& cfg,
                           ContrastFamily family, double calibration_fraction,
                           const BandwidthSpec& bandwidth) {
    auto indices = calibration_subsample(collection.size(), calibration_fraction, cfg.seed);
    MeasureCollection sample = collection.without_labels().subset(indices);
    Codebook codebook = fit_codebook(sample, cfg);
    if (bandwidth.kind == BandwidthSpec::Kind::constant)
        return make_map_constant(std::move(codebook), bandwidth.sigma, family);
    return make_map_adaptive(std::move(codebook), family);
}

std::vector<double> transform(const VectorizationMap& map, const PointMeasure& m) {
    return map.transform(m);
}

FeatureMatrix transform_batch(const VectorizationMap& map, const MeasureCollection& collection,
                              std::size_t threads) {
    FeatureMatrix features(collection.size(), map.budget());
    parallel_for(collection.size(), threads,
                 [&](std::size_t i) { map.transform_into(collection[i], features.row(i)); });
    return features;
}

MultiChannelMap::MultiChannelMap(std::vector<VectorizationMap> channels)
    : channels_(std::move(channels)) {
    if (channels_.empty()) throw std::invalid_argument("MultiChannelMap: no channels");
}

std::size_t MultiChannelMap::total_budget() const {
    std::size_t total = 0;
    for (const auto& ch : channels_) total += ch.budget();
    return total;
}

std::vector<double> MultiChannelMap::transform_multi(
    const std::vector<PointMeasure>& channel_measures) const {
    if (channel_measures.size() != channels_.size())
        throw std::invalid_argument("transform_multi: channel count mismatch");
    std::vector<double> out;
    out.reserve(total_budget());
    for (std::size_t c = 0; c < channels_.size(); ++c) {
        auto block = channels_[c].transform(channel_measures[c]);
        out.insert(out.end(), block.begin(), block.end());
    }
    return out;
}

std::vector<std::size_t> split_budget(std::size_t total, std::size_t channels) {
    if (channels == 0) throw std::invalid_argument("split_budget: no channels");
    if (total < channels) throw std::invalid_argument("split_budget: budget below channel count");
    std::vector<std::size_t> budgets(channels, total / channels);
    for (std::size_t i = 0; i < total % channels; ++i) ++budgets[i];
    return budgets;
}

void save_features_csv(const FeatureMatrix& features, const std::string& path) {
    std::ostringstream out;
    out << "measure_id";
    for (std::size_t j = 1; j <= features.cols; ++j) out << ",v" << j;
    out << "\n";
    for (std::size_t r = 0; r < features.rows; ++r) {
        out << r;
        for (double v : features.row(r)) out << ',' << format_double(v);
        out << "\n";
    }
    atomic_write_file(path, out.str());
}

}  // namespace mvq
